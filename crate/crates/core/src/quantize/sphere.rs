use std::collections::BTreeMap;

use num_complex::Complex64;

use super::ToeplitzMatrix;
use crate::error::{Error, Result};
use crate::geometry::{liouville_quadrature, ManifoldPoint, Monomial, PhaseSpace, SymbolSpec};
use crate::linalg::{self, CMatrix};

/// `ln B(a, b)`.
fn ln_beta(a: f64, b: f64) -> f64 {
    libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `z^p zbar^q (1+|z|^2)^-(p+q) x3^c`, the building block of a monomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Term {
    p: u32,
    q: u32,
    c: u32,
}

/// Rewrite `x1^a x2^b x3^c` using `x1 + i x2 = 2z/(1+|z|^2)`. The powers of two
/// from that substitution cancel the ones from `x1 = (w + wbar)/2`,
/// `x2 = (w - wbar)/2i`.
fn expand_monomial(mono: Monomial, coeff: Complex64, out: &mut BTreeMap<Term, Complex64>) {
    let i_pow = |e: u32| match e % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, 1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, -1.0),
    };
    // x2^b = (2i)^-b Σ C(b,j) w^j (-wbar)^(b-j); (1/i)^b = (-i)^b = i^(3b).
    let x2_phase = i_pow(3 * mono.b);
    for i in 0..=mono.a {
        for j in 0..=mono.b {
            let sign = if (mono.b - j).is_multiple_of(2) { 1.0 } else { -1.0 };
            let w = binomial(mono.a, i) * binomial(mono.b, j) * sign;
            let t = Term { p: i + j, q: mono.a - i + mono.b - j, c: mono.c };
            *out.entry(t).or_insert(Complex64::new(0.0, 0.0)) += coeff * x2_phase * w;
        }
    }
}

/// `T_N f` on the sphere, evaluated exactly. With `u = |z|^2` every matrix
/// element reduces to `∫_0^∞ u^a (1+u)^-M du = B(a+1, M-a-1)`.
pub fn quantize_sphere(f: &SymbolSpec, n: usize) -> Result<ToeplitzMatrix> {
    let SymbolSpec::Sphere(sym) = f else {
        return Err(Error::KindMismatch { expected: "sphere" });
    };
    if n == 0 {
        return Err(Error::invalid("N must be positive"));
    }
    let flat = sym.at_n(n);
    let degree = flat.degree();
    if degree as usize > n / 2 {
        return Err(Error::DegreeTooLarge { degree, limit: n / 2, n });
    }
    let mut terms = BTreeMap::new();
    for (mono, c) in flat.principal_terms() {
        expand_monomial(*mono, *c, &mut terms);
    }

    let dim = n + 1;
    let nf = n as f64;
    let ln_norm: Vec<f64> = (0..dim).map(|k| ln_beta(k as f64 + 1.0, nf + 1.0 - k as f64)).collect();
    let mut entries = linalg::zeros(dim, dim);
    for (t, coeff) in &terms {
        if coeff.norm() == 0.0 {
            continue;
        }
        let m = nf + (t.p + t.q + t.c) as f64 + 2.0;
        for k in 0..dim {
            let l = k as i64 + t.p as i64 - t.q as i64;
            if l < 0 || l >= dim as i64 {
                continue;
            }
            let l = l as usize;
            let scale = 0.5 * (ln_norm[k] + ln_norm[l]);
            // (1-u)^c = Σ_j C(c,j) (-u)^j.
            let mut acc = 0.0;
            for j in 0..=t.c {
                let a = (k as u32 + t.p + j) as f64;
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * binomial(t.c, j) * (ln_beta(a + 1.0, m - a - 1.0) - scale).exp();
            }
            entries[(l, k)] += coeff * acc;
        }
    }
    Ok(ToeplitzMatrix { space: PhaseSpace::sphere(), n, dim, entries, symbol: f.clone() })
}

/// Reference implementation integrating `<f s_k, s_l>` on a product
/// Gauss-Legendre grid. Exact (up to rounding) once `resolution > N + deg f`.
pub fn quantize_sphere_by_quadrature(f: &SymbolSpec, n: usize, resolution: usize) -> Result<CMatrix> {
    if !matches!(f, SymbolSpec::Sphere(_)) {
        return Err(Error::KindMismatch { expected: "sphere" });
    }
    let grid = liouville_quadrature(&PhaseSpace::sphere(), resolution);
    let dim = n + 1;
    let nodes = grid.len();
    // In polar angle θ from the north pole, s_k h^{N/2} = sin^k(θ/2) cos^{N-k}(θ/2) e^{ikφ}.
    let mut v = linalg::zeros(nodes, dim);
    let mut wv = linalg::zeros(nodes, dim);
    for (i, (p, w)) in grid.points.iter().zip(&grid.weights).enumerate() {
        let ManifoldPoint::Sphere(x) = p else { unreachable!() };
        let s = ((1.0 - x[2]) / 2.0).max(0.0).sqrt();
        let c = ((1.0 + x[2]) / 2.0).max(0.0).sqrt();
        let phi = x[1].atan2(x[0]);
        let fx = f.eval(p, n)?;
        for k in 0..dim {
            let val = Complex64::from_polar(s.powi(k as i32) * c.powi((n - k) as i32), k as f64 * phi);
            v[(i, k)] = val;
            wv[(i, k)] = val * fx * *w;
        }
    }
    let gram = &linalg::adjoint(&v) * &wv;
    let norms: Vec<f64> = (0..dim)
        .map(|k| (0..nodes).map(|i| v[(i, k)].norm_sqr() * grid.weights[i]).sum::<f64>().sqrt())
        .collect();
    Ok(CMatrix::from_fn(dim, dim, |l, k| gram[(l, k)] / (norms[l] * norms[k])))
}
