//! Finite-`N` checks of the Toeplitz symbol calculus: products, parametrices,
//! functions of self-adjoint quantizations, traces and the norm bound.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{liouville_quadrature, make_phase_space, QuadratureGrid, SymbolSpec};
use crate::linalg::{self, CMatrix};
use crate::quantize::quantize;
use crate::stats::{linear_fit, LinearFit};

/// Residual against `N`, with a power-law fit `residual ≈ C N^exponent`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualCurve {
    pub n_list: Vec<usize>,
    pub residuals: Vec<f64>,
    /// Fit of `log residual` on `log N` over strictly positive residuals.
    pub fit: Option<LinearFit>,
}

impl ResidualCurve {
    fn new(n_list: &[usize], residuals: Vec<f64>) -> Self {
        let (x, y): (Vec<f64>, Vec<f64>) = n_list
            .iter()
            .zip(&residuals)
            .filter(|(_, r)| **r > 0.0)
            .map(|(n, r)| ((*n as f64).ln(), r.ln()))
            .unzip();
        let fit = if x.len() >= 2 { Some(linear_fit(&x, &y)) } else { None };
        Self { n_list: n_list.to_vec(), residuals, fit }
    }

    pub fn exponent(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }

    /// Two-standard-error band around the exponent.
    pub fn exponent_band(&self) -> Option<(f64, f64)> {
        self.fit.map(|f| (f.slope - 2.0 * f.slope_stderr, f.slope + 2.0 * f.slope_stderr))
    }

    pub fn at(&self, n: usize) -> Option<f64> {
        self.n_list.iter().position(|m| *m == n).map(|i| self.residuals[i])
    }

    /// `residual(2N) / residual(N)` for every `N` whose double is also present.
    pub fn halving_ratios(&self) -> Vec<(usize, f64)> {
        self.n_list
            .iter()
            .filter_map(|&n| Some((n, self.at(2 * n)? / self.at(n)?)))
            .collect()
    }

    pub fn rows(&self) -> Vec<CurveRow> {
        self.n_list.iter().zip(&self.residuals).map(|(&n, &residual)| CurveRow { n, residual }).collect()
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        crate::fsutil::write_csv(path, &self.rows())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub residual: f64,
}

fn curve(n_list: &[usize], each: impl Fn(usize) -> Result<f64> + Sync) -> Result<ResidualCurve> {
    let residuals = n_list.par_iter().map(|&n| each(n)).collect::<Result<Vec<_>>>()?;
    Ok(ResidualCurve::new(n_list, residuals))
}

/// `‖T_N f T_N g - T_N(fg)‖`.
pub fn composition_residual(f: &SymbolSpec, g: &SymbolSpec, n_list: &[usize]) -> Result<ResidualCurve> {
    let fg = f.try_mul(g)?;
    curve(n_list, |n| {
        let a = quantize(f, n)?.entries;
        let b = quantize(g, n)?.entries;
        let ab = quantize(&fg, n)?.entries;
        linalg::operator_norm(&(&(&a * &b) - &ab))
    })
}

/// A polynomial `Σ coeffs[k] s^k` approximating a scalar function on `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialSurrogate {
    pub coeffs: Vec<f64>,
    /// Sup error on `[-1, 1]`, measured on a fine grid.
    pub sup_error: f64,
}

impl PolynomialSurrogate {
    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }
}

/// Interpolant of `func` at the `degree + 1` Chebyshev points of `[-1, 1]`,
/// returned in the monomial basis.
pub fn chebyshev_surrogate(func: impl Fn(f64) -> f64, degree: usize) -> PolynomialSurrogate {
    let m = degree + 1;
    let nodes: Vec<f64> = (0..m).map(|j| (std::f64::consts::PI * (j as f64 + 0.5) / m as f64).cos()).collect();
    let values: Vec<f64> = nodes.iter().map(|x| func(*x)).collect();
    // Monomial coefficients of T_k via T_{k+1} = 2s T_k - T_{k-1}.
    let mut t_prev = vec![0.0; m];
    let mut t_cur = vec![0.0; m];
    t_prev[0] = 1.0;
    if m > 1 {
        t_cur[1] = 1.0;
    }
    let mut coeffs = vec![0.0; m];
    for k in 0..m {
        let tk = if k == 0 { t_prev.clone() } else { t_cur.clone() };
        let ck = 2.0 / m as f64
            * nodes.iter().zip(&values).map(|(x, v)| v * (k as f64 * x.acos()).cos()).sum::<f64>()
            * if k == 0 { 0.5 } else { 1.0 };
        for (c, t) in coeffs.iter_mut().zip(&tk) {
            *c += ck * t;
        }
        if k >= 1 {
            let mut next = vec![0.0; m];
            for i in 0..m {
                if i + 1 < m {
                    next[i + 1] += 2.0 * t_cur[i];
                }
                next[i] -= t_prev[i];
            }
            t_prev = std::mem::replace(&mut t_cur, next);
        }
    }
    let mut p = PolynomialSurrogate { coeffs, sup_error: 0.0 };
    p.sup_error = (0..=4000).map(|i| -1.0 + i as f64 / 2000.0).map(|s| (p.eval(s) - func(s)).abs()).fold(0.0, f64::max);
    p
}

/// Minimum of the real part of `f_0` on a grid, and whether `f_0` is real there.
fn real_minimum(f: &SymbolSpec, grid: &QuadratureGrid) -> Result<(f64, bool)> {
    let mut min = f64::INFINITY;
    let mut real = true;
    for p in &grid.points {
        let v = f.eval_principal(p)?;
        real &= v.im.abs() <= 1e-12 * (1.0 + v.re.abs());
        min = min.min(v.re);
    }
    Ok((min, real))
}

/// Parametrix residuals for an elliptic `f` and a supplied approximate inverse
/// symbol `g ≈ 1/f_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParametrixReport {
    /// `‖T_N f T_N g - I‖`.
    pub residual: ResidualCurve,
    /// `‖(T_N f)^{-1} - T_N g‖`.
    pub inverse_gap: ResidualCurve,
}

pub fn parametrix_residual(f: &SymbolSpec, g: &SymbolSpec, n_list: &[usize]) -> Result<ParametrixReport> {
    let space = make_phase_space(f.kind());
    let (min, real) = real_minimum(f, &liouville_quadrature(&space, 64))?;
    if !real || !f.is_real() || min <= 0.0 {
        return Err(Error::NotElliptic(f.to_record().lines().skip(1).collect::<Vec<_>>().join("; ")));
    }
    let mats = n_list
        .par_iter()
        .map(|&n| Ok((quantize(f, n)?.entries, quantize(g, n)?.entries)))
        .collect::<Result<Vec<(CMatrix, CMatrix)>>>()?;
    let mut residual = Vec::new();
    let mut gap = Vec::new();
    for (a, b) in &mats {
        let id = linalg::identity(a.nrows());
        residual.push(linalg::operator_norm(&(&(a * b) - &id))?);
        gap.push(linalg::operator_norm(&(&linalg::inverse(a) - b))?);
    }
    Ok(ParametrixReport { residual: ResidualCurve::new(n_list, residual), inverse_gap: ResidualCurve::new(n_list, gap) })
}

/// `‖χ(T_N f) - T_N(p ∘ f)‖` where `p` is a polynomial surrogate for `χ` on the
/// range of `f` (assumed inside `[-1, 1]`).
pub fn functional_calculus_residual(
    f: &SymbolSpec,
    chi: impl Fn(f64) -> f64 + Sync,
    surrogate: &PolynomialSurrogate,
    n_list: &[usize],
) -> Result<ResidualCurve> {
    let g = f.compose_polynomial(&surrogate.coeffs);
    curve(n_list, |n| {
        let t = quantize(f, n)?.entries;
        let defect = linalg::hermitian_defect(&t);
        if defect > 1e-12 {
            return Err(Error::NotHermitian(defect));
        }
        let lhs = linalg::hermitian_function(&t, &chi)?;
        linalg::operator_norm(&(&lhs - &quantize(&g, n)?.entries))
    })
}

/// `|Tr T_N f - (N/2π)^d ∫ f dμ|`, using the full symbol at each `N`.
pub fn trace_residual(f: &SymbolSpec, n_list: &[usize], grid: &QuadratureGrid) -> Result<ResidualCurve> {
    if grid.kind != f.kind() {
        return Err(Error::KindMismatch { expected: grid.kind.name() });
    }
    let space = make_phase_space(f.kind());
    curve(n_list, |n| {
        let t = quantize(f, n)?;
        let integral = grid.integrate_symbol(&f.at_n(n))?;
        let weyl = integral * (space.weyl_dimension(n) / space.volume);
        Ok((linalg::trace(&t.entries) - weyl).norm())
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub norm: f64,
    pub sup: f64,
}

impl NormRow {
    /// `‖T_N f‖ <= sup|f|`, with the sampled supremum allowed relative slack
    /// `1e-3` for the grid and absolute `1e-8` for rounding.
    pub fn holds(&self) -> bool {
        self.norm <= self.sup * (1.0 + 1e-3) + 1e-8
    }
}

/// Operator norm against `sup|f|` sampled on a dense quadrature grid.
pub fn norm_bound_check(f: &SymbolSpec, n_list: &[usize]) -> Result<Vec<NormRow>> {
    let grid = liouville_quadrature(&make_phase_space(f.kind()), 400);
    let mut sup: f64 = 0.0;
    for p in &grid.points {
        sup = sup.max(f.eval_principal(p)?.norm());
    }
    n_list
        .par_iter()
        .map(|&n| Ok(NormRow { n, norm: linalg::operator_norm(&quantize(f, n)?.entries)?, sup }))
        .collect()
}

/// `s ↦ s` as a surrogate, for the trivial functional-calculus case.
pub fn identity_surrogate() -> PolynomialSurrogate {
    PolynomialSurrogate { coeffs: vec![0.0, 1.0], sup_error: 0.0 }
}

/// `x3 + shift` on the sphere.
pub fn height_plus(shift: f64) -> SymbolSpec {
    SymbolSpec::sphere_height().try_add(&SymbolSpec::constant(crate::SpaceKind::Sphere, Complex64::new(shift, 0.0))).unwrap()
}
