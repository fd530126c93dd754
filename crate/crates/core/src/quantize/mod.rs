//! Berezin-Toeplitz matrices `T_N f` in fixed orthonormal bases.
//!
//! Torus: the position basis `e_1, ..., e_N` of the clock-and-shift
//! representation, with
//! `T_N(e^{2πi(m x + n ξ)}) = e^{-πimn/N} D^m S^n`,
//! `D = diag(e^{2πik/N})_{k=1..N}` and `S e_k = e_{k+1 mod N}`.
//!
//! Sphere: the normalized monomial sections `s_k = z^k`, `k = 0..N`, in the
//! stereographic chart `z = (x1 + i x2) / (1 + x3)` (`z = 0` at the north pole), with
//! hermitian metric `(1 + |z|^2)^-N`.

mod file;
mod sphere;

pub use file::{decode_matrix, encode_matrix, read_matrix, write_matrix, MATRIX_MAGIC, MATRIX_VERSION};
pub use sphere::{quantize_sphere, quantize_sphere_by_quadrature};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{FourierMode, PhaseSpace, SpaceKind, Symbol, SymbolSpec};
use crate::linalg::{self, CMatrix};

/// `dim H^0(X, L^N)`: `N + 1` on the sphere, `N` on the torus.
pub fn bergman_dimension(space: &PhaseSpace, n: usize) -> usize {
    match space.kind {
        SpaceKind::Sphere => n + 1,
        SpaceKind::Torus => n,
    }
}

/// A quantized symbol together with the data it was built from.
#[derive(Clone, Debug)]
pub struct ToeplitzMatrix {
    pub space: PhaseSpace,
    pub n: usize,
    pub dim: usize,
    pub entries: CMatrix,
    pub symbol: SymbolSpec,
}

impl ToeplitzMatrix {
    /// Short identifier used in error messages and manifests.
    pub fn id(&self) -> String {
        format!("{}-N{}", self.space.kind, self.n)
    }
}

/// Quantize on the phase space matching the symbol's kind.
pub fn quantize(f: &SymbolSpec, n: usize) -> Result<ToeplitzMatrix> {
    match f.kind() {
        SpaceKind::Torus => quantize_torus(f, n),
        SpaceKind::Sphere => quantize_sphere(f, n),
    }
}

pub fn quantize_torus(f: &SymbolSpec, n: usize) -> Result<ToeplitzMatrix> {
    let SymbolSpec::Torus(sym) = f else {
        return Err(Error::KindMismatch { expected: "torus" });
    };
    if n == 0 {
        return Err(Error::invalid("N must be positive"));
    }
    let flat = sym.at_n(n);
    let terms = flat.principal_terms();
    for mode in terms.keys() {
        let max = mode.m.abs().max(mode.n.abs());
        if n as i64 <= 2 * max as i64 {
            return Err(Error::ModeTooLarge { n, m: mode.m, k: mode.n, max });
        }
    }
    let mut entries = linalg::zeros(n, n);
    for (mode, c) in terms {
        add_torus_mode(&mut entries, *mode, *c);
    }
    Ok(ToeplitzMatrix { space: PhaseSpace::torus(), n, dim: n, entries, symbol: f.clone() })
}

/// `entries += c · e^{-πimn/N} D^m S^n`.
fn add_torus_mode(entries: &mut CMatrix, mode: FourierMode, c: Complex64) {
    let size = entries.nrows();
    let nf = size as f64;
    let (m, s) = (mode.m as i64, mode.n as i64);
    let phase = Complex64::from_polar(1.0, -std::f64::consts::PI * (m * s) as f64 / nf);
    for col in 0..size {
        let row = (col as i64 + s).rem_euclid(size as i64) as usize;
        // Row `row` carries basis label k = row + 1.
        let k = (row as i64 + 1) * m;
        let clock = Complex64::from_polar(1.0, std::f64::consts::TAU * k.rem_euclid(size as i64) as f64 / nf);
        entries[(row, col)] += c * phase * clock;
    }
}

/// `T_N f` for a torus symbol given by its modes, without provenance.
pub fn torus_matrix(terms: &Symbol<FourierMode>, n: usize) -> Result<CMatrix> {
    quantize_torus(&SymbolSpec::Torus(terms.clone()), n).map(|t| t.entries)
}

#[cfg(test)]
mod tests;
