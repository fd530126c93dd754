//! Thin wrappers over the dense complex kernels in `faer`.

use faer::linalg::solvers::DenseSolveCore;
use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense, column-major complex matrix.
pub type CMatrix = Mat<Complex64>;

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    Mat::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMatrix {
    Mat::identity(n, n)
}

pub fn from_row_major(n: usize, entries: &[Complex64]) -> CMatrix {
    assert_eq!(entries.len(), n * n);
    Mat::from_fn(n, n, |i, j| entries[i * n + j])
}

pub fn adjoint(m: &CMatrix) -> CMatrix {
    m.adjoint().to_owned()
}

/// `m - z I`.
pub fn shift(m: &CMatrix, z: Complex64) -> CMatrix {
    let mut out = m.clone();
    for i in 0..m.nrows().min(m.ncols()) {
        out[(i, i)] -= z;
    }
    out
}

/// `a + s * b`.
pub fn add_scaled(a: &CMatrix, s: f64, b: &CMatrix) -> CMatrix {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] + b[(i, j)] * s)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

/// Largest entrywise `|m_ij - conj(m_ji)|`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: &CMatrix) -> Complex64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Singular values in nonincreasing order.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    let s = m
        .singular_values()
        .map_err(|_| Error::NoConvergence(format!("{}x{} svd", m.nrows(), m.ncols())))?;
    Ok(s)
}

/// Full SVD `m = U diag(s) V*` with `s` nonincreasing.
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

pub fn svd(m: &CMatrix) -> Result<Svd> {
    let d = m
        .svd()
        .map_err(|_| Error::NoConvergence(format!("{}x{} svd", m.nrows(), m.ncols())))?;
    let s = d.S().column_vector().iter().map(|x| x.re).collect();
    Ok(Svd { u: d.U().to_owned(), s, v: d.V().to_owned() })
}

/// Spectral norm; zero for empty matrices.
pub fn operator_norm(m: &CMatrix) -> Result<f64> {
    Ok(singular_values(m)?.first().copied().unwrap_or(0.0))
}

/// Eigenvalues of a general square matrix (complex Schur form).
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    m.eigenvalues()
        .map_err(|_| Error::NoConvergence(format!("{}x{} eigenvalue problem", m.nrows(), m.ncols())))
}

/// Eigenvalues (nondecreasing) and orthonormal eigenvectors of a Hermitian matrix.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let e = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::NoConvergence(format!("{}x{} hermitian eigenproblem", m.nrows(), m.ncols())))?;
    let vals = e.S().column_vector().iter().map(|x| x.re).collect();
    Ok((vals, e.U().to_owned()))
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    m.self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::NoConvergence(format!("{}x{} hermitian eigenproblem", m.nrows(), m.ncols())))
}

/// `sum log|u_ii|` over the partially pivoted LU factor; `-inf` on a zero pivot.
pub fn lu_log_abs_det(m: &CMatrix) -> f64 {
    assert_eq!(m.nrows(), m.ncols(), "log|det| of a non-square matrix");
    let n = m.nrows();
    if n == 0 {
        return 0.0;
    }
    let lu = m.partial_piv_lu();
    let u = lu.U();
    let mut acc = 0.0;
    for i in 0..n {
        let p = u[(i, i)].norm();
        if p == 0.0 || !p.is_finite() {
            return if p == 0.0 { f64::NEG_INFINITY } else { f64::NAN };
        }
        acc += p.ln();
    }
    acc
}

/// Inverse through partial-pivoting LU; callers must guard conditioning.
pub fn inverse(m: &CMatrix) -> CMatrix {
    assert_eq!(m.nrows(), m.ncols());
    if m.nrows() == 0 {
        return zeros(0, 0);
    }
    m.partial_piv_lu().inverse()
}

/// Induced 1-norm (max column sum).
pub fn norm_one(m: &CMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| (0..m.nrows()).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `f(m)` for Hermitian `m` through its eigendecomposition.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> Result<CMatrix> {
    let (vals, vecs) = hermitian_eigen(m)?;
    let n = m.nrows();
    let scaled = Mat::from_fn(n, n, |i, j| vecs[(i, j)] * f(vals[j]));
    Ok(&scaled * vecs.adjoint())
}
