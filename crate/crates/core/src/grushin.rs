//! Grushin problems for `P - z`.
//!
//! With the singular value decomposition `(P - z) e_i = t_i f_i`, ordered
//! `t_1 <= ... <= t_𝒩`, and `A = #{t_i^2 <= α}`, `α = N^{-2ρ}`, the system
//!
//! ```text
//! 𝒫^δ = | P + δG - z   R_- |      R_+ u = (<u, e_i>)_{i <= A}
//!       | R_+          0   |      R_- u_- = Σ_{i <= A} u_-(i) f_i
//! ```
//!
//! is invertible and `log|det(P^δ - z)| = log|det 𝒫^δ| + log|det E_-+^δ|`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PhaseSpace, QuadratureGrid, SymbolSpec};
use crate::linalg::{self, CMatrix};
use crate::potential::limit_potential;
use crate::quantize::{quantize, ToeplitzMatrix};
use crate::randmat::GinibreSample;
use crate::stats::{linear_fit, LinearFit};

/// Inversion of `𝒫^δ` is refused above this 1-norm condition estimate.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Clone, Debug)]
pub struct SingularTriples {
    /// Nondecreasing.
    pub t: Vec<f64>,
    /// Right singular vectors `e_i` as columns.
    pub e: CMatrix,
    /// Left singular vectors `f_i` as columns.
    pub f: CMatrix,
    pub z: Complex64,
}

pub fn singular_triples(p: &CMatrix, z: Complex64) -> Result<SingularTriples> {
    if p.nrows() != p.ncols() {
        return Err(Error::Dimension("singular triples need a square matrix".into()));
    }
    let n = p.nrows();
    let svd = linalg::svd(&linalg::shift(p, z))?;
    // The decomposition is nonincreasing; reverse into ascending order.
    let t = svd.s.iter().rev().copied().collect();
    let e = CMatrix::from_fn(n, n, |i, j| svd.v[(i, n - 1 - j)]);
    let f = CMatrix::from_fn(n, n, |i, j| svd.u[(i, n - 1 - j)]);
    Ok(SingularTriples { t, e, f, z })
}

impl SingularTriples {
    pub fn dim(&self) -> usize {
        self.t.len()
    }

    /// `max_i max(|(P-z)e_i - t_i f_i|, |(P-z)^* f_i - t_i e_i|)`.
    pub fn intertwining_residual(&self, p: &CMatrix) -> f64 {
        let pz = linalg::shift(p, self.z);
        let pe = &pz * &self.e;
        let pf = &linalg::adjoint(&pz) * &self.f;
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            let (mut a, mut b) = (0.0, 0.0);
            for i in 0..n {
                a += (pe[(i, j)] - self.f[(i, j)] * self.t[j]).norm_sqr();
                b += (pf[(i, j)] - self.e[(i, j)] * self.t[j]).norm_sqr();
            }
            worst = worst.max(a.sqrt()).max(b.sqrt());
        }
        worst
    }

    /// `max |V^* V - I|` over both vector families.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.dim();
        let id = linalg::identity(n);
        let ee = &linalg::adjoint(&self.e) * &self.e;
        let ff = &linalg::adjoint(&self.f) * &self.f;
        linalg::max_abs_diff(&ee, &id).max(linalg::max_abs_diff(&ff, &id))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrushinParams {
    pub rho: f64,
    pub alpha: f64,
    pub a: usize,
}

/// `α = N^{-2ρ}` and `A = #{i : t_i^2 <= α}`.
pub fn grushin_params(n: usize, rho: f64, triples: &SingularTriples) -> Result<GrushinParams> {
    if !(rho > 0.0 && rho < 0.5) {
        return Err(Error::invalid(format!("rho must lie in (0, 1/2), got {rho}")));
    }
    let alpha = (n as f64).powf(-2.0 * rho);
    Ok(params_with_alpha(rho, alpha, triples))
}

fn params_with_alpha(rho: f64, alpha: f64, triples: &SingularTriples) -> GrushinParams {
    let a = triples.t.iter().take_while(|t| **t * **t <= alpha).count();
    GrushinParams { rho, alpha, a }
}

/// Blocks of `ℰ = 𝒫^{-1}`.
#[derive(Clone, Debug)]
pub struct InverseBlocks {
    /// `𝒩 × 𝒩`.
    pub e: CMatrix,
    /// `𝒩 × A`.
    pub e_plus: CMatrix,
    /// `A × 𝒩`.
    pub e_minus: CMatrix,
    /// `A × A`.
    pub e_minus_plus: CMatrix,
}

impl InverseBlocks {
    pub fn to_matrix(&self) -> CMatrix {
        let n = self.e.nrows();
        let a = self.e_plus.ncols();
        CMatrix::from_fn(n + a, n + a, |i, j| match (i < n, j < n) {
            (true, true) => self.e[(i, j)],
            (true, false) => self.e_plus[(i, j - n)],
            (false, true) => self.e_minus[(i - n, j)],
            (false, false) => self.e_minus_plus[(i - n, j - n)],
        })
    }

    fn from_matrix(m: &CMatrix, n: usize) -> Self {
        let a = m.nrows() - n;
        Self {
            e: CMatrix::from_fn(n, n, |i, j| m[(i, j)]),
            e_plus: CMatrix::from_fn(n, a, |i, j| m[(i, n + j)]),
            e_minus: CMatrix::from_fn(a, n, |i, j| m[(n + i, j)]),
            e_minus_plus: CMatrix::from_fn(a, a, |i, j| m[(n + i, n + j)]),
        }
    }

    /// Largest blockwise entry difference.
    pub fn max_diff(&self, other: &InverseBlocks) -> f64 {
        linalg::max_abs_diff(&self.e, &other.e)
            .max(linalg::max_abs_diff(&self.e_plus, &other.e_plus))
            .max(linalg::max_abs_diff(&self.e_minus, &other.e_minus))
            .max(linalg::max_abs_diff(&self.e_minus_plus, &other.e_minus_plus))
    }
}

/// The unperturbed inverse in closed form:
/// `E = Σ_{i>A} t_i^{-1} e_i f_i^*`, `E_+ = Σ_{i<=A} e_i δ_i^*`,
/// `E_- = Σ_{i<=A} δ_i f_i^*`, `E_-+ = -Σ_{i<=A} t_i δ_i δ_i^*`.
pub fn closed_form_inverse(triples: &SingularTriples, a: usize) -> InverseBlocks {
    let n = triples.dim();
    let inv_t: Vec<f64> = triples.t.iter().map(|t| if *t > 0.0 { 1.0 / t } else { 0.0 }).collect();
    let scaled_e = CMatrix::from_fn(n, n - a, |i, j| triples.e[(i, a + j)] * inv_t[a + j]);
    let f_tail = CMatrix::from_fn(n, n - a, |i, j| triples.f[(i, a + j)]);
    InverseBlocks {
        e: &scaled_e * linalg::adjoint(&f_tail),
        e_plus: CMatrix::from_fn(n, a, |i, j| triples.e[(i, j)]),
        e_minus: CMatrix::from_fn(a, n, |i, j| triples.f[(j, i)].conj()),
        e_minus_plus: CMatrix::from_fn(a, a, |i, j| {
            if i == j {
                Complex64::new(-triples.t[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InverseRoute {
    /// Dense LU inverse of the assembled system.
    Direct,
    /// Closed form, corrected for `δG` through `(I + δGE)^{-1}`.
    ClosedForm,
}

#[derive(Clone, Debug)]
pub struct GrushinSystem {
    pub params: GrushinParams,
    pub delta: f64,
    /// `(𝒩 + A) × (𝒩 + A)`.
    pub matrix: CMatrix,
    pub inverse: InverseBlocks,
    pub route: InverseRoute,
    /// `‖𝒫‖_1 ‖𝒫^{-1}‖_1`.
    pub condition_estimate: f64,
    /// `δ‖G‖(‖E‖ + ‖E_+‖)`; below 1 the Neumann series for the perturbed
    /// inverse converges.
    pub neumann_value: f64,
    pub neumann_warning: bool,
}

/// Assemble `𝒫^δ` for `P` (the matrix the triples were computed from) and
/// invert it, by dense LU unless that is too ill-conditioned.
pub fn assemble_grushin(
    p: &CMatrix,
    triples: &SingularTriples,
    params: &GrushinParams,
    perturbation: Option<(f64, &CMatrix)>,
) -> Result<GrushinSystem> {
    let n = triples.dim();
    if p.nrows() != n || p.ncols() != n {
        return Err(Error::Dimension("matrix and triples disagree".into()));
    }
    let a = params.a;
    let (delta, g) = match perturbation {
        Some((d, g)) => {
            if g.nrows() != n || g.ncols() != n {
                return Err(Error::Dimension("perturbation has the wrong size".into()));
            }
            (d, Some(g))
        }
        None => (0.0, None),
    };
    let mut block = linalg::shift(p, triples.z);
    if let Some(g) = g {
        block = linalg::add_scaled(&block, delta, g);
    }
    let matrix = CMatrix::from_fn(n + a, n + a, |i, j| match (i < n, j < n) {
        (true, true) => block[(i, j)],
        (true, false) => triples.f[(i, j - n)],
        (false, true) => triples.e[(j, i - n)].conj(),
        (false, false) => Complex64::new(0.0, 0.0),
    });

    let closed = closed_form_inverse(triples, a);
    let g_norm = match g {
        Some(g) => linalg::operator_norm(g)?,
        None => 0.0,
    };
    let neumann_value =
        delta * g_norm * (linalg::operator_norm(&closed.e)? + linalg::operator_norm(&closed.e_plus)?);
    let neumann_warning = neumann_value >= 1.0;
    if neumann_warning {
        log::warn!("Grushin system at z = {}: δ‖G‖(‖E‖+‖E+‖) = {neumann_value:.3} >= 1", triples.z);
    }

    let direct = linalg::inverse(&matrix);
    let condition_estimate = linalg::norm_one(&matrix) * linalg::norm_one(&direct);
    let (inverse, route) = if condition_estimate.is_finite() && condition_estimate <= CONDITION_LIMIT {
        (InverseBlocks::from_matrix(&direct, n), InverseRoute::Direct)
    } else {
        (perturbed_closed_form(&closed, delta, g), InverseRoute::ClosedForm)
    };
    Ok(GrushinSystem {
        params: *params,
        delta,
        matrix,
        inverse,
        route,
        condition_estimate,
        neumann_value,
        neumann_warning,
    })
}

/// `E^δ = E(I + δGE)^{-1}`, `E_+^δ = E_+ - E^δ δG E_+`,
/// `E_-^δ = E_-(I + δGE)^{-1}`, `E_-+^δ = E_-+ - E_-^δ δG E_+`.
fn perturbed_closed_form(closed: &InverseBlocks, delta: f64, g: Option<&CMatrix>) -> InverseBlocks {
    let Some(g) = g.filter(|_| delta != 0.0) else {
        return closed.clone();
    };
    let n = closed.e.nrows();
    let dg = g * faer::Scale(Complex64::new(delta, 0.0));
    let k = linalg::inverse(&(&linalg::identity(n) + &(&dg * &closed.e)));
    let e = &closed.e * &k;
    let e_minus = &closed.e_minus * &k;
    let dg_ep = &dg * &closed.e_plus;
    InverseBlocks {
        e_plus: &closed.e_plus - &(&e * &dg_ep),
        e_minus_plus: &closed.e_minus_plus - &(&e_minus * &dg_ep),
        e,
        e_minus,
    }
}

impl GrushinSystem {
    /// `max |𝒫 ℰ - I|`.
    pub fn inverse_residual(&self) -> f64 {
        let prod = &self.matrix * &self.inverse.to_matrix();
        linalg::max_abs_diff(&prod, &linalg::identity(self.matrix.nrows()))
    }
}

/// Norms of the unperturbed blocks against `‖E‖ <= α^{-1/2}`, `‖E_+‖ = 1`
/// and `‖E_-+‖ <= α^{1/2}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockNorms {
    pub e: f64,
    pub e_plus: f64,
    pub e_minus_plus: f64,
    pub alpha: f64,
}

impl BlockNorms {
    pub fn compute(blocks: &InverseBlocks, alpha: f64) -> Result<Self> {
        Ok(Self {
            e: linalg::operator_norm(&blocks.e)?,
            e_plus: linalg::operator_norm(&blocks.e_plus)?,
            e_minus_plus: linalg::operator_norm(&blocks.e_minus_plus)?,
            alpha,
        })
    }

    /// The three inequalities, with `‖E_+‖ = 1` read to rounding (and as 0 when `A = 0`).
    pub fn hold(&self, a: usize) -> bool {
        let plus_ok = if a == 0 { self.e_plus == 0.0 } else { (self.e_plus - 1.0).abs() <= 1e-12 };
        self.e <= self.alpha.powf(-0.5) && plus_ok && self.e_minus_plus <= self.alpha.sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchurCheck {
    /// `log|det(P^δ - z)|`.
    pub log_det_shifted: f64,
    pub log_det_system: f64,
    pub log_det_e_minus_plus: f64,
    /// NaN when any determinant is infinite.
    pub residual: f64,
}

/// Compare `log|det(P^δ - z)|` with `log|det 𝒫^δ| + log|det E_-+^δ|`, each
/// from its own LU factorization.
pub fn schur_identity_residual(system: &GrushinSystem) -> SchurCheck {
    let n = system.inverse.e.nrows();
    let shifted = CMatrix::from_fn(n, n, |i, j| system.matrix[(i, j)]);
    let log_det_shifted = linalg::lu_log_abs_det(&shifted);
    let log_det_system = linalg::lu_log_abs_det(&system.matrix);
    let log_det_e_minus_plus = linalg::lu_log_abs_det(&system.inverse.e_minus_plus);
    let vals = [log_det_shifted, log_det_system, log_det_e_minus_plus];
    let residual = if vals.iter().all(|v| v.is_finite()) {
        (log_det_shifted - log_det_system - log_det_e_minus_plus).abs()
    } else {
        f64::NAN
    };
    SchurCheck { log_det_shifted, log_det_system, log_det_e_minus_plus, residual }
}

/// Split of `𝒩^-1 log|det(P^δ - z)| - U_ν(z)` into `B1 + B2 + B3`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsB {
    pub n: usize,
    pub z: Complex64,
    pub rho: f64,
    pub delta: f64,
    pub seed: u64,
    pub a: usize,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    /// `log|det 𝒫| = Σ_{i>A} log t_i`.
    pub log_det_unperturbed: f64,
    pub log_det_system: f64,
    pub log_det_e_minus_plus: f64,
    /// Volume average of `log|z - f_0|`.
    pub limit_potential: f64,
    pub schur_residual: f64,
    /// `|B1 + B2 + B3 - (𝒩^-1 log|det(P^δ - z)| - U_ν(z))|`.
    pub reassembly_residual: f64,
    pub route: InverseRoute,
    pub flags: Vec<String>,
}

impl DiagnosticsB {
    pub fn row(&self) -> DiagnosticsRow {
        DiagnosticsRow {
            n: self.n,
            z_re: self.z.re,
            z_im: self.z.im,
            rho: self.rho,
            delta: self.delta,
            seed: self.seed,
            a: self.a,
            b1: self.b1,
            b2: self.b2,
            b3: self.b3,
            schur_residual: self.schur_residual,
            flags: self.flags.join("|"),
        }
    }
}

/// One line of the diagnostics CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub z_re: f64,
    pub z_im: f64,
    pub rho: f64,
    pub delta: f64,
    pub seed: u64,
    #[serde(rename = "A")]
    pub a: usize,
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "B2")]
    pub b2: f64,
    #[serde(rename = "B3")]
    pub b3: f64,
    pub schur_residual: f64,
    pub flags: String,
}

pub fn write_diagnostics_csv(path: &std::path::Path, rows: &[DiagnosticsRow]) -> Result<()> {
    crate::fsutil::write_csv(path, rows)
}

pub fn b_diagnostics(
    t: &ToeplitzMatrix,
    z: Complex64,
    rho: f64,
    delta: f64,
    g: &GinibreSample,
    grid: &QuadratureGrid,
) -> Result<DiagnosticsB> {
    if g.dim != t.dim {
        return Err(Error::Dimension(format!("Gaussian of size {} for a {}x{} matrix", g.dim, t.dim, t.dim)));
    }
    let triples = singular_triples(&t.entries, z)?;
    let params = grushin_params(t.n, rho, &triples)?;
    let system = assemble_grushin(&t.entries, &triples, &params, Some((delta, &g.entries)))?;
    let schur = schur_identity_residual(&system);
    let u_lim = limit_potential(&t.symbol, &t.space, z, grid)?;
    let dim = t.dim as f64;

    let log_det_unperturbed: f64 = triples.t[params.a..].iter().map(|x| x.ln()).sum();
    let b1 = log_det_unperturbed / dim - u_lim;
    let b2 = (schur.log_det_system - log_det_unperturbed) / dim;
    let b3 = schur.log_det_e_minus_plus / dim;
    let target = schur.log_det_shifted / dim - u_lim;
    let reassembly_residual = (b1 + b2 + b3 - target).abs();

    let mut flags = Vec::new();
    if params.a == t.dim {
        flags.push("all-small".to_string());
    }
    if system.neumann_warning {
        flags.push("neumann".to_string());
    }
    if system.route == InverseRoute::ClosedForm {
        flags.push("closed-form".to_string());
    }
    if schur.residual.is_nan() {
        flags.push("singular".to_string());
    }
    Ok(DiagnosticsB {
        n: t.n,
        z,
        rho,
        delta,
        seed: g.seed,
        a: params.a,
        b1,
        b2,
        b3,
        log_det_unperturbed,
        log_det_system: schur.log_det_system,
        log_det_e_minus_plus: schur.log_det_e_minus_plus,
        limit_potential: u_lim,
        schur_residual: schur.residual,
        reassembly_residual,
        route: system.route,
        flags,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CountRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub dim: usize,
    #[serde(rename = "A")]
    pub a: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CountScan {
    pub rows: Vec<CountRow>,
    /// Fit of `log A` on `log N` over the rows with `A > 0`.
    pub growth: Option<LinearFit>,
}

/// `A(N)` for the unperturbed `T_N f - z` across `n_list`.
pub fn small_eigen_count_scan(f: &SymbolSpec, z: Complex64, rho: f64, n_list: &[usize]) -> Result<CountScan> {
    let rows = n_list
        .iter()
        .map(|&n| {
            let t = quantize(f, n)?;
            let triples = singular_triples(&t.entries, z)?;
            let params = grushin_params(n, rho, &triples)?;
            Ok(CountRow { n, dim: t.dim, a: params.a })
        })
        .collect::<Result<Vec<_>>>()?;
    let (x, y): (Vec<f64>, Vec<f64>) =
        rows.iter().filter(|r| r.a > 0).map(|r| ((r.n as f64).ln(), (r.a as f64).ln())).unzip();
    let growth = if x.len() >= 2 { Some(linear_fit(&x, &y)) } else { None };
    Ok(CountScan { rows, growth })
}

/// Phase space matching a symbol, for callers that only hold the symbol.
pub fn space_of(f: &SymbolSpec) -> PhaseSpace {
    crate::geometry::make_phase_space(f.kind())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::liouville_quadrature;
    use crate::randmat::sample_ginibre;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random(n: usize, seed: u64) -> CMatrix {
        sample_ginibre(n, seed).entries
    }

    #[test]
    fn triples_examples() {
        let d = linalg::from_row_major(2, &[c(3.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let tr = singular_triples(&d, c(0.0, 0.0)).unwrap();
        assert!((tr.t[0] - 1.0).abs() < 1e-14 && (tr.t[1] - 3.0).abs() < 1e-14);
        let tr = singular_triples(&linalg::identity(4), c(1.0, 0.0)).unwrap();
        assert!(tr.t.iter().all(|t| *t == 0.0));
        let p = random(20, 1);
        let tr = singular_triples(&p, c(0.2, -0.1)).unwrap();
        assert!(tr.intertwining_residual(&p) < 1e-8);
        assert!(tr.orthonormality_defect() < 1e-10);
        assert!(tr.t.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn params_examples() {
        let tr = SingularTriples { t: vec![0.1, 5.0], e: linalg::identity(2), f: linalg::identity(2), z: c(0.0, 0.0) };
        assert_eq!(params_with_alpha(0.25, 1.0, &tr).a, 1);
        assert_eq!(params_with_alpha(0.25, 1e-3, &tr).a, 0);
        let p = grushin_params(100, 0.25, &tr).unwrap();
        assert!((p.alpha - 0.1).abs() < 1e-15);
        assert!(grushin_params(100, 0.5, &tr).is_err());
    }

    #[test]
    fn closed_form_matches_direct_inverse() {
        for seed in 0..5 {
            let n = 25;
            let p = &random(n, seed) * faer::Scale(Complex64::new(1.0 / (n as f64).sqrt(), 0.0));
            let tr = singular_triples(&p, c(0.1, 0.05)).unwrap();
            let params = params_with_alpha(0.25, 0.04, &tr);
            let sys = assemble_grushin(&p, &tr, &params, None).unwrap();
            assert_eq!(sys.route, InverseRoute::Direct);
            let closed = closed_form_inverse(&tr, params.a);
            assert!(sys.inverse.max_diff(&closed) < 1e-8);
            assert!(sys.inverse_residual() < 1e-8);
            assert!(BlockNorms::compute(&closed, params.alpha).unwrap().hold(params.a));
            // R_+ E_+ = I_A.
            let r_plus = CMatrix::from_fn(params.a, n, |i, j| tr.e[(j, i)].conj());
            let prod = &r_plus * &closed.e_plus;
            assert!(linalg::max_abs_diff(&prod, &linalg::identity(params.a)) < 1e-10);
        }
    }

    #[test]
    fn schur_identity_with_and_without_perturbation() {
        let n = 30;
        let p = random(n, 7);
        let g = random(n, 8);
        let tr = singular_triples(&p, c(0.5, 0.5)).unwrap();
        let params = params_with_alpha(0.25, tr.t[3] * tr.t[3] * 1.0001, &tr);
        assert_eq!(params.a, 4);
        for delta in [0.0, 1e-3, 0.1] {
            let sys = assemble_grushin(&p, &tr, &params, Some((delta, &g))).unwrap();
            assert!(schur_identity_residual(&sys).residual < 1e-6);
        }
        let none = params_with_alpha(0.25, 0.0, &tr);
        assert_eq!(none.a, 0);
        let sys = assemble_grushin(&p, &tr, &none, None).unwrap();
        assert!(schur_identity_residual(&sys).residual < 1e-8);
    }

    #[test]
    fn closed_form_route_agrees_with_direct_route() {
        let n = 20;
        let p = random(n, 3);
        let g = random(n, 4);
        let tr = singular_triples(&p, c(0.0, 0.0)).unwrap();
        let params = params_with_alpha(0.25, tr.t[2] * tr.t[2] * 1.0001, &tr);
        let sys = assemble_grushin(&p, &tr, &params, Some((1e-3, &g))).unwrap();
        let closed = perturbed_closed_form(&closed_form_inverse(&tr, params.a), 1e-3, Some(&g));
        assert!(sys.inverse.max_diff(&closed) < 1e-8);
    }

    #[test]
    fn diagnostics_reassemble() {
        let f = SymbolSpec::sphere_lowering();
        let t = quantize(&f, 60).unwrap();
        let g = sample_ginibre(t.dim, 12);
        let grid = liouville_quadrature(&t.space, 96);
        let d = b_diagnostics(&t, c(0.3, 0.2), 0.25, 1.0 / 60.0, &g, &grid).unwrap();
        assert!(d.a >= 1);
        assert!(d.schur_residual < 1e-6);
        assert!(d.reassembly_residual < 1e-6);
        assert_eq!(d.row().a, d.a);
    }

    #[test]
    fn far_probe_has_no_small_singular_values() {
        let scan = small_eigen_count_scan(&SymbolSpec::sphere_lowering(), c(3.0, 0.0), 0.25, &[20, 40]).unwrap();
        assert!(scan.rows.iter().all(|r| r.a == 0));
        assert!(scan.growth.is_none());
    }
}
