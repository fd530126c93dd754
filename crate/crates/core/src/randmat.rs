//! Gaussian perturbations, the admissible δ window and the smallest singular
//! value experiment.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::rng::{derive_seed, Stream};
use crate::stats::{weighted_linear_fit, LinearFit};

pub use crate::linalg::operator_norm;

/// Constant in `P(s_min(B + δG) < δt) <= C 𝒩 t^2`, fitted on calibration seeds
/// disjoint from every acceptance seed and rounded up. See `calibrate_tail_constant`.
pub const TAIL_CONSTANT: f64 = 32.0;

#[derive(Clone, Debug)]
pub struct GinibreSample {
    pub dim: usize,
    pub seed: u64,
    pub entries: CMatrix,
}

/// Complex Ginibre matrix, filled row by row from `Stream::new(seed)`.
pub fn sample_ginibre(dim: usize, seed: u64) -> GinibreSample {
    let mut stream = Stream::new(seed);
    let mut data = Vec::with_capacity(dim * dim);
    for _ in 0..dim * dim {
        data.push(stream.complex_gaussian());
    }
    let entries = linalg::from_row_major(dim, &data);
    GinibreSample { dim, seed, entries }
}

/// How `δ` depends on `N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DeltaRule {
    /// `N^{-d/2 - 2ε}`.
    Default,
    /// `N^{-d}`.
    Weyl,
    /// `N^{-exponent}`.
    Power { exponent: f64 },
    Constant { value: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationSchedule {
    pub epsilon: f64,
    /// `C` in the lower end `e^{-N^C}` of the window.
    pub c_exponent: f64,
    pub d: u32,
    pub rule: DeltaRule,
}

impl Default for PerturbationSchedule {
    fn default() -> Self {
        Self { epsilon: 0.25, c_exponent: 0.5, d: 1, rule: DeltaRule::Default }
    }
}

impl PerturbationSchedule {
    pub fn with_rule(rule: DeltaRule) -> Self {
        Self { rule, ..Self::default() }
    }

    pub fn delta(&self, n: usize) -> f64 {
        let nf = n as f64;
        let d = self.d as f64;
        match self.rule {
            DeltaRule::Default => nf.powf(-d / 2.0 - 2.0 * self.epsilon),
            DeltaRule::Weyl => nf.powf(-d),
            DeltaRule::Power { exponent } => nf.powf(-exponent),
            DeltaRule::Constant { value } => value,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeltaWindow {
    pub lower: f64,
    pub upper: f64,
    pub delta: f64,
}

/// `(e^{-N^C}, N^{-d/2-ε})` and the scheduled `δ(N)`, which must lie inside.
pub fn delta_window(n: usize, schedule: &PerturbationSchedule) -> Result<DeltaWindow> {
    if n < 2 {
        return Err(Error::invalid(format!("delta window needs N >= 2, got {n}")));
    }
    if !(schedule.c_exponent > 0.0 && schedule.c_exponent < 1.0) || !(schedule.epsilon > 0.0) {
        return Err(Error::invalid("schedule needs epsilon > 0 and C in (0, 1)"));
    }
    let nf = n as f64;
    let lower = (-nf.powf(schedule.c_exponent)).exp();
    let upper = nf.powf(-(schedule.d as f64) / 2.0 - schedule.epsilon);
    let delta = schedule.delta(n);
    if !(delta > lower && delta < upper) {
        return Err(Error::Schedule { n, delta, lower, upper });
    }
    Ok(DeltaWindow { lower, upper, delta })
}

/// One row of the tail experiment CSV.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub t: f64,
    pub trials: usize,
    pub successes: usize,
    pub p_hat: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug)]
pub struct TailExperiment {
    pub dim: usize,
    pub delta: f64,
    pub rows: Vec<TailRow>,
    /// `s_min(B + δG)` per trial, in trial order.
    pub smin: Vec<f64>,
}

impl TailExperiment {
    /// Exponent of `p(t) ~ t^k`, from a fit of `log(-log(1 - p))` on `log t`
    /// weighted by the success counts. The transform is exact for the Ginibre
    /// law `1 - e^{-𝒩t^2}` and reduces to `log p` for small `p`.
    pub fn slope(&self) -> Option<LinearFit> {
        let pts: Vec<_> = self.rows.iter().filter(|r| r.p_hat > 0.0 && r.p_hat < 1.0 && r.t > 0.0).collect();
        if pts.len() < 2 {
            return None;
        }
        let x: Vec<f64> = pts.iter().map(|r| r.t.ln()).collect();
        let y: Vec<f64> = pts.iter().map(|r| (-(1.0 - r.p_hat).ln()).ln()).collect();
        let w: Vec<f64> = pts.iter().map(|r| r.successes as f64).collect();
        Some(weighted_linear_fit(&x, &y, &w))
    }

    /// Largest `p_hat / (𝒩 t^2)` over the grid.
    pub fn max_ratio(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.t > 0.0)
            .map(|r| r.p_hat / (self.dim as f64 * r.t * r.t))
            .fold(0.0, f64::max)
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        crate::fsutil::write_csv(path, &self.rows)
    }
}

/// Empirical `P(s_min(B + δG) < δt)` per `t`. Trial `i` draws its Gaussian from
/// `derive_seed(seed, dim, i)`.
pub fn smin_tail_experiment(b: &CMatrix, delta: f64, t_grid: &[f64], trials: usize, seed: u64) -> Result<TailExperiment> {
    if trials < 100 {
        return Err(Error::invalid(format!("tail experiment needs at least 100 trials, got {trials}")));
    }
    if t_grid.iter().any(|t| !(*t >= 0.0 && *t < 1.0)) {
        return Err(Error::invalid("t grid must lie in [0, 1)"));
    }
    let dim = b.nrows();
    let smin = (0..trials)
        .into_par_iter()
        .map(|i| {
            let g = sample_ginibre(dim, derive_seed(seed, dim as u64, i as u64));
            let m = linalg::add_scaled(b, delta, &g.entries);
            Ok(linalg::singular_values(&m)?.last().copied().unwrap_or(0.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    let rows = t_grid
        .iter()
        .map(|&t| {
            let successes = smin.iter().filter(|&&s| s < delta * t).count();
            let p = successes as f64 / trials as f64;
            TailRow { t, trials, successes, p_hat: p, stderr: (p * (1.0 - p) / trials as f64).sqrt() }
        })
        .collect();
    Ok(TailExperiment { dim, delta, rows, smin })
}

/// Largest `p_hat / (𝒩 t^2)` over the given seeds for the tail experiment on
/// `b`. This is how [`TAIL_CONSTANT`] was produced (rounded up).
pub fn calibrate_tail_constant(b: &CMatrix, delta: f64, t_grid: &[f64], trials: usize, seeds: &[u64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &s in seeds {
        worst = worst.max(smin_tail_experiment(b, delta, t_grid, trials, s)?.max_ratio());
    }
    Ok(worst)
}

/// `‖G‖ / sqrt(𝒩)` for one Ginibre sample per seed.
pub fn gaussian_norm_ratios(dim: usize, seeds: &[u64]) -> Result<Vec<f64>> {
    seeds
        .par_iter()
        .map(|&s| Ok(operator_norm(&sample_ginibre(dim, s).entries)? / (dim as f64).sqrt()))
        .collect()
}

/// Add `δG` to `m`.
pub fn perturb(m: &CMatrix, delta: f64, g: &GinibreSample) -> CMatrix {
    linalg::add_scaled(m, delta, &g.entries)
}

/// Mean and variance of the entries, for sanity checks on samples.
pub fn entry_moments(g: &GinibreSample) -> (Complex64, f64) {
    let n = (g.dim * g.dim) as f64;
    let mut mean = Complex64::new(0.0, 0.0);
    let mut sq = 0.0;
    for j in 0..g.dim {
        for i in 0..g.dim {
            mean += g.entries[(i, j)];
            sq += g.entries[(i, j)].norm_sqr();
        }
    }
    mean /= n;
    (mean, sq / n - mean.norm_sqr())
}

/// Log-spaced points, shared by the experiments' `t` grids.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    crate::geometry::log_grid(lo, hi, count)
}
