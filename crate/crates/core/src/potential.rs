//! Logarithmic potentials `U_ν(z) = ∫ log|z - w| dν(w)` of the empirical
//! spectral measure and of the pushforward `(f_0)_* μ / vol`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{liouville_quadrature, PhaseSpace, QuadratureGrid, SymbolSpec};
use crate::linalg::{self, CMatrix};
use crate::quantize::{quantize, ToeplitzMatrix};
use crate::randmat::{delta_window, perturb, sample_ginibre, GinibreSample, PerturbationSchedule};
use crate::rng::derive_seed;
use crate::spectra::{eigenvalues, SpectrumSource};

/// `log|det M|` from a partially pivoted LU factorization; `-inf` when a
/// pivot is exactly zero.
pub fn log_abs_det(m: &CMatrix) -> f64 {
    linalg::lu_log_abs_det(m)
}

/// `𝒩^-1 log|det(T + δG - z)|`.
pub fn empirical_potential(t: &ToeplitzMatrix, g: &GinibreSample, delta: f64, z: Complex64) -> Result<f64> {
    if g.dim != t.dim {
        return Err(Error::Dimension(format!("matrix of size {} against Gaussian of size {}", t.dim, g.dim)));
    }
    let m = linalg::shift(&perturb(&t.entries, delta, g), z);
    Ok(log_abs_det(&m) / t.dim as f64)
}

/// `𝒩^-1 Σ log|z - λ_i|`.
pub fn potential_from_spectrum(eigs: &[Complex64], z: Complex64) -> f64 {
    eigs.iter().map(|l| (z - l).norm().ln()).sum::<f64>() / eigs.len() as f64
}

/// Volume-normalized quadrature of `log|z - f_0|`.
pub fn limit_potential(f: &SymbolSpec, space: &PhaseSpace, z: Complex64, grid: &QuadratureGrid) -> Result<f64> {
    if f.kind() != space.kind {
        return Err(Error::KindMismatch { expected: space.kind.name() });
    }
    let mut acc = 0.0;
    for (p, w) in grid.points.iter().zip(&grid.weights) {
        acc += w * (z - f.eval_principal(p)?).norm().ln();
    }
    Ok(acc / grid.total_weight())
}

/// Values of `f_0` at the grid nodes with normalized weights, so that many
/// probes can share one symbol evaluation pass.
#[derive(Clone, Debug)]
pub struct PushforwardGrid {
    values: Vec<Complex64>,
    weights: Vec<f64>,
}

impl PushforwardGrid {
    pub fn new(f: &SymbolSpec, grid: &QuadratureGrid) -> Result<Self> {
        let total = grid.total_weight();
        let values = grid.points.iter().map(|p| f.eval_principal(p)).collect::<Result<Vec<_>>>()?;
        Ok(Self { values, weights: grid.weights.iter().map(|w| w / total).collect() })
    }

    pub fn potential(&self, z: Complex64) -> f64 {
        self.values.iter().zip(&self.weights).map(|(v, w)| w * (z - v).norm().ln()).sum()
    }

    /// Bounding box `(re_min, re_max, im_min, im_max)` of the sampled image.
    pub fn image_box(&self) -> (f64, f64, f64, f64) {
        self.values.iter().fold(
            (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
            |(a, b, c, d), v| (a.min(v.re), b.max(v.re), c.min(v.im), d.max(v.im)),
        )
    }
}

/// Closed form of `U_ν` for `f_0 = i x1 + x2` on the sphere, whose pushforward
/// has radial distribution `1 - sqrt(1 - r^2)` on the unit disk.
pub fn lowering_limit_potential(z: Complex64) -> f64 {
    let s = z.norm();
    if s >= 1.0 {
        return s.ln();
    }
    let a = (1.0 - s * s).sqrt();
    let head = if s == 0.0 { 0.0 } else { (1.0 - a) * s.ln() };
    let tail = 0.5 * ((1.0 + a) * (1.0 + a).ln() - xlogx_shift(a) - 2.0 * a);
    head + tail
}

/// `(1 - a) ln(1 - a)`, continuous at `a = 1`.
fn xlogx_shift(a: f64) -> f64 {
    let b = 1.0 - a;
    if b <= 0.0 {
        0.0
    } else {
        b * b.ln()
    }
}

/// `count × count` probe grid on the image bounding box inflated by `inflate`
/// (relative, per side: 0.5 means 50%).
pub fn default_z_grid(image_box: (f64, f64, f64, f64), count: usize, inflate: f64) -> Vec<Complex64> {
    let (a, b, c, d) = image_box;
    // A degenerate (real or imaginary) image still gets a square box.
    let half = 0.5 * (b - a).max(d - c).max(1e-12);
    let (hx, hy) = (0.5 * (b - a).max(half * 0.0 + 1e-12), 0.5 * (d - c).max(1e-12));
    let (hx, hy) = (hx.max(if b - a < 1e-9 { half } else { 0.0 }), hy.max(if d - c < 1e-9 { half } else { 0.0 }));
    let (cx, cy) = (0.5 * (a + b), 0.5 * (c + d));
    let (hx, hy) = (hx * (1.0 + inflate), hy * (1.0 + inflate));
    let step = |i: usize| if count == 1 { 0.0 } else { -1.0 + 2.0 * i as f64 / (count - 1) as f64 };
    let mut out = Vec::with_capacity(count * count);
    for j in 0..count {
        for i in 0..count {
            out.push(Complex64::new(cx + hx * step(i), cy + hy * step(j)));
        }
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub symbol: SymbolSpec,
    pub n_list: Vec<usize>,
    pub schedule: PerturbationSchedule,
    pub z_grid: Vec<Complex64>,
    pub seeds: Vec<u64>,
    /// Probes closer than this to an eigenvalue are dropped for that realization.
    #[serde(default = "default_min_distance")]
    pub min_distance: f64,
    #[serde(default = "default_resolution")]
    pub quadrature_resolution: usize,
}

fn default_min_distance() -> f64 {
    1e-4
}

fn default_resolution() -> usize {
    400
}

/// One CSV row of the sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub z_re: f64,
    pub z_im: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    pub u_emp: f64,
    pub u_lim: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<SweepRow>,
    /// `(N, median over probes of the per-probe median over seeds)`.
    pub medians: Vec<(usize, f64)>,
    /// Probes dropped for being within `min_distance` of an eigenvalue.
    pub excluded_probes: usize,
    /// Probes whose empirical potential was `-inf`.
    pub singular_probes: usize,
}

impl ConvergenceReport {
    pub fn median_at(&self, n: usize) -> Option<f64> {
        self.medians.iter().find(|(m, _)| *m == n).map(|(_, v)| *v)
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        crate::fsutil::write_csv(path, &self.rows)
    }
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 { values[m] } else { 0.5 * (values[m - 1] + values[m]) })
}

/// Empirical against limit potential for every `(N, seed, z)`. The
/// Gaussian for `(N, seed)` is drawn from `derive_seed(seed, N, 0)`.
pub fn potential_sweep(cfg: &SweepConfig) -> Result<ConvergenceReport> {
    if cfg.n_list.is_empty() || cfg.seeds.is_empty() || cfg.z_grid.is_empty() {
        return Err(Error::invalid("sweep needs N values, seeds and probes"));
    }
    let space = crate::geometry::make_phase_space(cfg.symbol.kind());
    let push = PushforwardGrid::new(&cfg.symbol, &liouville_quadrature(&space, cfg.quadrature_resolution))?;
    let u_lim: Vec<f64> = cfg.z_grid.par_iter().map(|z| push.potential(*z)).collect();

    let cells: Vec<(usize, u64)> = cfg.n_list.iter().flat_map(|&n| cfg.seeds.iter().map(move |&s| (n, s))).collect();
    let spectra = cells
        .par_iter()
        .map(|&(n, seed)| {
            let t = quantize(&cfg.symbol, n)?;
            let delta = delta_window(n, &cfg.schedule)?.delta;
            let g = sample_ginibre(t.dim, derive_seed(seed, n as u64, 0));
            let src = SpectrumSource { matrix_id: t.id(), delta, seed: Some(seed) };
            eigenvalues(&perturb(&t.entries, delta, &g), src).map(|s| s.eigenvalues)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let (mut excluded, mut singular) = (0, 0);
    for (&(n, seed), eigs) in cells.iter().zip(&spectra) {
        for (z, ul) in cfg.z_grid.iter().zip(&u_lim) {
            if eigs.iter().any(|l| (z - l).norm() < cfg.min_distance) {
                excluded += 1;
                continue;
            }
            let ue = potential_from_spectrum(eigs, *z);
            if ue == f64::NEG_INFINITY {
                singular += 1;
            }
            rows.push(SweepRow { z_re: z.re, z_im: z.im, n, seed, u_emp: ue, u_lim: *ul, deviation: (ue - ul).abs() });
        }
    }

    let mut medians = Vec::new();
    for &n in &cfg.n_list {
        let mut per_probe = Vec::new();
        for z in &cfg.z_grid {
            let mut devs: Vec<f64> = rows
                .iter()
                .filter(|r| r.n == n && r.z_re == z.re && r.z_im == z.im && r.deviation.is_finite())
                .map(|r| r.deviation)
                .collect();
            if let Some(m) = median(&mut devs) {
                per_probe.push(m);
            }
        }
        if let Some(m) = median(&mut per_probe) {
            medians.push((n, m));
        }
    }
    Ok(ConvergenceReport { rows, medians, excluded_probes: excluded, singular_probes: singular })
}
