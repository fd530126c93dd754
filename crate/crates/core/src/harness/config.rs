use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{estimate_kappa, log_grid, SpaceKind, SymbolSpec};
use crate::potential::{default_z_grid, PushforwardGrid};
use crate::randmat::{delta_window, DeltaRule, PerturbationSchedule};

/// An experiment, as read from TOML. Unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub space: SpaceKind,
    /// Symbol in record form, e.g. `"symbol sphere; term 1 0 0 0 1; term 0 1 0 1 0"`.
    pub symbol: SymbolSpec,
    pub n_list: Vec<usize>,
    /// Master seed; cell `i` at size `N` uses `derive_seed(seed, N, i)`.
    pub seed: u64,
    /// Independent perturbations per `N`.
    pub realizations: usize,
    pub delta: DeltaRule,
    #[serde(default = "defaults::epsilon")]
    pub epsilon: f64,
    #[serde(default = "defaults::rho")]
    pub rho: f64,
    #[serde(default = "defaults::gamma")]
    pub gamma: f64,
    /// `C` in the lower window end `e^{-N^C}`.
    #[serde(default = "defaults::c_exponent")]
    pub c_exponent: f64,
    /// Regularity exponent; estimated by Monte Carlo when absent.
    #[serde(default)]
    pub kappa: Option<f64>,
    /// Also record the spectrum of the unperturbed matrix.
    #[serde(default)]
    pub unperturbed: bool,
    #[serde(default)]
    pub probes: ProbeConfig,
    #[serde(default)]
    pub disks: Option<DiskConfig>,
    /// Probes for the Grushin diagnostics; none means the stage is skipped.
    #[serde(default)]
    pub grushin_probes: Vec<Complex64>,
    #[serde(default = "defaults::quadrature")]
    pub quadrature: usize,
    #[serde(default = "defaults::kappa_samples")]
    pub kappa_samples: usize,
    #[serde(default = "defaults::workers")]
    pub workers: usize,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

mod defaults {
    pub fn epsilon() -> f64 {
        0.25
    }
    pub fn rho() -> f64 {
        0.2
    }
    pub fn gamma() -> f64 {
        0.04
    }
    pub fn c_exponent() -> f64 {
        0.5
    }
    pub fn quadrature() -> usize {
        400
    }
    pub fn kappa_samples() -> usize {
        100_000
    }
    pub fn workers() -> usize {
        1
    }
    pub fn grid_count() -> usize {
        41
    }
    pub fn inflate() -> f64 {
        0.5
    }
    pub fn min_distance() -> f64 {
        1e-4
    }
}

/// Probe grid for the potential comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    /// Points per side of the grid over the inflated image box.
    #[serde(default = "defaults::grid_count")]
    pub count: usize,
    #[serde(default = "defaults::inflate")]
    pub inflate: f64,
    /// Explicit probes replace the grid.
    #[serde(default)]
    pub points: Vec<Complex64>,
    #[serde(default = "defaults::min_distance")]
    pub min_distance: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            count: defaults::grid_count(),
            inflate: defaults::inflate(),
            points: Vec::new(),
            min_distance: defaults::min_distance(),
        }
    }
}

/// Disks about `center` for the Weyl-law comparison; `count` radii evenly
/// spaced on `(0, max_radius]` unless `radii` is given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiskConfig {
    #[serde(default)]
    pub center: Complex64,
    #[serde(default)]
    pub radii: Vec<f64>,
    #[serde(default)]
    pub count: usize,
    #[serde(default)]
    pub max_radius: f64,
}

impl DiskConfig {
    pub fn radii(&self) -> Vec<f64> {
        if !self.radii.is_empty() {
            return self.radii.clone();
        }
        (1..=self.count).map(|i| self.max_radius * i as f64 / self.count as f64).collect()
    }
}

/// Quantities derived while validating.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub kappa: f64,
    pub kappa_estimated: bool,
    /// `min(2ρκ, 1 - 2ρ) - γ`, the window exponent the parameter schedule allows.
    pub derived_c: f64,
    pub warnings: Vec<String>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs always serialize")
    }

    pub fn schedule(&self) -> PerturbationSchedule {
        PerturbationSchedule { epsilon: self.epsilon, c_exponent: self.c_exponent, d: 1, rule: self.delta }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("runs").join(&self.name))
    }

    /// The probe set: explicit points, or the inflated image-box grid.
    pub fn probe_points(&self, push: &PushforwardGrid) -> Vec<Complex64> {
        if !self.probes.points.is_empty() {
            return self.probes.points.clone();
        }
        default_z_grid(push.image_box(), self.probes.count, self.probes.inflate)
    }

    /// Structural checks that need no computation.
    pub fn check_shape(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!("invalid experiment name {:?}", self.name));
        }
        if self.n_list.is_empty() {
            return bad("n_list is empty".into());
        }
        if self.n_list.iter().any(|n| *n < 2) {
            return bad("every N must be at least 2".into());
        }
        if self.realizations == 0 {
            return bad("realizations must be positive".into());
        }
        if self.symbol.kind() != self.space {
            return bad(format!("symbol is a {} symbol but space is {}", self.symbol.kind(), self.space));
        }
        if !(self.epsilon > 0.0) {
            return bad("epsilon must be positive".into());
        }
        let rho_max = self.epsilon.min(0.5);
        if !(self.rho > 0.0 && self.rho < rho_max) {
            return bad(format!("rho = {} must lie in (0, min(1/2, epsilon)) = (0, {rho_max})", self.rho));
        }
        if let Some(k) = self.kappa {
            if !(k > 0.0 && k <= 1.0) {
                return bad(format!("kappa = {k} must lie in (0, 1]"));
            }
        }
        if self.workers == 0 {
            return bad("workers must be positive".into());
        }
        if self.quadrature < 2 || self.probes.count == 0 {
            return bad("resolutions must be positive".into());
        }
        if let Some(d) = &self.disks {
            let r = d.radii();
            if r.is_empty() || r.iter().any(|x| !(*x >= 0.0)) || r.windows(2).any(|w| w[0] > w[1]) {
                return bad("disk radii must be nonnegative and ascending".into());
            }
        }
        Ok(())
    }

    /// Full validation: shape, `κ`, the `γ` constraint and the δ window at
    /// every `N`. Violations are errors; an empty window for the derived `C`
    /// is reported as a warning.
    pub fn validate(&self) -> Result<Validation> {
        self.check_shape()?;
        let (kappa, kappa_estimated) = match self.kappa {
            Some(k) => (k, false),
            None => {
                let z = default_z_grid(self.image_box()?, 21, 0.5);
                let t = log_grid(1e-4, 1e-1, 10);
                let seed = crate::rng::mix64(self.seed ^ 0x006b_6170_7061);
                (estimate_kappa(&self.symbol, &z, self.kappa_samples.max(10_000), &t, seed)?.kappa, true)
            }
        };
        let gamma_max = (self.epsilon - self.rho).min(2.0 * self.rho * kappa).min(1.0 - 2.0 * self.rho);
        if !(self.gamma > 0.0 && self.gamma < gamma_max) {
            return Err(Error::Config(format!(
                "gamma = {} must lie in (0, min(epsilon - rho, 2 rho kappa, 1 - 2 rho)) = (0, {gamma_max:.4}) with kappa = {kappa:.4}",
                self.gamma
            )));
        }
        let schedule = self.schedule();
        for &n in &self.n_list {
            delta_window(n, &schedule).map_err(|e| Error::Config(e.to_string()))?;
        }
        let derived_c = (2.0 * self.rho * kappa).min(1.0 - 2.0 * self.rho) - self.gamma;
        let mut warnings = Vec::new();
        for &n in &self.n_list {
            let nf = n as f64;
            let lower = (-nf.powf(derived_c)).exp();
            let upper = nf.powf(-0.5 - self.epsilon);
            let delta = schedule.delta(n);
            if lower >= upper {
                warnings.push(format!("N = {n}: window (e^-N^{derived_c:.3}, N^-{:.2}) is empty", 0.5 + self.epsilon));
            } else if !(delta > lower) {
                warnings.push(format!("N = {n}: delta = {delta:e} is below e^-N^{derived_c:.3} = {lower:e}"));
            }
        }
        Ok(Validation { kappa, kappa_estimated, derived_c, warnings })
    }

    fn image_box(&self) -> Result<(f64, f64, f64, f64)> {
        let space = crate::geometry::make_phase_space(self.space);
        let grid = crate::geometry::liouville_quadrature(&space, 64);
        Ok(PushforwardGrid::new(&self.symbol, &grid)?.image_box())
    }
}
