//! Built-in experiments. Desk scale uses `N = 300` for the large matrices;
//! full scale restores `N = 1000` and `N = 2000`.

use num_complex::Complex64;

use super::config::{DiskConfig, ExperimentConfig, ProbeConfig};
use crate::error::{Error, Result};
use crate::geometry::{Monomial, SpaceKind, Symbol, SymbolSpec};
use crate::randmat::DeltaRule;

pub const PRESETS: [&str; 3] = ["scottish-flag-figure1", "sphere-figure2", "sphere-figure3"];

/// Matrix size standing in for `N = 1000` and `N = 2000`.
pub const DESK_SCALE: usize = 300;

/// `x1 + 2 x1^2 + i x2`.
pub fn figure2_symbol() -> SymbolSpec {
    SymbolSpec::Sphere(Symbol::from_terms([
        (Monomial::new(1, 0, 0), Complex64::new(1.0, 0.0)),
        (Monomial::new(2, 0, 0), Complex64::new(2.0, 0.0)),
        (Monomial::new(0, 1, 0), Complex64::new(0.0, 1.0)),
    ]))
}

fn base(name: &str, space: SpaceKind, symbol: SymbolSpec, n_list: Vec<usize>) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        space,
        symbol,
        n_list,
        seed: 20_240_601,
        realizations: 1,
        delta: DeltaRule::Weyl,
        epsilon: 0.25,
        rho: 0.2,
        gamma: 0.04,
        c_exponent: 0.5,
        kappa: None,
        unperturbed: false,
        probes: ProbeConfig::default(),
        disks: None,
        grushin_probes: Vec::new(),
        quadrature: 400,
        kappa_samples: 100_000,
        workers: 1,
        output_dir: None,
    }
}

pub fn preset(name: &str, full_scale: bool) -> Result<ExperimentConfig> {
    let big = |full: usize| if full_scale { full } else { DESK_SCALE };
    let cfg = match name {
        "scottish-flag-figure1" => {
            let mut c = base(name, SpaceKind::Torus, SymbolSpec::scottish_flag(), vec![50, big(1000)]);
            c.unperturbed = true;
            c
        }
        "sphere-figure2" => {
            let mut c = base(name, SpaceKind::Sphere, figure2_symbol(), vec![50, big(1000)]);
            c.unperturbed = true;
            c
        }
        "sphere-figure3" => {
            let mut c = base(name, SpaceKind::Sphere, SymbolSpec::sphere_lowering(), vec![100, big(2000)]);
            c.realizations = 5;
            c.disks = Some(DiskConfig { center: Complex64::new(0.0, 0.0), radii: Vec::new(), count: 50, max_radius: 1.0 });
            c.grushin_probes = vec![Complex64::new(0.3, 0.2)];
            c
        }
        other => {
            return Err(Error::Config(format!("unknown preset {other:?}; known presets: {}", PRESETS.join(", "))));
        }
    };
    Ok(cfg)
}
