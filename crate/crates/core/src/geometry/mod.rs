//! Phase spaces, symbols, Liouville quadrature and the κ-regularity estimate.

mod kappa;
mod quadrature;
mod symbol;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use kappa::{estimate_kappa, log_grid, KappaFit, RegularityEstimate, KAPPA_FLOOR};
pub use quadrature::{gauss_legendre, liouville_quadrature, QuadratureGrid};
pub use symbol::{BasisKey, FourierMode, Monomial, Symbol, SymbolSpec, SPHERE_TOLERANCE};

use crate::error::Result;

/// The two quantized manifolds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    /// `T^2 = R^2 / Z^2` with coordinates `(x, ξ)`.
    Torus,
    /// `CP^1` as the unit sphere in `R^3`.
    Sphere,
}

impl SpaceKind {
    pub fn name(self) -> &'static str {
        match self {
            SpaceKind::Torus => "torus",
            SpaceKind::Sphere => "sphere",
        }
    }

    fn tag(self) -> u8 {
        match self {
            SpaceKind::Torus => 0,
            SpaceKind::Sphere => 1,
        }
    }

    pub(crate) fn from_tag(t: u8) -> Option<Self> {
        match t {
            0 => Some(SpaceKind::Torus),
            1 => Some(SpaceKind::Sphere),
            _ => None,
        }
    }

    pub(crate) fn to_tag(self) -> u8 {
        self.tag()
    }
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpaceKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "torus" | "torus2" | "T2" => Ok(SpaceKind::Torus),
            "sphere" | "cp1" | "CP1" | "sphere-cp1" => Ok(SpaceKind::Sphere),
            other => Err(format!("unknown phase space {other:?} (expected torus or sphere)")),
        }
    }
}

/// A point of `T^2` (coordinates read mod 1) or of the unit sphere.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ManifoldPoint {
    Torus { x: f64, xi: f64 },
    Sphere([f64; 3]),
}

/// Calibrated phase space: `(N / 2π) vol` tracks the Bergman dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpace {
    pub kind: SpaceKind,
    pub complex_dimension: u32,
    pub volume: f64,
    pub quadrature_default: usize,
}

/// Sphere: `dim H^0 = N + 1`; torus: `N`. Both need `vol = 2π`.
pub const CALIBRATED_VOLUME: f64 = std::f64::consts::TAU;

pub fn make_phase_space(kind: SpaceKind) -> PhaseSpace {
    PhaseSpace {
        kind,
        complex_dimension: 1,
        volume: CALIBRATED_VOLUME,
        quadrature_default: match kind {
            SpaceKind::Sphere => 96,
            SpaceKind::Torus => 128,
        },
    }
}

impl PhaseSpace {
    pub fn sphere() -> Self {
        make_phase_space(SpaceKind::Sphere)
    }

    pub fn torus() -> Self {
        make_phase_space(SpaceKind::Torus)
    }

    /// `(N / 2π)^d vol`.
    pub fn weyl_dimension(&self, n: usize) -> f64 {
        // Volume first, so the sphere (volume 2π) gives exactly N.
        let d = self.complex_dimension as i32;
        (n as f64).powi(d) * (self.volume / std::f64::consts::TAU.powi(d))
    }

    pub fn default_quadrature(&self) -> QuadratureGrid {
        liouville_quadrature(self, self.quadrature_default)
    }
}

/// Principal symbol `f_0(p)`.
pub fn evaluate_symbol(f: &SymbolSpec, p: &ManifoldPoint) -> Result<Complex64> {
    f.eval_principal(p)
}
