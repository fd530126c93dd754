use std::f64::consts::{PI, TAU};

use super::{ManifoldPoint, PhaseSpace, SpaceKind, SymbolSpec};
use crate::error::Result;
use num_complex::Complex64;

/// Weighted point set for the Liouville measure.
#[derive(Clone, Debug)]
pub struct QuadratureGrid {
    pub kind: SpaceKind,
    pub points: Vec<ManifoldPoint>,
    pub weights: Vec<f64>,
}

impl QuadratureGrid {
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `∫ g dμ`.
    pub fn integrate(&self, g: impl Fn(&ManifoldPoint) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * g(p)).sum()
    }

    /// `∫ f_0 dμ`.
    pub fn integrate_symbol(&self, f: &SymbolSpec) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, w) in self.points.iter().zip(&self.weights) {
            acc += f.eval_principal(p)? * *w;
        }
        Ok(acc)
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Product rule for `μ`: Gauss-Legendre in `x3` times `2·resolution` uniform
/// azimuths on the sphere, a uniform `resolution²` grid on the torus.
pub fn liouville_quadrature(space: &PhaseSpace, resolution: usize) -> QuadratureGrid {
    let resolution = resolution.max(2);
    match space.kind {
        SpaceKind::Sphere => {
            let (s, w) = gauss_legendre(resolution);
            let azimuths = 2 * resolution;
            // The sphere has area 4π; μ is a constant multiple of area.
            let scale = space.volume / (4.0 * PI) * TAU / azimuths as f64;
            let mut points = Vec::with_capacity(resolution * azimuths);
            let mut weights = Vec::with_capacity(resolution * azimuths);
            for (si, wi) in s.iter().zip(&w) {
                let rho = (1.0 - si * si).max(0.0).sqrt();
                for k in 0..azimuths {
                    let phi = TAU * (k as f64 + 0.5) / azimuths as f64;
                    let (sp, cp) = phi.sin_cos();
                    points.push(ManifoldPoint::Sphere(normalize([rho * cp, rho * sp, *si])));
                    weights.push(wi * scale);
                }
            }
            QuadratureGrid { kind: SpaceKind::Sphere, points, weights }
        }
        SpaceKind::Torus => {
            let w = space.volume / (resolution * resolution) as f64;
            let mut points = Vec::with_capacity(resolution * resolution);
            for i in 0..resolution {
                for j in 0..resolution {
                    points.push(ManifoldPoint::Torus {
                        x: i as f64 / resolution as f64,
                        xi: j as f64 / resolution as f64,
                    });
                }
            }
            let weights = vec![w; points.len()];
            QuadratureGrid { kind: SpaceKind::Torus, points, weights }
        }
    }
}

fn normalize(x: [f64; 3]) -> [f64; 3] {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    [x[0] / r, x[1] / r, x[2] / r]
}
