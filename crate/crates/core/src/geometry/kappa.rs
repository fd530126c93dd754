//! Monte-Carlo estimate of the regularity exponent κ in
//! `μ{|f_0 - z|^2 <= t} = O(t^κ)`.

use num_complex::Complex64;

use super::{ManifoldPoint, SpaceKind, SymbolSpec};
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::stats::linear_fit;

/// Smallest κ reported; symbols with flat level sets are clamped here.
pub const KAPPA_FLOOR: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct KappaFit {
    pub z: Complex64,
    /// Fraction of samples with `|f_0 - z|^2 <= t`, per `t`.
    pub mass: Vec<f64>,
    pub slope: f64,
    /// RMS residual of the log-log fit.
    pub residual: f64,
}

#[derive(Clone, Debug)]
pub struct RegularityEstimate {
    pub kappa: f64,
    pub probe_points: Vec<Complex64>,
    pub fits: Vec<KappaFit>,
    /// Probes whose sublevel masses vanished on too much of the `t` grid.
    pub skipped: Vec<Complex64>,
}

impl RegularityEstimate {
    pub fn fit_at(&self, z: Complex64) -> Option<&KappaFit> {
        self.fits.iter().find(|f| f.z == z)
    }
}

/// Samples `samples` uniform points of the symbol's phase space, fits
/// `log m(z, t)` against `log t` per probe and returns the smallest slope.
pub fn estimate_kappa(
    f: &SymbolSpec,
    z_grid: &[Complex64],
    samples: usize,
    t_grid: &[f64],
    seed: u64,
) -> Result<RegularityEstimate> {
    if samples < 10_000 {
        return Err(Error::invalid(format!("kappa estimation needs at least 10^4 samples, got {samples}")));
    }
    if t_grid.len() < 2 || t_grid.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
        return Err(Error::invalid("t grid must hold at least two values in (0, 1)"));
    }
    if z_grid.is_empty() {
        return Err(Error::invalid("empty probe grid"));
    }

    let mut stream = Stream::new(seed);
    let values = (0..samples)
        .map(|_| {
            let p = match f.kind() {
                SpaceKind::Sphere => ManifoldPoint::Sphere(stream.sphere_point()),
                SpaceKind::Torus => ManifoldPoint::Torus { x: stream.uniform(), xi: stream.uniform() },
            };
            f.eval_principal(&p)
        })
        .collect::<Result<Vec<_>>>()?;

    let log_t: Vec<f64> = t_grid.iter().map(|t| t.ln()).collect();
    let mut fits = Vec::new();
    let mut skipped = Vec::new();
    let mut dist = vec![0.0; samples];
    for &z in z_grid {
        for (d, v) in dist.iter_mut().zip(&values) {
            *d = (v - z).norm_sqr();
        }
        dist.sort_by(f64::total_cmp);
        let mass: Vec<f64> =
            t_grid.iter().map(|t| dist.partition_point(|d| d <= t) as f64 / samples as f64).collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) =
            log_t.iter().zip(&mass).filter(|(_, m)| **m > 0.0).map(|(x, m)| (*x, m.ln())).unzip();
        if xs.len() < 2 {
            skipped.push(z);
            continue;
        }
        let fit = linear_fit(&xs, &ys);
        fits.push(KappaFit { z, mass, slope: fit.slope, residual: fit.rms_residual });
    }
    if fits.is_empty() {
        return Err(Error::DegenerateFit { skipped });
    }
    let min_slope = fits.iter().map(|f| f.slope).fold(f64::INFINITY, f64::min);
    Ok(RegularityEstimate {
        kappa: min_slope.clamp(KAPPA_FLOOR, 1.0),
        probe_points: z_grid.to_vec(),
        fits,
        skipped,
    })
}

/// Log-spaced grid of `count` values in `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count).map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (count - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn height_function_has_square_root_mass_at_zero() {
        // x3 is uniform on [-1, 1]: μ{|x3| <= √t} / vol = √t.
        let t = log_grid(1e-4, 1e-1, 10);
        let est = estimate_kappa(&SymbolSpec::sphere_height(), &[c(0.0, 0.0)], 200_000, &t, 3).unwrap();
        assert!((est.kappa - 0.5).abs() < 0.1, "{}", est.kappa);
    }

    #[test]
    fn planar_symbol_is_regular_at_interior_points() {
        let t = log_grid(1e-4, 1e-2, 8);
        let z = c(0.0, 0.3);
        let est = estimate_kappa(&SymbolSpec::sphere_lowering(), &[z], 1_000_000, &t, 5).unwrap();
        let slope = est.fit_at(z).unwrap().slope;
        assert!((slope - 1.0).abs() < 0.15, "{slope}");
        assert!(est.kappa > 0.0 && est.kappa <= 1.0);
    }

    #[test]
    fn constant_symbol_skips_probes_away_from_its_value() {
        let f = SymbolSpec::constant(SpaceKind::Sphere, c(0.5, 0.0));
        let t = log_grid(1e-4, 1e-2, 5);
        let err = estimate_kappa(&f, &[c(0.0, 0.0)], 10_000, &t, 1).unwrap_err();
        assert!(matches!(err, Error::DegenerateFit { ref skipped } if skipped.len() == 1));
        // A probe at the value itself has m ≡ 1, slope 0, clamped to the floor.
        let est = estimate_kappa(&f, &[c(0.0, 0.0), c(0.5, 0.0)], 10_000, &t, 1).unwrap();
        assert_eq!(est.skipped, vec![c(0.0, 0.0)]);
        assert_eq!(est.kappa, KAPPA_FLOOR);
    }

    #[test]
    fn preconditions_are_checked() {
        let f = SymbolSpec::sphere_height();
        assert!(estimate_kappa(&f, &[c(0.0, 0.0)], 100, &[0.1, 0.01], 1).is_err());
        assert!(estimate_kappa(&f, &[c(0.0, 0.0)], 10_000, &[0.1, 1.5], 1).is_err());
    }
}
