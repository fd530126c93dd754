//! Spectra of dense matrices, empirical spectral measures and the Weyl-law
//! comparison.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{liouville_quadrature, ManifoldPoint, PhaseSpace, SpaceKind, SymbolSpec};
use crate::linalg::{self, CMatrix};
use crate::rng::Stream;

/// Where a spectrum came from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSource {
    pub matrix_id: String,
    pub delta: f64,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<Complex64>,
    pub source: SpectrumSource,
}

/// Full spectrum; exactly Hermitian input takes the symmetric solver.
pub fn eigenvalues(m: &CMatrix, source: SpectrumSource) -> Result<SpectrumResult> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!("{}x{} matrix has no spectrum", m.nrows(), m.ncols())));
    }
    if (0..m.nrows()).any(|i| (0..m.ncols()).any(|j| !(m[(i, j)].re.is_finite() && m[(i, j)].im.is_finite()))) {
        return Err(Error::invalid(format!("matrix {} has non-finite entries", source.matrix_id)));
    }
    let eigenvalues = if linalg::hermitian_defect(m) == 0.0 {
        linalg::hermitian_eigenvalues(m).map(|v| v.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
    } else {
        linalg::eigenvalues(m)
    }
    .map_err(|_| Error::NoConvergence(format!("eigenvalues of {}", source.matrix_id)))?;
    Ok(SpectrumResult { eigenvalues, source })
}

impl SpectrumResult {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn sum(&self) -> Complex64 {
        self.eigenvalues.iter().sum()
    }

    pub fn measure(&self) -> EmpiricalMeasure {
        EmpiricalMeasure { atoms: self.eigenvalues.clone() }
    }

    /// `(re, im)` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        crate::fsutil::write_atomic(path, &self.csv_bytes()?)
    }

    pub fn csv_bytes(&self) -> Result<Vec<u8>> {
        let rows: Vec<EigenRow> = self.eigenvalues.iter().map(|z| EigenRow { re: z.re, im: z.im }).collect();
        crate::fsutil::csv_bytes(&rows)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
struct EigenRow {
    re: f64,
    im: f64,
}

/// Read a `(re, im)` spectrum CSV as written by [`SpectrumResult::write_csv`].
pub fn parse_spectrum_csv(bytes: &[u8]) -> Result<Vec<Complex64>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "re" || &headers[1] != "im" {
        return Err(Error::Format(format!("spectrum CSV header must be re,im (got {headers:?})")));
    }
    let mut out = Vec::new();
    for row in rdr.deserialize::<EigenRow>() {
        let r = row?;
        if !(r.re.is_finite() && r.im.is_finite()) {
            return Err(Error::Format("non-finite eigenvalue".into()));
        }
        out.push(Complex64::new(r.re, r.im));
    }
    Ok(out)
}

/// Uniform probability measure on the eigenvalues.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    pub atoms: Vec<Complex64>,
}

impl EmpiricalMeasure {
    pub fn total_mass(&self) -> f64 {
        if self.atoms.is_empty() {
            0.0
        } else {
            self.atoms.len() as f64 * (1.0 / self.atoms.len() as f64)
        }
    }

    pub fn mass(&self, region: &Region) -> f64 {
        if self.atoms.is_empty() {
            return 0.0;
        }
        self.atoms.iter().filter(|z| region.contains(**z)).count() as f64 / self.atoms.len() as f64
    }
}

/// Fraction of eigenvalues with `|λ - center| <= r`, per radius.
pub fn empirical_cdf_disks(spec: &SpectrumResult, center: Complex64, radii: &[f64]) -> Vec<f64> {
    let m = spec.measure();
    radii.iter().map(|&r| m.mass(&Region::Disk { center, radius: r })).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase", deny_unknown_fields)]
pub enum Region {
    /// Closed disk.
    Disk { center: Complex64, radius: f64 },
    /// Closed rectangle.
    Rect { re_min: f64, re_max: f64, im_min: f64, im_max: f64 },
}

impl Region {
    pub fn contains(&self, z: Complex64) -> bool {
        match *self {
            Region::Disk { center, radius } => (z - center).norm() <= radius,
            Region::Rect { re_min, re_max, im_min, im_max } => {
                (re_min..=re_max).contains(&z.re) && (im_min..=im_max).contains(&z.im)
            }
        }
    }
}

/// Disks of the given radii about `center`.
pub fn disk_family(center: Complex64, radii: &[f64]) -> Vec<Region> {
    radii.iter().map(|&radius| Region::Disk { center, radius }).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeylMethod {
    Quadrature { resolution: usize },
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeylPrediction {
    pub regions: Vec<Region>,
    /// `μ{f_0 ∈ Λ} / vol` per region.
    pub fractions: Vec<f64>,
    /// Binomial standard errors for Monte-Carlo predictions, zero for quadrature.
    pub stderr: Vec<f64>,
}

pub fn weyl_predict(f: &SymbolSpec, space: &PhaseSpace, regions: &[Region], method: WeylMethod) -> Result<WeylPrediction> {
    if f.kind() != space.kind {
        return Err(Error::KindMismatch { expected: space.kind.name() });
    }
    let (values, weights) = match method {
        WeylMethod::Quadrature { resolution } => {
            let grid = liouville_quadrature(space, resolution);
            let vals = grid.points.iter().map(|p| f.eval_principal(p)).collect::<Result<Vec<_>>>()?;
            let total = grid.total_weight();
            (vals, Some(grid.weights.iter().map(|w| w / total).collect::<Vec<_>>()))
        }
        WeylMethod::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::invalid("Monte-Carlo prediction needs samples"));
            }
            (sample_symbol(f, samples, seed)?, None)
        }
    };
    let mut fractions = Vec::with_capacity(regions.len());
    let mut stderr = Vec::with_capacity(regions.len());
    for region in regions {
        match &weights {
            Some(w) => {
                let p: f64 = values.iter().zip(w).filter(|(v, _)| region.contains(**v)).map(|(_, w)| w).sum();
                fractions.push(p.clamp(0.0, 1.0));
                stderr.push(0.0);
            }
            None => {
                let n = values.len() as f64;
                let p = values.iter().filter(|v| region.contains(**v)).count() as f64 / n;
                fractions.push(p);
                stderr.push((p * (1.0 - p) / n).sqrt());
            }
        }
    }
    Ok(WeylPrediction { regions: regions.to_vec(), fractions, stderr })
}

/// `f_0` at `samples` independent uniform points of the phase space.
pub fn sample_symbol(f: &SymbolSpec, samples: usize, seed: u64) -> Result<Vec<Complex64>> {
    let mut stream = Stream::new(seed);
    (0..samples)
        .map(|_| {
            let p = match f.kind() {
                SpaceKind::Sphere => ManifoldPoint::Sphere(stream.sphere_point()),
                SpaceKind::Torus => ManifoldPoint::Torus { x: stream.uniform(), xi: stream.uniform() },
            };
            f.eval_principal(&p)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylRow {
    pub region: usize,
    pub empirical: f64,
    pub predicted: f64,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeylComparison {
    pub sup_deviation: f64,
    pub table: Vec<WeylRow>,
}

pub fn weyl_compare(empirical: &[f64], predicted: &WeylPrediction) -> Result<WeylComparison> {
    if empirical.len() != predicted.fractions.len() {
        return Err(Error::Dimension(format!(
            "{} empirical fractions against {} predicted regions",
            empirical.len(),
            predicted.fractions.len()
        )));
    }
    let table: Vec<WeylRow> = empirical
        .iter()
        .zip(&predicted.fractions)
        .enumerate()
        .map(|(region, (&e, &p))| WeylRow { region, empirical: e, predicted: p, deviation: (e - p).abs() })
        .collect();
    let sup_deviation = table.iter().map(|r| r.deviation).fold(0.0, f64::max);
    Ok(WeylComparison { sup_deviation, table })
}

/// Greedy nearest-neighbour pairing of two multisets; returns the largest
/// paired distance, or `None` when the sizes differ.
pub fn match_spectra(a: &[Complex64], b: &[Complex64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            pairs.push(((x - y).norm(), i, j));
        }
    }
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (mut used_a, mut used_b) = (vec![false; a.len()], vec![false; b.len()]);
    let mut worst: f64 = 0.0;
    let mut matched = 0;
    for (d, i, j) in pairs {
        if matched == a.len() {
            break;
        }
        if !used_a[i] && !used_b[j] {
            used_a[i] = true;
            used_b[j] = true;
            worst = worst.max(d);
            matched += 1;
        }
    }
    Some(worst)
}

/// Whether every eigenvalue lies in the disk of radius `sup|f| + δ‖G‖`.
pub fn within_spectral_bound(spec: &SpectrumResult, sup_f: f64, delta: f64, g_norm: f64) -> bool {
    let bound = sup_f + delta * g_norm;
    spec.eigenvalues.iter().all(|z| z.norm() <= bound * (1.0 + 1e-12) + 1e-12)
}

/// Weyl prediction `1 - sqrt(1 - r^2)` for `i x1 + x2` on disks about 0.
pub fn lowering_disk_cdf(r: f64) -> f64 {
    if r >= 1.0 {
        1.0
    } else {
        1.0 - (1.0 - r * r).max(0.0).sqrt()
    }
}
