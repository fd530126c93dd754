use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{ExperimentConfig, Validation};
use crate::error::{Error, Result};
use crate::fsutil::{csv_bytes, write_atomic};
use crate::geometry::{liouville_quadrature, make_phase_space};
use crate::grushin::b_diagnostics;
use crate::linalg;
use crate::potential::{median, potential_from_spectrum, PushforwardGrid, SweepRow};
use crate::quantize::{quantize, ToeplitzMatrix};
use crate::randmat::{delta_window, perturb, sample_ginibre};
use crate::rng::derive_seed;
use crate::spectra::{disk_family, eigenvalues, empirical_cdf_disks, weyl_predict, SpectrumSource, WeylMethod};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TOOL_NAME: &str = "toeplab";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Artifact {
    /// Relative to the run directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellSummary {
    pub weyl_sup: Option<f64>,
    pub potential_median: Option<f64>,
    pub probes_used: usize,
    pub excluded_probes: usize,
    pub singular_probes: usize,
    /// `‖G‖ / sqrt(𝒩)`.
    pub gaussian_norm_ratio: Option<f64>,
    /// Every eigenvalue within `sup|f| + δ‖G‖` of the origin.
    pub spectrum_in_bound: Option<bool>,
    /// Largest Schur residual over the Grushin probes.
    pub schur_residual: Option<f64>,
    /// Whether `B3 < 0` at every Grushin probe with `A >= 1` (None when no probe had `A >= 1`).
    pub b3_negative: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellRecord {
    #[serde(rename = "N")]
    pub n: usize,
    pub index: usize,
    pub seed: u64,
    pub delta: f64,
    /// `"ok"` or the error that stopped the cell.
    pub status: String,
    pub artifacts: Vec<Artifact>,
    pub summary: CellSummary,
}

impl CellRecord {
    pub fn ok(&self) -> bool {
        self.status == "ok"
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SizeRecord {
    #[serde(rename = "N")]
    pub n: usize,
    pub dim: usize,
    pub status: String,
    pub artifacts: Vec<Artifact>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub name: String,
    pub config_hash: String,
    pub config: String,
    pub validation: Validation,
    pub wall_clock_seconds: f64,
    pub sizes: Vec<SizeRecord>,
    pub cells: Vec<CellRecord>,
}

impl Manifest {
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        Ok(serde_json::from_slice(bytes)?)
    }

    pub fn artifacts(&self) -> impl Iterator<Item = &Artifact> {
        self.sizes.iter().flat_map(|s| &s.artifacts).chain(self.cells.iter().flat_map(|c| &c.artifacts))
    }
}

/// A completed run on disk.
#[derive(Clone, Debug)]
pub struct RunRecord {
    pub dir: PathBuf,
    pub manifest: Manifest,
}

impl RunRecord {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        Ok(Self { dir: dir.to_path_buf(), manifest: Manifest::parse(&bytes)? })
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    sha256_hex(cfg.to_toml().as_bytes())
}

/// Disk-CDF table row.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CdfRow {
    pub radius: f64,
    pub empirical: f64,
    pub predicted: f64,
    pub deviation: f64,
}

struct Shared {
    probes: Vec<Complex64>,
    u_lim: Vec<f64>,
    sup_f: f64,
    disks: Option<(Complex64, Vec<f64>, Vec<f64>)>,
    grid: crate::geometry::QuadratureGrid,
}

struct Writer<'a> {
    root: &'a Path,
    artifacts: Vec<Artifact>,
}

impl Writer<'_> {
    fn put(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        write_atomic(&self.root.join(rel), bytes)?;
        self.artifacts.push(Artifact { path: rel.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(())
    }
}

/// Validate, then run every `(N, realization)` cell and write the manifest.
/// A failing cell is recorded and the remaining cells still run.
pub fn run(cfg: &ExperimentConfig) -> Result<RunRecord> {
    let start = Instant::now();
    let validation = cfg.validate()?;
    for w in &validation.warnings {
        log::warn!("{}: {w}", cfg.name);
    }
    let root = cfg.output_dir();
    std::fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;

    let (sizes, cells) = pool.install(|| -> Result<_> {
        let shared = prepare(cfg)?;
        let sizes: Vec<(SizeRecord, Option<ToeplitzMatrix>)> =
            cfg.n_list.par_iter().map(|&n| size_stage(cfg, &root, n)).collect();
        let jobs: Vec<(usize, usize)> = cfg
            .n_list
            .iter()
            .enumerate()
            .flat_map(|(k, _)| (0..cfg.realizations).map(move |i| (k, i)))
            .collect();
        let cells: Vec<CellRecord> = jobs
            .par_iter()
            .map(|&(k, i)| {
                let n = cfg.n_list[k];
                let seed = derive_seed(cfg.seed, n as u64, i as u64);
                let mut rec = CellRecord {
                    n,
                    index: i,
                    seed,
                    delta: cfg.schedule().delta(n),
                    status: "ok".into(),
                    artifacts: Vec::new(),
                    summary: CellSummary::default(),
                };
                let result = match &sizes[k].1 {
                    Some(t) => cell_stage(cfg, &shared, &root, t, &mut rec),
                    None => Err(Error::invalid(format!("quantization failed: {}", sizes[k].0.status))),
                };
                if let Err(e) = result {
                    log::error!("cell N={n} #{i}: {e}");
                    rec.status = e.to_string();
                }
                rec
            })
            .collect();
        Ok((sizes.into_iter().map(|s| s.0).collect::<Vec<_>>(), cells))
    })?;

    let manifest = Manifest {
        tool: TOOL_NAME.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        name: cfg.name.clone(),
        config_hash: config_hash(cfg),
        config: cfg.to_toml(),
        validation,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        sizes,
        cells,
    };
    write_atomic(&root.join("config.toml"), manifest.config.as_bytes())?;
    let json = serde_json::to_vec_pretty(&manifest)?;
    write_atomic(&root.join(MANIFEST_FILE), &json)?;
    Ok(RunRecord { dir: root, manifest })
}

fn prepare(cfg: &ExperimentConfig) -> Result<Shared> {
    let space = make_phase_space(cfg.space);
    let grid = liouville_quadrature(&space, cfg.quadrature);
    let push = PushforwardGrid::new(&cfg.symbol, &grid)?;
    let probes = cfg.probe_points(&push);
    let u_lim: Vec<f64> = probes.par_iter().map(|z| push.potential(*z)).collect();
    let mut sup_f: f64 = 0.0;
    for p in &grid.points {
        sup_f = sup_f.max(cfg.symbol.eval_principal(p)?.norm());
    }
    let disks = match &cfg.disks {
        Some(d) => {
            let radii = d.radii();
            let pred = weyl_predict(
                &cfg.symbol,
                &space,
                &disk_family(d.center, &radii),
                WeylMethod::Quadrature { resolution: cfg.quadrature },
            )?;
            Some((d.center, radii, pred.fractions))
        }
        None => None,
    };
    Ok(Shared { probes, u_lim, sup_f, disks, grid })
}

fn size_stage(cfg: &ExperimentConfig, root: &Path, n: usize) -> (SizeRecord, Option<ToeplitzMatrix>) {
    let mut w = Writer { root, artifacts: Vec::new() };
    let mut rec = SizeRecord { n, dim: 0, status: "ok".into(), artifacts: Vec::new() };
    let t = (|| -> Result<ToeplitzMatrix> {
        let t = quantize(&cfg.symbol, n)?;
        if cfg.unperturbed {
            let s = eigenvalues(&t.entries, SpectrumSource { matrix_id: t.id(), delta: 0.0, seed: None })?;
            w.put(&format!("N{n}/spectrum_unperturbed.csv"), &s.csv_bytes()?)?;
        }
        Ok(t)
    })();
    rec.artifacts = w.artifacts;
    match t {
        Ok(t) => {
            rec.dim = t.dim;
            (rec, Some(t))
        }
        Err(e) => {
            rec.status = e.to_string();
            (rec, None)
        }
    }
}

fn cell_stage(cfg: &ExperimentConfig, shared: &Shared, root: &Path, t: &ToeplitzMatrix, rec: &mut CellRecord) -> Result<()> {
    let n = t.n;
    let dir = format!("N{n}/cell{}", rec.index);
    let mut w = Writer { root, artifacts: Vec::new() };
    let outcome = (|| -> Result<()> {
        let delta = delta_window(n, &cfg.schedule())?.delta;
        let g = sample_ginibre(t.dim, rec.seed);
        let m = perturb(&t.entries, delta, &g);
        let spec = eigenvalues(&m, SpectrumSource { matrix_id: t.id(), delta, seed: Some(rec.seed) })?;
        w.put(&format!("{dir}/spectrum.csv"), &spec.csv_bytes()?)?;

        let g_norm = linalg::operator_norm(&g.entries)?;
        rec.summary.gaussian_norm_ratio = Some(g_norm / (t.dim as f64).sqrt());
        rec.summary.spectrum_in_bound =
            Some(crate::spectra::within_spectral_bound(&spec, shared.sup_f, delta, g_norm));

        if let Some((center, radii, predicted)) = &shared.disks {
            let emp = empirical_cdf_disks(&spec, *center, radii);
            let rows: Vec<CdfRow> = radii
                .iter()
                .zip(emp.iter().zip(predicted))
                .map(|(&radius, (&e, &p))| CdfRow { radius, empirical: e, predicted: p, deviation: (e - p).abs() })
                .collect();
            rec.summary.weyl_sup = Some(rows.iter().map(|r| r.deviation).fold(0.0, f64::max));
            w.put(&format!("{dir}/cdf.csv"), &csv_bytes(&rows)?)?;
        }

        let mut rows = Vec::new();
        for (z, ul) in shared.probes.iter().zip(&shared.u_lim) {
            if spec.eigenvalues.iter().any(|l| (z - l).norm() < cfg.probes.min_distance) {
                rec.summary.excluded_probes += 1;
                continue;
            }
            let ue = potential_from_spectrum(&spec.eigenvalues, *z);
            if ue == f64::NEG_INFINITY {
                rec.summary.singular_probes += 1;
            }
            rows.push(SweepRow { z_re: z.re, z_im: z.im, n, seed: rec.seed, u_emp: ue, u_lim: *ul, deviation: (ue - ul).abs() });
        }
        rec.summary.probes_used = rows.len();
        let mut devs: Vec<f64> = rows.iter().map(|r| r.deviation).filter(|d| d.is_finite()).collect();
        rec.summary.potential_median = median(&mut devs);
        w.put(&format!("{dir}/potential.csv"), &csv_bytes(&rows)?)?;

        if !cfg.grushin_probes.is_empty() {
            let mut diag = Vec::new();
            for z in &cfg.grushin_probes {
                diag.push(b_diagnostics(t, *z, cfg.rho, delta, &g, &shared.grid)?);
            }
            rec.summary.schur_residual = diag.iter().map(|d| d.schur_residual).reduce(f64::max);
            let with_a: Vec<_> = diag.iter().filter(|d| d.a >= 1).collect();
            rec.summary.b3_negative = if with_a.is_empty() { None } else { Some(with_a.iter().all(|d| d.b3 < 0.0)) };
            let rows: Vec<_> = diag.iter().map(|d| d.row()).collect();
            w.put(&format!("{dir}/diagnostics.csv"), &csv_bytes(&rows)?)?;
        }
        Ok(())
    })();
    rec.artifacts = w.artifacts;
    outcome
}
