use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::run::{sha256_hex, Artifact, CdfRow, RunRecord};
use crate::error::{Error, Result};
use crate::grushin::DiagnosticsRow;
use crate::potential::{median, SweepRow};

pub const SUITES: [&str; 2] = ["integrity", "acceptance"];

pub const WEYL_TOLERANCE: f64 = 0.05;
pub const POTENTIAL_TOLERANCE: f64 = 0.05;
pub const SCHUR_TOLERANCE: f64 = 1e-6;
pub const NORM_RATIO_LIMIT: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub value: Option<f64>,
    pub threshold: Option<f64>,
    pub detail: String,
}

impl Check {
    fn new(name: &str, ok: bool, value: f64, threshold: f64, detail: String) -> Self {
        let status = if ok { Status::Pass } else { Status::Fail };
        Self { name: name.into(), status, value: Some(value), threshold: Some(threshold), detail }
    }

    fn skipped(name: &str, detail: impl Into<String>) -> Self {
        Self { name: name.into(), status: Status::Skipped, value: None, threshold: None, detail: detail.into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: String,
    pub run: String,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    /// No check failed. Skipped checks do not count against the run.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn skipped(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| c.status == Status::Skipped).map(|c| c.name.as_str()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// Checks a finished run against a named suite. `integrity` compares every
/// artifact with its recorded checksum; `acceptance` adds the statistical
/// checks, recomputed from the CSVs on disk.
pub fn verify(record: &RunRecord, suite: &str) -> Result<VerifyReport> {
    if !SUITES.contains(&suite) {
        return Err(Error::Config(format!("unknown suite {suite:?}; known suites: {}", SUITES.join(", "))));
    }
    let m = &record.manifest;
    let mut checks = vec![integrity(record)];
    let failed: Vec<String> = m.cells.iter().filter(|c| !c.ok()).map(|c| format!("N={} #{}: {}", c.n, c.index, c.status)).collect();
    checks.push(if failed.is_empty() {
        Check::new("cells", true, 0.0, 0.0, format!("{} cells completed", m.cells.len()))
    } else {
        Check::new("cells", false, failed.len() as f64, 0.0, failed.join("; "))
    });
    if suite == "acceptance" {
        checks.push(weyl(record));
        checks.push(potential(record));
        checks.push(b3_sign(record));
        checks.push(schur(record));
        checks.push(spectral_support(record));
        checks.push(gaussian_norm(record));
    }
    Ok(VerifyReport { suite: suite.into(), run: m.name.clone(), checks })
}

fn integrity(record: &RunRecord) -> Check {
    let mut bad = Vec::new();
    let mut count = 0;
    for a in record.manifest.artifacts() {
        count += 1;
        match std::fs::read(record.dir.join(&a.path)) {
            Ok(bytes) if sha256_hex(&bytes) == a.sha256 && bytes.len() as u64 == a.bytes => {}
            Ok(_) => bad.push(format!("{}: checksum mismatch", a.path)),
            Err(e) => bad.push(format!("{}: {e}", a.path)),
        }
    }
    if bad.is_empty() {
        Check::new("checksums", true, 0.0, 0.0, format!("{count} artifacts match"))
    } else {
        Check::new("checksums", false, bad.len() as f64, 0.0, bad.join("; "))
    }
}

fn read_rows<T: DeserializeOwned>(dir: &Path, a: &Artifact) -> Result<Vec<T>> {
    let path = dir.join(&a.path);
    let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
    let mut rows = Vec::new();
    for r in csv::Reader::from_reader(bytes.as_slice()).deserialize() {
        rows.push(r?);
    }
    Ok(rows)
}

/// Rows of the named artifact from every completed cell, keyed by `N`.
fn collect<T: DeserializeOwned>(record: &RunRecord, file: &str) -> Result<BTreeMap<usize, Vec<Vec<T>>>> {
    let mut out: BTreeMap<usize, Vec<Vec<T>>> = BTreeMap::new();
    for c in record.manifest.cells.iter().filter(|c| c.ok()) {
        if let Some(a) = c.artifacts.iter().find(|a| a.path.ends_with(file)) {
            out.entry(c.n).or_default().push(read_rows(&record.dir, a)?);
        }
    }
    Ok(out)
}

fn weyl(record: &RunRecord) -> Check {
    const NAME: &str = "weyl-law";
    let by_n = match collect::<CdfRow>(record, "/cdf.csv") {
        Ok(m) => m,
        Err(e) => return Check::skipped(NAME, e.to_string()),
    };
    let Some((n, tables)) = by_n.iter().next_back() else {
        return Check::skipped(NAME, "no disk-CDF tables");
    };
    let sups: Vec<f64> = tables.iter().map(|t| t.iter().map(|r| r.deviation).fold(0.0, f64::max)).collect();
    let worst = sups.iter().copied().fold(0.0, f64::max);
    let shown: Vec<String> = sups.iter().map(|s| format!("{s:.4}")).collect();
    Check::new(NAME, worst <= WEYL_TOLERANCE, worst, WEYL_TOLERANCE, format!("N={n}, per realization sup = [{}]", shown.join(", ")))
}

/// Per-probe median over realizations, then the median over probes.
fn potential_median(tables: &[Vec<SweepRow>]) -> Option<f64> {
    let mut per_probe: BTreeMap<(u64, u64), Vec<f64>> = BTreeMap::new();
    for r in tables.iter().flatten().filter(|r| r.deviation.is_finite()) {
        per_probe.entry((r.z_re.to_bits(), r.z_im.to_bits())).or_default().push(r.deviation);
    }
    let mut meds: Vec<f64> = per_probe.values_mut().filter_map(|v| median(v)).collect();
    median(&mut meds)
}

fn potential(record: &RunRecord) -> Check {
    const NAME: &str = "log-potential";
    let by_n = match collect::<SweepRow>(record, "/potential.csv") {
        Ok(m) => m,
        Err(e) => return Check::skipped(NAME, e.to_string()),
    };
    let meds: Vec<(usize, f64)> = by_n.iter().filter_map(|(n, t)| potential_median(t).map(|m| (*n, m))).collect();
    let (Some(first), Some(last)) = (meds.first(), meds.last()) else {
        return Check::skipped(NAME, "no potential tables");
    };
    let decreasing = meds.len() < 2 || last.1 < first.1;
    let shown: Vec<String> = meds.iter().map(|(n, m)| format!("N={n}: {m:.2e}")).collect();
    Check::new(NAME, last.1 <= POTENTIAL_TOLERANCE && decreasing, last.1, POTENTIAL_TOLERANCE, shown.join(", "))
}

fn diagnostics(record: &RunRecord) -> Result<BTreeMap<usize, Vec<Vec<DiagnosticsRow>>>> {
    collect::<DiagnosticsRow>(record, "/diagnostics.csv")
}

fn b3_sign(record: &RunRecord) -> Check {
    const NAME: &str = "b3-sign";
    let by_n = match diagnostics(record) {
        Ok(m) => m,
        Err(e) => return Check::skipped(NAME, e.to_string()),
    };
    let Some((n, tables)) = by_n.iter().next_back() else {
        return Check::skipped(NAME, "no Grushin diagnostics");
    };
    let rows: Vec<&DiagnosticsRow> = tables.iter().flatten().filter(|r| r.a >= 1).collect();
    if rows.is_empty() {
        return Check::skipped(NAME, format!("no realization at N={n} has A >= 1"));
    }
    let worst = rows.iter().map(|r| r.b3).fold(f64::NEG_INFINITY, f64::max);
    Check::new(NAME, worst < 0.0, worst, 0.0, format!("N={n}, {} realizations with A >= 1, largest B3", rows.len()))
}

fn schur(record: &RunRecord) -> Check {
    const NAME: &str = "schur-identity";
    let by_n = match diagnostics(record) {
        Ok(m) => m,
        Err(e) => return Check::skipped(NAME, e.to_string()),
    };
    let finite: Vec<f64> = by_n.values().flatten().flatten().map(|r| r.schur_residual).filter(|r| r.is_finite()).collect();
    if finite.is_empty() {
        return Check::skipped(NAME, "no finite Schur residuals");
    }
    let worst = finite.iter().copied().fold(0.0, f64::max);
    Check::new(NAME, worst <= SCHUR_TOLERANCE, worst, SCHUR_TOLERANCE, format!("{} residuals", finite.len()))
}

fn spectral_support(record: &RunRecord) -> Check {
    const NAME: &str = "spectral-support";
    let flags: Vec<bool> = record.manifest.cells.iter().filter_map(|c| c.summary.spectrum_in_bound).collect();
    if flags.is_empty() {
        return Check::skipped(NAME, "no perturbed spectra");
    }
    let outside = flags.iter().filter(|f| !**f).count();
    Check::new(NAME, outside == 0, outside as f64, 0.0, format!("{} of {} spectra outside sup|f| + delta |G|", outside, flags.len()))
}

fn gaussian_norm(record: &RunRecord) -> Check {
    const NAME: &str = "gaussian-norm";
    let ratios: Vec<f64> = record.manifest.cells.iter().filter_map(|c| c.summary.gaussian_norm_ratio).collect();
    if ratios.is_empty() {
        return Check::skipped(NAME, "no Gaussian samples");
    }
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    Check::new(NAME, worst <= NORM_RATIO_LIMIT, worst, NORM_RATIO_LIMIT, format!("largest |G|/sqrt(dim) over {} samples", ratios.len()))
}
