use std::path::Path;

use toeplab::harness::{self, ExperimentConfig, Manifest, RunRecord, Status};
use toeplab::Error;

const SMALL: &str = include_str!("../../../configs/sphere-small.toml");

fn small(dir: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    cfg.output_dir = Some(dir.to_path_buf());
    cfg
}

fn check<'a>(report: &'a harness::VerifyReport, name: &str) -> &'a harness::Check {
    report.checks.iter().find(|c| c.name == name).unwrap()
}

#[test]
fn config_round_trips_through_toml() {
    let cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    assert_eq!(cfg.n_list, vec![40, 80]);
    assert_eq!(cfg.disks.as_ref().unwrap().radii().len(), 20);
    let again = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
    assert_eq!(again, cfg);
}

#[test]
fn config_rejections() {
    let unknown = format!("{SMALL}\n[extra]\nkey = 1\n");
    assert!(matches!(ExperimentConfig::from_toml(&unknown), Err(Error::Config(_))));

    let mut cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    cfg.n_list.clear();
    assert!(cfg.validate().is_err());

    let mut cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    cfg.rho = 0.25;
    assert!(cfg.validate().is_err(), "rho must stay below epsilon");

    let mut cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    cfg.gamma = 0.3;
    assert!(cfg.validate().is_err());

    let mut cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    cfg.delta = toeplab::randmat::DeltaRule::Constant { value: 1.0 };
    assert!(cfg.validate().is_err());

    let mut cfg = ExperimentConfig::from_toml(SMALL).unwrap();
    cfg.space = toeplab::SpaceKind::Torus;
    assert!(cfg.validate().is_err());
}

#[test]
fn presets_validate() {
    for name in harness::PRESETS {
        let cfg = harness::preset(name, false).unwrap();
        assert!(cfg.n_list.contains(&harness::presets::DESK_SCALE));
        cfg.check_shape().unwrap();
        let full = harness::preset(name, true).unwrap();
        assert!(full.n_list.iter().any(|n| *n >= 1000));
    }
    assert!(harness::preset("nope", false).is_err());
}

#[test]
fn run_verify_and_tamper() {
    let dir = tempfile::tempdir().unwrap();
    let record = harness::run(&small(dir.path())).unwrap();
    let m = &record.manifest;
    assert_eq!(m.cells.len(), 4);
    assert!(m.cells.iter().all(|c| c.ok()), "{:?}", m.cells);
    for c in &m.cells {
        let names: Vec<&str> = c.artifacts.iter().map(|a| a.path.rsplit('/').next().unwrap()).collect();
        assert_eq!(names, ["spectrum.csv", "cdf.csv", "potential.csv", "diagnostics.csv"]);
    }
    let loaded = RunRecord::load(dir.path()).unwrap();
    assert_eq!(&loaded.manifest, m);

    let report = harness::verify(&loaded, "integrity").unwrap();
    assert!(report.passed(), "{}", report.to_json());
    let report = harness::verify(&loaded, "acceptance").unwrap();
    assert_eq!(check(&report, "schur-identity").status, Status::Pass);
    assert_eq!(check(&report, "gaussian-norm").status, Status::Pass);
    assert!(harness::verify(&loaded, "bogus").is_err());

    let victim = dir.path().join(&m.cells[0].artifacts[0].path);
    let mut bytes = std::fs::read(&victim).unwrap();
    bytes.push(b'\n');
    std::fs::write(&victim, bytes).unwrap();
    let report = harness::verify(&loaded, "integrity").unwrap();
    assert!(!report.passed());
    assert!(check(&report, "checksums").detail.contains("checksum mismatch"));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = harness::run(&small(a.path())).unwrap();
    let mut cfg = small(b.path());
    cfg.workers = 3;
    let rb = harness::run(&cfg).unwrap();
    let digests = |r: &RunRecord| r.manifest.artifacts().map(|x| (x.path.clone(), x.sha256.clone())).collect::<Vec<_>>();
    assert_eq!(digests(&ra), digests(&rb));
}

#[test]
fn partial_runs_skip_missing_checks() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.disks = None;
    cfg.grushin_probes.clear();
    let record = harness::run(&cfg).unwrap();
    let report = harness::verify(&record, "acceptance").unwrap();
    let mut skipped = report.skipped();
    skipped.sort();
    assert_eq!(skipped, ["b3-sign", "schur-identity", "weyl-law"]);
}

#[test]
fn failing_cells_do_not_stop_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    // Degree 2 cannot be quantized at N = 2, but N = 20 is fine.
    cfg.symbol = harness::presets::figure2_symbol();
    cfg.n_list = vec![2, 20];
    cfg.disks = None;
    cfg.grushin_probes.clear();
    let record = harness::run(&cfg).unwrap();
    let (bad, good): (Vec<_>, Vec<_>) = record.manifest.cells.iter().partition(|c| c.n == 2);
    assert!(bad.iter().all(|c| !c.ok() && c.artifacts.is_empty()));
    assert!(good.iter().all(|c| c.ok()));
    assert!(harness::verify(&record, "integrity").unwrap().checks.iter().any(|c| c.status == Status::Fail));
    assert!(dir.path().join("N20/cell0/spectrum.csv").exists());
}

#[test]
fn manifest_parser_rejects_garbage() {
    assert!(Manifest::parse(b"").is_err());
    assert!(Manifest::parse(b"{\"tool\": 3}").is_err());
}
