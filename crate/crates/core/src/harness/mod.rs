//! Experiment configuration, seeded execution over `(N, realization)` cells,
//! artifact persistence and verification of finished runs.

pub mod config;
pub mod presets;
pub mod run;
pub mod verify;

pub use config::{DiskConfig, ExperimentConfig, ProbeConfig, Validation};
pub use presets::{preset, PRESETS};
pub use run::{run, Artifact, CellRecord, Manifest, RunRecord, MANIFEST_FILE};
pub use verify::{verify, Check, Status, VerifyReport, SUITES};
