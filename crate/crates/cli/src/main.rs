use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use toeplab::geometry::{estimate_kappa, liouville_quadrature, log_grid, make_phase_space};
use toeplab::grushin::{b_diagnostics, write_diagnostics_csv};
use toeplab::harness::{self, ExperimentConfig};
use toeplab::potential::{potential_sweep, PushforwardGrid, SweepConfig};
use toeplab::quantize::{read_matrix, write_matrix};
use toeplab::randmat::{delta_window, perturb, sample_ginibre, DeltaRule, PerturbationSchedule};
use toeplab::rng::derive_seed;
use toeplab::spectra::{eigenvalues, SpectrumSource};
use toeplab::{quantize, SymbolSpec, ToeplitzMatrix};

/// Berezin-Toeplitz quantization experiments: quantize symbols, perturb the
/// matrices and compare their spectra with the classical predictions.
#[derive(Parser)]
#[command(name = "toeplab", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Experiment config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in experiment instead of a config file.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Run presets at N = 1000 or 2000 instead of the desk-scale N = 300.
    #[arg(long, global = true)]
    full_scale: bool,
    /// Override the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the matrix `T_N f` in the binary matrix format.
    Quantize {
        #[arg(long)]
        symbol: String,
        #[arg(long)]
        n: usize,
    },
    /// Eigenvalues of `T_N f + δ G` as CSV.
    Spectrum {
        /// Symbol record; give this and `--n`, or `--matrix`.
        #[arg(long, requires = "n")]
        symbol: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        /// Matrix file written by `quantize`.
        #[arg(long, conflicts_with = "symbol")]
        matrix: Option<PathBuf>,
        /// Perturbation size; zero gives the unperturbed spectrum.
        #[arg(long, conflicts_with = "rule")]
        delta: Option<f64>,
        /// `default` (`δ = N^(-1/2 - 2ε)`) or `weyl` (`δ = N^-1`).
        #[arg(long)]
        rule: Option<String>,
    },
    /// Empirical against limit log-potential over the config's probe grid.
    Potential,
    /// Grushin diagnostics `A, B1, B2, B3` for every `(N, realization)`.
    Grushin {
        /// Probe point `re,im`; defaults to the config's Grushin probes.
        #[arg(long, value_parser = parse_complex)]
        z: Vec<Complex64>,
        /// Overrides the config's `rho`.
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Execute an experiment and write its artifacts and manifest.
    Run,
    /// Check a finished run; exits nonzero when a check fails.
    Verify {
        /// Run directory holding `manifest.json`.
        dir: PathBuf,
        #[arg(long, default_value = "acceptance")]
        suite: String,
    },
    /// Estimate the regularity exponent of the symbol.
    Kappa {
        /// Symbol record; defaults to the config's symbol.
        #[arg(long)]
        symbol: Option<String>,
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        #[arg(long, default_value_t = 21)]
        grid: usize,
    },
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    let (re, im) = s.split_once(',').ok_or_else(|| format!("expected re,im, got {s:?}"))?;
    let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
    Ok(Complex64::new(p(re)?, p(im)?))
}

fn parse_rule(s: &str) -> Result<DeltaRule> {
    match s {
        "default" => Ok(DeltaRule::Default),
        "weyl" => Ok(DeltaRule::Weyl),
        other => bail!("unknown delta rule {other:?}; expected default or weyl"),
    }
}

impl Global {
    fn experiment(&self) -> Result<ExperimentConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(_), Some(_)) => bail!("give --config or --preset, not both"),
            (Some(path), None) => ExperimentConfig::load(path)?,
            (None, Some(name)) => harness::preset(name, self.full_scale)?,
            (None, None) => bail!("this command needs --config or --preset (presets: {})", harness::PRESETS.join(", ")),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        Ok(cfg)
    }

    fn out_or(&self, default: impl Into<PathBuf>) -> PathBuf {
        self.out.clone().unwrap_or_else(|| default.into())
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: &Cli) -> Result<ExitCode> {
    let g = &cli.global;
    if let Some(w) = g.workers {
        rayon::ThreadPoolBuilder::new().num_threads(w.max(1)).build_global().ok();
    }
    match &cli.command {
        Command::Quantize { symbol, n } => {
            let t = quantize(&SymbolSpec::parse_record(symbol)?, *n)?;
            let out = g.out_or(format!("{}.btqm", t.id()));
            write_matrix(&t, &out)?;
            println!("{} ({}x{}) -> {}", t.id(), t.dim, t.dim, out.display());
        }
        Command::Spectrum { symbol, n, matrix, delta, rule } => {
            let t: ToeplitzMatrix = match (symbol, n, matrix) {
                (Some(s), Some(n), None) => quantize(&SymbolSpec::parse_record(s)?, *n)?,
                (None, _, Some(path)) => read_matrix(path)?,
                _ => bail!("give --symbol with --n, or --matrix"),
            };
            let delta = match (delta, rule) {
                (Some(d), _) => *d,
                (None, Some(r)) => delta_window(t.n, &PerturbationSchedule::with_rule(parse_rule(r)?))?.delta,
                (None, None) => 0.0,
            };
            let seed = g.seed.unwrap_or(0);
            let m = if delta == 0.0 {
                t.entries.clone()
            } else {
                perturb(&t.entries, delta, &sample_ginibre(t.dim, seed))
            };
            let source = SpectrumSource { matrix_id: t.id(), delta, seed: (delta != 0.0).then_some(seed) };
            let spec = eigenvalues(&m, source)?;
            let bytes = spec.csv_bytes()?;
            match &g.out {
                Some(path) => write_file(path, &bytes)?,
                None => print!("{}", String::from_utf8_lossy(&bytes)),
            }
        }
        Command::Potential => {
            let cfg = g.experiment()?;
            cfg.validate()?;
            let space = make_phase_space(cfg.space);
            let push = PushforwardGrid::new(&cfg.symbol, &liouville_quadrature(&space, cfg.quadrature))?;
            let sweep = SweepConfig {
                symbol: cfg.symbol.clone(),
                n_list: cfg.n_list.clone(),
                schedule: cfg.schedule(),
                z_grid: cfg.probe_points(&push),
                seeds: (0..cfg.realizations as u64).map(|i| cfg.seed.wrapping_add(i)).collect(),
                min_distance: cfg.probes.min_distance,
                quadrature_resolution: cfg.quadrature,
            };
            let report = potential_sweep(&sweep)?;
            let out = g.out_or(cfg.output_dir().join("potential_sweep.csv"));
            report.write_csv(&out)?;
            for (n, m) in &report.medians {
                println!("N={n} median deviation {m:.3e}");
            }
            println!("excluded {} singular {} -> {}", report.excluded_probes, report.singular_probes, out.display());
        }
        Command::Grushin { z, rho } => {
            let cfg = g.experiment()?;
            cfg.validate()?;
            let probes = if z.is_empty() { cfg.grushin_probes.clone() } else { z.clone() };
            if probes.is_empty() {
                bail!("no probe points: pass --z or set grushin_probes in the config");
            }
            let rho = rho.unwrap_or(cfg.rho);
            let grid = liouville_quadrature(&make_phase_space(cfg.space), cfg.quadrature);
            let mut rows = Vec::new();
            for &n in &cfg.n_list {
                let t = quantize(&cfg.symbol, n)?;
                let delta = delta_window(n, &cfg.schedule())?.delta;
                for i in 0..cfg.realizations {
                    let gs = sample_ginibre(t.dim, derive_seed(cfg.seed, n as u64, i as u64));
                    for &zp in &probes {
                        let d = b_diagnostics(&t, zp, rho, delta, &gs, &grid)?;
                        println!(
                            "N={n} #{i} z={zp} A={} B1={:.4e} B2={:.4e} B3={:.4e} schur={:.1e}",
                            d.a, d.b1, d.b2, d.b3, d.schur_residual
                        );
                        rows.push(d.row());
                    }
                }
            }
            let out = g.out_or(cfg.output_dir().join("grushin.csv"));
            write_diagnostics_csv(&out, &rows)?;
            println!("-> {}", out.display());
        }
        Command::Run => {
            let mut cfg = g.experiment()?;
            if let Some(out) = &g.out {
                cfg.output_dir = Some(out.clone());
            }
            let record = harness::run(&cfg)?;
            let m = &record.manifest;
            let failed = m.cells.iter().filter(|c| !c.ok()).count();
            println!(
                "{}: {} cells ({} failed), kappa {:.3}, {:.1}s -> {}",
                m.name,
                m.cells.len(),
                failed,
                m.validation.kappa,
                m.wall_clock_seconds,
                record.dir.display()
            );
            if failed > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Verify { dir, suite } => {
            let record = harness::RunRecord::load(dir)?;
            let report = harness::verify(&record, suite)?;
            println!("{}", report.to_json());
            if !report.passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Kappa { symbol, samples, grid } => {
            let (f, seed) = match symbol {
                Some(s) => (SymbolSpec::parse_record(s)?, g.seed.unwrap_or(0)),
                None => {
                    let cfg = g.experiment()?;
                    (cfg.symbol, cfg.seed)
                }
            };
            let space = make_phase_space(f.kind());
            let push = PushforwardGrid::new(&f, &liouville_quadrature(&space, 64))?;
            let z = toeplab::potential::default_z_grid(push.image_box(), *grid, 0.5);
            let est = estimate_kappa(&f, &z, *samples, &log_grid(1e-4, 1e-1, 10), seed)?;
            println!("kappa {:.4} ({} probes fitted, {} skipped)", est.kappa, est.fits.len(), est.skipped.len());
        }
    }
    Ok(ExitCode::SUCCESS)
}
