//! Command-line driver: synthesize networks, run rate sweeps, and execute
//! the verification suites. Exit codes: 0 success, 1 verification failure,
//! 2 configuration or input error.

use clap::{Parser, Subcommand};
use fourier2relu::harness::{
    emit_csv, run_oracle_suite, run_sweep, run_verify_lower, run_verify_upper, ExperimentConfig,
    HarnessError, MeasureSpec, VerifyReport,
};
use fourier2relu::piecewise::from_network_1d;
use fourier2relu::relu_net::ReluNetwork;
use fourier2relu::synthesizer::synthesize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "fourier2relu",
    about = "Compile functions given by their Fourier representation into deep ReLU \
             networks, and verify approximation rates against matching lower bounds."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize one network and report its measured loss and bounds.
    Synthesize {
        /// Experiment config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Override the unit budget (default: first entry of the config).
        #[arg(long)]
        budget: Option<u64>,
        /// Override the depth (default: first entry of the config).
        #[arg(long)]
        depth: Option<u32>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the synthesized network as JSON to this path.
        #[arg(long)]
        save_net: Option<PathBuf>,
        /// Write the realized one-dimensional function as CSV (x,value).
        #[arg(long)]
        dump_pwl: Option<PathBuf>,
        /// Write the synthesis report JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep every (depth, budget) pair of the config and emit CSV.
    Sweep {
        /// Experiment config (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Override the budget list (repeat the flag; must be increasing).
        #[arg(long)]
        budget: Vec<u64>,
        /// Override the depth list (repeat the flag).
        #[arg(long)]
        depth: Vec<u32>,
        /// Override the master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include the per-point wall-time column (not reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Check the constructive side: junction identities, unbiasedness,
    /// budget discipline, loss bounds, determinism.
    VerifyUpper {
        /// Experiment config (JSON); a built-in instance is used if absent.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Check the lower-bound side: pinned floors, floor compliance,
    /// crossing-number bound sweeps.
    VerifyLower {
        /// Experiment config (JSON); a built-in instance is used if absent.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also check a saved network (JSON) against the floor.
        #[arg(long)]
        load_net: Option<PathBuf>,
    },
    /// Cross-check the numerical oracles against closed forms.
    OracleSuite,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Ok(false) means a verification suite reported failures (exit 1); any
/// Err is a configuration or input problem (exit 2).
fn run(command: Command) -> Result<bool, HarnessError> {
    match command {
        Command::Synthesize { config, budget, depth, seed, save_net, dump_pwl, out } => {
            let mut cfg = ExperimentConfig::from_json_file(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let depth = depth.unwrap_or(cfg.depths[0]);
            let budget = budget.unwrap_or(cfg.budgets[0]);
            if (depth as f64) > cfg.smoothness {
                return Err(HarnessError::Config {
                    what: format!("depth {depth} exceeds smoothness {}", cfg.smoothness),
                });
            }
            if budget < 2 {
                return Err(HarnessError::Config {
                    what: "budget must be at least 2".into(),
                });
            }
            let (measure, _) = cfg.measure.build()?;
            let synth_config = fourier2relu::synthesizer::SynthesisConfig {
                depth,
                budget,
                radius: cfg.radius,
                smoothness: cfg.smoothness,
                samples: cfg.samples,
                retries: cfg.retries,
                seed: cfg.seed,
                mc_samples: cfg.mc_samples,
            };
            let (net, report) = synthesize(&measure, &synth_config)?;
            if let Some(path) = save_net {
                write_text(&path, &net.to_json())?;
            }
            if let Some(path) = dump_pwl {
                if measure.dim() != 1 {
                    return Err(HarnessError::Config {
                        what: format!(
                            "--dump-pwl requires input dimension 1, measure has dimension {}",
                            measure.dim()
                        ),
                    });
                }
                dump_pwl_csv(&net, &path)?;
            }
            let report_json = serde_json::to_string_pretty(&report).expect("report serializes");
            match out {
                Some(path) => write_text(&path, &report_json)?,
                None => out_line(&report_json),
            }
            Ok(true)
        }
        Command::Sweep { config, budget, depth, seed, out, timings } => {
            let mut cfg = ExperimentConfig::from_json_file(&config)?;
            if !budget.is_empty() {
                cfg.budgets = budget;
            }
            if !depth.is_empty() {
                cfg.depths = depth;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.validate()?;
            let outcome = run_sweep(&cfg)?;
            match out {
                Some(path) => {
                    let file = std::fs::File::create(&path).map_err(|e| HarnessError::Io {
                        path: path.display().to_string(),
                        message: e.to_string(),
                    })?;
                    emit_csv(&outcome.records, timings, file)?;
                }
                None => {
                    let stdout = std::io::stdout();
                    emit_csv(&outcome.records, timings, stdout.lock())?;
                }
            }
            // Slope fits go to stderr so the CSV stream stays clean.
            for fit in &outcome.slopes {
                match fit.slope {
                    Some(s) => eprintln!(
                        "slope depth={}: {s:.4} over {} points (budgets >= {})",
                        fit.depth, fit.points_used, fit.min_budget_in_fit
                    ),
                    None => eprintln!(
                        "slope depth={}: skipped ({} usable points, budgets >= {})",
                        fit.depth, fit.points_used, fit.min_budget_in_fit
                    ),
                }
            }
            Ok(true)
        }
        Command::VerifyUpper { config } => {
            let cfg = load_or_default(config.as_deref())?;
            let report = run_verify_upper(&cfg)?;
            Ok(print_report("verify-upper", &report))
        }
        Command::VerifyLower { config, load_net } => {
            let cfg = load_or_default(config.as_deref())?;
            let net = match load_net {
                Some(path) => Some(read_network(&path)?),
                None => None,
            };
            let report = run_verify_lower(&cfg, net.as_ref())?;
            Ok(print_report("verify-lower", &report))
        }
        Command::OracleSuite => {
            let report = run_oracle_suite()?;
            Ok(print_report("oracle-suite", &report))
        }
    }
}

fn load_or_default(path: Option<&Path>) -> Result<ExperimentConfig, HarnessError> {
    match path {
        Some(p) => ExperimentConfig::from_json_file(p),
        None => Ok(ExperimentConfig {
            measure: MeasureSpec::HardInstance { smoothness: 2, radius: 1.0, big_l: 8 },
            depths: vec![1, 2],
            budgets: vec![64, 256],
            smoothness: 2.0,
            radius: 1.0,
            retries: 3,
            seed: 0,
            samples: None,
            mc_samples: 4096,
        }),
    }
}

fn read_network(path: &Path) -> Result<ReluNetwork, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    ReluNetwork::from_json(&text).map_err(|e| HarnessError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn write_text(path: &Path, text: &str) -> Result<(), HarnessError> {
    std::fs::write(path, text).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn dump_pwl_csv(net: &ReluNetwork, path: &Path) -> Result<(), HarnessError> {
    let pwl = from_network_1d(net).map_err(|e| HarnessError::Config { what: e.to_string() })?;
    let file = std::fs::File::create(path).map_err(|e| HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let mut w = std::io::BufWriter::new(file);
    let io_err = |e: std::io::Error| HarnessError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    writeln!(w, "x,value").map_err(io_err)?;
    for (x, v) in pwl.breakpoints().iter().zip(pwl.values()) {
        writeln!(w, "{x},{v}").map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

// Plain print would panic when the consumer closes the pipe early
// (e.g. piping into head); dropping the tail of log output is fine.
fn out_line(text: &str) {
    let _ = writeln!(std::io::stdout(), "{text}");
}

fn print_report(name: &str, report: &VerifyReport) -> bool {
    for c in &report.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        out_line(&format!("VERIFY {}/{}: {} - {}", c.module, c.id, status, c.detail));
    }
    let passed = report.checks.iter().filter(|c| c.passed).count();
    out_line(&format!("{name}: {passed}/{} checks passed", report.checks.len()));
    report.all_passed()
}
