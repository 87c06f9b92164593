//! `maxtrunc-lab`: runs one configured experiment and writes CSV, SVG and a JSON report.
//!
//! Exit codes: 0 ok, 1 assertion failure, 2 config error (nothing written),
//! 3 numerical nonconvergence (partial report written).

mod config;
mod error;
mod experiments;
mod report;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::{ExperimentConfig, Kind, Overrides};
use error::RunError;
use report::{AssertionSummary, Outcome, RunReport, Status, Timings};

#[derive(Parser, Debug)]
#[command(name = "maxtrunc-lab", version, about = "Numerical experiments on maximal truncations and maximal Fourier operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Experiment kind, overriding the one in the config.
        #[arg(long)]
        kind: Option<String>,
        /// Worker threads; 0 uses one per core, 1 runs serially.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// List experiment kinds with their default parameters.
    List,
}

fn list() {
    for kind in Kind::ALL {
        println!("{}: {}", kind.name(), kind.summary());
        let params = serde_json::to_string_pretty(&kind.default_params()).expect("defaults serialize");
        for line in params.lines() {
            println!("    {line}");
        }
    }
}

fn with_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, RunError> {
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| RunError::Config(format!("thread pool: {e}")))?;
        Ok(pool.install(f))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        Ok(f())
    }
}

fn run(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    let started = Instant::now();
    let mut outcome = Outcome::default();
    let result = with_pool(cfg.threads, || experiments::run(cfg, &mut outcome))?;
    let experiment_seconds = started.elapsed().as_secs_f64();
    let (status, error) = match result {
        Ok(()) if outcome.assertions.iter().all(|a| a.holds) => (Status::Passed, None),
        Ok(()) => (Status::AssertionFailure, None),
        Err(e @ RunError::Numerical(_)) => (Status::Nonconvergence, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let passed = outcome.assertions.iter().filter(|a| a.holds).count();
    let report = RunReport {
        tool: format!("maxtrunc-lab {}", env!("CARGO_PKG_VERSION")),
        config: cfg.echo(),
        status,
        error,
        parallel_backend: maxtrunc_core::par::is_parallel(),
        summary: outcome.summary.clone(),
        assertion_summary: AssertionSummary {
            total: outcome.assertions.len(),
            passed,
            failed: outcome.assertions.len() - passed,
        },
        assertions: outcome.assertions.clone(),
        items: outcome.items.clone(),
        outputs: Vec::new(),
        timings: Timings { experiment_seconds, total_seconds: started.elapsed().as_secs_f64() },
    };
    report::write_outputs(&cfg.out, &outcome, report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            list();
            ExitCode::SUCCESS
        }
        Command::Run { config, seed, out, kind, threads } => {
            let ov = Overrides { kind, seed, out, threads };
            let result = std::fs::read_to_string(&config)
                .map_err(|e| RunError::Config(format!("cannot read {}: {e}", config.display())))
                .and_then(|text| ExperimentConfig::from_json(&text, &ov))
                .and_then(|cfg| run(&cfg));
            match result {
                Ok(report) => {
                    let s = &report.assertion_summary;
                    println!(
                        "{:?}: {} of {} assertions hold; outputs in {}",
                        report.status,
                        s.passed,
                        s.total,
                        report.config["out"].as_str().unwrap_or("?")
                    );
                    if let Some(e) = &report.error {
                        eprintln!("{e}");
                    }
                    ExitCode::from(report.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("{e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
    }
}
