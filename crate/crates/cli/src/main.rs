use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use lntail::check_assumption_a;
use lntail_cli::config::{ConfigError, Experiment, ExperimentConfig, GammaGrid};
use lntail_cli::output::{write_diagnostics_csv, write_sweep_csv};
use lntail_cli::runner::{diagnose, run_estimate, run_sweep, SweepReport};

/// Left-tail probabilities of correlated lognormal sums by importance
/// sampling and control variates.
#[derive(Parser, Debug)]
#[command(name = "lntail", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the estimators at a single threshold
    Estimate(Opts),
    /// Run the estimators over the configured threshold grid
    Sweep(Opts),
    /// Lemma probes and closed-form checks under the dominant tilt
    Diagnose(Opts),
}

#[derive(Args, Debug)]
struct Opts {
    /// TOML experiment configuration
    #[arg(long)]
    config: PathBuf,

    /// Threshold γ > 0, replacing the configured grid
    #[arg(long, conflicts_with = "log_gamma")]
    gamma: Option<f64>,

    /// Threshold given as log γ, replacing the configured grid
    #[arg(long, allow_hyphen_values = true)]
    log_gamma: Option<f64>,

    /// Samples per estimator per threshold
    #[arg(long)]
    samples: Option<u64>,

    #[arg(long)]
    seed: Option<u64>,

    /// Comma-separated subset of naive, is, is-cv-beta-star, is-cv-fixed
    #[arg(long, value_delimiter = ',')]
    estimator: Option<Vec<String>>,

    /// Output file (default stdout)
    #[arg(long)]
    output: Option<PathBuf>,

    /// Worker threads
    #[arg(long)]
    threads: Option<usize>,
}

impl Opts {
    fn load(&self) -> Result<Experiment, ConfigError> {
        let mut cfg = ExperimentConfig::from_path(&self.config)?;
        if let Some(g) = self.gamma {
            cfg.gamma_grid = GammaGrid::Linear { gammas: vec![g] };
        }
        if let Some(l) = self.log_gamma {
            cfg.gamma_grid = GammaGrid::Log {
                log_gammas: vec![l],
            };
        }
        if let Some(m) = self.samples {
            cfg.samples = m;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(e) = &self.estimator {
            cfg.estimators = e.clone();
        }
        if let Some(o) = &self.output {
            cfg.output = Some(o.clone());
        }
        if let Some(t) = self.threads {
            cfg.threads = Some(t);
        }
        cfg.validate()
    }
}

fn open_output(exp: &Experiment) -> anyhow::Result<Box<dyn Write>> {
    Ok(match &exp.config.output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn report_sweep(report: &SweepReport, exp: &Experiment) -> anyhow::Result<u8> {
    for w in report.warnings() {
        eprintln!("warning: {w}");
    }
    for row in &report.rows {
        if let Some(e) = row.error_message() {
            eprintln!("error: {e}");
        }
    }
    let mut out = open_output(exp)?;
    write_sweep_csv(report, &mut out)?;
    out.flush()?;
    Ok(if report.failed_rows() > 0 { 2 } else { 0 })
}

/// Exit status: 0 success, 1 configuration or validation error, 2 some rows
/// failed.
fn run(cli: Cli) -> anyhow::Result<u8> {
    let opts = match &cli.command {
        Command::Estimate(o) | Command::Sweep(o) | Command::Diagnose(o) => o,
    };
    let exp = match opts.load() {
        Ok(exp) => exp,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(1);
        }
    };
    if let Some(n) = exp.config.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot start worker pool")?;
    }
    match cli.command {
        Command::Estimate(_) => {
            if exp.thresholds.len() != 1 {
                eprintln!(
                    "error: estimate needs a single threshold (pass --gamma or --log-gamma), the grid has {}",
                    exp.thresholds.len()
                );
                return Ok(1);
            }
            let dominance = check_assumption_a(&exp.problem);
            let row = run_estimate(&exp, &dominance, 0, exp.thresholds[0]);
            let report = SweepReport {
                experiment: exp.clone(),
                dominance,
                rows: vec![row],
            };
            report_sweep(&report, &exp)
        }
        Command::Sweep(_) => report_sweep(&run_sweep(&exp), &exp),
        Command::Diagnose(_) => match diagnose(&exp) {
            Ok(report) => {
                let mut out = open_output(&exp)?;
                write_diagnostics_csv(&report, &mut out)?;
                out.flush()?;
                Ok(0)
            }
            Err(e) => {
                eprintln!("error: {e}");
                Ok(1)
            }
        },
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
