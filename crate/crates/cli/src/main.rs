use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use eigennet_core::harness::{self, Experiment, ExperimentConfig, ExperimentReport};
use eigennet_core::Error;

/// Decentralized eigenvalue estimation experiments.
#[derive(Parser, Debug)]
#[command(name = "eigennet", version)]
struct Cli {
    /// ac-compare, eig-converge, multi-eig, roc, audit-messages or prop-check
    experiment: String,

    /// Configuration file (`key = value` lines)
    #[arg(long)]
    config: PathBuf,

    /// Output directory; overrides `output` from the config
    #[arg(long)]
    out: Option<PathBuf>,

    /// Master seed; overrides `seed`
    #[arg(long)]
    seed: Option<u64>,

    /// Monte-Carlo trials; overrides `trials`
    #[arg(long)]
    trials: Option<usize>,
}

const VALIDATION: u8 = 1;
const RUNTIME: u8 = 2;

fn load(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let experiment: Experiment = cli.experiment.parse()?;
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", cli.config.display())]))?;
    let mut cfg = harness::parse_config(&text, Some(experiment))?;
    if let Some(out) = &cli.out {
        cfg.output = out.clone();
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn is_validation(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_)
            | Error::InvalidArgument(_)
            | Error::Parse { .. }
            | Error::Disconnected
            | Error::GenerationFailed { .. }
    )
}

// Write errors (a closed pipe, say) are not worth a panic once results are on disk.
fn summarize(out: &mut impl Write, report: &ExperimentReport) -> io::Result<()> {
    let cfg = &report.config;
    writeln!(
        out,
        "{}: K={} N={} M={} trials={} ({:.2}s)",
        cfg.experiment, cfg.nodes, cfg.samples, cfg.iterations, cfg.trials, report.duration_secs
    )?;
    for c in &report.roc {
        for op in &c.operating {
            writeln!(
                out,
                "  {} via {}: alpha={} threshold={} pfa={} pd={}",
                c.detector,
                c.pipeline.name(),
                op.alpha,
                op.threshold,
                op.pfa,
                op.pd
            )?;
        }
    }
    for p in &report.prop {
        writeln!(
            out,
            "  {} {}: {} (tol {}) {}",
            p.check,
            p.quantity,
            p.value,
            p.tolerance,
            if p.pass { "ok" } else { "FAIL" }
        )?;
    }
    writeln!(out, "wrote results to {}", cfg.output.display())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { VALIDATION } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match load(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(VALIDATION);
        }
    };
    match harness::run_to_dir(&cfg, &cfg.output) {
        Ok(report) => {
            let _ = summarize(&mut io::stdout().lock(), &report);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if is_validation(&e) { VALIDATION } else { RUNTIME })
        }
    }
}
