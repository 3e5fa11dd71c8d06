use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use cat0_rigidity::config::{ExperimentConfig, ExperimentKind};
use cat0_rigidity::exec::{set_threads, Exec};
use cat0_rigidity::experiments::{run, ExperimentError};

#[derive(Parser)]
#[command(version, about = "Boundary experiments for group actions on CAT(0) model spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// F2×ℤ acting on tree×ℝ with and without a height shift.
    BowersRuane(Common),
    /// Doubling sequence in F2×ℤ for two tree weightings.
    #[command(name = "example-6-1")]
    Example61(Common),
    /// Lattice pairs and gluing complexes where the boundary map exists.
    RigidFamily(Common),
    /// Doubling sequence in a right-angled Coxeter group.
    CoxeterFamily(Common),
    /// Angle spectra of periodic directions for several edge lengths.
    ConjectureScan(Common),
}

#[derive(Args)]
struct Common {
    /// TOML experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Override the ball radius of (*) scans.
    #[arg(long)]
    ball: Option<u64>,
    /// Override the sequence length.
    #[arg(long)]
    horizon: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Run without the thread pool.
    #[arg(long)]
    sequential: bool,
}

const CONFIG_ERROR: u8 = 2;
const INVARIANT_VIOLATED: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            let config = e.chain().any(|c| {
                matches!(c.downcast_ref::<ExperimentError>(), Some(ExperimentError::Config(_)))
                    || c.downcast_ref::<cat0_rigidity::config::ConfigError>().is_some()
            });
            ExitCode::from(if config { CONFIG_ERROR } else { 1 })
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<u8> {
    let (kind, args) = match cli.command {
        Command::BowersRuane(a) => (ExperimentKind::BowersRuane, a),
        Command::Example61(a) => (ExperimentKind::Example61, a),
        Command::RigidFamily(a) => (ExperimentKind::RigidFamily, a),
        Command::CoxeterFamily(a) => (ExperimentKind::CoxeterFamily, a),
        Command::ConjectureScan(a) => (ExperimentKind::ConjectureScan, a),
    };
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if cfg.experiment != kind {
        return Err(cat0_rigidity::config::ConfigError::Invalid(format!(
            "{} is a {} config",
            args.config.display(),
            cfg.experiment.name()
        ))
        .into());
    }
    cfg.apply_overrides(args.ball, args.horizon, args.out)?;
    if let Some(k) = args.threads {
        set_threads(k);
    }
    let exec = if args.sequential { Exec::Sequential } else { Exec::Parallel };
    let report = run(&cfg, exec).with_context(|| format!("{} failed", kind.name()))?;
    let files = report.write(&cfg.out).context("writing the report")?;
    print!("{}", report.summary());
    for f in files {
        println!("  wrote {}", f.display());
    }
    Ok(if report.invariant_violations().is_empty() { 0 } else { INVARIANT_VIOLATED })
}
