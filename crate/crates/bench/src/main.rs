use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gmd_bench::{csv_string, gmd_check, parse_config, run_sweep, sweep, with_threads, write_outputs, ExperimentSpec};

#[derive(Parser)]
#[command(name = "gmdsim", version, about = "BER sweeps for SVD/GMD hybrid precoding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep described by a config file (defaults if omitted).
    Run {
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// 128×16 reference sweep.
    Fig3 {
        #[command(flatten)]
        common: Common,
    },
    /// 256×16 reference sweep.
    Fig4 {
        #[command(flatten)]
        common: Common,
    },
    /// Check GMD invariants on random channels.
    GmdCheck {
        #[arg(long, default_value_t = 1000)]
        channels: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, env = "GMDSIM_THREADS", default_value_t = 0)]
        threads: usize,
    },
}

#[derive(Args)]
struct Common {
    /// Override a config key, e.g. `--set n_t=256` (repeatable).
    #[arg(long = "set", short = 's', value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, env = "GMDSIM_THREADS", default_value_t = 0)]
    threads: usize,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also print the CSV on standard output.
    #[arg(long)]
    stdout: bool,
    /// Suppress per-point progress on standard error.
    #[arg(long, short)]
    quiet: bool,
}

fn apply(mut spec: ExperimentSpec, common: &Common) -> Result<ExperimentSpec> {
    for o in &common.overrides {
        spec.set_assignment(o).with_context(|| format!("--set {o}"))?;
    }
    if let Some(seed) = common.seed {
        spec.config.master_seed = seed;
    }
    if let Some(out) = &common.out {
        spec.output_path = out.clone();
    }
    spec.validate()?;
    Ok(spec)
}

fn sweep_cmd(spec: ExperimentSpec, common: &Common) -> Result<()> {
    let spec = apply(spec, common)?;
    if !common.quiet {
        eprintln!("{} | {} -> {}", sweep::build_identity(), spec.name, spec.output_path.display());
    }
    let points = with_threads(common.threads, || run_sweep(&spec, !common.quiet))?;
    write_outputs(&spec, &points)?;
    if common.stdout {
        print!("{}", csv_string(&points));
    }
    Ok(())
}

fn run() -> Result<()> {
    match Cli::parse().command {
        Command::Run { config, common } => {
            let spec = match config {
                Some(path) => {
                    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    parse_config(&text).with_context(|| format!("parsing {}", path.display()))?
                }
                None => ExperimentSpec::default(),
            };
            sweep_cmd(spec, &common)
        }
        Command::Fig3 { common } => sweep_cmd(ExperimentSpec::fig3(), &common),
        Command::Fig4 { common } => sweep_cmd(ExperimentSpec::fig4(), &common),
        Command::GmdCheck { channels, seed, tol, threads } => {
            let report = with_threads(threads, || gmd_check(channels, seed))?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            if !report.passes(tol) {
                bail!("worst invariant deviation {:.3e} exceeds {tol:e}", report.worst());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
