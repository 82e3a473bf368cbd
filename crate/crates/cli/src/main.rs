mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use causal_atlas::{Error, Target};
use clap::{Args, Parser, Subcommand};

use crate::config::{parse_grid, Overrides, RunConfig};

/// Causal imbeddings of 2D globally hyperbolic spacetimes into Minkowski
/// space and the Einstein cylinder.
#[derive(Debug, Parser)]
#[command(name = "causal-atlas", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample the metric and report signature or periodicity violations.
    CheckMetric(Flags),
    /// Imbed the events of a `t,x` CSV into the target.
    Embed(Flags),
    /// Run the order, null, conformality, equivariance and classification checks.
    Verify(Flags),
    /// Draw the imbedded region as SVG.
    Diagram(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// Metric JSON file, or `builtin[:k=v,...]`.
    #[arg(long)]
    metric: Option<String>,
    /// TOML file with defaults for any of these settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV of events with header `t,x`.
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long, value_parser = parse_target)]
    target: Option<Target>,
    /// Strictly increasing map of the slice onto the X axis, as an expression in x.
    #[arg(long)]
    surface_map: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Lattice resolution `NxM`.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<[usize; 2]>,
    /// Oracle slope margin; defaults to one lattice cell.
    #[arg(long)]
    margin: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the JSON verification report.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    tol_ode: Option<f64>,
    #[arg(long)]
    tol_event: Option<f64>,
    #[arg(long)]
    tol_causal: Option<f64>,
    #[arg(long)]
    tol_conf: Option<f64>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    dump_config: bool,
}

fn parse_target(s: &str) -> Result<Target, String> {
    match s {
        "minkowski" => Ok(Target::Minkowski),
        "einstein" => Ok(Target::Einstein),
        _ => Err(format!("unknown target '{s}' (expected minkowski or einstein)")),
    }
}

pub const EXIT_INPUT: u8 = 1;
pub const EXIT_CONTRACT: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_PROPERTY: u8 = 4;

pub fn exit_code_for(e: &Error) -> u8 {
    if e.is_numerical() {
        return EXIT_NUMERICAL;
    }
    match e {
        Error::Json { .. }
        | Error::Expr { .. }
        | Error::UnknownBuiltin(_)
        | Error::MissingField(_)
        | Error::InvalidSpec(_)
        | Error::Csv(_)
        | Error::Io(_) => EXIT_INPUT,
        _ => EXIT_CONTRACT,
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("CAUSAL_ATLAS_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, flags) = match cli.command {
        Command::CheckMetric(f) => ("check-metric", f),
        Command::Embed(f) => ("embed", f),
        Command::Verify(f) => ("verify", f),
        Command::Diagram(f) => ("diagram", f),
    };
    let overrides = Overrides {
        metric: flags.metric,
        seed: flags.seed,
        samples: flags.samples,
        grid: flags.grid,
        margin: flags.margin,
        points: flags.points,
        target: flags.target,
        surface_map: flags.surface_map,
        out: flags.out,
        report: flags.report,
        tol_ode: flags.tol_ode,
        tol_event: flags.tol_event,
        tol_causal: flags.tol_causal,
        tol_conf: flags.tol_conf,
    };
    let cfg = match RunConfig::load(name, flags.config.as_deref(), overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code_for(&e));
        }
    };
    if flags.dump_config {
        print!("{}", cfg.to_toml());
        return ExitCode::SUCCESS;
    }
    configure_threads();

    let result = match name {
        "check-metric" => commands::check_metric(&cfg),
        "embed" => commands::embed(&cfg),
        "verify" => commands::verify(&cfg),
        _ => commands::diagram(&cfg),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
