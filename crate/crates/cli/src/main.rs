//! `dlab` — batch checks for the p-adic tower/module toolkit.
//!
//! Every subcommand reads a TOML config, runs its check grid, and emits a
//! deterministic JSON report (schema 1): the resolved config is embedded,
//! rows are sorted by their parameters, and nothing time-dependent enters
//! the canonical body. Exit codes: 0 all checks passed, 1 some check
//! failed, 2 config/contract error, 3 precision failure.

mod commands;
mod formats;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::formats::{CliError, Report};

#[derive(Parser)]
#[command(
    name = "dlab",
    version,
    about = "desk-scale p-adic lab: slope factorization, tower trace identities, \
             finite-level Iwasawa decompositions, genus and corank bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Write the JSON report here (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the working precision from the config.
    #[arg(long)]
    prec: Option<u32>,
    /// Override the prime from the config.
    #[arg(long)]
    p: Option<u64>,
    /// Also write a flattened CSV table next to the JSON report.
    #[arg(long)]
    csv: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Newton polygons and slope factorization of polynomials (and of
    /// module characteristic polynomials).
    Slopes(CommonArgs),
    /// Correction constants and their defining identity.
    Epsilon(CommonArgs),
    /// Trace identities at tower points (including point-family norm
    /// relations).
    Can(CommonArgs),
    /// Norm-recurrence checks, root decomposition, determinant assembly.
    Decompose(CommonArgs),
    /// Genus formulas against the Riemann-Hurwitz evaluator.
    Genus(CommonArgs),
    /// Corank bound sums and curve presets.
    Bound(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, args) = match &cli.command {
        Cmd::Slopes(a) => ("slopes", a),
        Cmd::Epsilon(a) => ("epsilon", a),
        Cmd::Can(a) => ("can", a),
        Cmd::Decompose(a) => ("decompose", a),
        Cmd::Genus(a) => ("genus", a),
        Cmd::Bound(a) => ("bound", a),
    };
    match run(name, args) {
        Ok(report) => {
            let pass = report.pass;
            if let Err(e) = emit(&report, args) {
                eprintln!("dlab: {e}");
                return ExitCode::from(2);
            }
            eprintln!(
                "dlab {name}: {} rows, {} passed, {} failed",
                report.summary.total, report.summary.passed, report.summary.failed
            );
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("dlab {name}: {}", e.message);
            if let Some(hint) = &e.hint {
                eprintln!("hint: {hint}");
            }
            ExitCode::from(e.code)
        }
    }
}

fn run(name: &str, args: &CommonArgs) -> Result<Report, CliError> {
    let raw = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::config(format!("cannot read {}: {e}", args.config.display())))?;
    match name {
        "slopes" => commands::slopes::run(&raw, args.p, args.prec),
        "epsilon" => commands::epsilon::run(&raw, args.p, args.prec),
        "can" => commands::can::run(&raw, args.p, args.prec),
        "decompose" => commands::decompose::run(&raw, args.p, args.prec),
        "genus" => commands::genus::run(&raw),
        "bound" => commands::bound::run(&raw, args.p),
        _ => unreachable!(),
    }
}

fn emit(report: &Report, args: &CommonArgs) -> Result<(), String> {
    let json = serde_json::to_string_pretty(&report.body).map_err(|e| e.to_string())?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, json.as_bytes()).map_err(|e| e.to_string())?;
            if args.csv {
                let csv_path = path.with_extension("csv");
                std::fs::write(csv_path, report.csv.as_bytes()).map_err(|e| e.to_string())?;
            }
        }
        None => {
            println!("{json}");
            if args.csv {
                eprintln!("--csv requires --out");
            }
        }
    }
    Ok(())
}
