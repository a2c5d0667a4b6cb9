//! `twistfock` command line: one command per run, configured by a TOML file.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use twistfock_cli::config::{Overrides, RunConfig};
use twistfock_cli::{commands, CliError};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "twistfock", version, about = "Twisted Fock space computations")]
struct Args {
    /// validate, gram, wick, moments, dq, conjugate, fisher, type, noninjectivity or transport
    command: String,
    #[arg(long)]
    config: PathBuf,
    /// Report file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    truncation: Option<usize>,
    #[arg(long)]
    series_order: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    size_cap: Option<usize>,
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long = "C-R")]
    c_r: Option<f64>,
    /// Run even when the twist fails the structural checks.
    #[arg(long)]
    force: bool,
}

fn execute(args: &Args) -> Result<bool, CliError> {
    let mut cfg = RunConfig::load(&args.config)?;
    cfg.apply(&Overrides {
        truncation: args.truncation,
        series_order: args.series_order,
        tolerance: args.tolerance,
        size_cap: args.size_cap,
        r: args.r,
        c_r: args.c_r,
    });
    let outcome = commands::run(&args.command, &cfg, args.force)?;
    let body = match args.format {
        Format::Json => outcome.report.to_json(),
        Format::Text => outcome.report.to_text(),
    };
    match &args.out {
        Some(path) => {
            std::fs::write(path, body)?;
            print!("{}", outcome.report.to_text());
        }
        None => println!("{body}"),
    }
    Ok(outcome.rejected)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
