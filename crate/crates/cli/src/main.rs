//! `mollow`: run, calibrate and check cascaded Mollow-spectroscopy scans.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mollow_core::checks::{oracle_report, run_checks};
use mollow_core::config::ScanConfig;
use mollow_core::emit::{self, Format};
use mollow_core::scan::{calibrate, run_scan};
use serde_json::json;

#[derive(Parser)]
#[command(name = "mollow", version, about = "Steady-state scans of a Mollow source cascaded into a JC or optomechanical target")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by the config.
    Scan(Common),
    /// Locate the Mollow windows of the uncoupled target and write the table.
    Calibrate(Common),
    /// Compare the closed forms with a numerical solve at the configured point.
    Oracle(Common),
    /// Run the invariant suite on small instances.
    Check(Common),
}

#[derive(Args)]
struct Common {
    /// Flat key-value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; results go to standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format for scans.
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Worker threads, overriding the config.
    #[arg(long)]
    workers: Option<usize>,
    /// Accepted for scripting; every computation is deterministic.
    #[arg(long)]
    seedless: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Svg,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
            FormatArg::Svg => Format::Svg,
        }
    }
}

struct Failure {
    kind: String,
    message: String,
}

impl From<mollow_core::Error> for Failure {
    fn from(e: mollow_core::Error) -> Self {
        Failure { kind: e.kind().to_string(), message: e.to_string() }
    }
}

fn extension(f: Format) -> &'static str {
    match f {
        Format::Csv => "csv",
        Format::Json => "json",
        Format::Svg => "svg",
    }
}

fn load(args: &Common) -> Result<ScanConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => ScanConfig::load(path)?,
        None => ScanConfig::default(),
    };
    if let Some(w) = args.workers {
        cfg.workers = Some(w);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(args: &Common, stem: &str, ext: &str, text: &str) -> Result<(), Failure> {
    let target = match &args.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| Failure { kind: "io".into(), message: format!("I/O error on {}: {e}", dir.display()) })?;
            Some(dir.join(format!("{stem}.{ext}")))
        }
        None => None,
    };
    emit::write_output(text, target.as_deref().map(Path::new))?;
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| Failure { kind: "parse".into(), message: e.to_string() })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Scan(args) => {
            let cfg = load(&args)?;
            let result = run_scan(&cfg)?;
            let format = Format::from(args.format);
            write(&args, "scan", extension(format), &emit::render(&result, format)?)?;
            if let Some(f) = &result.failure {
                return Err(Failure {
                    kind: f.kind.clone(),
                    message: format!("grid point {} (axis = {}) failed: {}", f.index, f.axis_value, f.message),
                });
            }
            Ok(())
        }
        Command::Calibrate(args) => {
            let table = calibrate(&load(&args)?)?;
            write(&args, "windows", "json", &to_json(&table)?)
        }
        Command::Oracle(args) => {
            let cfg = load(&args)?;
            let report = oracle_report(&cfg, &cfg.resolved().solver_options())?;
            write(&args, "oracle", "json", &to_json(&report)?)
        }
        Command::Check(args) => {
            let outcomes = run_checks(&load(&args)?)?;
            write(&args, "check", "json", &to_json(&outcomes)?)?;
            let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name.as_str()).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure { kind: "check-failed".into(), message: failed.join(", ") })
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let message = e.to_string();
            let first = message.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            eprintln!("{}", json!({ "error": "usage", "message": first }));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", json!({ "error": f.kind, "message": f.message }));
            ExitCode::FAILURE
        }
    }
}
