//! `dbar <mode> --config path [--override key=value] [--out path]`
//!
//! Exit codes: 0 success, 1 configuration or validation error, 2 numerical
//! failure, 3 tolerance breach in the checking modes.

mod config;
mod output;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use config::{apply_overrides, Format, Mode, RunConfig};
use dbar_core::Error;

#[derive(Parser, Debug)]
#[command(name = "dbar", version, about = "Integral solution operators for the Cauchy-Riemann equations on product domains")]
struct Cli {
    #[arg(value_enum)]
    mode: Mode,
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override a top-level scalar field, e.g. `fd_step=1e-3`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Report path; defaults to `output.path` or stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Input(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

fn load(cli: &Cli) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", cli.config.display())))?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::Input(format!("invalid JSON config: {e}")))?;
    apply_overrides(&mut value, &cli.overrides)?;
    let mut config: RunConfig =
        serde_json::from_value(value).map_err(|e| Failure::Input(format!("invalid config: {e}")))?;
    if config.mode.is_some_and(|m| m != cli.mode) {
        return Err(Failure::Input(format!(
            "config mode {} differs from command {}",
            config::mode_name(config.mode.unwrap()),
            config::mode_name(cli.mode)
        )));
    }
    config.mode = Some(cli.mode);
    Ok(config)
}

fn execute(cli: &Cli) -> Result<Option<bool>, Failure> {
    if let Ok(t) = std::env::var("DBAR_THREADS") {
        let threads = t
            .parse::<usize>()
            .map_err(|_| Failure::Input(format!("DBAR_THREADS must be a positive integer, got {t:?}")))?;
        dbar_core::exec::init_threads(threads);
    }
    let config = load(cli)?;
    let (outcome, elapsed) = run::run(&config)?;
    let mut body = Vec::new();
    match config.output.format {
        Format::Json => {
            let report = run::report(&config, &outcome, elapsed)?;
            serde_json::to_writer_pretty(&mut body, &report).map_err(|e| Failure::Numerical(e.to_string()))?;
            body.push(b'\n');
        }
        Format::Csv => outcome
            .table
            .write_csv(&mut body)
            .map_err(|e| Failure::Input(format!("cannot write CSV: {e}")))?,
    }
    let path = cli.out.clone().or_else(|| config.output.path.as_ref().map(PathBuf::from));
    match path {
        Some(p) => std::fs::write(&p, &body).map_err(|e| Failure::Input(format!("cannot write {}: {e}", p.display())))?,
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&body)
                .map_err(|e| Failure::Input(format!("cannot write report: {e}")))?
        }
    }
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(Some(false)) => {
            eprintln!("tolerance check failed");
            ExitCode::from(3)
        }
        Ok(_) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
