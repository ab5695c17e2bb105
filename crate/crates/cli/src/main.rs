mod args;
mod commands;
mod output;

use std::io::{self, Write};
use std::process::ExitCode;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;
use umbrella_core::Exec;

use crate::args::{Cli, Format};
use crate::output::{sidecar_path, write_file, write_sidecar, Timings};

const THREADS_VAR: &str = "UMBRELLA_THREADS";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Compute(umbrella_core::Error),
    Io(io::Error),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Compute(_) => "computation",
            CliError::Io(_) => "io",
        }
    }

    fn status(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Compute(_) | CliError::Io(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => f.write_str(m),
            CliError::Compute(e) => e.fmt(f),
            CliError::Io(e) => e.fmt(f),
        }
    }
}

impl From<umbrella_core::Error> for CliError {
    fn from(e: umbrella_core::Error) -> Self {
        CliError::Compute(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

fn fail(err: &CliError) -> ExitCode {
    let record = json!({
        "status": "error",
        "kind": err.kind(),
        "exit_code": err.status(),
        "message": err.to_string(),
    });
    eprintln!("{record}");
    ExitCode::from(err.status())
}

fn configure_threads() -> Result<Option<usize>, CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size the thread pool: {e}")))?;
    Ok(Some(n))
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let g = &cli.global;
    if !(g.band > 0.0 && g.band.is_finite()) {
        return Err(CliError::Config(format!("--band must be positive, got {}", g.band)));
    }
    let threads = configure_threads()?;
    let exec = Exec::default();

    let start = Instant::now();
    let report = commands::run(&cli.command, g.band, exec)?;
    let compute_seconds = start.elapsed().as_secs_f64();

    let stdout = io::stdout();
    let mut out = stdout.lock();
    let Some(path) = &g.output else {
        match g.format {
            None if !report.summary.is_empty() => report.print_summary(&mut out)?,
            f => report.table.write(f.unwrap_or(Format::Csv), &mut out)?,
        }
        return Ok(out.flush()?);
    };

    let format = g.format.unwrap_or(Format::Csv);
    let start = Instant::now();
    write_file(path, format, &report.table)?;
    let timings = Timings { compute_seconds, write_seconds: start.elapsed().as_secs_f64() };
    let meta = json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": umbrella_core::VERSION,
        "argv": std::env::args().collect::<Vec<_>>(),
        "command": &cli.command,
        "output": path,
        "format": format,
        "band": g.band,
        "tolerances": report.tolerances,
        "exec": exec,
        "threads": threads,
        "columns": report.table.columns,
        "rows": report.table.rows.len(),
        "timings": timings,
    });
    write_sidecar(&sidecar_path(path), &meta)?;
    report.print_summary(&mut out)?;
    Ok(out.flush()?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(&CliError::Config(e.render().to_string().trim_end().to_string())),
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
