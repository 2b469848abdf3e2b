//! Command-line front end for `impulse_mud`.

pub mod args;
pub mod commands;
pub mod config;
pub mod format;
pub mod manifest;
pub mod parse;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

use crate::args::{Cli, Command, Output};
use crate::manifest::RunManifest;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<impulse_mud::Error> for CliError {
    fn from(e: impulse_mud::Error) -> Self {
        match e {
            impulse_mud::Error::InvalidParameter(m) => CliError::Usage(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

/// Table produced by a command, with what is needed for its manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub csv: String,
    pub parameters: Vec<(String, String)>,
    pub seed: Option<u64>,
}

/// Parse `argv` (including the program name) and run the command.
///
/// Returns the process exit code. Help and version output count as success.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<String> = argv
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let argv = match config::expand(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    let (name, out, report) = match command {
        Command::Ber(a) => (
            "ber",
            a.out.clone(),
            with_threads(&a.out, || commands::ber(&a))?,
        ),
        Command::Are(a) => (
            "are",
            a.out.clone(),
            with_threads(&a.out, || commands::are(&a))?,
        ),
        Command::DumpPsi(a) => ("dump-psi", a.out.clone(), commands::dump_psi(&a)?),
        Command::DumpCodes(a) => ("dump-codes", a.out.clone(), commands::dump_codes(&a)?),
    };
    emit(name, &out, &report)
}

fn with_threads<F>(out: &Output, f: F) -> Result<Report, CliError>
where
    F: FnOnce() -> Result<Report, CliError> + Send,
{
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = out.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Runtime(format!("cannot start thread pool: {e}")))?;
    pool.install(f)
}

fn emit(name: &str, out: &Output, report: &Report) -> Result<(), CliError> {
    let io = |what: &str, e: std::io::Error| CliError::Runtime(format!("{what}: {e}"));
    match &out.output {
        Some(path) => {
            std::fs::write(path, &report.csv).map_err(|e| io(&path.display().to_string(), e))?
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(report.csv.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| io("stdout", e))?;
        }
    }
    let manifest_path = out.manifest.clone().or_else(|| {
        out.output.as_ref().map(|p| {
            let mut s = p.clone().into_os_string();
            s.push(".manifest");
            s.into()
        })
    });
    if let Some(path) = manifest_path {
        let m = RunManifest::new(
            name,
            report.parameters.clone(),
            report.seed,
            report.csv.as_bytes(),
        );
        std::fs::write(&path, m.render()).map_err(|e| io(&path.display().to_string(), e))?;
    }
    Ok(())
}
