//! Batch front end: every subcommand produces a [`ReportBundle`] written as JSON or Markdown.
//!
//! Exit codes: 0 success, 2 usage, 3 data or I/O, 4 numerical failure.

mod args;
mod commands;
pub mod json;
pub mod markdown;
pub mod report;

use std::io::Write;
use std::path::Path;

use clap::Parser;

pub use args::Cli;
pub use markdown::report_markdown;
pub use report::{full_report, ReportBundle, ReportConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(repdiag::Error),
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(e) if e.is_numeric() => EXIT_NUMERIC,
            CliError::Core(_) | CliError::Output(_) => EXIT_DATA,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Core(e) if e.is_numeric() => write!(f, "numeric error: {e}"),
            CliError::Core(e) => write!(f, "data error: {e}"),
            CliError::Output(m) => write!(f, "output error: {m}"),
        }
    }
}

impl From<repdiag::Error> for CliError {
    fn from(e: repdiag::Error) -> Self {
        CliError::Core(e)
    }
}

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Arguments after the program name, minus `--threads` (it must not change the output bytes).
fn echoed_invocation(argv: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--threads" {
            it.next();
        } else if !a.starts_with("--threads=") {
            out.push(a.clone());
        }
    }
    out
}

/// Clap's multi-line message up to the usage block, joined onto one line.
fn one_line(msg: &str) -> String {
    let body: Vec<&str> = msg
        .lines()
        .take_while(|l| !l.starts_with("Usage:") && !l.starts_with("For more information"))
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect();
    body.join(" ").trim_start_matches("error: ").to_string()
}

/// Parse and run, returning the bundle and its rendered text without writing anything.
pub fn execute(argv: &[String]) -> Result<(ReportBundle, Vec<u8>, Option<std::path::PathBuf>), CliError> {
    let cli = Cli::try_parse_from(argv).map_err(|e| usage(one_line(&e.to_string())))?;
    let invocation = echoed_invocation(argv);
    let bundle = match cli.global.threads {
        Some(0) => return Err(usage("--threads must be at least 1")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Output(format!("thread pool: {e}")))?
            .install(|| commands::dispatch(&cli, invocation))?,
        None => commands::dispatch(&cli, invocation)?,
    };
    let text = match cli.global.format {
        args::Format::Json => bundle.to_json(),
        args::Format::Md => report_markdown(&bundle).into_bytes(),
    };
    Ok((bundle, text, cli.global.out.clone()))
}

fn write_output(text: &[u8], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Output(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text)
            .map_err(|e| CliError::Output(format!("stdout: {e}"))),
    }
}

/// Entry point for the binary. Diagnostics go to stderr as a single line.
pub fn run(argv: Vec<String>) -> i32 {
    if let Err(e) = Cli::try_parse_from(&argv) {
        use clap::error::ErrorKind;
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            let _ = e.print();
            return EXIT_OK;
        }
        if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
            let _ = e.print();
            return EXIT_USAGE;
        }
    }
    let result = execute(&argv).and_then(|(_, text, out)| write_output(&text, out.as_deref()));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or_default();
            eprintln!("repdiag: {first}");
            e.exit_code()
        }
    }
}
