//! The `irho` command-line runner.
//!
//! Exit codes: 0 success, 1 a built-in assertion failed, 2 usage error,
//! 3 I/O error.

pub mod commands;
pub mod error;
pub mod output;
pub mod settings;

use std::ffi::OsString;
use std::io::Write;
use std::time::Instant;

use clap::Parser;

use crate::error::{CliError, Result};
use crate::output::RunOutput;
use crate::settings::{parse_config, Args, Settings};

pub fn load_settings(args: Args) -> Result<Settings> {
    let config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            parse_config(&text)?
        }
        None => Default::default(),
    };
    Settings::resolve(args, &config)
}

/// Runs the command and returns every record, the summary last.
pub fn execute(settings: &Settings) -> Result<RunOutput> {
    let mut out = RunOutput::new(
        settings.command_name(),
        settings.seed,
        settings.config_hash(),
    );
    let summary = commands::dispatch(settings, &mut out)?;
    let passed = out.passed();
    let failed = out.failed_assertions.clone();
    out.push(
        summary
            .with("assertions_passed", passed)
            .with("failed_assertions", failed),
    );
    Ok(out)
}

fn write_output(settings: &Settings, bytes: &[u8]) -> Result<()> {
    match &settings.out {
        Some(path) => std::fs::write(path, bytes).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|source| CliError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

/// Parses `argv`, runs, writes the records and returns the exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(argv) {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let started = Instant::now();
    let result = load_settings(args).and_then(|settings| {
        let out = execute(&settings)?;
        write_output(&settings, &out.render(settings.format))?;
        Ok(out)
    });
    match result {
        Ok(out) => {
            eprintln!(
                "{}: {:.3} s wall time",
                out.command,
                started.elapsed().as_secs_f64()
            );
            if out.passed() {
                0
            } else {
                eprintln!("assertion failed: {}", out.failed_assertions.join("; "));
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
