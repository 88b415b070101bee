//! Experiment runner behind the `specdisc` binary.
//!
//! Exit status: `0` success, `1` a reported check failed (or golden files differ), `2` invalid
//! input (flags, config, input files, parameter ranges), `3` runtime failure.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod golden;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde_json::{json, Value};

use crate::args::{Cli, Command, GoldenAction};
use crate::config::Params;
use crate::error::{CliError, Result};
use crate::golden::{golden_compare, Tolerance};
use crate::report::{render, write_artifacts, Format};

/// Settings that shape the output but not the results.
#[derive(Debug, Clone)]
pub struct Output {
    pub format: Format,
    pub out_dir: Option<PathBuf>,
    pub plot: bool,
}

fn output_settings(params: &Params) -> Result<Output> {
    let format = match params.setting("format").as_deref() {
        None | Some("json") => Format::Json,
        Some("csv") => Format::Csv,
        Some(other) => return Err(params.error("format", format!("expected json or csv, got `{other}`"))),
    };
    let plot = match params.setting("plot").as_deref() {
        None | Some("false") => false,
        Some("true") => true,
        Some(other) => return Err(params.error("plot", format!("expected true or false, got `{other}`"))),
    };
    Ok(Output {
        format,
        out_dir: params.setting("out-dir").map(PathBuf::from),
        plot,
    })
}

fn configure_threads(params: &Params) -> Result<()> {
    if let Some(raw) = params.setting("threads") {
        let n: usize = raw
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| params.error("threads", format!("expected a positive integer, got `{raw}`")))?;
        // A second call in the same process keeps the first pool, which only matters in tests.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn read_value(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn golden(action: &GoldenAction, params: &Params, out: &Output, stdout: &mut dyn Write) -> Result<u8> {
    match action {
        GoldenAction::Compare { report, golden, .. } => {
            let tol = Tolerance {
                atol: params.number("atol", "1e-12")?,
                rtol: params.number("rtol", "1e-9")?,
            };
            if tol.atol < 0.0 || tol.rtol < 0.0 {
                return Err(params.error("atol", "tolerances must be nonnegative"));
            }
            let diffs = golden_compare(&read_value(report)?, &read_value(golden)?, tol);
            let text = match out.format {
                Format::Json => {
                    let mut s = serde_json::to_string_pretty(&json!({ "tolerance": tol, "diffs": diffs }))
                        .expect("diff serializes");
                    s.push('\n');
                    s
                }
                Format::Csv => diffs.iter().map(|d| format!("{d}\n")).collect(),
            };
            emit(stdout, &text)?;
            Ok(u8::from(!diffs.is_empty()))
        }
        GoldenAction::Bless { report, golden } => {
            read_value(report)?;
            if let Some(dir) = golden.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
                    path: dir.to_path_buf(),
                    source,
                })?;
            }
            std::fs::copy(report, golden).map_err(|source| CliError::Io {
                path: golden.clone(),
                source,
            })?;
            Ok(0)
        }
    }
}

fn emit(stdout: &mut dyn Write, text: &str) -> Result<()> {
    stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<u8> {
    let cmd = &cli.command;
    let mut flags = cmd.pairs();
    flags.extend(cli.global.pairs());
    let params = Params::resolve(cmd.name(), cmd.schema(), cli.config.as_deref(), flags)?;
    let out = output_settings(&params)?;
    configure_threads(&params)?;
    if let Command::Golden { action } = cmd {
        return golden(action, &params, &out, stdout);
    }
    let seed: u64 = params.parse("seed", "7")?;
    let mut report = commands::run(cmd, &params, seed)?;
    report.inputs = params.echoed();
    if let Some(dir) = &out.out_dir {
        write_artifacts(&report, dir, out.plot)?;
    }
    emit(stdout, &render(&report, out.format))?;
    let failed: Vec<&String> = report.checks.iter().filter(|(_, v)| !**v).map(|(k, _)| k).collect();
    if failed.is_empty() {
        Ok(0)
    } else {
        for k in failed {
            let _ = writeln!(stderr, "check failed: {k}");
        }
        Ok(1)
    }
}

/// Parses `args` (including the program name) and runs, returning the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
