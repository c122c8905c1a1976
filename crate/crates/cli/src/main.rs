//! `gammaflow` command-line entry point.
//!
//! The JSON report goes to stdout (or `--out`), one PASS/FAIL line per check goes
//! to stderr. Exit status: 0 when every check passes, 1 on a failed check or a
//! numerical failure, 2 on a usage error.

mod commands;
mod config;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use anyhow::Context;
use clap::Parser;
use serde_json::json;

use commands::{run, Failure, Table};
use config::{Cli, RunConfig};

fn write_csv(path: &std::path::Path, table: &Table) -> anyhow::Result<()> {
    let mut text = table.header.join(",");
    text.push('\n');
    for row in &table.rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(config: &RunConfig, report: &serde_json::Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    match &config.common.out {
        Some(path) => fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}")?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let config = RunConfig::from(Cli::parse());
    let header = |passed: bool| json!({ "tool": "gammaflow", "version": gammaflow::VERSION, "config": &config, "passed": passed });
    let (report, code) = match run(&config) {
        Ok(outcome) => {
            for line in &outcome.lines {
                eprintln!("{line}");
            }
            if let (Some(path), Some(table)) = (&config.common.csv, &outcome.table) {
                if let Err(e) = write_csv(path, table) {
                    eprintln!("error: {e:#}");
                    return ExitCode::from(2);
                }
            }
            let mut report = header(outcome.passed);
            report["result"] = outcome.result;
            (report, if outcome.passed { 0 } else { 1 })
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
        Err(Failure::Numerical(e)) => {
            eprintln!("FAIL {e}");
            let mut report = header(false);
            report["error"] = json!({ "message": e.to_string(), "detail": format!("{e:?}") });
            (report, 1)
        }
    };
    if let Err(e) = emit(&config, &report) {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    ExitCode::from(code)
}
