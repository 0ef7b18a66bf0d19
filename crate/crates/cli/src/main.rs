//! `qrmark` command-line tool.
//!
//! Exit status: 0 on success, 1 when some items failed (they are listed in
//! the report), 2 on usage or configuration errors.

mod args;
mod corpus;
mod detect;
mod ingest;
mod plan;
mod report;
mod rs;

use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::Parser;
use serde_json::Value;

use args::{Cli, Command};
use report::Report;

/// What a command produced.
pub struct Outcome {
    pub result: Value,
    pub failures: usize,
    /// The command already printed its answer on stdout.
    pub printed: bool,
}

impl Outcome {
    pub fn new(result: Value, failures: usize) -> Self {
        Self { result, failures, printed: false }
    }

    pub fn ok(result: Value) -> Self {
        Self::new(result, 0)
    }

    pub fn printed(result: Value) -> Self {
        Self { result, failures: 0, printed: true }
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome> {
    let seed = cli.seed;
    let det = cli.deterministic;
    match &cli.command {
        Command::Synth(a) => corpus::synth(a, seed),
        Command::Embed(a) => corpus::embed(a),
        Command::Attack(a) => corpus::attack(a, seed),
        Command::Detect(a) => detect::detect(a, seed, det),
        Command::Rs(a) => rs::run(&a.op),
        Command::Profile(a) => detect::profile(a, seed),
        Command::Schedule(a) => plan::schedule(a),
        Command::Simulate(a) => plan::simulate_cmd(a),
        Command::Bench(a) => detect::bench(a, seed, det),
        Command::Rerun(_) => bail!("rerun cannot be nested"),
    }
}

fn execute(cli: Cli) -> Result<usize> {
    let cli = match cli.command {
        Command::Rerun(r) => {
            let mut cfg = Report::load(&r.from)?.config;
            if matches!(cfg.command, Command::Rerun(_)) {
                bail!("{} records a rerun, not a command", r.from.display());
            }
            cfg.command.set_report_path(r.report);
            cfg
        }
        _ => cli,
    };
    let out = dispatch(&cli)?;
    let path = cli.command.report_path().cloned();
    if path.is_some() || !out.printed {
        Report::new(&cli, out.result).write(path.as_deref())?;
    }
    if out.failures > 0 {
        eprintln!("{} item(s) failed", out.failures);
    }
    Ok(out.failures)
}

/// Uncorrectable words are per-item failures; everything else is a
/// configuration problem.
fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<qrmark::Error>() {
        Some(qrmark::Error::DecodeFailure(_)) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
