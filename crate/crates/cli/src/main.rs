//! `ellbc CONFIG [--json-out PATH] [--threads N] [--seed S]`
//!
//! Exit codes: 0 all verdicts pass, 1 any FAIL or UNRELIABLE (or a numerical
//! breakdown), 2 configuration error.

mod config;
mod experiments;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use sha2::{Digest, Sha256};

use experiments::RunError;
use report::{emit_json, emit_text, Provenance, RunReport};

#[derive(Parser, Debug)]
#[command(name = "ellbc", version, about = "Run an elliptic boundary-condition experiment from a JSON config")]
struct Args {
    /// Experiment configuration (JSON, see schema/experiment.schema.json).
    config: PathBuf,
    /// Write the machine-readable report here.
    #[arg(long)]
    json_out: Option<PathBuf>,
    /// Worker threads for internal parallel loops (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Reserved; all sampling uses deterministic grids.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    ExitCode::from(run(&args) as u8)
}

fn run(args: &Args) -> i32 {
    if let Some(n) = args.threads {
        if n == 0 {
            eprintln!("config error: --threads must be positive");
            return 2;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: thread pool already initialised: {e}");
        }
    }
    let text = match std::fs::read_to_string(&args.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("config error: cannot read {}: {e}", args.config.display());
            return 2;
        }
    };
    let cfg = match config::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return 2;
        }
    };
    let start = Instant::now();
    let outcome = match experiments::run(&cfg) {
        Ok(o) => o,
        Err(RunError::Config(e)) => {
            eprintln!("config error: {e}");
            return 2;
        }
        Err(RunError::Numeric(msg)) => {
            eprintln!("numerical failure: {msg}");
            return 1;
        }
    };
    let provenance = Provenance {
        tool: "ellbc",
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: format!("{:x}", Sha256::digest(text.as_bytes())),
        tolerances: cfg.tolerances,
        sampling: cfg.sampling,
    };
    let report = RunReport::new(cfg.kind, outcome.verdicts, outcome.evidence, outcome.table, provenance);
    print!("{}", emit_text(&report, start.elapsed().as_secs_f64()));
    if let Some(path) = &args.json_out {
        if let Err(e) = std::fs::write(path, emit_json(&report)) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return 1;
        }
    }
    report.exit_code()
}
