//! `synth`: batch driver for the two-stage dead-time synthesis pipeline.
//!
//! Reads a JSON problem specification, runs stage 1 (optimal weighted
//! sensitivity with factorization certificates), the envelope construction,
//! and stage 2 (stable controller with deviation bound and stability
//! certificates), then writes `report.json` plus one CSV per requested
//! frequency-response trace.
//!
//! Exit codes: 0 all certificates pass, 1 input/validation error,
//! 2 certificate failure.

mod pipeline;
mod spec_file;
mod traces;

use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "synth", about = "H-infinity synthesis for dead-time plants")]
struct Cli {
    /// Problem specification (JSON).
    spec: PathBuf,
    /// Output directory for report.json and trace CSVs.
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated trace list (default: all; empty string: none).
    #[arg(long)]
    traces: Option<String>,
    /// Stop after stage 1; stage-2 certificates are reported as skipped.
    #[arg(long)]
    skip_stage2: bool,
    /// Which controller the K trace carries: the parameterization-consistent
    /// K = -Np^-1 Nc q_hat, or the literal -q_hat.
    #[arg(long, value_parser = ["literal", "consistent"], default_value = "consistent")]
    k_variant: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let raw = match std::fs::read_to_string(&cli.spec) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read spec {}: {e}", cli.spec.display());
            return ExitCode::from(1);
        }
    };
    let parsed: spec_file::SpecFile = match serde_json::from_str(&raw) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: spec parse error: {e}");
            return ExitCode::from(1);
        }
    };
    let spec = match spec_file::validate(parsed) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    let requested: Vec<String> = match cli.traces.as_deref() {
        None => traces::ALL_TRACES.iter().map(|s| s.to_string()).collect(),
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect(),
    };

    if let Err(e) = std::fs::create_dir_all(&cli.out) {
        eprintln!("error: cannot create output directory: {e}");
        return ExitCode::from(1);
    }

    let output = pipeline::run(&spec, cli.skip_stage2, &cli.k_variant);

    let report_json = serde_json::to_string_pretty(&output.report).expect("serialize report");
    if let Err(e) = std::fs::write(cli.out.join("report.json"), report_json) {
        eprintln!("error: output unwritable: {e}");
        return ExitCode::from(1);
    }
    match traces::emit_traces(&output, &spec, &requested, &cli.out, &cli.k_variant) {
        Ok(paths) => {
            for p in &paths {
                println!("wrote {}", p.display());
            }
        }
        Err(e) => {
            eprintln!("error: output unwritable: {e}");
            return ExitCode::from(1);
        }
    }

    let code = pipeline::exit_code(&output.report);
    for c in &output.report.certificates {
        println!(
            "certificate {:<24} {:>7}  margin {:+.3e}",
            c.name,
            match c.status {
                pipeline::CertStatus::Pass => "pass",
                pipeline::CertStatus::Fail => "FAIL",
                pipeline::CertStatus::Skipped => "skipped",
            },
            c.margin
        );
    }
    ExitCode::from(code as u8)
}
