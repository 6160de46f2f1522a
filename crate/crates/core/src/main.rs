use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use gapcount::config::load_config;
use gapcount::pipeline::{exit_code, Command, Pipeline};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// Band functions on the configured k-grid.
    Bands,
    /// Counting corridor of the effective Hamiltonian.
    Effective,
    /// Dense 2D reference counts.
    Oracle,
    /// Corridor constants and asymptotic fits.
    Asympt,
    /// Every affordable stage plus report.txt.
    Report,
}

/// Eigenvalue counting in spectral gaps of magnetic Schrödinger operators.
#[derive(Debug, Parser)]
#[command(name = "gapcount", version)]
struct Cli {
    #[arg(value_enum)]
    command: Cmd,
    /// INI run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let command = match cli.command {
        Cmd::Bands => Command::Bands,
        Cmd::Effective => Command::Effective,
        Cmd::Oracle => Command::Oracle,
        Cmd::Asympt => Command::Asympt,
        Cmd::Report => Command::Report,
    };
    let cfg = match load_config(&cli.config) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("gapcount: {e}");
            return ExitCode::from(2);
        }
    };
    let out = cli.out.unwrap_or_else(|| cfg.out_dir.clone());
    let mut pipeline = Pipeline::new(&cfg, &out);
    let result = pipeline.run(command);
    if let Err(e) = &result {
        eprintln!("gapcount: {e}");
        if !pipeline.artifacts().is_empty() || matches!(e, gapcount::Error::Numerical(_)) {
            if let Err(m) = pipeline.write_manifest(e) {
                eprintln!("gapcount: could not write manifest: {m}");
            }
        }
    }
    for v in pipeline.verdicts() {
        eprintln!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    for a in pipeline.artifacts() {
        println!("{}", out.join(a).display());
    }
    ExitCode::from(exit_code(&result, command, pipeline.all_passed()) as u8)
}
