//! `bslab` — batch experiment runner.
//!
//! `bslab run <config.toml> [--out DIR] [--threads N] [--seed N]` executes
//! one experiment and writes `result.json`, `manifest.json`, and (when the
//! experiment produces them) `diagnostics.csv` / `estimates.csv` /
//! `kernel.csv` into the output directory.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical abort (blow-up
//! guard, quadrature non-convergence, diverging iteration).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use bslab_core::error::LabError;
use bslab_core::experiment::{describe, execute, ExperimentFile, ExperimentKind};

#[derive(Parser)]
#[command(name = "bslab", version, about = "Boson star equation laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config file
    Run {
        /// path to the experiment file
        config: PathBuf,
        /// output directory (default: the config file's stem)
        #[arg(long)]
        out: Option<PathBuf>,
        /// cap the worker thread count
        #[arg(long)]
        threads: Option<usize>,
        /// override every seeded knob in the config
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the config schema for an experiment kind
    Describe {
        /// simulate | simulate-dirac | picard | estimate-sweep |
        /// kernel-check | vnorm-check | scattering-compare
        kind: String,
    },
}

#[derive(Serialize)]
struct Manifest<'a> {
    kind: &'a str,
    config_path: String,
    config: &'a ExperimentFile,
    seed_override: Option<u64>,
    threads: Option<usize>,
    crate_version: &'a str,
    wall_time_s: f64,
}

fn exit_code_for(err: &LabError) -> u8 {
    match err {
        LabError::BlowUp { .. }
        | LabError::QuadratureNonConvergence(_)
        | LabError::PicardDiverged { .. } => 3,
        _ => 2,
    }
}

fn run_command(
    config: PathBuf,
    out: Option<PathBuf>,
    threads: Option<usize>,
    seed: Option<u64>,
) -> Result<(), (u8, String)> {
    let text = std::fs::read_to_string(&config)
        .map_err(|e| (2, format!("cannot read {}: {e}", config.display())))?;
    let mut file =
        ExperimentFile::from_toml(&text).map_err(|e| (exit_code_for(&e), e.to_string()))?;
    if let Some(s) = seed {
        file.override_seed(s);
    }
    if let Some(n) = threads {
        bslab_core::set_threads(n);
    }

    let out_dir = out.unwrap_or_else(|| {
        config
            .file_stem()
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("experiment-out"))
    });
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| (2, format!("cannot create {}: {e}", out_dir.display())))?;

    let started = std::time::Instant::now();
    let output = execute(&file).map_err(|e| (exit_code_for(&e), e.to_string()))?;
    let wall = started.elapsed().as_secs_f64();

    let write = |name: &str, body: &str| -> Result<(), (u8, String)> {
        std::fs::write(out_dir.join(name), body)
            .map_err(|e| (2, format!("cannot write {name}: {e}")))
    };
    write("result.json", &output.result_json(&file))?;
    if let Some(csv) = &output.diagnostics_csv {
        write("diagnostics.csv", csv)?;
    }
    if let Some((name, csv)) = &output.aux_csv {
        write(name, csv)?;
    }
    let manifest = Manifest {
        kind: file.kind.name(),
        config_path: config.display().to_string(),
        config: &file,
        seed_override: seed,
        threads,
        crate_version: env!("CARGO_PKG_VERSION"),
        wall_time_s: wall,
    };
    write(
        "manifest.json",
        &(serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n"),
    )?;
    println!("wrote {}", out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            out,
            threads,
            seed,
        } => match run_command(config, out, threads, seed) {
            Ok(()) => ExitCode::SUCCESS,
            Err((code, message)) => {
                eprintln!("error: {message}");
                ExitCode::from(code)
            }
        },
        Command::Describe { kind } => match ExperimentKind::parse(&kind) {
            Some(k) => {
                print!("{}", describe(k));
                ExitCode::SUCCESS
            }
            None => {
                eprintln!(
                    "error: unknown experiment kind `{kind}`; expected one of: {}",
                    ExperimentKind::ALL
                        .iter()
                        .map(|k| k.name())
                        .collect::<Vec<_>>()
                        .join(", ")
                );
                ExitCode::from(2)
            }
        },
    }
}
