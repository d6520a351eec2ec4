#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod manifest;

use clap::{Parser, Subcommand};
use commands::Failure;
use config::Config;
use std::path::PathBuf;
use std::process::ExitCode;

/// Kink collisions, Lax connections, spectral data and PT diagnostics for
/// integrable and deformed 1+1 dimensional field theories.
#[derive(Parser)]
#[command(name = "quasint", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Flat `key = value` run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `out` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `key=value`, applied after the config file. Repeatable.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Evolve a kink pair (or a single kink) and write the trajectory.
    Evolve,
    /// Spectral curves a(Λ), b(Λ) at several instants of a trajectory.
    Spectrum {
        /// Trajectory directory [default: <out>/trajectory].
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Wilson-loop scan around the collision centre.
    Wilson {
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// PT residuals and anomaly integral of a trajectory.
    Ptcheck {
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Pseudospectral KdV two-soliton run checked against the closed form.
    Kdv,
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Evolve => "evolve",
            Cmd::Spectrum { .. } => "spectrum",
            Cmd::Wilson { .. } => "wilson",
            Cmd::Ptcheck { .. } => "ptcheck",
            Cmd::Kdv => "kdv",
        }
    }
}

fn set_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("QUASINT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::validation(format!("QUASINT_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure { code: 1, msg: e.to_string() })
}

fn run(cli: Cli) -> Result<(), Failure> {
    set_threads()?;
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::validation(format!("{}: {e}", p.display())))?;
            Config::parse(&text, &p.display().to_string())?
        }
        None => Config::default(),
    };
    for o in &cli.overrides {
        cfg.set_pair(o).map_err(|e| Failure::validation(format!("--override {o}: {e}")))?;
    }
    let out = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(cfg.str_or("out", "out")));
    std::fs::create_dir_all(&out)?;
    let files = match &cli.cmd {
        Cmd::Evolve => commands::evolve(&cfg, &out),
        Cmd::Spectrum { trajectory } => commands::spectrum(&cfg, &out, trajectory),
        Cmd::Wilson { trajectory } => commands::wilson(&cfg, &out, trajectory),
        Cmd::Ptcheck { trajectory } => commands::ptcheck(&cfg, &out, trajectory),
        Cmd::Kdv => commands::kdv(&cfg, &out),
    }?;
    manifest::record(&out, cli.cmd.name(), &cfg.hash(), &files)?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code as u8)
        }
    }
}
