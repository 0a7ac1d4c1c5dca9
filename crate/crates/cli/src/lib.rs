//! Command-line front end: experiment configs, artifact output and the benchmark harness.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::{run, Command, RunOptions, RunReport};

#[derive(Debug, Parser)]
#[command(name = "mcsbr", version, about = "Monte Carlo and deterministic shooting-and-bouncing-ray radar scattering")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Frequency sweep at one incidence.
    Sweep(RunArgs),
    /// Narrowband sweep over source angle.
    AngleSweep(RunArgs),
    /// Frequency sweep transformed to a range profile.
    RangeProfile(RunArgs),
    /// Frequency by angle data transformed to an ISAR image.
    Isar(RunArgs),
    /// Error of Monte Carlo sweeps against a reference over densities and seeds.
    Convergence(RunArgs),
    /// Paired Monte Carlo and deterministic runs: wall time and peak state memory.
    Bench(RunArgs),
    /// Analytic reference sweep.
    Oracle(RunArgs),
    /// Writes a built-in scene as a mesh and material map.
    Scene(SceneArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Experiment config (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the Monte Carlo seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads, 0 for all cores.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct SceneArgs {
    /// One of plate, sphere, pec_cube, dihedral, glass_cube, glass_cube_pec_bottom, nested, airplane_stub, layered.
    pub name: String,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub size_m: Option<f64>,
    #[arg(long)]
    pub radius_m: Option<f64>,
    #[arg(long)]
    pub subdivisions: Option<u32>,
    #[arg(long)]
    pub eps_r: Option<f64>,
}

/// Executes a parsed command line and returns the lines to print.
pub fn execute(cli: Cli) -> anyhow::Result<Vec<String>> {
    let (command, args) = match cli.command {
        CliCommand::Scene(s) => {
            let sc = config::SceneConfig {
                builtin: Some(s.name),
                size_m: s.size_m,
                radius_m: s.radius_m,
                subdivisions: s.subdivisions,
                eps_r: s.eps_r,
                ..Default::default()
            };
            let written = commands::write_scene(&sc, &s.out)?;
            return Ok(written.iter().map(|p| format!("wrote {}", p.display())).collect());
        }
        CliCommand::Sweep(a) => (Command::Sweep, a),
        CliCommand::AngleSweep(a) => (Command::AngleSweep, a),
        CliCommand::RangeProfile(a) => (Command::RangeProfile, a),
        CliCommand::Isar(a) => (Command::Isar, a),
        CliCommand::Convergence(a) => (Command::Convergence, a),
        CliCommand::Bench(a) => (Command::Bench, a),
        CliCommand::Oracle(a) => (Command::Oracle, a),
    };
    let report = run(command, RunOptions { config_path: args.config, seed: args.seed, workers: args.workers, out_dir: args.out })?;
    let mut lines = report.lines;
    lines.push(format!("config_sha256 {}", report.config_sha256));
    lines.extend(report.artifacts.iter().map(|p| format!("wrote {}", p.display())));
    Ok(lines)
}
