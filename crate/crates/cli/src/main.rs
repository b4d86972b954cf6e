// Copyright 2026 Kerrnet Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use kerrnet_cli::commands;
use kerrnet_cli::config::ExperimentConfig;

#[derive(Parser)]
#[command(name = "kerrnet", version, about = "Kerr-cavity logic networks: reduction, sweeps and gate simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment configuration; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trajectories: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(t) = self.trajectories {
            cfg.trajectories = t;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build the reduction basis and write basis.txt.
    Reduce(Common),
    /// Steady-state outputs versus drive amplitude.
    SweepSteady(Common),
    /// Outputs under a linear drive ramp.
    SweepTime(Common),
    /// Fidelity of reduced steady states versus retained dimension.
    FidelityCurve(Common),
    /// Trajectory simulation of a logic gate under its test pattern.
    GateSim {
        #[command(flatten)]
        common: Common,
        /// Run the full latch at the full per-mode dimension.
        #[arg(long)]
        long: bool,
    },
    /// Check composed networks against closed forms and state validity.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Perturb the closed-form Hamiltonians by this amount (the run must then fail).
        #[arg(long, default_value_t = 0.0)]
        inject_fault: f64,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Reduce(c) => {
            commands::reduce(&c.load()?, &c.out)?;
        }
        Command::SweepSteady(c) => {
            commands::sweep_steady(&c.load()?, &c.out)?;
        }
        Command::SweepTime(c) => {
            commands::sweep_time(&c.load()?, &c.out)?;
        }
        Command::FidelityCurve(c) => {
            commands::fidelity(&c.load()?, &c.out)?;
        }
        Command::GateSim { common, long } => {
            commands::gate_sim(&common.load()?, &common.out, long)?;
        }
        Command::Validate { common, inject_fault } => {
            let report = commands::validate(&common.load()?, &common.out, inject_fault)?;
            println!("{} checks passed", report.checks.len());
        }
    }
    Ok(())
}
