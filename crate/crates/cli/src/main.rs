mod commands;
mod report;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::{ClassifyArgs, EvolveArgs, RankCheckArgs, ZooArgs};

/// Curvature-frame classification, higher-rank checks and Riccati evolution
/// on Riemannian three-manifolds.
#[derive(Debug, Parser)]
#[command(name = "rankframe", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Classification tolerance for the isotropic / extremal / generic partition.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,

    /// Fixed step for geodesic and Riccati integration.
    #[arg(long, global = true, default_value_t = 1e-3)]
    pub ode_step: f64,

    /// Seed for randomly drawn geodesic directions.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify points of a chart as isotropic, extremal or generic at epsilon.
    Classify(ClassifyArgs),
    /// Search for a normal parallel field of sectional curvature epsilon along geodesics.
    RankCheck(RankCheckArgs),
    /// Solve the trace Riccati equation with off-diagonal decay and log-volume.
    Evolve(EvolveArgs),
    /// List the builtin charts and their known curvature tables.
    Zoo(ZooArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut stdout = std::io::stdout().lock();
    let result = match &cli.command {
        Command::Classify(a) => commands::classify(&cli.global, a, args, &mut stdout),
        Command::RankCheck(a) => commands::rank_check(&cli.global, a, args, &mut stdout),
        Command::Evolve(a) => commands::evolve(&cli.global, a, args, &mut stdout),
        Command::Zoo(a) => commands::zoo(&cli.global, a, args, &mut stdout),
    };
    match result {
        Ok(commands::Outcome::Complete) => ExitCode::SUCCESS,
        Ok(commands::Outcome::AllRowsFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("rankframe: {e}");
            ExitCode::from(2)
        }
    }
}
