//! `pgacc`: run the cruise-control experiments and write traces and summaries.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "pgacc", version, about = "EV adaptive cruise / pulse-and-glide simulator")]
pub struct Cli {
    /// Parameter file (JSON). Defaults to the bundled parameter set.
    #[arg(long, global = true, env = "PGACC_CONFIG")]
    pub config: Option<PathBuf>,
    /// Integration step in seconds; overrides the config file.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Seed for the optimizer's random streams.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Write outputs straight into this directory instead of `runs/<subcommand>-<timestamp>`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Car-following scenario: 1 = leader accelerates, 2 = cut-in.
    Acc(AccArgs),
    /// Drive-cycle energy comparison of regenerative and hydraulic braking.
    Nedc(NedcArgs),
    /// Free-road pulse-and-glide trip.
    Png(PngArgs),
    /// Free-road constant-speed trip.
    Cc(CcArgs),
    /// Tune pulse-and-glide accelerations for minimum SOC cost.
    Optimize(OptimizeArgs),
}

#[derive(Debug, Args)]
pub struct AccArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub scenario: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegenChoice {
    On,
    Off,
    Both,
}

#[derive(Debug, Args)]
pub struct NedcArgs {
    #[arg(long, value_enum, default_value_t = RegenChoice::Both)]
    pub regen: RegenChoice,
    /// Speed profile CSV (`time_s,speed_kmh`); defaults to the bundled NEDC.
    #[arg(long)]
    pub cycle: Option<PathBuf>,
    /// With `--regen both`, re-close the loop for the hydraulic run instead of replaying commands.
    #[arg(long)]
    pub closed_loop: bool,
}

#[derive(Debug, Args)]
pub struct PngArgs {
    #[arg(long, default_value_t = 0.6122, allow_negative_numbers = true)]
    pub ax1: f64,
    #[arg(long, default_value_t = -0.0552, allow_negative_numbers = true)]
    pub ax2: f64,
    /// Base speed in km/h; defaults to the config value.
    #[arg(long)]
    pub vc: Option<f64>,
    /// Half-width of the speed band in km/h; defaults to the config value.
    #[arg(long)]
    pub band: Option<f64>,
    #[arg(long, default_value_t = 5000.0)]
    pub distance: f64,
}

#[derive(Debug, Args)]
pub struct CcArgs {
    #[arg(long, default_value_t = 30.0, allow_negative_numbers = true)]
    pub speed: f64,
    #[arg(long, default_value_t = 5000.0)]
    pub distance: f64,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long, default_value_t = 20)]
    pub iterations: usize,
    #[arg(long, default_value_t = 20)]
    pub swarm: usize,
    /// Spread threshold for reseeding; defaults to half the swarm size.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Trip length of each fitness run in metres.
    #[arg(long, default_value_t = 5000.0)]
    pub distance: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code.clamp(0, 255) as u8);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
