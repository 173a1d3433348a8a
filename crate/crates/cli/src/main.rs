//! `homflow`: root systems, flow classification and shrinking-target
//! simulations on the modular surface.

mod commands;
mod config;
mod error;
mod manifest;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use homflow_core::rootsys::RootType;

use crate::error::EX_USAGE;

#[derive(Debug, Parser)]
#[command(name = "homflow", version, about = "Decay classification and shrinking-target experiments for homogeneous flows")]
pub struct Cli {
    /// Seed for simulations (falls back to the config key, then HOMFLOW_SEED)
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads (default: all cores)
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub workers: Option<u32>,

    /// Output directory; results are also written there as files
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a root system and print its cascade, ξ and dominance verdict
    Rootsys {
        #[arg(long = "type", value_parser = parse_root_type)]
        root_type: RootType,
        #[arg(long)]
        rank: usize,
        /// Comma-separated fields to print
        #[arg(long, value_delimiter = ',', default_value = "cascade,xi,dominance")]
        show: Vec<Show>,
    },
    /// Classify a flow generator given as a JSON matrix ("-" reads stdin)
    AnalyzeFlow {
        input: PathBuf,
        /// Relative tolerance for the Jordan split
        #[arg(long, default_value_t = homflow_core::liealg::DEFAULT_TOL)]
        tol: f64,
        /// Increasing positive times for the λ₁ profile
        #[arg(long, value_delimiter = ',')]
        t_grid: Option<Vec<f64>>,
    },
    /// Decide summable decay for a group spec in JSON ("-" reads stdin); exit 0 yes, 1 no, 2 conditional
    Classify { input: PathBuf },
    /// Run a Monte Carlo experiment from a config file
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Summarize a finished run from its manifest
    Report { manifest: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Show {
    Roots,
    Cascade,
    Maximal,
    Xi,
    Lambda1,
    Dominance,
}

fn parse_root_type(s: &str) -> Result<RootType, String> {
    s.parse().map_err(|e: homflow_core::Error| e.to_string())
}

fn main() -> ExitCode {
    let keys = config::keys_help();
    let cmd = Cli::command().after_long_help(keys.clone()).mut_subcommand("simulate", |s| s.after_help(keys));
    let cli = match cmd.try_get_matches().and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EX_USAGE as u8 } else { 0 });
        }
    };
    match commands::run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("homflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
