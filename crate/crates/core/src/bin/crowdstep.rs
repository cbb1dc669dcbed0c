use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crowdstep::cli::{
    cmd_run, cmd_sweep_bottleneck, cmd_sweep_fd, DEFAULT_DENSITIES, DEFAULT_REPEATS, DEFAULT_WIDTHS,
};
use crowdstep::config::{load_config, SimConfig};
use crowdstep::validation::{run_checks, CHECK_IDS};

/// Semicontinuous pedestrian simulator.
#[derive(Parser)]
#[command(name = "crowdstep", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulates the configured scenario and writes trajectory.csv.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ticks: Option<u64>,
        /// Also write fd.csv (corridor) or flow.csv (room) for this run.
        #[arg(long)]
        metrics: bool,
    },
    /// Corridor runs over a density list; writes fd.csv.
    SweepFd {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        densities: Option<Vec<f64>>,
        #[arg(long, default_value_t = DEFAULT_REPEATS)]
        repeats: usize,
    },
    /// Room evacuations over a door-width list; writes flow.csv.
    SweepBottleneck {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        widths: Option<Vec<f64>>,
        #[arg(long, default_value_t = DEFAULT_REPEATS)]
        repeats: usize,
    },
    /// Runs the acceptance checks; exits 0 iff all pass.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Subset of checks to run, e.g. `2,5`; all by default.
        #[arg(long, value_delimiter = ',')]
        checks: Option<Vec<u8>>,
    },
}

fn load(common: &Common) -> crowdstep::Result<SimConfig> {
    let mut config = load_config(&common.config)?;
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.output_dir = out.clone();
    }
    Ok(config)
}

fn execute(cli: Cli) -> crowdstep::Result<bool> {
    match cli.command {
        Command::Run { common, ticks, metrics } => {
            let mut config = load(&common)?;
            if let Some(t) = ticks {
                config.ticks = t;
            }
            let s = cmd_run(&config, metrics)?;
            println!("wrote {}", s.trajectory.display());
            if let Some(m) = s.metrics {
                println!("wrote {}", m.display());
            }
            println!("{} ticks, {} agents left", s.ticks, s.agents_left);
        }
        Command::SweepFd { common, densities, repeats } => {
            let config = load(&common)?;
            let densities = densities.unwrap_or_else(|| DEFAULT_DENSITIES.to_vec());
            println!("wrote {}", cmd_sweep_fd(&config, &densities, repeats)?.display());
        }
        Command::SweepBottleneck { common, widths, repeats } => {
            let config = load(&common)?;
            let widths = widths.unwrap_or_else(|| DEFAULT_WIDTHS.to_vec());
            println!("wrote {}", cmd_sweep_bottleneck(&config, &widths, repeats)?.display());
        }
        Command::Validate { common, checks } => {
            let config = load(&common)?;
            let ids = checks.unwrap_or_else(|| CHECK_IDS.to_vec());
            let outcomes = run_checks(&config, &ids, |o| println!("{o}"))?;
            let passed = outcomes.iter().filter(|o| o.passed).count();
            println!("{passed}/{} checks passed", outcomes.len());
            return Ok(passed == outcomes.len());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
