//! Command-line front end: runs configured scenarios for the convolution
//! integro-differential solvers, refinement studies, and built-in demos.
//!
//! Exit codes: 0 on success, 2 on solver-level failures (degenerate data,
//! unsolvable modes), 3 on configuration problems.

mod config;
mod demo;
mod error;
mod forms;
mod output;
mod refine;
mod runner;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::ScenarioConfig;
use crate::error::CliError;

/// Environment variable overriding the output directory.
const OUTPUT_DIR_ENV: &str = "MEMKERN_OUTPUT_DIR";

#[derive(Parser)]
#[command(
    name = "memkern",
    version,
    about = "Direct, inverse and mixed problems for convolution integro-differential equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario described by a TOML config file.
    Run {
        /// Path to the scenario config.
        config: PathBuf,
    },
    /// Rerun a scenario on doubled grids and tabulate errors and orders
    /// against the configured oracle.
    Refine {
        /// Path to the scenario config.
        config: PathBuf,
        /// Number of grid levels (N, 2N, 4N, …).
        #[arg(long, default_value_t = 3)]
        levels: u32,
    },
    /// Run a built-in demo scenario.
    Demo {
        /// One of: example1-m0, example1-m1, example2-m0, example2-m1.
        name: String,
    },
}

fn output_dir(config: &ScenarioConfig, fallback: &str) -> PathBuf {
    if let Ok(dir) = std::env::var(OUTPUT_DIR_ENV) {
        return PathBuf::from(dir);
    }
    config
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from(fallback))
}

fn real_main() -> Result<(), CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config } => {
            let (scenario, base_dir) = ScenarioConfig::load(&config)?;
            let out = output_dir(&scenario, "memkern-out");
            let dir = runner::run(&scenario, &base_dir, &out)?;
            println!("artifacts written to {}", dir.display());
        }
        Command::Refine { config, levels } => {
            let (scenario, base_dir) = ScenarioConfig::load(&config)?;
            let out = output_dir(&scenario, "memkern-refine");
            let dir = refine::refine(&scenario, &base_dir, &out, levels)?;
            println!("artifacts written to {}", dir.display());
        }
        Command::Demo { name } => {
            let scenario = demo::scenario(&name)?;
            let out = output_dir(&scenario, &format!("demo-{name}"));
            std::fs::create_dir_all(&out)?;
            let echo = toml::to_string_pretty(&scenario)
                .map_err(|e| CliError::config(format!("cannot serialize demo config: {e}")))?;
            std::fs::write(out.join("scenario.toml"), echo)?;
            let dir = runner::run(&scenario, Path::new("."), &out)?;
            println!("artifacts written to {}", dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
