//! Batch front end: config files in, plot-ready tables out.

pub mod config;
pub mod output;
pub mod run;

use std::path::PathBuf;

use clap::Parser;

pub use config::{ConfigError, ExperimentConfig, Format, LoadedConfig};
pub use output::{Report, Table};
pub use run::{build_report, execute, CliError, Command, RunOptions};

/// Overrides the default worker count when `--threads` is absent.
pub const THREADS_ENV: &str = "PITCHFORK_THREADS";

#[derive(Debug, Parser)]
#[command(name = "pitchfork", version, about = "Monte Carlo experiments on a stochastic pitchfork bifurcation")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Experiment config (TOML). `airy-check` runs without one.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory; overrides `[output] dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also write the first N trajectories as a binary path dump.
    #[arg(long, value_name = "N")]
    pub dump_paths: Option<usize>,
}

impl Cli {
    pub fn options(&self) -> RunOptions {
        RunOptions { seed: self.seed, out: self.out.clone(), format: self.format, dump_paths: self.dump_paths }
    }

    /// `--threads`, else the environment override, else rayon's default.
    pub fn thread_count(&self, env: Option<&str>) -> Result<Option<usize>, String> {
        if let Some(n) = self.threads {
            return if n > 0 { Ok(Some(n)) } else { Err("--threads must be positive".into()) };
        }
        match env {
            None => Ok(None),
            Some(v) => match v.trim().parse::<usize>() {
                Ok(n) if n > 0 => Ok(Some(n)),
                _ => Err(format!("{THREADS_ENV}={v:?} is not a positive integer")),
            },
        }
    }

    pub fn load_config(&self) -> Result<LoadedConfig, ConfigError> {
        match &self.config {
            Some(p) => LoadedConfig::load(p),
            None if self.command == Command::AiryCheck => LoadedConfig::parse(String::new(), "<none>"),
            None => Err(ConfigError {
                file: "<none>".into(),
                line: None,
                column: None,
                message: format!("`{}` needs --config", self.command.name()),
            }),
        }
    }
}
