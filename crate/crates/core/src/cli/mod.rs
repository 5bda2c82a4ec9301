//! Configuration-driven experiment runner behind the `nelson-fiber` binary.

pub mod config;
pub mod report;
pub mod run;
pub mod sweep;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{ExperimentConfig, SuiteOptions, Sweep, SweepVariable, Tolerances};
pub use report::report;
pub use run::{run, Category, CheckRecord, Metrics, RunReport, Summary};
pub use sweep::{sweep, SweepReport, TrendRow, TRENDS_HEADER};

use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "nelson-fiber", version, about = "Fixed-momentum Nelson Hamiltonian on a truncated Fock space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory, overriding the configuration.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for random sample vectors, overriding the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Multiplies every configured tolerance.
    #[arg(long = "tol-scale", global = true)]
    pub tol_scale: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the full check suite for one configuration.
    Run { config: PathBuf },
    /// Run the suite at every point of the configured sweep.
    Sweep { config: PathBuf },
    /// Summarize the reports in a directory.
    Report { dir: PathBuf },
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

impl Cli {
    fn load(&self, path: &std::path::Path) -> Result<ExperimentConfig> {
        let mut c = ExperimentConfig::load(path)?;
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(x) = self.tol_scale {
            c.tolerances = c.tolerances.scaled(x);
        }
        if let Some(o) = &self.out {
            c.output_dir = o.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

/// Executes a parsed command line and returns the process exit code.
pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Run { config } => {
            let c = cli.load(config)?;
            let r = run(&c)?;
            let path = r.write(&c.output_dir)?;
            println!("wrote {}", path.display());
            for name in &r.summary.fatal_failures {
                eprintln!("failed: {name}");
            }
            println!("{} of {} checks passed: {}", r.summary.passed, r.summary.total, if r.summary.pass { "PASS" } else { "FAIL" });
            Ok(if r.summary.pass { EXIT_PASS } else { EXIT_CHECK_FAILED })
        }
        Command::Sweep { config } => {
            let c = cli.load(config)?;
            let s = sweep(&c, cli.workers)?;
            let (json, csv) = s.write(&c.output_dir)?;
            println!("wrote {} and {}", json.display(), csv.display());
            for name in &s.summary.fatal_failures {
                eprintln!("failed: {name}");
            }
            Ok(if s.summary.pass { EXIT_PASS } else { EXIT_CHECK_FAILED })
        }
        Command::Report { dir } => {
            print!("{}", report(dir)?);
            Ok(EXIT_PASS)
        }
    }
}
