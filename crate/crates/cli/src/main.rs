use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod augment;
mod config;
mod error;
mod fsutil;
mod loss_eval;
mod metrics;
mod patches;

use config::RunConfigFile;
use error::{CliError, Completion};

/// Mask augmentation, segmentation metrics and patch preparation for
/// oil-spill label maps.
#[derive(Debug, Parser)]
#[command(name = "morp", version)]
struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for stochastic commands (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: u32,
    /// Print the resolved configuration and exit without touching files.
    #[arg(long, global = true)]
    dry_run: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Perturb every mask of a directory.
    Augment(augment::Args),
    /// Per-file and aggregate IoU and area report.
    Metrics(metrics::Args),
    /// Cut scenes listed in a manifest into training patches.
    Patches(patches::Args),
    /// Evaluate the composite loss on stored probability maps.
    LossEval(loss_eval::Args),
}

/// Settings shared by every command.
pub struct Context {
    pub file: RunConfigFile,
    pub seed: Option<u64>,
    pub dry_run: bool,
    pool: rayon::ThreadPool,
}

impl Context {
    pub fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> T {
        self.pool.install(f)
    }
}

fn run(cli: Cli) -> Result<Completion, CliError> {
    let file = RunConfigFile::load(cli.config.as_deref())?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs as usize)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} workers: {e}", cli.jobs)))?;
    let ctx = Context {
        file,
        seed: cli.seed,
        dry_run: cli.dry_run,
        pool,
    };
    match cli.command {
        Command::Augment(a) => augment::run(&ctx, a),
        Command::Metrics(a) => metrics::run(&ctx, a),
        Command::Patches(a) => patches::run(&ctx, a),
        Command::LossEval(a) => loss_eval::run(&ctx, a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(Completion::Full) => ExitCode::SUCCESS,
        Ok(Completion::Partial) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
