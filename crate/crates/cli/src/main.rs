use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wavelocate_cli::commands::{cmd_dispersion, cmd_eval, cmd_simulate, cmd_train, EvalSource};
use wavelocate_cli::{CliError, RunConfig};

/// Lamb-wave damage localization: dispersion, simulation, training and evaluation.
#[derive(Parser)]
#[command(name = "wavelocate", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; built-in defaults when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (dispersion) or directory (other commands).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker thread cap; defaults to the available parallelism.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the Rayleigh-Lamb dispersion relation and write a CSV table.
    Dispersion(Common),
    /// Generate a train/val/test dataset directory.
    Simulate(Common),
    /// Train a mixture density network on a dataset.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Run 3-fold cross-validation before the final fit.
        #[arg(long)]
        cv3: bool,
    },
    /// Evaluate on a dataset, or run the configured comparison sweep.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Run the configured sweep even if io.dataset is set.
        #[arg(long)]
        sweep: bool,
        /// Write the first N ambiguity surfaces and mixture densities.
        #[arg(long, default_value_t = 0)]
        export_surfaces: usize,
    },
}

fn setup(common: &Common) -> Result<(RunConfig, PathBuf), CliError> {
    let mut config = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if common.seed.is_some() {
        config.seed = common.seed;
    }
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let out = common
        .out
        .clone()
        .or_else(|| config.io.out.clone())
        .ok_or_else(|| CliError::Config("no output location: pass --out or set io.out".into()))?;
    Ok((config, out))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Dispersion(common) => {
            let (config, out) = setup(&common)?;
            cmd_dispersion(&config, &out)
        }
        Command::Simulate(common) => {
            let (config, out) = setup(&common)?;
            cmd_simulate(&config, &out)
        }
        Command::Train { common, dataset, cv3 } => {
            let (mut config, out) = setup(&common)?;
            let dataset = dataset
                .or_else(|| config.io.dataset.clone())
                .ok_or_else(|| CliError::Config("no dataset: pass --dataset or set io.dataset".into()))?;
            config.io.dataset = Some(dataset.clone());
            cmd_train(&config, &dataset, &out, cv3)
        }
        Command::Eval { common, model, dataset, sweep, export_surfaces } => {
            let (mut config, out) = setup(&common)?;
            let dataset = if sweep { None } else { dataset.or_else(|| config.io.dataset.clone()) };
            let source = match dataset {
                Some(d) => {
                    let model = model.or_else(|| config.io.model.clone());
                    config.io.dataset = Some(d.clone());
                    config.io.model = model.clone();
                    EvalSource::Dataset { dataset: d, model }
                }
                None => EvalSource::Sweep,
            };
            cmd_eval(&config, &source, &out, export_surfaces)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("WAVELOCATE_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
