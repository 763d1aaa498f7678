use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod sweep;

use commands::Failure;

#[derive(Parser)]
#[command(name = "crossview", version, about = "Associate people across overhead and egocentric views")]
struct Cli {
    /// Worker threads; 0 uses one per core. Never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// error, warn, info, debug or trace
    #[arg(long, global = true, default_value = "warn")]
    log_level: log::LevelFilter,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find wearer, view angle and pairs for every frame of a dataset.
    Associate {
        #[arg(long)]
        dataset: PathBuf,
        /// JSON config; defaults apply when omitted
        #[arg(long)]
        config: Option<PathBuf>,
        /// Results JSON
        #[arg(long)]
        out: PathBuf,
        /// Metrics CSV; defaults to the results path with a `.metrics.csv` extension
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Write a synthetic dataset with ground truth.
    Simulate {
        /// JSON with optional `scene` and `noise` sections
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 220)]
        n_scenes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Score a dataset under a grid of configurations, one CSV row each.
    Sweep {
        #[arg(long)]
        dataset: PathBuf,
        /// JSON sweep specification
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(cli.log_level)
        .format_timestamp(None)
        .init();

    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build() {
        Ok(p) => p,
        Err(e) => {
            log::error!("cannot start worker pool: {e}");
            return ExitCode::from(2);
        }
    };

    let outcome = pool.install(|| match cli.command {
        Command::Associate {
            dataset,
            config,
            out,
            metrics,
        } => commands::associate(&dataset, config.as_deref(), &out, metrics.as_deref()),
        Command::Simulate {
            params,
            out,
            n_scenes,
            seed,
        } => commands::simulate(params.as_deref(), &out, n_scenes, seed),
        Command::Sweep { dataset, spec, out } => sweep::run(&dataset, &spec, &out),
    });

    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Partial(n)) => {
            log::warn!("{n} frame(s) had no feasible hypothesis");
            ExitCode::from(1)
        }
        Err(Failure::Invalid(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
