use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use kgatnet::pipeline::{Pipeline, PipelineConfig, PipelineError, Stage};

#[derive(Parser)]
#[command(name = "kgatnet", version, about = "Knowledge-graph attention network text classifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Pipeline configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Append graph embeddings to the classifier input.
    #[arg(long, global = true)]
    enriched: bool,
    /// Recompute outputs that look up to date.
    #[arg(long, global = true)]
    force: bool,
    /// Worker threads (0 uses every core).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `output_dir` from the config.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    Preprocess,
    Build,
    Aggregate,
    Embed,
    Train,
    Evaluate,
    RunAll,
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    let path = cli.config.ok_or_else(|| PipelineError::Config("--config is required".into()))?;
    let mut cfg = PipelineConfig::load(&path)?;
    cfg.enriched |= cli.enriched;
    if let Some(jobs) = cli.jobs {
        cfg.jobs = jobs;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = cli.output {
        cfg.output_dir = out;
    }
    let pipeline = Pipeline::new(cfg, cli.force)?;
    let stage = match cli.command {
        Command::Preprocess => Stage::Preprocess,
        Command::Build => Stage::Build,
        Command::Aggregate => Stage::Aggregate,
        Command::Embed => Stage::Embed,
        Command::Train => Stage::Train,
        Command::Evaluate => Stage::Evaluate,
        Command::RunAll => return pipeline.run_all(),
    };
    pipeline.run(stage)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
