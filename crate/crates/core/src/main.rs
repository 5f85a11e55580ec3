use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use snarm::citygen::EnvRealization;
use snarm::commands::{self, EvalRequest, Mode, TrainRequest};
use snarm::radio::CoverageGrid;
use snarm::Result;

#[derive(Parser)]
#[command(name = "snarm", version, about = "Coverage-aware UAV navigation lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the building and cell-site realization.
    GenEnv {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the city seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "env.json")]
        out: PathBuf,
    },
    /// Monte-Carlo ground-truth coverage grid.
    Oracle {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        env: PathBuf,
        /// Overrides the oracle seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "coverage.csv")]
        out: PathBuf,
    },
    /// Train a navigation policy (direct RL or with radio-map planning).
    Train {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        env: PathBuf,
        /// `direct` or `snarm`.
        #[arg(long, default_value = "direct")]
        mode: String,
        /// Overrides the run seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "run")]
        out: PathBuf,
        /// Continue from the last checkpoint in `--out`.
        #[arg(long)]
        resume: bool,
        /// Reference coverage grid for the map-error curve.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Stop after this many completed episodes (resumable).
        #[arg(long)]
        stop_after: Option<usize>,
    },
    /// Greedy rollouts from a trained checkpoint.
    Eval {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        env: PathBuf,
        /// Checkpoint base path, e.g. `run/checkpoints/online`.
        #[arg(long)]
        checkpoint: PathBuf,
        /// CSV of start positions (`x,y,z`); random starts when absent.
        #[arg(long)]
        starts: Option<PathBuf>,
        /// Reference coverage grid; computed when absent.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Overrides the seed for random starts.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "eval")]
        out: PathBuf,
    },
    /// Export a learned radio map checkpoint as a coverage grid.
    ExportMap {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Checkpoint base path, e.g. `run/checkpoints/radiomap`.
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value = "learned.csv")]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::GenEnv { config, seed, out } => {
            let mut cfg = commands::load_config(config.as_deref())?;
            if let Some(s) = seed {
                cfg.city.seed = s;
            }
            commands::gen_env(&cfg, &out)
        }
        Command::Oracle { config, env, seed, out } => {
            let mut cfg = commands::load_config(config.as_deref())?;
            if let Some(s) = seed {
                cfg.oracle.seed = s;
            }
            commands::oracle(&cfg, &env, &out)
        }
        Command::Train { config, env, mode, seed, out, resume, truth, stop_after } => {
            let mode: Mode = mode.parse()?;
            let mut cfg = commands::load_config(config.as_deref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let env = EnvRealization::load(&env)?;
            let truth = truth.map(|p| CoverageGrid::load_csv(&p, cfg.navigation.altitude)).transpose()?;
            commands::train(TrainRequest {
                cfg: &cfg,
                env: &env,
                mode,
                out: &out,
                resume,
                truth: truth.as_ref(),
                stop_after,
            })
        }
        Command::Eval { config, env, checkpoint, starts, truth, seed, out } => {
            let mut cfg = commands::load_config(config.as_deref())?;
            if let Some(s) = seed {
                cfg.eval.seed = s;
            }
            commands::eval(EvalRequest {
                cfg: &cfg,
                env_path: &env,
                checkpoint: &checkpoint,
                starts: starts.as_deref(),
                truth: truth.as_deref(),
                out: &out,
            })
        }
        Command::ExportMap { config, checkpoint, out } => {
            let cfg = commands::load_config(config.as_deref())?;
            commands::export_map(&cfg, &checkpoint, &out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", commands::error_line(&e));
            ExitCode::FAILURE
        }
    }
}
