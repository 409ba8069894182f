use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use epc_core::cli::{evolve_command, exit_code, tournament_command, train_command, ExperimentConfig, Overrides};
use epc_core::envs::{GameKind, Scale};
use epc_core::Result;

#[derive(Parser)]
#[command(name = "epc", about = "Evolutionary population curriculum workbench")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; falls back to EPC_WORKERS.
    #[arg(long, env = "EPC_WORKERS")]
    workers: Option<usize>,
    /// Episode count override.
    #[arg(long)]
    episodes: Option<usize>,
    /// Population, e.g. "3-2" or "6".
    #[arg(long)]
    scale: Option<Scale>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Train one fixed-scale game from scratch.
    Train(Common),
    /// Run or resume the evolutionary curriculum.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Clone-and-fine-tune only, without evolution.
        #[arg(long)]
        vanilla_pc: bool,
        /// Stop after persisting this stage.
        #[arg(long)]
        stop_after: Option<usize>,
    },
    /// Cross-play saved models and write normalized scores.
    Tournament {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        game: Option<GameKind>,
        /// Model prefixes; roles load from `<prefix>.<role>.ckpt`.
        #[arg(required = true)]
        models: Vec<PathBuf>,
    },
}

fn load(common: &Common, vanilla_pc: bool, game: Option<GameKind>) -> Result<ExperimentConfig> {
    let mut cfg = match (&common.config, game) {
        (Some(path), _) => ExperimentConfig::from_file(path)?,
        (None, Some(g)) => ExperimentConfig::parse(&format!("game = \"{}\"", g.as_str()))?,
        (None, None) => ExperimentConfig::parse("")?,
    };
    let overrides = Overrides {
        seed: common.seed,
        workers: common.workers,
        episodes: common.episodes,
        scale: common.scale.clone(),
        vanilla_pc,
        out: common.out.clone(),
    };
    overrides.apply(&mut cfg)?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(common) => {
            let cfg = load(&common, false, None)?;
            let report = train_command(&cfg)?;
            println!("trained {} episodes, {} update ticks -> {}", report.episodes.len(), report.updates, cfg.out.display());
        }
        Command::Evolve {
            common,
            vanilla_pc,
            stop_after,
        } => {
            let cfg = load(&common, vanilla_pc, None)?;
            let outcome = evolve_command(&cfg, stop_after)?;
            println!("completed {} stages -> {}", outcome.records.len(), cfg.out.display());
        }
        Command::Tournament { common, game, models } => {
            let cfg = load(&common, false, game)?;
            let scale = common.scale.clone();
            let result = tournament_command(cfg.game, scale, &models, cfg.eval_episodes, cfg.seed, &cfg.out)?;
            print!("{}", result.table.to_csv()?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
