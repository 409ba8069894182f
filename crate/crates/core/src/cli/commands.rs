use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::checkpoint::{load_set, save_set, Checkpoint, CheckpointMeta};
use super::config::ExperimentConfig;
use crate::envs::{GameConfig, GameKind, Scale};
use crate::epc::{run_curriculum, AgentSet, CurriculumOutcome, Provenance, StageStore};
use crate::error::{Error, Result};
use crate::eval::{tournament, TournamentResult};
use crate::maddpg::{train_logged, AgentLearner, JsonlMetrics, RunLabel, TrainReport};
use crate::seeds::{derive_seed, rng_from};

/// Command-line overrides shared by all commands.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub episodes: Option<usize>,
    pub scale: Option<Scale>,
    pub vanilla_pc: bool,
    pub out: Option<PathBuf>,
}

impl Overrides {
    /// `--episodes` sets training episodes for `train`, both curriculum
    /// episode counts for `evolve`, and matchup episodes for `tournament`.
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(e) = self.episodes {
            cfg.trainer.episodes = e;
            cfg.stages.first_episodes = e;
            cfg.stages.stage_episodes = e;
            cfg.eval_episodes = e;
        }
        if let Some(s) = &self.scale {
            cfg.scale = s.clone();
        }
        if self.vanilla_pc {
            cfg.stages.vanilla = true;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        cfg.validate()
    }
}

fn meta(game: &GameConfig, stage: usize, role: usize, set_id: &str, seed: u64) -> CheckpointMeta {
    CheckpointMeta {
        game: game.kind.as_str().into(),
        scale: game.scale.to_string(),
        stage: stage as u32,
        role: role as u32,
        set_id: set_id.into(),
        seed,
    }
}

/// Path of one role's checkpoint for a model prefix: `<prefix>.<role>.ckpt`.
pub fn role_path(prefix: &Path, game: GameKind, role: usize) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(format!(".{}.ckpt", game.role_names()[role]));
    PathBuf::from(s)
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    fs::write(path, serde_json::to_vec_pretty(value)?)?;
    Ok(())
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    game: &'a str,
    scale: String,
    seed: u64,
    episodes: usize,
    updates: usize,
    /// Mean raw reward per role over the last 100 episodes.
    final_role_rewards: Vec<f64>,
}

/// Trains one fixed-scale game from scratch. Writes `metrics.jsonl`,
/// `model.<role>.ckpt` and `summary.json` under `cfg.out`.
pub fn train_command(cfg: &ExperimentConfig) -> Result<TrainReport> {
    let game = cfg.game_config(&cfg.scale)?;
    fs::create_dir_all(&cfg.out)?;
    let layout = game.layout();
    let mut rng = rng_from(derive_seed(cfg.seed, &[0]));
    let mut learners: Vec<AgentLearner> = (0..game.num_agents())
        .map(|i| AgentLearner::new(&layout, game.num_roles(), game.role_of(i), cfg.trainer.dims, cfg.trainer.adam, &mut rng))
        .collect();
    let mut sink = JsonlMetrics::new(BufWriter::new(File::create(cfg.out.join("metrics.jsonl"))?));
    let label = RunLabel {
        stage: 0,
        set_id: "train".into(),
    };
    let report = train_logged(&game, &mut learners, &cfg.trainer, derive_seed(cfg.seed, &[1]), &label, &mut sink)?;

    for role in (0..game.num_roles()).rev() {
        let members = learners.split_off(game.role_range(role).start);
        let set = AgentSet::new(role, members, Provenance::default());
        let path = role_path(&cfg.out.join("model"), game.kind, role);
        save_set(&path, &set, &meta(&game, 0, role, "train", cfg.seed))?;
    }
    let tail = &report.episodes[report.episodes.len().saturating_sub(100)..];
    let final_role_rewards = (0..game.num_roles())
        .map(|r| tail.iter().map(|e| e.stats.role_mean_raw[r]).sum::<f64>() / tail.len().max(1) as f64)
        .collect();
    write_json(
        &cfg.out.join("summary.json"),
        &TrainSummary {
            game: game.kind.as_str(),
            scale: game.scale.to_string(),
            seed: cfg.seed,
            episodes: report.episodes.len(),
            updates: report.updates,
            final_role_rewards,
        },
    )?;
    Ok(report)
}

/// Runs (or resumes) the curriculum under `cfg.out`, then writes
/// `best.<role>.ckpt` and `records.json`.
pub fn evolve_command(cfg: &ExperimentConfig, stop_after: Option<usize>) -> Result<CurriculumOutcome> {
    let curriculum = cfg.curriculum()?;
    let store = StageStore {
        dir: cfg.out.clone(),
        stop_after,
    };
    let outcome = run_curriculum(&curriculum, Some(&store))?;
    let last = outcome.records.last().expect("at least one stage");
    let game = curriculum.game.with_scale(last.scale.clone())?;
    for (role, set) in outcome.best.iter().enumerate() {
        let path = role_path(&cfg.out.join("best"), game.kind, role);
        save_set(&path, set, &meta(&game, last.stage, role, "best", cfg.seed))?;
    }
    write_json(&cfg.out.join("records.json"), &outcome.records)?;
    Ok(outcome)
}

fn short_name(prefix: &Path) -> String {
    prefix
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| prefix.display().to_string())
}

/// Loads every method prefix (one checkpoint per role), plays the full
/// tournament, and writes `scores.csv` and `scores.json` under `out`.
/// Methods are named by prefix file name, or by full prefix when those
/// collide.
pub fn tournament_command(
    kind: GameKind,
    scale: Option<Scale>,
    prefixes: &[PathBuf],
    episodes: usize,
    seed: u64,
    out: &Path,
) -> Result<TournamentResult> {
    if prefixes.len() < 2 {
        return Err(Error::Config("a tournament needs at least two models".into()));
    }
    let scale = match scale {
        Some(s) => s,
        None => Checkpoint::load(&role_path(&prefixes[0], kind, 0))?.meta.scale.parse()?,
    };
    let game = GameConfig::new(kind, scale)?;
    let adam = Default::default();
    let mut methods = Vec::new();
    for prefix in prefixes {
        let mut sets = Vec::new();
        for role in 0..game.num_roles() {
            let path = role_path(prefix, kind, role);
            let ckpt = Checkpoint::load(&path)?;
            if ckpt.meta.scale != game.scale.to_string() {
                return Err(Error::Config(format!(
                    "{} was trained at scale {}, tournament runs at {}",
                    path.display(),
                    ckpt.meta.scale,
                    game.scale
                )));
            }
            sets.push(load_set(&path, &game, role, adam)?);
        }
        methods.push((short_name(prefix), sets));
    }
    let mut seen = std::collections::HashSet::new();
    if !methods.iter().all(|(n, _)| seen.insert(n.clone())) {
        for ((name, _), prefix) in methods.iter_mut().zip(prefixes) {
            *name = prefix.display().to_string();
        }
    }
    let result = tournament(&game, &methods, episodes, seed)?;
    fs::create_dir_all(out)?;
    fs::write(out.join("scores.csv"), result.table.to_csv()?)?;
    fs::write(out.join("scores.json"), result.table.to_json()?)?;
    Ok(result)
}

/// Process exit code for an error: 2 for configuration or contract
/// problems, 3 for runtime failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Contract(_) | Error::Dimension { .. } | Error::Format { .. } => 2,
        Error::NonFinite { .. } | Error::Io(_) | Error::Json(_) => 3,
    }
}
