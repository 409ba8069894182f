//! Experiment configuration, read from TOML: flat `key = value` pairs
//! grouped by `[section]` headers (or dotted keys).
//!
//! ```toml
//! game = "food-collection"
//! scale = 3
//! seed = 7
//!
//! [trainer]
//! lr = 0.01
//! batch = 1024
//!
//! [curriculum]
//! target = 12
//! k = 2
//! c = "max"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::envs::{GameConfig, GameKind, Scale};
use crate::epc::{CurriculumConfig, StageConfig};
use crate::error::{Error, Result};
use crate::maddpg::TrainerConfig;
use crate::nets::NetDims;
use crate::numerics::AdamConfig;

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub game: GameKind,
    /// Training scale, and the first curriculum stage.
    pub scale: Scale,
    pub horizon: usize,
    pub shaping: f64,
    pub landmarks: Option<usize>,
    pub trainer: TrainerConfig,
    pub stages: StageConfig,
    /// Global multiplier on curriculum episode counts, for desk runs.
    pub episode_factor: f64,
    /// Episodes per tournament matchup.
    pub eval_episodes: usize,
    pub workers: usize,
    pub seed: u64,
    pub out: PathBuf,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScaleValue {
    Count(usize),
    Text(String),
}

impl ScaleValue {
    fn scale(self) -> Result<Scale> {
        match self {
            ScaleValue::Count(n) => Ok(Scale(vec![n])),
            ScaleValue::Text(s) => s.parse(),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CountOrMax {
    Count(usize),
    Text(String),
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct EnvSection {
    horizon: Option<usize>,
    shaping: Option<f64>,
    landmarks: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct TrainerSection {
    lr: Option<f64>,
    beta1: Option<f64>,
    beta2: Option<f64>,
    eps: Option<f64>,
    gamma: Option<f64>,
    tau: Option<f64>,
    batch: Option<usize>,
    update_every: Option<usize>,
    noise: Option<f64>,
    action_reg: Option<f64>,
    episodes: Option<usize>,
    buffer: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct NetSection {
    embed: Option<usize>,
    key: Option<usize>,
    hidden: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct CurriculumSection {
    target: Option<ScaleValue>,
    first_episodes: Option<usize>,
    stage_episodes: Option<usize>,
    episode_factor: Option<f64>,
    k: Option<usize>,
    c: Option<CountOrMax>,
    eval_episodes: Option<usize>,
    opponent_samples: Option<usize>,
    vanilla: Option<bool>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct EvalSection {
    episodes: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    game: GameKind,
    scale: Option<ScaleValue>,
    seed: Option<u64>,
    workers: Option<usize>,
    out: Option<PathBuf>,
    #[serde(default)]
    env: EnvSection,
    #[serde(default)]
    trainer: TrainerSection,
    #[serde(default)]
    net: NetSection,
    #[serde(default)]
    curriculum: CurriculumSection,
    #[serde(default)]
    eval: EvalSection,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        // curriculum defaults: initial scale, target, first/stage episodes, K
        let (initial, target, first, per_stage, k) = match raw.game {
            GameKind::Grassland => ("3-2", "24-16", 100_000, 50_000, 2),
            GameKind::AdversarialBattle => ("4-4", "16-16", 50_000, 20_000, 2),
            GameKind::FoodCollection => ("3", "24", 50_000, 20_000, 3),
        };
        let scale = raw.scale.map(ScaleValue::scale).transpose()?.unwrap_or(initial.parse()?);
        let (t, d) = (raw.trainer, TrainerConfig::default());
        let trainer = TrainerConfig {
            adam: AdamConfig {
                lr: t.lr.unwrap_or(d.adam.lr),
                beta1: t.beta1.unwrap_or(d.adam.beta1),
                beta2: t.beta2.unwrap_or(d.adam.beta2),
                eps: t.eps.unwrap_or(d.adam.eps),
            },
            gamma: t.gamma.unwrap_or(d.gamma),
            tau: t.tau.unwrap_or(d.tau),
            batch: t.batch.unwrap_or(d.batch),
            update_every: t.update_every.unwrap_or(d.update_every),
            noise: t.noise.unwrap_or(d.noise),
            action_reg: t.action_reg.unwrap_or(d.action_reg),
            episodes: t.episodes.unwrap_or(d.episodes),
            buffer_capacity: t.buffer.unwrap_or(d.buffer_capacity),
            dims: NetDims {
                embed: raw.net.embed.unwrap_or(d.dims.embed),
                key: raw.net.key.unwrap_or(d.dims.key),
                hidden: raw.net.hidden.unwrap_or(d.dims.hidden),
            },
        };
        let cur = raw.curriculum;
        let c = match cur.c {
            None => None,
            Some(CountOrMax::Count(n)) => Some(n),
            Some(CountOrMax::Text(s)) if s == "max" => None,
            Some(CountOrMax::Text(s)) => {
                return Err(Error::Config(format!("curriculum.c: expected an integer or \"max\", got `{s}`")))
            }
        };
        let stages = StageConfig {
            initial: scale.clone(),
            target: cur.target.map(ScaleValue::scale).transpose()?.unwrap_or(target.parse()?),
            first_episodes: cur.first_episodes.unwrap_or(first),
            stage_episodes: cur.stage_episodes.unwrap_or(per_stage),
            k: cur.k.unwrap_or(k),
            c,
            eval_episodes: cur.eval_episodes.unwrap_or(100),
            opponent_samples: cur.opponent_samples,
            vanilla: cur.vanilla.unwrap_or(false),
        };
        let cfg = Self {
            game: raw.game,
            scale,
            horizon: raw.env.horizon.unwrap_or(25),
            shaping: raw.env.shaping.unwrap_or(0.05),
            landmarks: raw.env.landmarks,
            trainer,
            stages,
            episode_factor: cur.episode_factor.unwrap_or(1.0),
            eval_episodes: raw.eval.episodes.unwrap_or(10_000),
            workers: raw.workers.unwrap_or(1),
            seed: raw.seed.unwrap_or(0),
            out: raw.out.unwrap_or_else(|| PathBuf::from("runs")),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.game_config(&self.scale)?;
        self.trainer.validate()?;
        if !(self.episode_factor > 0.0) {
            return Err(Error::Config("curriculum.episode_factor must be positive".into()));
        }
        if self.workers == 0 || self.eval_episodes == 0 {
            return Err(Error::Config("workers and eval.episodes must be >= 1".into()));
        }
        Ok(())
    }

    pub fn game_config(&self, scale: &Scale) -> Result<GameConfig> {
        let mut g = GameConfig::new(self.game, scale.clone())?;
        g.horizon = self.horizon;
        g.shaping = self.shaping;
        g.landmarks_override = self.landmarks;
        g.validate()?;
        Ok(g)
    }

    pub fn curriculum(&self) -> Result<CurriculumConfig> {
        let scaled = |n: usize| ((n as f64) * self.episode_factor).round() as usize;
        let stages = StageConfig {
            initial: self.scale.clone(),
            first_episodes: scaled(self.stages.first_episodes),
            stage_episodes: scaled(self.stages.stage_episodes),
            ..self.stages.clone()
        };
        let cfg = CurriculumConfig {
            game: self.game_config(&self.scale)?,
            stages,
            trainer: self.trainer.clone(),
            workers: self.workers,
            seed: self.seed,
        };
        cfg.stages.validate(self.game.num_roles())?;
        Ok(cfg)
    }
}
