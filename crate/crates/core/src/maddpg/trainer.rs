use rand::Rng;
use serde::{Deserialize, Serialize};

use super::buffer::{ReplayBuffer, Transition};
use super::learner::{act_with_noise, soft_update, AgentLearner};
use super::metrics::{MetricsRecord, MetricsSink, NullSink, RunLabel};
use super::update::{critic_update, policy_update, target_actions, UpdateBatch};
use crate::envs::{observe_all, reset, EpisodeStats, EpisodeTally, GameConfig};
use crate::error::{contract, Error, Result};
use crate::nets::NetDims;
use crate::numerics::AdamConfig;
use crate::seeds::{derive_seed, rng_from};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainerConfig {
    pub adam: AdamConfig,
    pub gamma: f64,
    pub tau: f64,
    pub batch: usize,
    /// Environment steps between update ticks.
    pub update_every: usize,
    /// Exploration noise standard deviation.
    pub noise: f64,
    /// Weight of the squared pre-tanh action penalty in the actor loss.
    pub action_reg: f64,
    pub episodes: usize,
    pub buffer_capacity: usize,
    pub dims: NetDims,
}

impl Default for TrainerConfig {
    fn default() -> Self {
        Self {
            adam: AdamConfig::default(),
            gamma: 0.95,
            tau: 0.01,
            batch: 1024,
            update_every: 100,
            noise: 0.1,
            action_reg: 1e-3,
            episodes: 1000,
            buffer_capacity: 1_000_000,
            dims: NetDims::default(),
        }
    }
}

impl TrainerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad("gamma must lie in (0, 1)");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("tau must lie in (0, 1]");
        }
        if self.batch == 0 || self.update_every == 0 || self.buffer_capacity == 0 {
            return bad("batch, update_every and buffer_capacity must be positive");
        }
        if !(self.noise >= 0.0) || !(self.adam.lr >= 0.0) || !(self.action_reg >= 0.0) {
            return bad("noise, learning rate and action_reg must be non-negative");
        }
        if self.dims.embed == 0 || self.dims.key == 0 || self.dims.hidden == 0 {
            return bad("network widths must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub stats: EpisodeStats,
    /// Mean over agents of the last update tick in this episode, if any.
    pub critic_loss: Option<f64>,
    pub policy_objective: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub episodes: Vec<EpisodeRecord>,
    pub updates: usize,
}

impl TrainReport {
    /// Per-episode mean raw reward of `role`.
    pub fn role_series(&self, role: usize) -> Vec<f64> {
        self.episodes.iter().map(|e| e.stats.role_mean_raw[role]).collect()
    }
}

/// Trains `learners` (one per agent, in agent order) on `game` from scratch.
pub fn train(game: &GameConfig, learners: &mut [AgentLearner], config: &TrainerConfig, seed: u64) -> Result<TrainReport> {
    train_logged(game, learners, config, seed, &RunLabel::default(), &mut NullSink)
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn update_tick(
    learners: &mut [AgentLearner],
    roles: &[usize],
    game: &GameConfig,
    buffer: &ReplayBuffer,
    config: &TrainerConfig,
    rng: &mut impl Rng,
) -> Result<(Option<f64>, Option<f64>)> {
    let sample = buffer.sample(rng, config.batch);
    let batch = UpdateBatch::new(&game.layout(), roles, &sample)?;
    let next_actions = target_actions(learners, &batch)?;
    let (mut closs, mut pobj) = (Vec::new(), Vec::new());
    for (i, learner) in learners.iter_mut().enumerate() {
        closs.extend(critic_update(learner, i, &batch, &next_actions, config.gamma)?);
        pobj.extend(policy_update(learner, i, &batch, config.action_reg)?);
    }
    for learner in learners.iter_mut() {
        soft_update(learner, config.tau)?;
    }
    Ok((mean(&closs), mean(&pobj)))
}

/// [`train`] with per-episode metrics written to `sink`.
pub fn train_logged(
    game: &GameConfig,
    learners: &mut [AgentLearner],
    config: &TrainerConfig,
    seed: u64,
    label: &RunLabel,
    sink: &mut dyn MetricsSink,
) -> Result<TrainReport> {
    config.validate()?;
    game.validate()?;
    let n = game.num_agents();
    if learners.len() != n {
        return contract(format!("{} learners for {n} agents", learners.len()));
    }
    let roles: Vec<usize> = (0..n).map(|i| game.role_of(i)).collect();
    if let Some(i) = (0..n).find(|&i| learners[i].role != roles[i]) {
        return contract(format!("learner {i} has role {}, game expects {}", learners[i].role, roles[i]));
    }
    let layout = game.layout();
    if learners.iter().any(|l| l.policy.layout != layout || l.critic.layout != layout) {
        return contract("learner networks were built for a different game");
    }

    let mut rng = rng_from(derive_seed(seed, &[0]));
    let mut buffer = ReplayBuffer::new(config.buffer_capacity);
    let mut steps = 0usize;
    let mut updates = 0usize;
    let mut episodes = Vec::with_capacity(config.episodes);
    for ep in 0..config.episodes {
        let mut state = reset(game, derive_seed(seed, &[1, ep as u64]))?;
        let mut obs = observe_all(game, &state);
        let mut tally = EpisodeTally::new(game);
        let (mut closs, mut pobj) = (None, None);
        loop {
            let alive: Vec<bool> = state.agents.iter().map(|a| a.alive).collect();
            let mut actions = vec![[0.0f32; 2]; n];
            for i in (0..n).filter(|&i| alive[i]) {
                actions[i] = act_with_noise(&learners[i].policy, &obs[i], config.noise, &mut rng)?;
            }
            let result = state.step(game, &actions)?;
            tally.record(&result);
            let next_obs = observe_all(game, &state);
            let rewards = result.raw.iter().zip(&result.shaped).map(|(r, s)| (r + s) as f32).collect();
            buffer.push(Transition {
                obs: std::mem::replace(&mut obs, next_obs.clone()),
                actions,
                rewards,
                next_obs,
                done: result.done,
                alive,
                next_alive: state.agents.iter().map(|a| a.alive).collect(),
            });
            steps += 1;
            if steps.is_multiple_of(config.update_every) && buffer.len() >= config.batch {
                (closs, pobj) = update_tick(learners, &roles, game, &buffer, config, &mut rng)?;
                updates += 1;
            }
            if result.done {
                break;
            }
        }
        let stats = tally.finish(game, &state);
        sink.record(&MetricsRecord {
            stage: label.stage,
            scale: game.scale.to_string(),
            set_id: label.set_id.clone(),
            seed,
            episode: ep,
            role_rewards: stats.role_mean_raw.clone(),
            coverage: stats.coverage,
            critic_loss: closs,
            policy_objective: pobj,
        })?;
        episodes.push(EpisodeRecord {
            episode: ep,
            stats,
            critic_loss: closs,
            policy_objective: pobj,
        });
    }
    sink.flush()?;
    Ok(TrainReport { episodes, updates })
}
