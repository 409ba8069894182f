use serde::{Deserialize, Serialize};

use super::config::{GameConfig, GameKind};
use super::world::{EventKind, StepResult, WorldState};

/// Per-episode outcome summary; raw rewards only, shaping excluded.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeStats {
    pub steps: usize,
    pub raw_per_agent: Vec<f64>,
    /// Mean raw episode reward over the agents of each role.
    pub role_mean_raw: Vec<f64>,
    pub grass_eaten: usize,
    pub sheep_eaten: usize,
    pub resources_collected: usize,
    pub kills: usize,
    pub collisions: usize,
    /// Grassland: fraction of sheep alive at the end.
    pub sheep_survival: Option<f64>,
    /// Food Collection: time-averaged fraction of occupied foods.
    pub coverage: Option<f64>,
}

/// Accumulates [`StepResult`]s of one episode.
#[derive(Clone, Debug)]
pub struct EpisodeTally {
    stats: EpisodeStats,
    occupied_steps: f64,
}

impl EpisodeTally {
    pub fn new(config: &GameConfig) -> Self {
        Self {
            stats: EpisodeStats {
                steps: 0,
                raw_per_agent: vec![0.0; config.num_agents()],
                role_mean_raw: vec![0.0; config.num_roles()],
                grass_eaten: 0,
                sheep_eaten: 0,
                resources_collected: 0,
                kills: 0,
                collisions: 0,
                sheep_survival: None,
                coverage: None,
            },
            occupied_steps: 0.0,
        }
    }

    pub fn record(&mut self, result: &StepResult) {
        let s = &mut self.stats;
        s.steps += 1;
        for (acc, r) in s.raw_per_agent.iter_mut().zip(&result.raw) {
            *acc += r;
        }
        let mut occupied = 0usize;
        for e in &result.events {
            match e.kind {
                EventKind::EatGrass => s.grass_eaten += 1,
                EventKind::EatSheep => s.sheep_eaten += 1,
                EventKind::CollectResource => s.resources_collected += 1,
                EventKind::Kill => s.kills += 1,
                EventKind::Collision => s.collisions += 1,
                EventKind::OccupyFood => occupied += 1,
            }
        }
        self.occupied_steps += occupied as f64;
    }

    pub fn finish(mut self, config: &GameConfig, state: &WorldState) -> EpisodeStats {
        let s = &mut self.stats;
        for role in 0..config.num_roles() {
            let range = config.role_range(role);
            let n = range.len() as f64;
            s.role_mean_raw[role] = range.map(|i| s.raw_per_agent[i]).sum::<f64>() / n;
        }
        match config.kind {
            GameKind::Grassland => {
                let sheep = config.scale.0[0] as f64;
                s.sheep_survival = Some(state.alive_count(config, 0) as f64 / sheep);
            }
            GameKind::FoodCollection if s.steps > 0 => {
                let foods = config.num_landmarks() as f64;
                s.coverage = Some(self.occupied_steps / (s.steps as f64 * foods));
            }
            _ => {}
        }
        self.stats
    }
}
