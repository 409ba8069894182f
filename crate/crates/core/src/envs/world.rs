use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{GameConfig, GameKind};
use crate::error::{contract, Result};
use crate::seeds::rng_from;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AgentState {
    pub pos: [f64; 2],
    pub vel: [f64; 2],
    pub alive: bool,
    pub role: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LandmarkState {
    pub pos: [f64; 2],
    pub active: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    EatGrass,
    EatSheep,
    CollectResource,
    Kill,
    Collision,
    OccupyFood,
}

/// One reward-bearing occurrence. `rewards` lists exactly the amounts it
/// contributes; summing them over all events gives the raw reward.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub agents: Vec<usize>,
    pub landmark: Option<usize>,
    pub rewards: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub raw: Vec<f64>,
    pub shaped: Vec<f64>,
    pub events: Vec<Event>,
    pub done: bool,
}

/// Full simulator state, including the instance's own random stream
/// (consumed by respawns), so a clone replays identically.
#[derive(Clone, Debug)]
pub struct WorldState {
    pub agents: Vec<AgentState>,
    pub landmarks: Vec<LandmarkState>,
    pub t: usize,
    rng: ChaCha8Rng,
}

fn uniform_pos(rng: &mut ChaCha8Rng, h: f64) -> [f64; 2] {
    [rng.random_range(-h..h), rng.random_range(-h..h)]
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Places agents and landmarks uniformly at random in the world square.
pub fn reset(config: &GameConfig, seed: u64) -> Result<WorldState> {
    config.validate()?;
    let mut rng = rng_from(seed);
    let h = config.half_extent;
    let agents = (0..config.num_agents())
        .map(|i| AgentState {
            pos: uniform_pos(&mut rng, h),
            vel: [0.0; 2],
            alive: true,
            role: config.role_of(i),
        })
        .collect();
    let landmarks = (0..config.num_landmarks())
        .map(|_| LandmarkState {
            pos: uniform_pos(&mut rng, h),
            active: true,
        })
        .collect();
    Ok(WorldState {
        agents,
        landmarks,
        t: 0,
        rng,
    })
}

impl WorldState {
    /// Builds a state from explicit positions; used for scripted scenarios.
    pub fn from_parts(agents: Vec<AgentState>, landmarks: Vec<LandmarkState>, seed: u64) -> Self {
        Self {
            agents,
            landmarks,
            t: 0,
            rng: rng_from(seed),
        }
    }

    pub fn alive_count(&self, config: &GameConfig, role: usize) -> usize {
        config.role_range(role).filter(|&i| self.agents[i].alive).count()
    }

    fn touching(&self, config: &GameConfig, a: usize, b: usize) -> bool {
        let ra = config.roles[self.agents[a].role].radius;
        let rb = config.roles[self.agents[b].role].radius;
        dist(self.agents[a].pos, self.agents[b].pos) < ra + rb
    }

    fn touching_landmark(&self, config: &GameConfig, a: usize, l: usize) -> bool {
        let ra = config.roles[self.agents[a].role].radius;
        dist(self.agents[a].pos, self.landmarks[l].pos) < ra + config.landmark_radius
    }

    fn respawn(&mut self, config: &GameConfig, l: usize) {
        self.landmarks[l].pos = uniform_pos(&mut self.rng, config.half_extent);
    }

    /// Advances one timestep. `actions` holds one entry per agent; entries
    /// of dead agents are ignored.
    pub fn step(&mut self, config: &GameConfig, actions: &[[f32; 2]]) -> Result<StepResult> {
        let n = self.agents.len();
        if actions.len() != n {
            return contract(format!("step expects {n} actions, got {}", actions.len()));
        }
        if self.t >= config.horizon {
            return contract("step called after the episode ended");
        }
        let h = config.half_extent;
        for (agent, action) in self.agents.iter_mut().zip(actions) {
            if !agent.alive {
                continue;
            }
            let phys = config.roles[agent.role];
            for d in 0..2 {
                let a = (action[d] as f64).clamp(-1.0, 1.0);
                agent.vel[d] = (1.0 - config.damping) * agent.vel[d] + a * phys.accel * config.dt;
            }
            let speed = (agent.vel[0].powi(2) + agent.vel[1].powi(2)).sqrt();
            if speed > phys.max_speed {
                let s = phys.max_speed / speed;
                agent.vel = [agent.vel[0] * s, agent.vel[1] * s];
            }
            for d in 0..2 {
                agent.pos[d] = (agent.pos[d] + agent.vel[d] * config.dt).clamp(-h, h);
            }
        }
        self.t += 1;

        let events = match config.kind {
            GameKind::Grassland => self.resolve_grassland(config),
            GameKind::AdversarialBattle => self.resolve_battle(config),
            GameKind::FoodCollection => self.resolve_food(config),
        };
        let mut raw = vec![0.0; n];
        for e in &events {
            for &(i, r) in &e.rewards {
                raw[i] += r;
            }
        }
        let shaped = (0..n)
            .map(|i| {
                if self.agents[i].alive {
                    self.shaped_reward(config, i)
                } else {
                    0.0
                }
            })
            .collect();
        Ok(StepResult {
            raw,
            shaped,
            events,
            done: self.t == config.horizon,
        })
    }

    fn resolve_grassland(&mut self, config: &GameConfig) -> Vec<Event> {
        let mut events = Vec::new();
        let sheep = config.role_range(0);
        let wolves = config.role_range(1);
        for l in 0..self.landmarks.len() {
            let eater = sheep
                .clone()
                .find(|&s| self.agents[s].alive && self.touching_landmark(config, s, l));
            if let Some(s) = eater {
                events.push(Event {
                    kind: EventKind::EatGrass,
                    agents: vec![s],
                    landmark: Some(l),
                    rewards: vec![(s, 2.0)],
                });
                self.respawn(config, l);
            }
        }
        for s in sheep {
            if !self.agents[s].alive {
                continue;
            }
            let eaters: Vec<usize> = wolves
                .clone()
                .filter(|&w| self.agents[w].alive && self.touching(config, w, s))
                .collect();
            if eaters.is_empty() {
                continue;
            }
            let mut rewards: Vec<(usize, f64)> = eaters.iter().map(|&w| (w, 5.0)).collect();
            rewards.push((s, -5.0));
            let mut agents = eaters;
            agents.push(s);
            events.push(Event {
                kind: EventKind::EatSheep,
                agents,
                landmark: None,
                rewards,
            });
            self.kill(s);
        }
        events
    }

    fn resolve_battle(&mut self, config: &GameConfig) -> Vec<Event> {
        let mut events = Vec::new();
        let n = self.agents.len();
        for l in 0..self.landmarks.len() {
            let collector = (0..n).find(|&a| self.agents[a].alive && self.touching_landmark(config, a, l));
            if let Some(a) = collector {
                let team = self.agents[a].role;
                let rewards = config
                    .role_range(team)
                    .filter(|&m| self.agents[m].alive)
                    .map(|m| (m, 1.0))
                    .collect();
                events.push(Event {
                    kind: EventKind::CollectResource,
                    agents: vec![a],
                    landmark: Some(l),
                    rewards,
                });
                self.respawn(config, l);
            }
        }
        // kills are decided on the liveness at the start of this phase
        let mut kills = Vec::new();
        for v in 0..n {
            if !self.agents[v].alive {
                continue;
            }
            let enemy = 1 - self.agents[v].role;
            let attackers: Vec<usize> = config
                .role_range(enemy)
                .filter(|&a| self.agents[a].alive && self.touching(config, a, v))
                .collect();
            if attackers.len() >= 2 {
                kills.push((v, attackers));
            }
        }
        for (v, attackers) in kills {
            let share = 6.0 / attackers.len() as f64;
            let mut rewards: Vec<(usize, f64)> = attackers.iter().map(|&a| (a, share)).collect();
            rewards.push((v, -6.0));
            let mut agents = attackers;
            agents.push(v);
            events.push(Event {
                kind: EventKind::Kill,
                agents,
                landmark: None,
                rewards,
            });
            self.kill(v);
        }
        events
    }

    fn resolve_food(&mut self, config: &GameConfig) -> Vec<Event> {
        let mut events = Vec::new();
        let n = self.agents.len();
        let per = 6.0 / n as f64;
        let live: Vec<usize> = (0..n).filter(|&i| self.agents[i].alive).collect();
        for l in 0..self.landmarks.len() {
            let occupants: Vec<usize> = live
                .iter()
                .copied()
                .filter(|&a| dist(self.agents[a].pos, self.landmarks[l].pos) < config.occupy_radius)
                .collect();
            if !occupants.is_empty() {
                events.push(Event {
                    kind: EventKind::OccupyFood,
                    agents: occupants,
                    landmark: Some(l),
                    rewards: live.iter().map(|&i| (i, per)).collect(),
                });
            }
        }
        for (x, &i) in live.iter().enumerate() {
            for &j in &live[x + 1..] {
                if self.touching(config, i, j) {
                    events.push(Event {
                        kind: EventKind::Collision,
                        agents: vec![i, j],
                        landmark: None,
                        rewards: live.iter().map(|&k| (k, -per)).collect(),
                    });
                }
            }
        }
        events
    }

    fn kill(&mut self, agent: usize) {
        let a = &mut self.agents[agent];
        a.alive = false;
        a.vel = [0.0; 2];
    }

    fn nearest_landmark(&self, from: [f64; 2]) -> Option<f64> {
        self.landmarks
            .iter()
            .filter(|l| l.active)
            .map(|l| dist(from, l.pos))
            .min_by(f64::total_cmp)
    }

    fn nearest_agent(&self, config: &GameConfig, from: [f64; 2], role: usize) -> Option<f64> {
        config
            .role_range(role)
            .filter(|&j| self.agents[j].alive)
            .map(|j| dist(from, self.agents[j].pos))
            .min_by(f64::total_cmp)
    }

    /// Distance penalty towards the agent's targets, scaled by the shaping
    /// coefficient. Kept apart from the raw reward.
    pub fn shaped_reward(&self, config: &GameConfig, agent: usize) -> f64 {
        let a = &self.agents[agent];
        if !a.alive || config.shaping == 0.0 {
            return 0.0;
        }
        let d = match (config.kind, a.role) {
            (GameKind::Grassland, 0) => self.nearest_landmark(a.pos).unwrap_or(0.0),
            (GameKind::Grassland, _) => self.nearest_agent(config, a.pos, 0).unwrap_or(0.0),
            (GameKind::AdversarialBattle, r) => {
                self.nearest_landmark(a.pos).unwrap_or(0.0)
                    + self.nearest_agent(config, a.pos, 1 - r).unwrap_or(0.0)
            }
            (GameKind::FoodCollection, _) => self.nearest_landmark(a.pos).unwrap_or(0.0),
        };
        -config.shaping * d
    }

    /// Number of food landmarks with a live agent inside the occupy radius.
    pub fn occupied_foods(&self, config: &GameConfig) -> usize {
        self.landmarks
            .iter()
            .filter(|l| {
                self.agents
                    .iter()
                    .any(|a| a.alive && dist(a.pos, l.pos) < config.occupy_radius)
            })
            .count()
    }
}
