use serde::{Deserialize, Serialize};

use super::config::{GameConfig, GameKind};
use super::world::WorldState;

/// Variable-length list of same-typed entity feature vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntityList {
    pub feat_dim: usize,
    pub data: Vec<f32>,
}

impl EntityList {
    pub fn new(feat_dim: usize) -> Self {
        Self {
            feat_dim,
            data: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.feat_dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f32] {
        &self.data[i * self.feat_dim..(i + 1) * self.feat_dim]
    }

    pub fn push(&mut self, features: &[f32]) {
        debug_assert_eq!(features.len(), self.feat_dim);
        self.data.extend_from_slice(features);
    }
}

/// What one agent sees: its own absolute features and, per entity type,
/// the live entities of that type relative to itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub self_features: Vec<f32>,
    pub entities: Vec<EntityList>,
}

fn rel_agent(state: &WorldState, from: usize, to: usize) -> [f32; 4] {
    let (a, b) = (&state.agents[from], &state.agents[to]);
    [
        (b.pos[0] - a.pos[0]) as f32,
        (b.pos[1] - a.pos[1]) as f32,
        (b.vel[0] - a.vel[0]) as f32,
        (b.vel[1] - a.vel[1]) as f32,
    ]
}

pub fn observe(config: &GameConfig, state: &WorldState, agent: usize) -> Observation {
    let me = &state.agents[agent];
    let mut self_features = vec![me.pos[0] as f32, me.pos[1] as f32, me.vel[0] as f32, me.vel[1] as f32];
    let roles = config.num_roles();
    if roles > 1 {
        self_features.extend((0..roles).map(|r| if r == me.role { 1.0 } else { 0.0 }));
    }

    let agents_of = |role: usize| {
        let mut list = EntityList::new(4);
        for j in config.role_range(role) {
            if j != agent && state.agents[j].alive {
                list.push(&rel_agent(state, agent, j));
            }
        }
        list
    };
    let mut landmarks = EntityList::new(2);
    for l in state.landmarks.iter().filter(|l| l.active) {
        landmarks.push(&[(l.pos[0] - me.pos[0]) as f32, (l.pos[1] - me.pos[1]) as f32]);
    }

    let entities = match config.kind {
        GameKind::Grassland => vec![agents_of(0), agents_of(1), landmarks],
        GameKind::AdversarialBattle => vec![agents_of(me.role), agents_of(1 - me.role), landmarks],
        GameKind::FoodCollection => vec![agents_of(0), landmarks],
    };
    Observation {
        self_features,
        entities,
    }
}

pub fn observe_all(config: &GameConfig, state: &WorldState) -> Vec<Observation> {
    (0..state.agents.len()).map(|i| observe(config, state, i)).collect()
}
