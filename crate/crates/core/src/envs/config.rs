use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GameKind {
    Grassland,
    AdversarialBattle,
    FoodCollection,
}

impl GameKind {
    pub fn num_roles(self) -> usize {
        match self {
            GameKind::FoodCollection => 1,
            _ => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            GameKind::Grassland => "grassland",
            GameKind::AdversarialBattle => "adversarial-battle",
            GameKind::FoodCollection => "food-collection",
        }
    }

    pub fn role_names(self) -> &'static [&'static str] {
        match self {
            GameKind::Grassland => &["sheep", "wolf"],
            GameKind::AdversarialBattle => &["team1", "team2"],
            GameKind::FoodCollection => &["agent"],
        }
    }

    /// Entity types seen in every observation of this game, besides self.
    pub fn layout(self) -> EntityLayout {
        let role_bits = if self.num_roles() > 1 { self.num_roles() } else { 0 };
        let (names, dims): (&[&str], Vec<usize>) = match self {
            GameKind::Grassland => (&["sheep", "wolves", "grass"], vec![4, 4, 2]),
            GameKind::AdversarialBattle => (&["teammates", "enemies", "resources"], vec![4, 4, 2]),
            GameKind::FoodCollection => (&["teammates", "food"], vec![4, 2]),
        };
        EntityLayout {
            self_dim: 4 + role_bits,
            type_names: names.iter().map(|s| s.to_string()).collect(),
            type_dims: dims,
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GameKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "grassland" => Ok(GameKind::Grassland),
            "adversarial-battle" | "battle" => Ok(GameKind::AdversarialBattle),
            "food-collection" | "food" => Ok(GameKind::FoodCollection),
            other => Err(Error::Config(format!("unknown game kind `{other}`"))),
        }
    }
}

/// Feature layout of an observation: self features plus typed entity lists.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityLayout {
    pub self_dim: usize,
    pub type_names: Vec<String>,
    pub type_dims: Vec<usize>,
}

impl EntityLayout {
    pub fn num_types(&self) -> usize {
        self.type_dims.len()
    }
}

/// Agents per role, written `3-2` for two roles or `6` for one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Scale(pub Vec<usize>);

impl Scale {
    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn scaled(&self, factor: usize) -> Scale {
        Scale(self.0.iter().map(|n| n * factor).collect())
    }

    pub fn doubled(&self) -> Scale {
        self.scaled(2)
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|n| n.to_string()).collect();
        f.write_str(&parts.join("-"))
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let counts = s
            .trim()
            .split('-')
            .map(|p| {
                p.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Config(format!("bad scale `{s}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Scale(counts))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RolePhysics {
    pub accel: f64,
    pub max_speed: f64,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub kind: GameKind,
    pub scale: Scale,
    /// Overrides the default landmark count (sheep count, team size, or N).
    pub landmarks_override: Option<usize>,
    pub horizon: usize,
    pub half_extent: f64,
    pub dt: f64,
    pub damping: f64,
    pub roles: Vec<RolePhysics>,
    pub landmark_radius: f64,
    pub occupy_radius: f64,
    pub shaping: f64,
}

impl GameConfig {
    pub fn new(kind: GameKind, scale: Scale) -> Result<Self> {
        let roles = match kind {
            GameKind::Grassland => vec![
                RolePhysics {
                    accel: 6.0,
                    max_speed: 2.0,
                    radius: 0.045,
                },
                RolePhysics {
                    accel: 3.0,
                    max_speed: 1.0,
                    radius: 0.05,
                },
            ],
            GameKind::AdversarialBattle => vec![
                RolePhysics {
                    accel: 4.0,
                    max_speed: 1.0,
                    radius: 0.05,
                };
                2
            ],
            GameKind::FoodCollection => vec![RolePhysics {
                accel: 5.0,
                max_speed: 1.0,
                radius: 0.045,
            }],
        };
        let landmark_radius = 0.03;
        let occupy_radius = roles[0].radius + landmark_radius;
        let cfg = Self {
            kind,
            scale,
            landmarks_override: None,
            horizon: 25,
            half_extent: 1.0,
            dt: 0.1,
            damping: 0.25,
            roles,
            landmark_radius,
            occupy_radius,
            shaping: 0.05,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn grassland(sheep: usize, wolves: usize) -> Result<Self> {
        Self::new(GameKind::Grassland, Scale(vec![sheep, wolves]))
    }

    pub fn battle(team: usize) -> Result<Self> {
        Self::new(GameKind::AdversarialBattle, Scale(vec![team, team]))
    }

    pub fn food_collection(n: usize) -> Result<Self> {
        Self::new(GameKind::FoodCollection, Scale(vec![n]))
    }

    /// Same physics at a different population.
    pub fn with_scale(&self, scale: Scale) -> Result<Self> {
        let cfg = Self {
            scale,
            ..self.clone()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        let roles = self.kind.num_roles();
        if self.scale.0.len() != roles {
            return bad(format!("{} needs {roles} role counts, got scale {}", self.kind, self.scale));
        }
        if self.scale.0.contains(&0) {
            return bad(format!("role counts must be >= 1, got {}", self.scale));
        }
        if self.kind == GameKind::AdversarialBattle && self.scale.0[0] != self.scale.0[1] {
            return bad(format!("battle teams must be equal, got {}", self.scale));
        }
        if self.roles.len() != roles {
            return bad(format!("expected physics for {roles} roles"));
        }
        if self.horizon == 0 {
            return bad("horizon must be >= 1".into());
        }
        if !(self.dt > 0.0) || !(self.half_extent > 0.0) || !(0.0..1.0).contains(&self.damping) {
            return bad("dt and half-extent must be positive, damping in [0,1)".into());
        }
        if self.roles.iter().any(|r| !(r.radius > 0.0) || !(r.max_speed > 0.0) || r.accel < 0.0)
            || !(self.landmark_radius > 0.0)
            || !(self.occupy_radius > 0.0)
        {
            return bad("radii and speeds must be positive".into());
        }
        if self.kind == GameKind::Grassland
            && (self.roles[0].max_speed - 2.0 * self.roles[1].max_speed).abs() > 1e-12
        {
            return bad("grassland sheep max speed must be twice the wolf max speed".into());
        }
        if self.landmarks_override == Some(0) {
            return bad("landmark count must be >= 1".into());
        }
        Ok(())
    }

    pub fn num_agents(&self) -> usize {
        self.scale.total()
    }

    pub fn num_roles(&self) -> usize {
        self.kind.num_roles()
    }

    pub fn num_landmarks(&self) -> usize {
        self.landmarks_override.unwrap_or(self.scale.0[0])
    }

    pub fn role_of(&self, agent: usize) -> usize {
        let mut acc = 0;
        for (role, &n) in self.scale.0.iter().enumerate() {
            acc += n;
            if agent < acc {
                return role;
            }
        }
        panic!("agent {agent} out of range for scale {}", self.scale)
    }

    pub fn role_range(&self, role: usize) -> std::ops::Range<usize> {
        let start: usize = self.scale.0[..role].iter().sum();
        start..start + self.scale.0[role]
    }

    pub fn layout(&self) -> EntityLayout {
        self.kind.layout()
    }
}
