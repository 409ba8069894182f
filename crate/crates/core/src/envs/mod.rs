//! Two-dimensional particle worlds: Grassland, Adversarial Battle and
//! Food Collection.

mod config;
mod observation;
mod stats;
mod trace;
mod world;

pub use config::{EntityLayout, GameConfig, GameKind, RolePhysics, Scale};
pub use observation::{observe, observe_all, EntityList, Observation};
pub use stats::{EpisodeStats, EpisodeTally};
pub use trace::{TraceRecord, TraceWriter};
pub use world::{reset, AgentState, Event, EventKind, LandmarkState, StepResult, WorldState};
