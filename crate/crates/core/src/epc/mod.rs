//! Evolutionary population curriculum: stage-wise doubling, mix-and-match
//! crossover, MARL fine-tuning as mutation, and top-K selection.

mod combos;
mod curriculum;
mod fitness;
mod set;
mod store;

pub use combos::{c_max, compose_games, select_top_k};
pub use curriculum::{mutate, run_curriculum, CurriculumConfig, CurriculumOutcome, StageConfig, StageRecord};
pub use fitness::{fitness, FitnessConfig};
pub use set::{clone_double, mix_and_match, AgentSet, Provenance};
pub use store::StageStore;
