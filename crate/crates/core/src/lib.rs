//! Multi-agent particle-world training with a population-invariant
//! attention actor-critic, MADDPG, and an evolutionary population
//! curriculum.

pub mod cli;
pub mod envs;
pub mod epc;
pub mod error;
pub mod eval;
pub mod maddpg;
pub mod nets;
pub mod numerics;
pub mod seeds;

pub use error::{Error, Result};
