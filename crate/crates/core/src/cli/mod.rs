//! Command-line plumbing: experiment configuration, checkpoints, and the
//! `train`, `evolve` and `tournament` commands.

pub mod checkpoint;
mod commands;
pub mod config;

pub use commands::{evolve_command, exit_code, role_path, tournament_command, train_command, Overrides};
pub use config::ExperimentConfig;
