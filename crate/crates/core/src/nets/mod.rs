//! Population-invariant attention actor and critic.
//!
//! Every network owns a flat [`ParamStore`]; layers refer to entries by
//! index and bind them onto a [`Tape`](crate::numerics::Tape) per forward
//! pass. Parameter shapes depend only on the observation layout and the
//! number of roles, never on how many agents or entities are present.

mod attention;
mod batch;
mod critic;
mod encoder;
mod layers;
mod params;
mod policy;

pub use attention::{attention_pool, AttentionModule};
pub use batch::{JointBatch, ObsBatch, TypeBatch};
pub use critic::CriticNet;
pub use layers::Linear;
pub use params::ParamStore;
pub use policy::PolicyNet;

use serde::{Deserialize, Serialize};

/// Widths shared by all networks of one agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetDims {
    pub embed: usize,
    pub key: usize,
    pub hidden: usize,
}

impl Default for NetDims {
    fn default() -> Self {
        Self {
            embed: 64,
            key: 32,
            hidden: 64,
        }
    }
}
