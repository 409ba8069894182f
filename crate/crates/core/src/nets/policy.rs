use rand::Rng;

use super::batch::ObsBatch;
use super::encoder::ObsCore;
use super::layers::Linear;
use super::params::ParamStore;
use super::NetDims;
use crate::envs::{EntityLayout, Observation};
use crate::error::Result;
use crate::numerics::{Real, Tape, Var};

/// Deterministic decentralized actor: reads only its own observation and
/// emits a 2D acceleration in `[-1, 1]^2`.
#[derive(Clone, Debug)]
pub struct PolicyNet {
    pub layout: EntityLayout,
    pub dims: NetDims,
    core: ObsCore,
    hidden: Linear,
    action: Linear,
    pub params: ParamStore,
}

impl PolicyNet {
    pub fn new(layout: &EntityLayout, dims: NetDims, rng: &mut impl Rng) -> Self {
        let mut params = ParamStore::new();
        let core = ObsCore::new(&mut params, "", layout, dims, rng);
        let hidden = Linear::new(&mut params, "hidden", core.output_width(dims), dims.hidden, 1.0, rng);
        // small last layer: near-zero initial actions
        let action = Linear::new(&mut params, "action", dims.hidden, 2, 0.1, rng);
        Self {
            layout: layout.clone(),
            dims,
            core,
            hidden,
            action,
            params,
        }
    }

    /// Records the forward pass; returns the `[R, 2]` actions and the bound parameter vars.
    pub fn forward<T: Real>(&self, tape: &mut Tape<T>, batch: &ObsBatch, trainable: bool) -> Result<(Var, Vec<Var>)> {
        let (_, out, vars) = self.forward_pre(tape, batch, trainable)?;
        Ok((out, vars))
    }

    /// Like [`forward`](Self::forward), also returning the pre-tanh `[R, 2]` outputs.
    pub fn forward_pre<T: Real>(
        &self,
        tape: &mut Tape<T>,
        batch: &ObsBatch,
        trainable: bool,
    ) -> Result<(Var, Var, Vec<Var>)> {
        let vars = self.params.bind(tape, trainable);
        let parts = self.core.forward(tape, &vars, batch)?;
        let cat = tape.concat(&parts)?;
        let h = self.hidden.forward_relu(tape, &vars, cat)?;
        let pre = self.action.forward(tape, &vars, h)?;
        let out = tape.tanh(pre)?;
        Ok((pre, out, vars))
    }

    pub fn act_batch(&self, obs: &[&Observation]) -> Result<Vec<[f32; 2]>> {
        let batch = ObsBatch::new(&self.layout, obs)?;
        let mut tape: Tape<f32> = Tape::new();
        let (out, _) = self.forward(&mut tape, &batch, false)?;
        Ok(tape.value(out).data().chunks_exact(2).map(|c| [c[0], c[1]]).collect())
    }

    pub fn act(&self, obs: &Observation) -> Result<[f32; 2]> {
        Ok(self.act_batch(&[obs])?[0])
    }
}
