use rand::Rng;

use super::attention::AttentionModule;
use super::batch::{JointBatch, ObsBatch};
use super::encoder::ObsActionEncoder;
use super::layers::Linear;
use super::params::ParamStore;
use super::NetDims;
use crate::envs::{EntityLayout, Observation};
use crate::error::{contract, dim_err, Result};
use crate::numerics::{Real, Tape, Tensor, Var};

/// Centralized critic `Q = h([g(f(o_i, a_i)), v_i])`.
///
/// The same encoder `f` embeds every agent's observation-action pair. `v_i`
/// pools the other agents' embeddings with `f(o_i, a_i)` as query: one
/// pool over everyone for single-role games, separate teammate and
/// opponent pools (concatenated) for two-role games.
#[derive(Clone, Debug)]
pub struct CriticNet {
    pub layout: EntityLayout,
    pub dims: NetDims,
    pub num_roles: usize,
    encoder: ObsActionEncoder,
    cross: Vec<AttentionModule>,
    g: Linear,
    h1: Linear,
    h2: Linear,
    pub params: ParamStore,
}

impl CriticNet {
    pub fn new(layout: &EntityLayout, num_roles: usize, dims: NetDims, rng: &mut impl Rng) -> Self {
        let mut params = ParamStore::new();
        let encoder = ObsActionEncoder::new(&mut params, layout, dims, rng);
        let cross_names: &[&str] = if num_roles > 1 { &["teammates", "opponents"] } else { &["others"] };
        let cross = cross_names
            .iter()
            .map(|n| AttentionModule::new(&mut params, &format!("cross.{n}"), dims.embed, dims.key, rng))
            .collect::<Vec<_>>();
        let g = Linear::new(&mut params, "g", dims.embed, dims.hidden, 1.0, rng);
        let h_in = dims.hidden + cross.len() * dims.embed;
        let h1 = Linear::new(&mut params, "h1", h_in, dims.hidden, 1.0, rng);
        let h2 = Linear::new(&mut params, "h2", dims.hidden, 1, 1.0, rng);
        Self {
            layout: layout.clone(),
            dims,
            num_roles,
            encoder,
            cross,
            g,
            h1,
            h2,
            params,
        }
    }

    /// Agent embeddings `f(o_j, a_j)` for every row, shaped `[B, N, d]`.
    pub fn embed_all<T: Real>(&self, tape: &mut Tape<T>, vars: &[Var], joint: &JointBatch, actions: Var) -> Result<Var> {
        let n = joint.agents();
        if tape.shape(actions) != [joint.samples * n, 2] {
            return dim_err(
                "critic",
                format!("actions {:?} for {} samples x {n} agents", tape.shape(actions), joint.samples),
            );
        }
        let emb = self.encoder.forward(tape, vars, &joint.obs, actions)?;
        tape.reshape(emb, &[joint.samples, n, self.dims.embed])
    }

    /// Records `Q_me` for every sample; returns `[B, 1]` and the bound vars.
    pub fn forward<T: Real>(
        &self,
        tape: &mut Tape<T>,
        joint: &JointBatch,
        actions: Var,
        me: usize,
        trainable: bool,
    ) -> Result<(Var, Vec<Var>)> {
        let n = joint.agents();
        if n < 2 {
            return contract(format!("critic needs at least 2 agents, got {n}"));
        }
        if me >= n {
            return contract(format!("agent {me} out of range for {n} agents"));
        }
        let vars = self.params.bind(tape, trainable);
        let emb = self.embed_all(tape, &vars, joint, actions)?;
        let b = joint.samples;
        let d = self.dims.embed;
        let own = tape.gather(emb, &[me])?;
        let own = tape.reshape(own, &[b, d])?;

        let my_role = joint.roles[me];
        let groups: Vec<Vec<usize>> = if self.num_roles > 1 {
            vec![
                (0..n).filter(|&j| j != me && joint.roles[j] == my_role).collect(),
                (0..n).filter(|&j| joint.roles[j] != my_role).collect(),
            ]
        } else {
            vec![(0..n).filter(|&j| j != me).collect()]
        };
        let mut parts = vec![self.g.forward_relu(tape, &vars, own)?];
        for (module, group) in self.cross.iter().zip(&groups) {
            if group.is_empty() {
                parts.push(tape.constant(Tensor::zeros(&[b, d])));
                continue;
            }
            let keys = tape.gather(emb, group)?;
            let valid: Vec<bool> = (0..b)
                .flat_map(|s| group.iter().map(move |&j| joint.alive[s * n + j]))
                .collect();
            let mask = if valid.iter().all(|&v| v) { None } else { Some(valid.as_slice()) };
            parts.push(module.forward(tape, &vars, own, keys, mask)?);
        }
        let cat = tape.concat(&parts)?;
        let h = self.h1.forward_relu(tape, &vars, cat)?;
        Ok((self.h2.forward(tape, &vars, h)?, vars))
    }

    /// `f(o, a)` for a single pair.
    pub fn encode_obs_action(&self, obs: &Observation, action: [f32; 2]) -> Result<Vec<f32>> {
        let batch = ObsBatch::new(&self.layout, &[obs])?;
        let mut tape: Tape<f32> = Tape::new();
        let vars = self.params.bind(&mut tape, false);
        let a = tape.constant(Tensor::from_parts(vec![1, 2], action.to_vec()));
        let out = self.encoder.forward(&mut tape, &vars, &batch, a)?;
        Ok(tape.value(out).data().to_vec())
    }

    /// Single-sample `Q_me(x, a_1..a_N)`.
    pub fn q_value(&self, obs: &[Observation], actions: &[[f32; 2]], alive: &[bool], roles: &[usize], me: usize) -> Result<f32> {
        if actions.len() != obs.len() {
            return contract("one action per observation");
        }
        let joint = JointBatch::new(&self.layout, &[obs], &[alive], roles)?;
        let mut tape: Tape<f32> = Tape::new();
        let flat: Vec<f32> = actions.iter().flat_map(|a| a.iter().copied()).collect();
        let a = tape.constant(Tensor::from_parts(vec![obs.len(), 2], flat));
        let (q, _) = self.forward(&mut tape, &joint, a, me, false)?;
        tape.value(q).item()
    }
}
