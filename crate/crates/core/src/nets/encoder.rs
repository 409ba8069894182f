use rand::Rng;

use super::attention::AttentionModule;
use super::batch::ObsBatch;
use super::layers::Linear;
use super::params::ParamStore;
use super::NetDims;
use crate::envs::EntityLayout;
use crate::error::{dim_err, Result};
use crate::numerics::{Real, Tape, Var};

/// Entity encoders plus one attention pool per entity type, queried by
/// the observer's own embedding.
#[derive(Clone, Debug)]
pub(crate) struct ObsCore {
    self_enc: Linear,
    type_enc: Vec<Linear>,
    attn: Vec<AttentionModule>,
    num_types: usize,
}

impl ObsCore {
    pub fn new(store: &mut ParamStore, prefix: &str, layout: &EntityLayout, dims: NetDims, rng: &mut impl Rng) -> Self {
        let d = dims.embed;
        let self_enc = Linear::new(store, &format!("{prefix}self_enc"), layout.self_dim, d, 1.0, rng);
        let mut type_enc = Vec::new();
        let mut attn = Vec::new();
        for (name, &f) in layout.type_names.iter().zip(&layout.type_dims) {
            type_enc.push(Linear::new(store, &format!("{prefix}type_enc.{name}"), f, d, 1.0, rng));
            attn.push(AttentionModule::new(store, &format!("{prefix}attn.{name}"), d, dims.key, rng));
        }
        Self {
            self_enc,
            type_enc,
            attn,
            num_types: layout.num_types(),
        }
    }

    /// Width of the concatenated self and type embeddings.
    pub fn output_width(&self, dims: NetDims) -> usize {
        (1 + self.num_types) * dims.embed
    }

    /// Returns the self embedding followed by one pooled embedding per type, each `[R, d]`.
    pub fn forward<T: Real>(&self, tape: &mut Tape<T>, vars: &[Var], batch: &ObsBatch) -> Result<Vec<Var>> {
        if batch.types.len() != self.num_types {
            return dim_err(
                "obs_encoder",
                format!("{} entity types, network has {}", batch.types.len(), self.num_types),
            );
        }
        let x = tape.constant(batch.self_feats.cast());
        let own = self.self_enc.forward_relu(tape, vars, x)?;
        let mut out = vec![own];
        for ((tb, enc), attn) in batch.types.iter().zip(&self.type_enc).zip(&self.attn) {
            let feats = tape.constant(tb.feats.cast());
            let emb = enc.forward_relu(tape, vars, feats)?;
            let valid = tb.valid_slots();
            out.push(attn.forward(tape, vars, own, emb, valid.as_deref())?);
        }
        Ok(out)
    }
}

/// Maps one agent's (observation, action) pair to a fixed-width embedding.
#[derive(Clone, Debug)]
pub(crate) struct ObsActionEncoder {
    core: ObsCore,
    act_enc: Linear,
    out: Linear,
}

impl ObsActionEncoder {
    pub fn new(store: &mut ParamStore, layout: &EntityLayout, dims: NetDims, rng: &mut impl Rng) -> Self {
        let core = ObsCore::new(store, "encoder.", layout, dims, rng);
        let act_enc = Linear::new(store, "encoder.act_enc", 2, dims.embed, 1.0, rng);
        let width = core.output_width(dims) + dims.embed;
        let out = Linear::new(store, "encoder.out", width, dims.embed, 1.0, rng);
        Self { core, act_enc, out }
    }

    /// `actions: [R, 2]` aligned with the batch rows; returns `[R, d]`.
    pub fn forward<T: Real>(&self, tape: &mut Tape<T>, vars: &[Var], batch: &ObsBatch, actions: Var) -> Result<Var> {
        let mut parts = self.core.forward(tape, vars, batch)?;
        parts.push(self.act_enc.forward_relu(tape, vars, actions)?);
        let cat = tape.concat(&parts)?;
        self.out.forward_relu(tape, vars, cat)
    }
}
