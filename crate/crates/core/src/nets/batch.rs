use crate::envs::{EntityLayout, Observation};
use crate::error::{Error, Result};
use crate::numerics::{Real, Tensor};

/// Additive logit mask for padded key slots.
const MASKED_LOGIT: f64 = -1e9;

/// One entity type across a batch, padded to the longest list.
#[derive(Clone, Debug)]
pub struct TypeBatch {
    /// `[rows, width, feat_dim]`; padded slots are zero.
    pub feats: Tensor,
    pub counts: Vec<usize>,
}

impl TypeBatch {
    pub fn width(&self) -> usize {
        self.feats.shape()[1]
    }

    pub fn is_full(&self) -> bool {
        let w = self.width();
        self.counts.iter().all(|&c| c == w)
    }

    pub fn has_empty_rows(&self) -> bool {
        self.counts.contains(&0)
    }

    /// Per-slot validity flags, `rows * width` long; `None` when every slot is used.
    pub fn valid_slots(&self) -> Option<Vec<bool>> {
        if self.is_full() {
            return None;
        }
        let w = self.width();
        Some(self.counts.iter().flat_map(|&c| (0..w).map(move |k| k < c)).collect())
    }
}

/// `[rows, 1, width]` with 0 on valid slots and a large negative logit elsewhere.
pub(crate) fn logit_mask<T: Real>(valid: &[bool], rows: usize, width: usize) -> Tensor<T> {
    let neg = T::from_f64_lossy(MASKED_LOGIT);
    let data = valid.iter().map(|&v| if v { T::zero() } else { neg }).collect();
    Tensor::from_parts(vec![rows, 1, width], data)
}

/// `[rows, dim]` of ones for rows with at least one valid slot, zeros otherwise.
pub(crate) fn nonempty_rows<T: Real>(valid: &[bool], width: usize, dim: usize) -> Tensor<T> {
    let mut data = Vec::with_capacity(valid.len() / width * dim);
    for row in valid.chunks(width) {
        let v = if row.iter().any(|&x| x) { T::one() } else { T::zero() };
        data.extend(std::iter::repeat_n(v, dim));
    }
    Tensor::from_parts(vec![valid.len() / width, dim], data)
}

/// Observations stacked into padded tensors.
#[derive(Clone, Debug)]
pub struct ObsBatch {
    pub rows: usize,
    pub self_feats: Tensor,
    pub types: Vec<TypeBatch>,
}

fn check_layout(layout: &EntityLayout, o: &Observation) -> Result<()> {
    if o.self_features.len() != layout.self_dim {
        return Err(Error::Config(format!(
            "self features have {} dims, layout expects {}",
            o.self_features.len(),
            layout.self_dim
        )));
    }
    if o.entities.len() != layout.num_types() {
        return Err(Error::Config(format!(
            "observation has {} entity types, layout declares {:?}",
            o.entities.len(),
            layout.type_names
        )));
    }
    for (list, (&d, name)) in o.entities.iter().zip(layout.type_dims.iter().zip(&layout.type_names)) {
        if list.feat_dim != d || list.data.len() % d != 0 {
            return Err(Error::Config(format!(
                "entity type `{name}` has feature dim {}, expected {d}",
                list.feat_dim
            )));
        }
    }
    Ok(())
}

impl ObsBatch {
    pub fn new(layout: &EntityLayout, obs: &[&Observation]) -> Result<Self> {
        if obs.is_empty() {
            return Err(Error::Contract("empty observation batch".into()));
        }
        for o in obs {
            check_layout(layout, o)?;
        }
        let rows = obs.len();
        let mut self_data = Vec::with_capacity(rows * layout.self_dim);
        for o in obs {
            self_data.extend_from_slice(&o.self_features);
        }
        let self_feats = Tensor::from_parts(vec![rows, layout.self_dim], self_data);
        let types = (0..layout.num_types())
            .map(|t| {
                let d = layout.type_dims[t];
                let counts: Vec<usize> = obs.iter().map(|o| o.entities[t].len()).collect();
                let width = counts.iter().copied().max().unwrap_or(0).max(1);
                let mut data = vec![0.0f32; rows * width * d];
                for (r, o) in obs.iter().enumerate() {
                    let src = &o.entities[t].data;
                    data[r * width * d..r * width * d + src.len()].copy_from_slice(src);
                }
                TypeBatch {
                    feats: Tensor::from_parts(vec![rows, width, d], data),
                    counts,
                }
            })
            .collect();
        Ok(Self {
            rows,
            self_feats,
            types,
        })
    }
}

/// Joint observations of all agents for a batch of samples; row
/// `b * agents + j` holds agent `j` of sample `b`.
#[derive(Clone, Debug)]
pub struct JointBatch {
    pub obs: ObsBatch,
    pub samples: usize,
    pub roles: Vec<usize>,
    pub alive: Vec<bool>,
}

impl JointBatch {
    pub fn new(layout: &EntityLayout, joint: &[&[Observation]], alive: &[&[bool]], roles: &[usize]) -> Result<Self> {
        let n = roles.len();
        if joint.iter().any(|s| s.len() != n) || alive.len() != joint.len() || alive.iter().any(|a| a.len() != n) {
            return Err(Error::Contract(format!(
                "joint batch needs {n} observations and alive flags per sample"
            )));
        }
        let flat: Vec<&Observation> = joint.iter().flat_map(|s| s.iter()).collect();
        Ok(Self {
            obs: ObsBatch::new(layout, &flat)?,
            samples: joint.len(),
            roles: roles.to_vec(),
            alive: alive.iter().flat_map(|a| a.iter().copied()).collect(),
        })
    }

    pub fn agents(&self) -> usize {
        self.roles.len()
    }
}
