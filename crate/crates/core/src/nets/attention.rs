use rand::Rng;

use super::batch::{logit_mask, nonempty_rows};
use super::params::ParamStore;
use crate::error::{contract, dim_err, Result};
use crate::numerics::{Real, Tape, Tensor, Var};

/// Dot-product attention pool with learned query/key projections.
///
/// With query `q` and keys `k_m`, `beta_m = q^T W_psi^T W_phi k_m`,
/// `alpha = softmax(beta)` and the output is `sum_m alpha_m k_m`, so the
/// result is a convex combination of the keys.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AttentionModule {
    w_psi: usize,
    w_phi: usize,
    pub dim: usize,
    pub key_dim: usize,
}

impl AttentionModule {
    pub fn new(store: &mut ParamStore, name: &str, dim: usize, key_dim: usize, rng: &mut impl Rng) -> Self {
        let w_psi = store.push_uniform(format!("{name}.w_psi"), &[key_dim, dim], dim, 1.0, rng);
        let w_phi = store.push_uniform(format!("{name}.w_phi"), &[key_dim, dim], dim, 1.0, rng);
        Self {
            w_psi,
            w_phi,
            dim,
            key_dim,
        }
    }

    /// `query: [B, d]`, `keys: [B, M, d]`. `valid` flags each of the `B * M`
    /// key slots (all valid when `None`); rows without a valid key yield zeros.
    pub fn forward<T: Real>(
        &self,
        tape: &mut Tape<T>,
        vars: &[Var],
        query: Var,
        keys: Var,
        valid: Option<&[bool]>,
    ) -> Result<Var> {
        let (alpha, keys) = self.weights(tape, vars, query, keys, valid)?;
        let ks = tape.shape(keys).to_vec();
        let pooled = tape.matmul(alpha, keys)?;
        let pooled = tape.reshape(pooled, &[ks[0], ks[2]])?;
        match valid {
            Some(v) if v.chunks(ks[1]).any(|row| !row.iter().any(|&x| x)) => {
                let keep = tape.constant(nonempty_rows(v, ks[1], ks[2]));
                tape.mul(pooled, keep)
            }
            _ => Ok(pooled),
        }
    }

    /// Attention weights `[B, 1, M]`, returned with the key var.
    pub fn weights<T: Real>(
        &self,
        tape: &mut Tape<T>,
        vars: &[Var],
        query: Var,
        keys: Var,
        valid: Option<&[bool]>,
    ) -> Result<(Var, Var)> {
        let qs = tape.shape(query).to_vec();
        let ks = tape.shape(keys).to_vec();
        if qs.len() != 2 || ks.len() != 3 || qs[0] != ks[0] || qs[1] != self.dim || ks[2] != self.dim {
            return dim_err("attention", format!("query {qs:?}, keys {ks:?}, dim {}", self.dim));
        }
        let (b, m) = (ks[0], ks[1]);
        // fold both projections into the query: (q W_psi^T W_phi) k costs O(d)
        // per key instead of projecting every key to d_k
        let psi_t = tape.transpose(vars[self.w_psi])?;
        let q = tape.matmul(query, psi_t)?;
        let q = tape.matmul(q, vars[self.w_phi])?;
        let q = tape.reshape(q, &[b, 1, self.dim])?;
        let mut beta = tape.matmul_nt(q, keys)?;
        if let Some(v) = valid {
            if v.len() != b * m {
                return dim_err("attention", format!("{} mask flags for {b}x{m} keys", v.len()));
            }
            if v.iter().any(|&x| !x) {
                let mask = tape.constant(logit_mask(v, b, m));
                beta = tape.add(beta, mask)?;
            }
        }
        Ok((tape.softmax(beta)?, keys))
    }
}

/// Single-query attention pool on plain vectors; returns the pooled vector
/// and the attention weights.
pub fn attention_pool(query: &[f32], keys: &[&[f32]], w_psi: &Tensor, w_phi: &Tensor) -> Result<(Vec<f32>, Vec<f32>)> {
    if keys.is_empty() {
        return contract("attention_pool needs at least one key");
    }
    let d = query.len();
    if keys.iter().any(|k| k.len() != d) || w_psi.shape().len() != 2 || w_psi.shape()[1] != d || w_phi.shape() != w_psi.shape() {
        return dim_err(
            "attention_pool",
            format!("query {d}, W_psi {:?}, W_phi {:?}", w_psi.shape(), w_phi.shape()),
        );
    }
    let mut store = ParamStore::new();
    store.push("w_psi", w_psi.clone());
    store.push("w_phi", w_phi.clone());
    let module = AttentionModule {
        w_psi: 0,
        w_phi: 1,
        dim: d,
        key_dim: w_psi.shape()[0],
    };
    let mut tape: Tape<f32> = Tape::new();
    let vars = store.bind(&mut tape, false);
    let q = tape.constant(Tensor::from_parts(vec![1, d], query.to_vec()));
    let flat: Vec<f32> = keys.iter().flat_map(|k| k.iter().copied()).collect();
    let k = tape.constant(Tensor::from_parts(vec![1, keys.len(), d], flat));
    let (alpha, _) = module.weights(&mut tape, &vars, q, k, None)?;
    let out = module.forward(&mut tape, &vars, q, k, None)?;
    Ok((tape.value(out).data().to_vec(), tape.value(alpha).data().to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::rng_from;

    fn rand_mat(rows: usize, cols: usize, seed: u64) -> Tensor {
        let mut rng = rng_from(seed);
        Tensor::new(vec![rows, cols], (0..rows * cols).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn singleton_returns_the_key() {
        let key = [0.3f32, -0.7, 1.25];
        let (out, alpha) = attention_pool(&[1.0, 2.0, 3.0], &[&key], &rand_mat(2, 3, 1), &rand_mat(2, 3, 2)).unwrap();
        assert_eq!(alpha, vec![1.0]);
        assert_eq!(out, key.to_vec());
    }

    #[test]
    fn zero_projections_give_mean() {
        let z = Tensor::zeros(&[2, 2]);
        let (out, alpha) = attention_pool(&[1.0, 1.0], &[&[1.0, 0.0], &[3.0, 4.0]], &z, &z).unwrap();
        assert_eq!(alpha, vec![0.5, 0.5]);
        assert!((out[0] - 2.0).abs() < 1e-7 && (out[1] - 2.0).abs() < 1e-7);
    }

    #[test]
    fn log_three_logits_give_three_quarters() {
        // W_psi = W_phi = I, query (1, 0): beta_k = first component of key k
        let eye = Tensor::new(vec![2, 2], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let ln3 = 3f32.ln();
        let (_, alpha) = attention_pool(&[1.0, 0.0], &[&[ln3, 0.0], &[0.0, 1.0]], &eye, &eye).unwrap();
        assert!((alpha[0] - 0.75).abs() < 1e-6);
        assert!((alpha[1] - 0.25).abs() < 1e-6);
    }

    #[test]
    fn empty_keys_rejected() {
        let z = Tensor::zeros(&[2, 2]);
        assert!(matches!(attention_pool(&[1.0, 1.0], &[], &z, &z), Err(crate::Error::Contract(_))));
    }
}
