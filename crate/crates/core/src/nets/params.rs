use rand::Rng;

use crate::error::{dim_err, Error, Result};
use crate::numerics::{Real, Tape, Tensor, Var};

/// Ordered, named parameter tensors of one network.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ParamStore {
    names: Vec<String>,
    values: Vec<Tensor>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, value: Tensor) -> usize {
        self.names.push(name.into());
        self.values.push(value);
        self.values.len() - 1
    }

    /// Uniform(-s, s) init with `s = scale / sqrt(fan_in)`.
    pub fn push_uniform(
        &mut self,
        name: impl Into<String>,
        shape: &[usize],
        fan_in: usize,
        scale: f64,
        rng: &mut impl Rng,
    ) -> usize {
        let bound = scale / (fan_in as f64).sqrt();
        let n: usize = shape.iter().product();
        let data = (0..n).map(|_| rng.random_range(-bound..=bound) as f32).collect();
        self.push(name, Tensor::from_parts(shape.to_vec(), data))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[Tensor] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Tensor] {
        &mut self.values
    }

    pub fn get(&self, name: &str) -> Option<&Tensor> {
        self.names.iter().position(|n| n == name).map(|i| &self.values[i])
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Tensor> {
        self.names.iter().position(|n| n == name).map(|i| &mut self.values[i])
    }

    /// Total number of scalars.
    pub fn scalar_count(&self) -> usize {
        self.values.iter().map(Tensor::numel).sum()
    }

    pub fn shapes(&self) -> Vec<Vec<usize>> {
        self.values.iter().map(|v| v.shape().to_vec()).collect()
    }

    /// Records every parameter on `tape`, as gradient-carrying leaves when
    /// `trainable`, as constants otherwise.
    pub fn bind<T: Real>(&self, tape: &mut Tape<T>, trainable: bool) -> Vec<Var> {
        self.values
            .iter()
            .map(|v| {
                let t = v.cast::<T>();
                if trainable {
                    tape.param(t)
                } else {
                    tape.constant(t)
                }
            })
            .collect()
    }

    /// Replaces every value, checking names and shapes against `self`.
    pub fn assign(&mut self, names: &[String], values: Vec<Tensor>) -> Result<()> {
        if names != self.names.as_slice() {
            return Err(Error::Contract(format!(
                "parameter names differ: expected {:?}, got {:?}",
                self.names, names
            )));
        }
        for (cur, new) in self.values.iter().zip(&values) {
            if cur.shape() != new.shape() {
                return dim_err("assign", format!("{:?} vs {:?}", cur.shape(), new.shape()));
            }
        }
        self.values = values;
        Ok(())
    }

    /// `self <- tau * online + (1 - tau) * self`, elementwise.
    pub fn soft_update_from(&mut self, online: &ParamStore, tau: f64) -> Result<()> {
        if online.values.len() != self.values.len() {
            return dim_err(
                "soft_update",
                format!("{} vs {} tensors", online.values.len(), self.values.len()),
            );
        }
        for (t, o) in self.values.iter().zip(&online.values) {
            if t.shape() != o.shape() {
                return dim_err("soft_update", format!("{:?} vs {:?}", o.shape(), t.shape()));
            }
        }
        for (t, o) in self.values.iter_mut().zip(&online.values) {
            for (ti, &oi) in t.data_mut().iter_mut().zip(o.data()) {
                *ti = (tau * oi as f64 + (1.0 - tau) * *ti as f64) as f32;
            }
        }
        Ok(())
    }

    /// Euclidean distance over all parameters.
    pub fn distance(&self, other: &ParamStore) -> Result<f64> {
        let mut acc = 0.0;
        for (a, b) in self.values.iter().zip(&other.values) {
            acc += a.distance(b)?.powi(2);
        }
        Ok(acc.sqrt())
    }
}
