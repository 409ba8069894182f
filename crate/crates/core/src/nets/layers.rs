use rand::Rng;

use super::params::ParamStore;
use crate::error::Result;
use crate::numerics::{Real, Tape, Var};

/// Fully connected map `x·W + b` over the last dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Linear {
    weight: usize,
    bias: usize,
    pub inputs: usize,
    pub outputs: usize,
}

impl Linear {
    pub fn new(
        store: &mut ParamStore,
        name: &str,
        inputs: usize,
        outputs: usize,
        init_scale: f64,
        rng: &mut impl Rng,
    ) -> Self {
        let weight = store.push_uniform(format!("{name}.weight"), &[inputs, outputs], inputs, init_scale, rng);
        let bias = store.push_uniform(format!("{name}.bias"), &[outputs], inputs, init_scale, rng);
        Self {
            weight,
            bias,
            inputs,
            outputs,
        }
    }

    pub fn forward<T: Real>(&self, tape: &mut Tape<T>, vars: &[Var], x: Var) -> Result<Var> {
        let y = tape.matmul(x, vars[self.weight])?;
        let shape = tape.shape(y).to_vec();
        let rows = tape.value(y).numel() / self.outputs;
        let b = tape.repeat(vars[self.bias], rows)?;
        let b = if shape.len() == 2 { b } else { tape.reshape(b, &shape)? };
        tape.add(y, b)
    }

    pub fn forward_relu<T: Real>(&self, tape: &mut Tape<T>, vars: &[Var], x: Var) -> Result<Var> {
        let y = self.forward(tape, vars, x)?;
        tape.relu(y)
    }
}
