use super::buffer::Transition;
use super::learner::AgentLearner;
use crate::envs::{EntityLayout, Observation};
use crate::error::{contract, Result};
use crate::nets::{JointBatch, ObsBatch, ParamStore};
use crate::numerics::{Gradients, Tape, Tensor, Var};

/// A sampled minibatch laid out for the networks.
#[derive(Clone, Debug)]
pub struct UpdateBatch {
    pub samples: usize,
    pub agents: usize,
    pub x: JointBatch,
    pub next: JointBatch,
    /// Per agent, that agent's `B` current observations.
    pub own_obs: Vec<ObsBatch>,
    pub next_own_obs: Vec<ObsBatch>,
    /// `[B * N, 2]`, row `b * N + j`.
    pub actions: Tensor,
    /// `rewards[j][b]`.
    pub rewards: Vec<Vec<f32>>,
    pub done: Vec<bool>,
}

impl UpdateBatch {
    pub fn new(layout: &EntityLayout, roles: &[usize], sample: &[&Transition]) -> Result<Self> {
        if sample.is_empty() {
            return contract("empty update batch");
        }
        let n = roles.len();
        if sample.iter().any(|t| t.agents() != n || t.obs.len() != n || t.next_obs.len() != n) {
            return contract(format!("transitions must hold {n} agents"));
        }
        let obs: Vec<&[Observation]> = sample.iter().map(|t| t.obs.as_slice()).collect();
        let next: Vec<&[Observation]> = sample.iter().map(|t| t.next_obs.as_slice()).collect();
        let alive: Vec<&[bool]> = sample.iter().map(|t| t.alive.as_slice()).collect();
        let next_alive: Vec<&[bool]> = sample.iter().map(|t| t.next_alive.as_slice()).collect();
        let per_agent = |j: usize, next: bool| {
            let rows: Vec<&Observation> = sample
                .iter()
                .map(|t| if next { &t.next_obs[j] } else { &t.obs[j] })
                .collect();
            ObsBatch::new(layout, &rows)
        };
        let actions = sample.iter().flat_map(|t| t.actions.iter().flatten().copied()).collect();
        Ok(Self {
            samples: sample.len(),
            agents: n,
            x: JointBatch::new(layout, &obs, &alive, roles)?,
            next: JointBatch::new(layout, &next, &next_alive, roles)?,
            own_obs: (0..n).map(|j| per_agent(j, false)).collect::<Result<_>>()?,
            next_own_obs: (0..n).map(|j| per_agent(j, true)).collect::<Result<_>>()?,
            actions: Tensor::from_parts(vec![sample.len() * n, 2], actions),
            rewards: (0..n).map(|j| sample.iter().map(|t| t.rewards[j]).collect()).collect(),
            done: sample.iter().map(|t| t.done).collect(),
        })
    }

    fn alive(&self, b: usize, j: usize) -> bool {
        self.x.alive[b * self.agents + j]
    }

    fn next_alive(&self, b: usize, j: usize) -> bool {
        self.next.alive[b * self.agents + j]
    }

    /// `[B, 1]` of 1 where agent `i` is alive, with the live count.
    fn live_mask(&self, i: usize) -> (Tensor, usize) {
        let m: Vec<f32> = (0..self.samples).map(|b| if self.alive(b, i) { 1.0 } else { 0.0 }).collect();
        let count = m.iter().filter(|&&v| v > 0.0).count();
        (Tensor::from_parts(vec![self.samples, 1], m), count)
    }
}

/// `y = r + gamma * (1 - done) * q_next`.
pub fn td_target(r: f64, gamma: f64, done: bool, q_next: f64) -> f64 {
    if done {
        r
    } else {
        r + gamma * q_next
    }
}

/// Target-policy actions at `x'`, `[B * N, 2]`; agents dead at `x'` act zero.
pub fn target_actions(learners: &[AgentLearner], batch: &UpdateBatch) -> Result<Tensor> {
    let (b, n) = (batch.samples, batch.agents);
    let mut out = vec![0.0f32; b * n * 2];
    for (j, learner) in learners.iter().enumerate() {
        let mut tape: Tape<f32> = Tape::new();
        let (a, _) = learner.target_policy.forward(&mut tape, &batch.next_own_obs[j], false)?;
        let a = tape.value(a).data();
        for s in 0..b {
            if batch.next_alive(s, j) {
                let at = (s * n + j) * 2;
                out[at..at + 2].copy_from_slice(&a[s * 2..s * 2 + 2]);
            }
        }
    }
    Ok(Tensor::from_parts(vec![b * n, 2], out))
}

fn grads_for(grads: &mut Gradients<f32>, vars: &[Var], store: &ParamStore) -> Vec<Tensor> {
    vars.iter()
        .zip(store.values())
        .map(|(&v, p)| grads.take(v).unwrap_or_else(|| Tensor::zeros(p.shape())))
        .collect()
}

/// One Adam step on agent `i`'s critic toward the bootstrapped target.
/// Samples where `i` is dead are excluded; the bootstrap is also cut when
/// `i` dies during the transition. Returns the loss before the step, or
/// `None` when no sample has `i` alive.
pub fn critic_update(
    learner: &mut AgentLearner,
    i: usize,
    batch: &UpdateBatch,
    next_actions: &Tensor,
    gamma: f64,
) -> Result<Option<f64>> {
    let (mask, live) = batch.live_mask(i);
    if live == 0 {
        return Ok(None);
    }
    let mut tape: Tape<f32> = Tape::new();
    let a_next = tape.constant(next_actions.clone());
    let (q_next, _) = learner.target_critic.forward(&mut tape, &batch.next, a_next, i, false)?;
    let q_next = tape.value(q_next).data();
    let y: Vec<f32> = (0..batch.samples)
        .map(|s| {
            let cut = batch.done[s] || !batch.next_alive(s, i);
            td_target(batch.rewards[i][s] as f64, gamma, cut, q_next[s] as f64) as f32
        })
        .collect();

    let mut tape: Tape<f32> = Tape::new();
    let a = tape.constant(batch.actions.clone());
    let (q, vars) = learner.critic.forward(&mut tape, &batch.x, a, i, true)?;
    let y = tape.constant(Tensor::from_parts(vec![batch.samples, 1], y));
    let mask = tape.constant(mask);
    let diff = tape.sub(q, y)?;
    let sq = tape.square(diff)?;
    let sq = tape.mul(sq, mask)?;
    let total = tape.sum(sq)?;
    let loss = tape.scale(total, 1.0 / live as f64)?;
    let value = tape.value(loss).item()? as f64;
    let mut grads = tape.backward(loss)?;
    let g = grads_for(&mut grads, &vars, &learner.critic.params);
    learner.critic_opt.step(learner.critic.params.values_mut(), &g)?;
    Ok(Some(value))
}

/// Places `mine: [B, 2]` into column block `i` of the batch actions.
fn splice_actions(tape: &mut Tape<f32>, actions: &Tensor, mine: Var, i: usize, n: usize) -> Result<Var> {
    let b = actions.numel() / (2 * n);
    let cols = |lo: usize, hi: usize| {
        let data = actions
            .data()
            .chunks_exact(2 * n)
            .flat_map(|row| row[lo..hi].iter().copied())
            .collect();
        Tensor::from_parts(vec![b, hi - lo], data)
    };
    let mut parts = Vec::with_capacity(3);
    if i > 0 {
        parts.push(tape.constant(cols(0, 2 * i)));
    }
    parts.push(mine);
    if i + 1 < n {
        parts.push(tape.constant(cols(2 * i + 2, 2 * n)));
    }
    let joint = tape.concat(&parts)?;
    tape.reshape(joint, &[b * n, 2])
}

/// One Adam step on agent `i`'s policy, ascending its critic's value with
/// `a_i = mu_i(o_i)` and the other actions from the batch. `action_reg`
/// penalizes the squared pre-tanh outputs, which keeps the policy out of
/// the saturated region of tanh. Returns the mean Q before the step, or
/// `None` when no sample has `i` alive.
pub fn policy_update(
    learner: &mut AgentLearner,
    i: usize,
    batch: &UpdateBatch,
    action_reg: f64,
) -> Result<Option<f64>> {
    let (mask, live) = batch.live_mask(i);
    if live == 0 {
        return Ok(None);
    }
    let mut tape: Tape<f32> = Tape::new();
    let (pre, mine, vars) = learner.policy.forward_pre(&mut tape, &batch.own_obs[i], true)?;
    let joint = splice_actions(&mut tape, &batch.actions, mine, i, batch.agents)?;
    let (q, _) = learner.critic.forward(&mut tape, &batch.x, joint, i, false)?;
    let mask = tape.constant(mask);
    let q = tape.mul(q, mask)?;
    let total = tape.sum(q)?;
    let objective = tape.scale(total, -1.0 / live as f64)?;
    let value = -(tape.value(objective).item()? as f64);
    let loss = if action_reg > 0.0 {
        let sq = tape.square(pre)?;
        let ones = tape.constant(Tensor::from_parts(vec![2, 1], vec![1.0; 2]));
        let per_sample = tape.matmul(sq, ones)?;
        let per_sample = tape.mul(per_sample, mask)?;
        let penalty = tape.sum(per_sample)?;
        let penalty = tape.scale(penalty, action_reg / live as f64)?;
        tape.add(objective, penalty)?
    } else {
        objective
    };
    let mut grads = tape.backward(loss)?;
    let g = grads_for(&mut grads, &vars, &learner.policy.params);
    learner.policy_opt.step(learner.policy.params.values_mut(), &g)?;
    Ok(Some(value))
}
