use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::envs::{EntityLayout, Observation};
use crate::error::{contract, Result};
use crate::nets::{CriticNet, NetDims, PolicyNet};
use crate::numerics::{AdamConfig, AdamState};

/// One agent's networks, their delayed copies, and both optimizers.
#[derive(Clone, Debug)]
pub struct AgentLearner {
    pub role: usize,
    pub policy: PolicyNet,
    pub critic: CriticNet,
    pub target_policy: PolicyNet,
    pub target_critic: CriticNet,
    pub policy_opt: AdamState,
    pub critic_opt: AdamState,
}

impl AgentLearner {
    pub fn new(
        layout: &EntityLayout,
        num_roles: usize,
        role: usize,
        dims: NetDims,
        adam: AdamConfig,
        rng: &mut impl Rng,
    ) -> Self {
        let policy = PolicyNet::new(layout, dims, rng);
        let critic = CriticNet::new(layout, num_roles, dims, rng);
        Self::from_nets(role, policy, critic, adam)
    }

    /// Targets start as exact copies of the online networks.
    pub fn from_nets(role: usize, policy: PolicyNet, critic: CriticNet, adam: AdamConfig) -> Self {
        let policy_opt = AdamState::new(adam, policy.params.values());
        let critic_opt = AdamState::new(adam, critic.params.values());
        Self {
            role,
            target_policy: policy.clone(),
            target_critic: critic.clone(),
            policy,
            critic,
            policy_opt,
            critic_opt,
        }
    }

    /// Copy of every network with zeroed optimizer moments.
    pub fn clone_fresh(&self, adam: AdamConfig) -> Self {
        let mut out = self.clone();
        out.reset_optimizers(adam);
        out
    }

    pub fn reset_optimizers(&mut self, adam: AdamConfig) {
        self.policy_opt = AdamState::new(adam, self.policy.params.values());
        self.critic_opt = AdamState::new(adam, self.critic.params.values());
    }
}

/// `mu(o) + N(0, sigma^2)` per component, clipped to `[-1, 1]`.
pub fn act_with_noise(policy: &PolicyNet, obs: &Observation, sigma: f64, rng: &mut impl Rng) -> Result<[f32; 2]> {
    if !(sigma >= 0.0) {
        return contract(format!("noise scale must be >= 0, got {sigma}"));
    }
    let mut a = policy.act(obs)?;
    if sigma > 0.0 {
        let normal = Normal::new(0.0, sigma).expect("finite positive sigma");
        for x in &mut a {
            *x = (*x as f64 + normal.sample(rng)).clamp(-1.0, 1.0) as f32;
        }
    }
    Ok(a)
}

/// Moves both target networks toward their online counterparts.
pub fn soft_update(learner: &mut AgentLearner, tau: f64) -> Result<()> {
    learner.target_policy.params.soft_update_from(&learner.policy.params, tau)?;
    learner.target_critic.params.soft_update_from(&learner.critic.params, tau)
}
