#![allow(dead_code)]

use epc_core::envs::{observe_all, reset, GameConfig, Observation};
use epc_core::nets::{CriticNet, JointBatch, NetDims, ObsBatch, ParamStore, PolicyNet};
use epc_core::numerics::{Tape, Tensor};
use epc_core::seeds::{derive_seed, rng_from};
use rand::Rng;

/// Step for network gradient checks. Losses are evaluated exactly in f64,
/// so a small step keeps ReLU kinks from landing inside the stencil.
pub const NET_FD_STEP: f64 = 1e-5;

pub const SMALL: NetDims = NetDims {
    embed: 8,
    key: 4,
    hidden: 8,
};

/// Joint observations and alive flags from `samples` states reached by
/// random play, so some samples contain dead agents.
pub fn random_joint(cfg: &GameConfig, seed: u64, samples: usize) -> (Vec<Vec<Observation>>, Vec<Vec<bool>>) {
    let mut rng = rng_from(seed);
    let mut obs = Vec::new();
    let mut alive = Vec::new();
    for s in 0..samples {
        let mut state = reset(cfg, derive_seed(seed, &[s as u64])).unwrap();
        for _ in 0..rng.random_range(0..cfg.horizon) {
            let actions: Vec<[f32; 2]> = (0..cfg.num_agents())
                .map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
                .collect();
            state.step(cfg, &actions).unwrap();
        }
        obs.push(observe_all(cfg, &state));
        alive.push(state.agents.iter().map(|a| a.alive).collect());
    }
    (obs, alive)
}

pub fn roles_of(cfg: &GameConfig) -> Vec<usize> {
    (0..cfg.num_agents()).map(|j| cfg.role_of(j)).collect()
}

pub fn random_actions(rng: &mut impl Rng, n: usize) -> Vec<f32> {
    (0..2 * n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Compares `grads` with central differences of `loss` over every scalar in
/// `params`; returns `|g - fd| / max(|g|, |fd|)` over the whole vector.
///
/// Parameters are stored in f32, so the step actually taken is recomputed
/// from the rounded perturbed values and the losses are evaluated in f64.
pub fn fd_relative_error(params: &ParamStore, grads: &[Vec<f64>], h: f64, loss: impl Fn(&ParamStore) -> f64) -> f64 {
    let (mut diff, mut norm_a, mut norm_n) = (0.0f64, 0.0f64, 0.0f64);
    for (p, g) in grads.iter().enumerate() {
        for j in 0..g.len() {
            let x = params.values()[p].data()[j];
            let mut up = params.clone();
            let xp = (x as f64 + h) as f32;
            up.values_mut()[p].data_mut()[j] = xp;
            let mut down = params.clone();
            let xm = (x as f64 - h) as f32;
            down.values_mut()[p].data_mut()[j] = xm;
            let numeric = (loss(&up) - loss(&down)) / (xp as f64 - xm as f64);
            diff += (g[j] - numeric).powi(2);
            norm_a += g[j].powi(2);
            norm_n += numeric.powi(2);
        }
    }
    diff.sqrt() / norm_a.sqrt().max(norm_n.sqrt()).max(1e-12)
}

fn weights(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = rng_from(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Gradient check of a weighted sum of policy outputs on random states.
pub fn policy_gradient_error(cfg: &GameConfig, dims: NetDims, seed: u64) -> f64 {
    let mut rng = rng_from(derive_seed(seed, &[1]));
    let policy = PolicyNet::new(&cfg.layout(), dims, &mut rng);
    let (obs, _) = random_joint(cfg, seed, 2);
    let flat: Vec<&Observation> = obs.iter().flatten().collect();
    let batch = ObsBatch::new(&cfg.layout(), &flat).unwrap();
    let w = weights(derive_seed(seed, &[2]), 2 * flat.len());
    let loss = |net: &PolicyNet, trainable: bool| {
        let mut tape = Tape::<f64>::new();
        let (out, vars) = net.forward(&mut tape, &batch, trainable).unwrap();
        let c = tape.constant(Tensor::new(vec![flat.len(), 2], w.clone()).unwrap());
        let prod = tape.mul(out, c).unwrap();
        let l = tape.sum(prod).unwrap();
        (tape, l, vars)
    };
    let (tape, l, vars) = loss(&policy, true);
    let g = tape.backward(l).unwrap();
    let grads: Vec<Vec<f64>> = vars.iter().map(|&v| g.get(v).unwrap().data().to_vec()).collect();
    fd_relative_error(&policy.params, &grads, NET_FD_STEP, |p| {
        let mut net = policy.clone();
        net.params = p.clone();
        let (tape, l, _) = loss(&net, false);
        tape.value(l).data()[0]
    })
}

/// Gradient check of a weighted sum of `Q_me` over a small joint batch.
pub fn critic_gradient_error(cfg: &GameConfig, dims: NetDims, seed: u64) -> f64 {
    let mut rng = rng_from(derive_seed(seed, &[1]));
    let critic = CriticNet::new(&cfg.layout(), cfg.num_roles(), dims, &mut rng);
    let (obs, alive) = random_joint(cfg, seed, 3);
    let n = cfg.num_agents();
    let me = rng.random_range(0..n);
    let joint_refs: Vec<&[Observation]> = obs.iter().map(|o| o.as_slice()).collect();
    let alive_refs: Vec<&[bool]> = alive.iter().map(|a| a.as_slice()).collect();
    let joint = JointBatch::new(&cfg.layout(), &joint_refs, &alive_refs, &roles_of(cfg)).unwrap();
    let actions: Vec<f64> = random_actions(&mut rng, 3 * n).into_iter().map(f64::from).collect();
    let w = weights(derive_seed(seed, &[2]), 3);
    let loss = |net: &CriticNet, trainable: bool| {
        let mut tape = Tape::<f64>::new();
        let a = tape.constant(Tensor::new(vec![3 * n, 2], actions.clone()).unwrap());
        let (q, vars) = net.forward(&mut tape, &joint, a, me, trainable).unwrap();
        let c = tape.constant(Tensor::new(vec![3, 1], w.clone()).unwrap());
        let prod = tape.mul(q, c).unwrap();
        let l = tape.sum(prod).unwrap();
        (tape, l, vars)
    };
    let (tape, l, vars) = loss(&critic, true);
    let g = tape.backward(l).unwrap();
    let grads: Vec<Vec<f64>> = vars
        .iter()
        .zip(critic.params.values())
        .map(|(&v, p)| g.get(v).map(|t| t.data().to_vec()).unwrap_or(vec![0.0; p.numel()]))
        .collect();
    fd_relative_error(&critic.params, &grads, NET_FD_STEP, |p| {
        let mut net = critic.clone();
        net.params = p.clone();
        let (tape, l, _) = loss(&net, false);
        tape.value(l).data()[0]
    })
}

/// The twenty small actor/critic configurations used for gradient checks,
/// covering every game with N in {2, 3, 4}.
pub fn gradient_configs() -> Vec<GameConfig> {
    let mut out = Vec::new();
    for n in 2..=4 {
        out.push(GameConfig::food_collection(n).unwrap());
    }
    out.push(GameConfig::grassland(1, 1).unwrap());
    out.push(GameConfig::grassland(2, 1).unwrap());
    out.push(GameConfig::grassland(3, 1).unwrap());
    out.push(GameConfig::grassland(2, 2).unwrap());
    out.push(GameConfig::battle(1).unwrap());
    out.push(GameConfig::battle(2).unwrap());
    out.push(GameConfig::food_collection(3).unwrap());
    out
}

/// Swaps two entities of one type in an observation.
pub fn swap_entities(obs: &Observation, ty: usize, a: usize, b: usize) -> Observation {
    let mut out = obs.clone();
    let list = &mut out.entities[ty];
    let d = list.feat_dim;
    for k in 0..d {
        list.data.swap(a * d + k, b * d + k);
    }
    out
}

/// Random permutation of `0..n` drawn from `rng`.
pub fn permutation(rng: &mut impl Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, rng.random_range(0..=i));
    }
    p
}

pub fn permute_entities(obs: &Observation, rng: &mut impl Rng) -> Observation {
    let mut out = obs.clone();
    for (t, list) in obs.entities.iter().enumerate() {
        let d = list.feat_dim;
        let perm = permutation(rng, list.len());
        out.entities[t].data = perm.iter().flat_map(|&i| list.data[i * d..(i + 1) * d].iter().copied()).collect();
    }
    out
}
