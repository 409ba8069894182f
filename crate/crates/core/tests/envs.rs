use epc_core::envs::{
    observe, observe_all, reset, AgentState, EpisodeTally, EventKind, GameConfig, GameKind, LandmarkState, Scale,
    WorldState,
};
use epc_core::seeds::rng_from;
use proptest::prelude::*;
use rand::Rng;

fn game(kind: u8, n: usize) -> GameConfig {
    match kind % 3 {
        0 => GameConfig::grassland(n, (n / 2).max(1)).unwrap(),
        1 => GameConfig::battle(n).unwrap(),
        _ => GameConfig::food_collection(n).unwrap(),
    }
}

fn random_actions(rng: &mut impl Rng, n: usize) -> Vec<[f32; 2]> {
    (0..n).map(|_| [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)]).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Summing event amounts reproduces raw rewards; dead agents neither move,
    /// earn, nor appear in observations; landmark counts stay fixed.
    #[test]
    fn rollout_invariants(kind in 0u8..3, n in 1usize..6, seed in any::<u64>()) {
        let cfg = game(kind, n);
        let mut state = reset(&cfg, seed).unwrap();
        let mut rng = rng_from(seed ^ 0xabc);
        let landmarks = state.landmarks.len();
        let bound = 6.0 * cfg.num_agents() as f64 + 6.0;
        for step in 1..=cfg.horizon {
            let before = state.agents.clone();
            let actions = random_actions(&mut rng, cfg.num_agents());
            let result = state.step(&cfg, &actions).unwrap();
            prop_assert_eq!(result.done, step == cfg.horizon);
            prop_assert_eq!(state.landmarks.len(), landmarks);

            let mut ledger = vec![0.0; cfg.num_agents()];
            for e in &result.events {
                for &(a, r) in &e.rewards {
                    ledger[a] += r;
                }
            }
            for (a, (&raw, &sum)) in result.raw.iter().zip(&ledger).enumerate() {
                prop_assert!((raw - sum).abs() <= 1e-6, "agent {}: raw {} vs events {}", a, raw, sum);
                prop_assert!(raw.abs() <= bound);
            }
            for (a, prev) in before.iter().enumerate() {
                let now = &state.agents[a];
                prop_assert!(now.pos.iter().all(|p| p.abs() <= cfg.half_extent));
                if !prev.alive {
                    prop_assert!(!now.alive);
                    prop_assert_eq!(now.pos, prev.pos);
                    prop_assert_eq!(now.vel, [0.0, 0.0]);
                    prop_assert_eq!(result.raw[a], 0.0);
                    prop_assert_eq!(result.shaped[a], 0.0);
                }
            }
            let live: Vec<usize> = (0..cfg.num_agents()).filter(|&a| state.agents[a].alive).collect();
            for &a in &live {
                let obs = observe(&cfg, &state, a);
                let listed: usize = obs.entities.iter().map(|l| l.len()).sum();
                let expect = live.len() - 1 + state.landmarks.iter().filter(|l| l.active).count();
                prop_assert_eq!(listed, expect);
            }
        }
    }

    #[test]
    fn stepping_is_deterministic(kind in 0u8..3, n in 1usize..5, seed in any::<u64>()) {
        let cfg = game(kind, n);
        let run = || {
            let mut state = reset(&cfg, seed).unwrap();
            let mut rng = rng_from(seed);
            let mut out = Vec::new();
            for _ in 0..cfg.horizon {
                let actions = random_actions(&mut rng, cfg.num_agents());
                out.push(state.step(&cfg, &actions).unwrap());
            }
            (out, state.agents.clone(), state.landmarks.clone())
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn zero_shaping_coefficient_zeroes_shaping(kind in 0u8..3, n in 1usize..5, seed in any::<u64>()) {
        let mut cfg = game(kind, n);
        cfg.shaping = 0.0;
        let mut state = reset(&cfg, seed).unwrap();
        let r = state.step(&cfg, &vec![[0.3, -0.2]; cfg.num_agents()]).unwrap();
        prop_assert!(r.shaped.iter().all(|&s| s == 0.0));
    }
}

fn agent(pos: [f64; 2], role: usize) -> AgentState {
    AgentState { pos, vel: [0.0, 0.0], alive: true, role }
}

fn food_world(n: usize, on_food: usize) -> (GameConfig, WorldState) {
    let mut cfg = GameConfig::food_collection(n).unwrap();
    cfg.shaping = 0.0;
    let landmarks: Vec<LandmarkState> =
        (0..n).map(|i| LandmarkState { pos: [-0.75 + 0.3 * i as f64, 0.0], active: true }).collect();
    let agents = (0..n)
        .map(|i| {
            if i < on_food {
                agent(landmarks[i].pos, 0)
            } else {
                agent([-0.75 + 0.3 * i as f64, 0.8], 0)
            }
        })
        .collect();
    (cfg, WorldState::from_parts(agents, landmarks, 0))
}

#[test]
fn food_rewards_scale_with_population() {
    let (cfg, mut s) = food_world(6, 6);
    let r = s.step(&cfg, &[[0.0; 2]; 6]).unwrap();
    assert!(r.raw.iter().all(|&x| (x - 6.0).abs() < 1e-12), "{:?}", r.raw);
}

#[test]
fn tally_coverage_and_survival() {
    let (cfg, mut s) = food_world(3, 3);
    let mut tally = EpisodeTally::new(&cfg);
    for _ in 0..cfg.horizon {
        let r = s.step(&cfg, &[[0.0; 2]; 3]).unwrap();
        tally.record(&r);
    }
    let stats = tally.finish(&cfg, &s);
    assert_eq!(stats.coverage, Some(1.0));
    assert_eq!(stats.steps, cfg.horizon);
    assert!((stats.role_mean_raw[0] - 6.0 * cfg.horizon as f64).abs() < 1e-9);

    let cfg = GameConfig::grassland(2, 1).unwrap();
    let mut s = WorldState::from_parts(
        vec![agent([-0.8, -0.8], 0), agent([0.8, 0.8], 0), agent([0.0, 0.8], 1)],
        vec![LandmarkState { pos: [-0.8, 0.8], active: true }; 2],
        0,
    );
    let mut tally = EpisodeTally::new(&cfg);
    let r = s.step(&cfg, &[[0.0; 2]; 3]).unwrap();
    tally.record(&r);
    let stats = tally.finish(&cfg, &s);
    assert_eq!(stats.sheep_survival, Some(1.0));
    assert_eq!(stats.sheep_eaten, 0);
    assert_eq!(stats.coverage, None);
}

#[test]
fn observations_follow_layout_for_every_game() {
    for kind in [GameKind::Grassland, GameKind::AdversarialBattle, GameKind::FoodCollection] {
        let scale = match kind {
            GameKind::Grassland => Scale(vec![3, 2]),
            GameKind::AdversarialBattle => Scale(vec![2, 2]),
            GameKind::FoodCollection => Scale(vec![4]),
        };
        let cfg = GameConfig::new(kind, scale).unwrap();
        let layout = cfg.layout();
        let state = reset(&cfg, 5).unwrap();
        for obs in observe_all(&cfg, &state) {
            assert_eq!(obs.self_features.len(), layout.self_dim);
            assert_eq!(obs.entities.len(), layout.num_types());
            for (list, &dim) in obs.entities.iter().zip(&layout.type_dims) {
                assert_eq!(list.feat_dim, dim);
            }
        }
    }
}

#[test]
fn battle_trap_by_three_pays_two_each() {
    let cfg = GameConfig::battle(3).unwrap();
    let victim = [0.0, 0.0];
    let agents = vec![
        agent([0.06, 0.0], 0),
        agent([-0.06, 0.0], 0),
        agent([0.0, 0.06], 0),
        agent(victim, 1),
        agent([0.9, 0.9], 1),
        agent([-0.9, 0.9], 1),
    ];
    let landmarks = vec![LandmarkState { pos: [0.9, -0.9], active: true }; 3];
    let mut s = WorldState::from_parts(agents, landmarks, 0);
    let r = s.step(&cfg, &[[0.0; 2]; 6]).unwrap();
    let kill = r.events.iter().find(|e| e.kind == EventKind::Kill).expect("kill event");
    for a in 0..3 {
        assert!(kill.rewards.contains(&(a, 2.0)), "{:?}", kill.rewards);
    }
    assert!(kill.rewards.contains(&(3, -6.0)));
    assert!(!s.agents[3].alive);
}
