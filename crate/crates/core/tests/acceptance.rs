//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs as a plain binary so every criterion reports on its own line; the
//! process fails if any gating criterion fails. Criterion 10 is report-only.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use epc_core::envs::{reset, EpisodeTally, GameConfig, LandmarkState, Observation, Scale, WorldState};
use epc_core::envs::AgentState;
use epc_core::epc::{
    c_max, clone_double, mix_and_match, run_curriculum, select_top_k, AgentSet, CurriculumConfig, CurriculumOutcome,
    Provenance, StageConfig, StageStore,
};
use epc_core::eval::{generalization_test, normalize_scores, tournament, RawScore};
use epc_core::maddpg::{soft_update, td_target, train, AgentLearner, ReplayBuffer, TrainerConfig};
use epc_core::nets::{attention_pool, CriticNet, NetDims, PolicyNet};
use epc_core::numerics::{AdamConfig, Tensor};
use epc_core::seeds::{derive_seed, rng_from};
use rand::Rng;

const GRAD_TOL: f64 = 1e-3;
const ALPHA_TOL: f64 = 1e-6;
const PERM_TOL: f32 = 1e-5;
const COVERAGE_GAIN: f64 = 1.5;
const SEEDS: [u64; 3] = [0, 1, 2];
/// Shaping coefficient for the learning runs. The library default is too
/// weak a navigation signal to learn occupancy within a few thousand
/// episodes; coverage itself is measured on raw rewards only.
const LEARNING_SHAPING: f64 = 1.0;

fn food_game(n: usize) -> GameConfig {
    let mut g = GameConfig::food_collection(n).unwrap();
    g.shaping = LEARNING_SHAPING;
    g
}

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(detail.into())
    }
}

struct Suite {
    /// Criteria to run; empty runs all. Criteria 10 and 11 reuse run 9.
    only: Vec<usize>,
    failed: Vec<usize>,
}

impl Suite {
    fn run(&mut self, id: usize, name: &str, budget: Duration, gating: bool, f: impl FnOnce() -> Outcome) {
        if !self.only.is_empty() && !self.only.contains(&id) {
            return;
        }
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let took = start.elapsed();
        let (tag, detail) = match (&result, gating) {
            (Ok(d), true) => ("PASS", d.clone()),
            (Err(d), true) => ("FAIL", d.clone()),
            (Ok(d), false) => ("REPORT", d.clone()),
            (Err(d), false) => ("REPORT", d.clone()),
        };
        if gating && result.is_err() {
            self.failed.push(id);
        }
        let over = if took > budget { " (over budget)" } else { "" };
        println!("criterion {id:>2} {tag:<6} {name}: {detail} [{:.1}s, budget {}s{over}]", took.as_secs_f64(), budget.as_secs());
    }
}

fn criterion_1() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for (i, cfg) in gradient_configs().iter().enumerate() {
        for (what, err) in [
            ("actor", policy_gradient_error(cfg, SMALL, 1000 + i as u64)),
            ("critic", critic_gradient_error(cfg, SMALL, 2000 + i as u64)),
        ] {
            ensure(err <= GRAD_TOL, format!("{what} {} {}: relative error {err:.2e}", cfg.kind, cfg.scale))?;
            worst = worst.max(err);
            checked += 1;
        }
    }
    ensure(checked >= 20, format!("only {checked} configurations"))?;
    Ok(format!("{checked} configurations, max relative error {worst:.2e} <= {GRAD_TOL:.0e}"))
}

fn max_diff(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f32::max)
}

fn criterion_2() -> Outcome {
    let mut rng = rng_from(2);
    let mut alpha_err: f64 = 0.0;
    for _ in 0..200 {
        let (m, d) = (rng.random_range(1..20), rng.random_range(1..8));
        let mut v = |n: usize| -> Vec<f32> { (0..n).map(|_| rng.random_range(-3.0..3.0)).collect() };
        let query = v(d);
        let keys: Vec<Vec<f32>> = (0..m).map(|_| v(d)).collect();
        let psi = Tensor::new(vec![4, d], v(4 * d)).unwrap();
        let phi = Tensor::new(vec![4, d], v(4 * d)).unwrap();
        let refs: Vec<&[f32]> = keys.iter().map(|k| k.as_slice()).collect();
        let (_, alpha) = attention_pool(&query, &refs, &psi, &phi).map_err(|e| e.to_string())?;
        alpha_err = alpha_err.max((alpha.iter().map(|&a| a as f64).sum::<f64>() - 1.0).abs());
    }
    ensure(alpha_err <= ALPHA_TOL, format!("attention weights sum off by {alpha_err:.1e}"))?;

    let mut perm_err: f32 = 0.0;
    for cfg in [
        GameConfig::grassland(4, 3).unwrap(),
        GameConfig::battle(3).unwrap(),
        GameConfig::food_collection(5).unwrap(),
    ] {
        let policy = PolicyNet::new(&cfg.layout(), NetDims::default(), &mut rng);
        let critic = CriticNet::new(&cfg.layout(), cfg.num_roles(), NetDims::default(), &mut rng);
        let roles = roles_of(&cfg);
        let n = cfg.num_agents();
        let (obs, alive) = random_joint(&cfg, 21, 4);
        for (o, al) in obs.iter().zip(&alive) {
            let actions: Vec<[f32; 2]> = (0..n).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
            for me in 0..n {
                let shuffled = permute_entities(&o[me], &mut rng);
                perm_err = perm_err.max(max_diff(&policy.act(&o[me]).unwrap(), &policy.act(&shuffled).unwrap()));
                let q = critic.q_value(o, &actions, al, &roles, me).unwrap();
                let perm = permutation(&mut rng, n);
                let po: Vec<Observation> = perm.iter().map(|&j| permute_entities(&o[j], &mut rng)).collect();
                let pa: Vec<[f32; 2]> = perm.iter().map(|&j| actions[j]).collect();
                let pal: Vec<bool> = perm.iter().map(|&j| al[j]).collect();
                let pr: Vec<usize> = perm.iter().map(|&j| roles[j]).collect();
                let pme = perm.iter().position(|&j| j == me).unwrap();
                perm_err = perm_err.max((q - critic.q_value(&po, &pa, &pal, &pr, pme).unwrap()).abs());
            }
        }
    }
    ensure(perm_err <= PERM_TOL, format!("permutation changed outputs by {perm_err:.1e}"))?;

    let base = GameConfig::food_collection(2).unwrap();
    let p0 = PolicyNet::new(&base.layout(), NetDims::default(), &mut rng).params.scalar_count();
    let c0 = CriticNet::new(&base.layout(), 1, NetDims::default(), &mut rng).params.scalar_count();
    for n in 2..=48 {
        let cfg = GameConfig::food_collection(n).unwrap();
        let p = PolicyNet::new(&cfg.layout(), NetDims::default(), &mut rng);
        let c = CriticNet::new(&cfg.layout(), 1, NetDims::default(), &mut rng);
        ensure(p.params.scalar_count() == p0 && c.params.scalar_count() == c0, format!("parameter count changed at N={n}"))?;
        let state = reset(&cfg, n as u64).unwrap();
        let o = epc_core::envs::observe_all(&cfg, &state);
        let q = c.q_value(&o, &vec![[0.0; 2]; n], &vec![true; n], &vec![0; n], 0).unwrap();
        ensure(q.is_finite() && p.act(&o[0]).is_ok(), format!("forward failed at N={n}"))?;
    }
    Ok(format!(
        "alpha sum error {alpha_err:.1e}, permutation error {perm_err:.1e}, {p0}/{c0} actor/critic parameters for N=2..48"
    ))
}

fn learner_set(cfg: &GameConfig, role: usize, dims: NetDims, seed: u64) -> AgentSet {
    let mut rng = rng_from(seed);
    let members = (0..cfg.scale.0[role])
        .map(|_| AgentLearner::new(&cfg.layout(), cfg.num_roles(), role, dims, AdamConfig::default(), &mut rng))
        .collect();
    AgentSet::new(role, members, Provenance::default())
}

fn criterion_3() -> Outcome {
    let cfg = GameConfig::food_collection(1).unwrap();
    for k in 1..=5 {
        let sets: Vec<AgentSet> = (0..k).map(|j| learner_set(&cfg, 0, SMALL, j as u64)).collect();
        let got = mix_and_match(&sets).map_err(|e| e.to_string())?.len();
        ensure(got == k * (k + 1) / 2, format!("K={k}: {got} mixed sets"))?;
    }
    for k in 1..=3usize {
        for roles in 1..=2u32 {
            let expect = (k * (k + 1) / 2).pow(roles);
            ensure(c_max(k, roles as usize) == expect, format!("C_max({k}, {roles}) = {}", c_max(k, roles as usize)))?;
        }
    }
    ensure(c_max(2, 2) == 9 && c_max(3, 1) == 6, "C_max(2,2) or C_max(3,1) wrong")?;
    Ok("K(K+1)/2 sets for K=1..5; C_max(2,2)=9, C_max(3,1)=6".into())
}

fn agent(pos: [f64; 2], role: usize) -> AgentState {
    AgentState {
        pos,
        vel: [0.0, 0.0],
        alive: true,
        role,
    }
}

fn landmark(pos: [f64; 2]) -> LandmarkState {
    LandmarkState { pos, active: true }
}

fn criterion_4() -> Outcome {
    let grass = GameConfig::grassland(1, 1).unwrap();
    let mut s = WorldState::from_parts(vec![agent([0.0, 0.0], 0), agent([0.9, 0.9], 1)], vec![landmark([0.02, 0.0])], 0);
    let r = s.step(&grass, &[[0.0; 2]; 2]).unwrap();
    ensure(r.raw == [2.0, 0.0], format!("sheep+grass gave {:?}", r.raw))?;

    let mut s = WorldState::from_parts(vec![agent([0.0, 0.0], 0), agent([0.05, 0.0], 1)], vec![landmark([0.9, 0.9])], 0);
    let r = s.step(&grass, &[[0.0; 2]; 2]).unwrap();
    ensure(r.raw == [-5.0, 5.0] && !s.agents[0].alive, format!("wolf+sheep gave {:?}", r.raw))?;

    let battle = GameConfig::battle(2).unwrap();
    let mut s = WorldState::from_parts(
        vec![agent([0.06, 0.0], 0), agent([-0.06, 0.0], 0), agent([0.0, 0.0], 1), agent([0.9, 0.9], 1)],
        vec![landmark([0.9, -0.9]); 2],
        0,
    );
    let r = s.step(&battle, &[[0.0; 2]; 4]).unwrap();
    ensure(r.raw[..3] == [3.0, 3.0, -6.0] && !s.agents[2].alive, format!("two-killer trap gave {:?}", r.raw))?;

    let food = GameConfig::food_collection(3).unwrap();
    let foods = vec![landmark([0.0, 0.0]), landmark([0.5, 0.0]), landmark([-0.5, -0.5])];
    let mut s = WorldState::from_parts(
        vec![agent([0.0, 0.0], 0), agent([0.5, 0.01], 0), agent([0.9, 0.9], 0)],
        foods.clone(),
        0,
    );
    let r = s.step(&food, &[[0.0; 2]; 3]).unwrap();
    ensure(r.raw.iter().all(|&x| x == 4.0), format!("two occupied foods gave {:?}", r.raw))?;

    let mut s = WorldState::from_parts(
        vec![agent([0.9, 0.9], 0), agent([0.92, 0.9], 0), agent([-0.9, 0.9], 0)],
        foods,
        0,
    );
    let r = s.step(&food, &[[0.0; 2]; 3]).unwrap();
    ensure(r.raw.iter().all(|&x| (x + 6.0 / 3.0).abs() < 1e-12), format!("collision gave {:?}", r.raw))?;
    Ok("+2; +5/-5 with death; +3/+3/-6; +4 per agent; -6/N".into())
}

fn criterion_5() -> Outcome {
    ensure(td_target(1.0, 0.95, false, 2.0) == 1.0 + 0.95 * 2.0, "y != r + gamma Q'")?;
    ensure((td_target(1.0, 0.95, false, 2.0) - 2.9).abs() < 1e-12, "y != 2.9")?;
    ensure(td_target(1.0, 0.95, true, 2.0) == 1.0, "terminal not cut")?;

    let cfg = GameConfig::food_collection(2).unwrap();
    let mut l = learner_set(&cfg, 0, SMALL, 5).members.remove(0);
    let fill = |p: &mut epc_core::nets::ParamStore, v: f32| p.values_mut().iter_mut().for_each(|t| t.data_mut().fill(v));
    fill(&mut l.policy.params, 1.0);
    fill(&mut l.critic.params, 1.0);
    fill(&mut l.target_policy.params, 0.0);
    fill(&mut l.target_critic.params, 0.0);
    soft_update(&mut l, 0.01).map_err(|e| e.to_string())?;
    let all = |p: &epc_core::nets::ParamStore, v: f32| p.values().iter().all(|t| t.data().iter().all(|&x| x == v));
    ensure(all(&l.target_policy.params, 0.01) && all(&l.target_critic.params, 0.01), "tau=0.01 step wrong")?;
    soft_update(&mut l, 1.0).map_err(|e| e.to_string())?;
    ensure(l.target_policy.params == l.policy.params && l.target_critic.params == l.critic.params, "tau=1 not a copy")?;

    let mut buf = ReplayBuffer::new(4);
    for k in 0..6 {
        buf.push(k);
    }
    let held: Vec<i32> = buf.iter().copied().collect();
    ensure(held == [2, 3, 4, 5], format!("buffer holds {held:?}"))?;
    Ok("y=2.9, terminal cut, tau semantics, FIFO eviction".into())
}

fn criterion_6() -> Outcome {
    let cfg = GameConfig::food_collection(3).unwrap();
    let source = learner_set(&cfg, 0, NetDims::default(), 6);
    let doubled = clone_double(&source).map_err(|e| e.to_string())?;
    ensure(doubled.len() == 6, "doubled size")?;
    let (obs, _) = random_joint(&cfg, 60, 34);
    let obs: Vec<&Observation> = obs.iter().flatten().take(100).collect();
    ensure(obs.len() == 100, "probe size")?;
    for k in 0..6 {
        let a = source.members[k % 3].policy.act_batch(&obs).unwrap();
        let b = doubled.members[k].policy.act_batch(&obs).unwrap();
        let same = a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| x.to_bits() == y.to_bits());
        ensure(same, format!("clone {k} differs from source {}", k % 3))?;
    }
    Ok("6 clones bitwise equal on 100 observations".into())
}

fn criterion_7() -> Outcome {
    let mut rng = rng_from(7);
    for t in 0..100 {
        let c = rng.random_range(1..16);
        let k = rng.random_range(1..=c);
        let scores: Vec<f64> = (0..c).map(|_| (rng.random_range(-50.0f64..50.0) * 4.0).round() / 4.0).collect();
        let ids = select_top_k(&scores, k).map_err(|e| e.to_string())?;
        let mut brute: Vec<usize> = (0..c).collect();
        brute.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
        brute.truncate(k);
        ensure(ids == brute, format!("table {t}: {ids:?} vs {brute:?}"))?;
        let kept = ids.iter().map(|&i| scores[i]).fold(f64::INFINITY, f64::min);
        let dropped = (0..c).filter(|i| !ids.contains(i)).map(|i| scores[i]).fold(f64::NEG_INFINITY, f64::max);
        ensure(kept >= dropped, format!("table {t}: kept {kept} < dropped {dropped}"))?;
    }
    Ok("100 tables match brute-force sort; survivors dominate".into())
}

/// Mean coverage of uniformly random actions, estimated by Monte Carlo.
fn random_coverage(game: &GameConfig, episodes: usize, seed: u64) -> f64 {
    let mut rng = rng_from(seed);
    let mut total = 0.0;
    for e in 0..episodes {
        let mut s = reset(game, derive_seed(seed, &[e as u64])).unwrap();
        let mut tally = EpisodeTally::new(game);
        for _ in 0..game.horizon {
            let a: Vec<[f32; 2]> = (0..game.num_agents())
                .map(|_| [rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0)])
                .collect();
            tally.record(&s.step(game, &a).unwrap());
        }
        total += tally.finish(game, &s).coverage.unwrap();
    }
    total / episodes as f64
}

fn criterion_8() -> Outcome {
    let game = food_game(3);
    let baseline = random_coverage(&game, 2000, 8);
    let config = TrainerConfig {
        episodes: 3000,
        ..TrainerConfig::default()
    };
    let mut finals = Vec::new();
    for seed in SEEDS {
        let mut rng = rng_from(derive_seed(seed, &[0]));
        let mut learners: Vec<AgentLearner> = (0..3)
            .map(|i| AgentLearner::new(&game.layout(), 1, game.role_of(i), config.dims, config.adam, &mut rng))
            .collect();
        let report = train(&game, &mut learners, &config, derive_seed(seed, &[1])).map_err(|e| e.to_string())?;
        let tail = &report.episodes[report.episodes.len() - 100..];
        finals.push(tail.iter().map(|e| e.stats.coverage.unwrap()).sum::<f64>() / 100.0);
    }
    let wins = finals.iter().filter(|&&c| c >= COVERAGE_GAIN * baseline).count();
    let detail = format!(
        "random baseline {baseline:.4}, final coverage {:?}, {wins}/3 seeds >= {COVERAGE_GAIN}x",
        finals.iter().map(|c| format!("{c:.4}")).collect::<Vec<_>>()
    );
    ensure(wins >= 2, detail.clone())?;
    Ok(detail)
}

fn run9_config(seed: u64, vanilla: bool) -> CurriculumConfig {
    CurriculumConfig {
        game: food_game(3),
        stages: StageConfig {
            initial: Scale(vec![3]),
            target: Scale(vec![12]),
            first_episodes: 300,
            stage_episodes: 100,
            k: 2,
            c: None,
            eval_episodes: 100,
            opponent_samples: None,
            vanilla,
        },
        trainer: TrainerConfig::default(),
        workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        seed,
    }
}

struct Run9 {
    epc: Vec<CurriculumOutcome>,
    vanilla: Vec<CurriculumOutcome>,
}

fn probe_actions(set: &AgentSet) -> Vec<Vec<[f32; 2]>> {
    let cfg = GameConfig::food_collection(set.len()).unwrap();
    let (obs, _) = random_joint(&cfg, 99, 4);
    let refs: Vec<&Observation> = obs.iter().flatten().collect();
    set.members.iter().map(|m| m.policy.act_batch(&refs).unwrap()).collect()
}

fn criterion_9(out: &mut Option<Run9>) -> Outcome {
    let cfg = run9_config(SEEDS[0], false);
    ensure(cfg.stages.effective_c(1) == 3, "C != C_max = 3")?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut store = StageStore::new(dir.path());
    store.stop_after = Some(1);
    let partial = run_curriculum(&cfg, Some(&store)).map_err(|e| e.to_string())?;
    ensure(partial.records.len() == 2, "interrupted run did not stop after stage 1")?;
    for stage in 0..2 {
        let path = dir.path().join(format!("stage_{stage:02}.json"));
        ensure(path.exists(), format!("{} missing", path.display()))?;
    }
    store.stop_after = None;
    let resumed = run_curriculum(&cfg, Some(&store)).map_err(|e| e.to_string())?;
    ensure(dir.path().join("stage_02.json").exists(), "stage 2 record missing")?;

    let mut epc = vec![run_curriculum(&cfg, None).map_err(|e| e.to_string())?];
    ensure(resumed.records == epc[0].records, "resumed records differ from uninterrupted run")?;
    ensure(probe_actions(&resumed.best[0]) == probe_actions(&epc[0].best[0]), "resumed best set differs")?;
    for &seed in &SEEDS[1..] {
        epc.push(run_curriculum(&run9_config(seed, false), None).map_err(|e| e.to_string())?);
    }
    for (s, o) in epc.iter().enumerate() {
        ensure(o.records.len() == 3, format!("seed {s}: {} stages", o.records.len()))?;
        ensure(o.best[0].len() == 12, "final set is not 12 agents")?;
        for rec in &o.records {
            for (f, sel) in rec.fitness.iter().zip(&rec.selected) {
                let kept = sel.iter().map(|&i| f[i]).fold(f64::INFINITY, f64::min);
                let dropped =
                    (0..f.len()).filter(|i| !sel.contains(i)).map(|i| f[i]).fold(f64::NEG_INFINITY, f64::max);
                ensure(kept >= dropped, format!("seed {s} stage {}: kept {kept} < dropped {dropped}", rec.stage))?;
            }
        }
    }
    let vanilla = SEEDS
        .iter()
        .map(|&seed| run_curriculum(&run9_config(seed, true), None))
        .collect::<epc_core::Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let fit: Vec<String> = epc
        .iter()
        .map(|o| format!("{:.2}", o.records.last().unwrap().fitness[0][o.records.last().unwrap().selected[0][0]]))
        .collect();
    *out = Some(Run9 { epc, vanilla });
    Ok(format!("3 seeds x 3 stages, records persisted, resume identical, selection dominant; best fitness {fit:?}"))
}

fn criterion_10(run: &Option<Run9>) -> Outcome {
    let run = run.as_ref().ok_or("run 9 did not complete")?;
    let game = GameConfig::food_collection(12).unwrap();
    let (mut epc, mut vanilla) = (0.0, 0.0);
    for (s, (e, v)) in run.epc.iter().zip(&run.vanilla).enumerate() {
        let methods = vec![("epc".to_string(), e.best.clone()), ("vanilla".to_string(), v.best.clone())];
        let t = tournament(&game, &methods, 200, 1000 + s as u64).map_err(|e| e.to_string())?;
        let scale = game.scale.to_string();
        epc += t.table.get("epc", "food-collection", &scale).unwrap().raw / SEEDS.len() as f64;
        vanilla += t.table.get("vanilla", "food-collection", &scale).unwrap().raw / SEEDS.len() as f64;
    }
    let detail = format!("mean raw reward EPC {epc:.2} vs vanilla {vanilla:.2}");
    ensure(epc >= vanilla, format!("{detail} (EPC below vanilla)"))?;
    Ok(format!("{detail} (EPC >= vanilla)"))
}

fn criterion_11(run: &Option<Run9>) -> Outcome {
    let run = run.as_ref().ok_or("run 9 did not complete")?;
    let game = GameConfig::food_collection(12).unwrap();
    let mut raw = Vec::new();
    for (name, outcomes) in [("epc", &run.epc), ("vanilla", &run.vanilla)] {
        let r = generalization_test(&outcomes[0].best, &game, 100, 11).map_err(|e| e.to_string())?;
        ensure(r.stats[0].raw_per_agent.len() == 24, "not evaluated at N=24")?;
        raw.push(RawScore {
            method: name.into(),
            game: "food-collection".into(),
            scale: "24".into(),
            raw: r.role_mean_raw[0],
        });
    }
    let table = normalize_scores(&raw).map_err(|e| e.to_string())?;
    ensure(table.entries.iter().all(|e| e.raw.is_finite() && e.normalized.is_finite()), "non-finite scores")?;
    let cells: Vec<String> = table.entries.iter().map(|e| format!("{} {:.2}/{:.0}", e.method, e.raw, e.normalized)).collect();
    Ok(format!("N=24 score table (raw/normalized): {}", cells.join(", ")))
}

fn main() -> ExitCode {
    // Numeric arguments select criteria, e.g. `cargo test --test acceptance -- 1 4`.
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut suite = Suite { only, failed: Vec::new() };
    let s = Duration::from_secs;
    suite.run(1, "gradient correctness", s(60), true, criterion_1);
    suite.run(2, "attention invariants", s(60), true, criterion_2);
    suite.run(3, "combinatorics oracles", s(1), true, criterion_3);
    suite.run(4, "reward oracles", s(1), true, criterion_4);
    suite.run(5, "actor-critic arithmetic", s(1), true, criterion_5);
    suite.run(6, "clone identity", s(10), true, criterion_6);
    suite.run(7, "selection dominance", s(1), true, criterion_7);
    suite.run(8, "learning smoke", s(30 * 60), true, criterion_8);
    let mut run9 = None;
    suite.run(9, "curriculum end to end", s(45 * 60), true, || criterion_9(&mut run9));
    suite.run(10, "curriculum vs vanilla (report only)", s(5 * 60), false, || criterion_10(&run9));
    suite.run(11, "generalization at N=24", s(5 * 60), true, || criterion_11(&run9));
    if suite.failed.is_empty() {
        println!("acceptance: all gating criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {:?}", suite.failed);
        ExitCode::FAILURE
    }
}
