use crate::envs::{observe, reset, EpisodeStats, EpisodeTally, GameConfig, Observation, TraceRecord, WorldState};
use crate::error::{contract, Result};
use crate::nets::PolicyNet;
use crate::seeds::derive_seed;

/// Plays `episodes` noise-free episodes, one policy per agent, in lockstep
/// so each policy acts on all episodes in one batched pass. Episode `e`
/// starts from `derive_seed(seed, [e])`.
pub fn play_episodes(game: &GameConfig, policies: &[&PolicyNet], episodes: usize, seed: u64) -> Result<Vec<EpisodeStats>> {
    Ok(run(game, policies, episodes, seed, false)?.0)
}

/// As [`play_episodes`], also returning one trace per episode.
pub fn play_traced(
    game: &GameConfig,
    policies: &[&PolicyNet],
    episodes: usize,
    seed: u64,
) -> Result<(Vec<EpisodeStats>, Vec<Vec<TraceRecord>>)> {
    run(game, policies, episodes, seed, true)
}

fn run(
    game: &GameConfig,
    policies: &[&PolicyNet],
    episodes: usize,
    seed: u64,
    traced: bool,
) -> Result<(Vec<EpisodeStats>, Vec<Vec<TraceRecord>>)> {
    if episodes == 0 {
        return contract("evaluation needs at least one episode");
    }
    let n = game.num_agents();
    if policies.len() != n {
        return contract(format!("{} policies for {n} agents", policies.len()));
    }
    let mut states: Vec<WorldState> = (0..episodes)
        .map(|e| reset(game, derive_seed(seed, &[e as u64])))
        .collect::<Result<_>>()?;
    let mut tallies: Vec<EpisodeTally> = (0..episodes).map(|_| EpisodeTally::new(game)).collect();
    let mut traces: Vec<Vec<TraceRecord>> = vec![Vec::new(); if traced { episodes } else { 0 }];
    for _ in 0..game.horizon {
        let mut actions = vec![vec![[0.0f32; 2]; n]; episodes];
        for (i, policy) in policies.iter().enumerate() {
            let live: Vec<usize> = (0..episodes).filter(|&e| states[e].agents[i].alive).collect();
            if live.is_empty() {
                continue;
            }
            let obs: Vec<Observation> = live.iter().map(|&e| observe(game, &states[e], i)).collect();
            let refs: Vec<&Observation> = obs.iter().collect();
            for (&e, a) in live.iter().zip(policy.act_batch(&refs)?) {
                actions[e][i] = a;
            }
        }
        for (e, state) in states.iter_mut().enumerate() {
            let result = state.step(game, &actions[e])?;
            tallies[e].record(&result);
            if traced {
                traces[e].push(TraceRecord::capture(state, &actions[e], &result));
            }
        }
    }
    let stats = tallies.into_iter().zip(&states).map(|(t, s)| t.finish(game, s)).collect();
    Ok((stats, traces))
}
