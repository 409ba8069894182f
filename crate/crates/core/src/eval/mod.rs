//! Cross-play tournaments, normalized scores, behavior statistics and the
//! self-cloning generalization test. Evaluation uses noise-free policies
//! and raw rewards only.

mod rollout;
mod scores;

pub use rollout::{play_episodes, play_traced};
pub use scores::{normalize_scores, RawScore, ScoreEntry, ScoreTable};

use serde::{Deserialize, Serialize};

use crate::envs::{EpisodeStats, EventKind, GameConfig, GameKind, TraceRecord};
use crate::epc::{clone_double, AgentSet};
use crate::error::{contract, Result};
use crate::nets::PolicyNet;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    /// Mean raw episode reward per role. In Adversarial Battle the entries
    /// are instead per method (first, second), each averaged over both
    /// side assignments.
    pub role_mean_raw: Vec<f64>,
    pub episodes: usize,
    pub stats: Vec<EpisodeStats>,
    /// Battle only: the side-swapped games, on the same seeds.
    pub mirrored: Option<Vec<EpisodeStats>>,
}

fn role_means(stats: &[EpisodeStats], roles: usize) -> Vec<f64> {
    (0..roles)
        .map(|r| stats.iter().map(|s| s.role_mean_raw[r]).sum::<f64>() / stats.len() as f64)
        .collect()
}

fn check_sets(game: &GameConfig, sets: &[&AgentSet], who: &str) -> Result<()> {
    if sets.len() != game.num_roles() {
        return contract(format!("{who}: {} sets for {} roles", sets.len(), game.num_roles()));
    }
    for (r, s) in sets.iter().enumerate() {
        if s.len() != game.scale.0[r] {
            return contract(format!(
                "{who}: role {r} set has {} agents, scale {} needs {}",
                s.len(),
                game.scale,
                game.scale.0[r]
            ));
        }
    }
    Ok(())
}

fn lineup<'a>(game: &GameConfig, sides: &[&'a AgentSet]) -> Vec<&'a PolicyNet> {
    let mut out = Vec::with_capacity(game.num_agents());
    for s in sides {
        out.extend(s.policies());
    }
    out
}

/// Plays method `a` (one set per role) against method `b`.
///
/// Food Collection plays `a` alone. Grassland plays `a`'s sheep against
/// `b`'s wolves (`a`'s own wolves without `b`). Adversarial Battle plays
/// `a`'s team 1 against `b`'s team 2 and then `b`'s team 1 against `a`'s
/// team 2 on the same seeds, reporting each method's average.
pub fn cross_play(
    game: &GameConfig,
    a: &[&AgentSet],
    b: Option<&[&AgentSet]>,
    episodes: usize,
    seed: u64,
) -> Result<MatchResult> {
    if episodes == 0 {
        return contract("cross_play needs at least one episode");
    }
    check_sets(game, a, "first method")?;
    if let Some(b) = b {
        check_sets(game, b, "second method")?;
    }
    match game.kind {
        GameKind::FoodCollection | GameKind::Grassland => {
            let sides: Vec<&AgentSet> = match (game.kind, b) {
                (GameKind::Grassland, Some(b)) => vec![a[0], b[1]],
                _ => a.to_vec(),
            };
            let stats = play_episodes(game, &lineup(game, &sides), episodes, seed)?;
            Ok(MatchResult {
                role_mean_raw: role_means(&stats, game.num_roles()),
                episodes,
                stats,
                mirrored: None,
            })
        }
        GameKind::AdversarialBattle => {
            let b = b.unwrap_or(a);
            let first = play_episodes(game, &lineup(game, &[a[0], b[1]]), episodes, seed)?;
            let second = play_episodes(game, &lineup(game, &[b[0], a[1]]), episodes, seed)?;
            let (m1, m2) = (role_means(&first, 2), role_means(&second, 2));
            Ok(MatchResult {
                role_mean_raw: vec![(m1[0] + m2[1]) / 2.0, (m1[1] + m2[0]) / 2.0],
                episodes,
                stats: first,
                mirrored: Some(second),
            })
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BehaviorStats {
    pub episodes: usize,
    pub grass_eaten: Option<f64>,
    pub sheep_survival: Option<f64>,
    pub coverage: Option<f64>,
}

fn need(traces: &[Vec<TraceRecord>], game: &GameConfig, kind: GameKind, what: &str) -> Result<()> {
    if game.kind != kind {
        return contract(format!("{what} is not defined for {}", game.kind));
    }
    if traces.is_empty() || traces.iter().any(Vec::is_empty) {
        return contract(format!("{what} needs non-empty traces"));
    }
    Ok(())
}

/// Mean grass pellets eaten per episode.
pub fn grass_eaten(traces: &[Vec<TraceRecord>], game: &GameConfig) -> Result<f64> {
    need(traces, game, GameKind::Grassland, "grass eaten")?;
    let total: usize = traces
        .iter()
        .flatten()
        .map(|r| r.events.iter().filter(|e| e.kind == EventKind::EatGrass).count())
        .sum();
    Ok(total as f64 / traces.len() as f64)
}

/// Mean fraction of sheep alive at the end of an episode.
pub fn sheep_survival(traces: &[Vec<TraceRecord>], game: &GameConfig) -> Result<f64> {
    need(traces, game, GameKind::Grassland, "sheep survival")?;
    let sheep = game.role_range(0);
    let n = sheep.len() as f64;
    let total: f64 = traces
        .iter()
        .map(|ep| {
            let last = ep.last().unwrap();
            sheep.clone().filter(|&i| last.alive[i]).count() as f64 / n
        })
        .sum();
    Ok(total / traces.len() as f64)
}

/// Time-averaged fraction of occupied food locations.
pub fn coverage_rate(traces: &[Vec<TraceRecord>], game: &GameConfig) -> Result<f64> {
    need(traces, game, GameKind::FoodCollection, "coverage")?;
    let foods = game.num_landmarks() as f64;
    let total: f64 = traces
        .iter()
        .map(|ep| {
            let occupied: usize = ep
                .iter()
                .map(|r| r.events.iter().filter(|e| e.kind == EventKind::OccupyFood).count())
                .sum();
            occupied as f64 / (ep.len() as f64 * foods)
        })
        .sum();
    Ok(total / traces.len() as f64)
}

/// Every statistic defined for `game`.
pub fn behavior_stats(traces: &[Vec<TraceRecord>], game: &GameConfig) -> Result<BehaviorStats> {
    let mut out = BehaviorStats {
        episodes: traces.len(),
        ..BehaviorStats::default()
    };
    match game.kind {
        GameKind::Grassland => {
            out.grass_eaten = Some(grass_eaten(traces, game)?);
            out.sheep_survival = Some(sheep_survival(traces, game)?);
        }
        GameKind::FoodCollection => out.coverage = Some(coverage_rate(traces, game)?),
        GameKind::AdversarialBattle => {
            if traces.is_empty() {
                return contract("behavior stats need at least one trace");
            }
        }
    }
    Ok(out)
}

/// Doubles each role's set by self-cloning, without training, and plays
/// the result at twice the scale of `game`.
pub fn generalization_test(best: &[AgentSet], game: &GameConfig, episodes: usize, seed: u64) -> Result<MatchResult> {
    let doubled: Vec<AgentSet> = best.iter().map(clone_double).collect::<Result<_>>()?;
    let big = game.with_scale(game.scale.doubled())?;
    let refs: Vec<&AgentSet> = doubled.iter().collect();
    cross_play(&big, &refs, None, episodes, seed)
}

/// Full pairwise tournament between named methods (one set per role each).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TournamentResult {
    pub table: ScoreTable,
    pub matchups: usize,
}

/// Grassland plays every sheep method against every wolf method (`M^2`
/// matchups); Battle plays every unordered pair of distinct entries with
/// side averaging; Food Collection plays each method alone. A method's raw
/// score in a column is its mean over its matchups.
pub fn tournament(
    game: &GameConfig,
    methods: &[(String, Vec<AgentSet>)],
    episodes: usize,
    seed: u64,
) -> Result<TournamentResult> {
    let m = methods.len();
    if m < 2 {
        return contract("a tournament needs at least two methods");
    }
    let refs: Vec<Vec<&AgentSet>> = methods.iter().map(|(_, s)| s.iter().collect()).collect();
    let scale = game.scale.to_string();
    let mut raw = Vec::new();
    let mut matchups = 0;
    let mut push = |method: &str, column: String, value: f64| {
        raw.push(RawScore {
            method: method.to_string(),
            game: column,
            scale: scale.clone(),
            raw: value,
        })
    };
    match game.kind {
        GameKind::FoodCollection => {
            for (i, (name, _)) in methods.iter().enumerate() {
                let r = cross_play(game, &refs[i], None, episodes, seed)?;
                matchups += 1;
                push(name, game.kind.as_str().into(), r.role_mean_raw[0]);
            }
        }
        GameKind::Grassland => {
            let mut sheep = vec![0.0; m];
            let mut wolves = vec![0.0; m];
            for i in 0..m {
                for j in 0..m {
                    let r = cross_play(game, &refs[i], Some(&refs[j]), episodes, seed)?;
                    matchups += 1;
                    sheep[i] += r.role_mean_raw[0] / m as f64;
                    wolves[j] += r.role_mean_raw[1] / m as f64;
                }
            }
            let names = game.kind.role_names();
            for (i, (name, _)) in methods.iter().enumerate() {
                push(name, format!("grassland:{}", names[0]), sheep[i]);
                push(name, format!("grassland:{}", names[1]), wolves[i]);
            }
        }
        GameKind::AdversarialBattle => {
            let mut score = vec![0.0; m];
            for i in 0..m {
                for j in i + 1..m {
                    let r = cross_play(game, &refs[i], Some(&refs[j]), episodes, seed)?;
                    matchups += 1;
                    score[i] += r.role_mean_raw[0] / (m - 1) as f64;
                    score[j] += r.role_mean_raw[1] / (m - 1) as f64;
                }
            }
            for (i, (name, _)) in methods.iter().enumerate() {
                push(name, game.kind.as_str().into(), score[i]);
            }
        }
    }
    Ok(TournamentResult {
        table: normalize_scores(&raw)?,
        matchups,
    })
}
