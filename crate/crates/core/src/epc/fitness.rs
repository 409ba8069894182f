use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::set::AgentSet;
use crate::envs::GameConfig;
use crate::error::{contract, Result};
use crate::eval::play_episodes;
use crate::nets::PolicyNet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitnessConfig {
    /// Evaluation episodes per matchup.
    pub eval_episodes: usize,
    /// Opponent draws per candidate; every opponent is played once when
    /// this reaches the number of available opponents.
    pub opponent_samples: usize,
}

/// Mean per-agent raw reward of `candidate` on `game`.
///
/// With one role this is the set playing its own game. Otherwise
/// `opponents[r]` lists the sets available for every other role `r`
/// (the entry for the candidate's role is ignored) and the reward is
/// averaged over opponent draws. All matchups share `seed`.
pub fn fitness(
    game: &GameConfig,
    candidate: &AgentSet,
    opponents: &[Vec<&AgentSet>],
    config: FitnessConfig,
    seed: u64,
    rng: &mut impl Rng,
) -> Result<f64> {
    let roles = game.num_roles();
    let role = candidate.role;
    if candidate.len() != game.scale.0[role] {
        return contract(format!(
            "set of {} agents for role {role} at scale {}",
            candidate.len(),
            game.scale
        ));
    }
    let others: Vec<usize> = (0..roles).filter(|&r| r != role).collect();
    if others.iter().any(|&r| opponents.get(r).is_none_or(|p| p.is_empty())) {
        return contract("no opponent sets available");
    }
    let sizes: Vec<usize> = others.iter().map(|&r| opponents[r].len()).collect();
    let total: usize = sizes.iter().product();
    let draws: Vec<usize> = if config.opponent_samples >= total {
        (0..total).collect()
    } else if config.opponent_samples == 0 {
        return contract("need at least one opponent sample");
    } else {
        index::sample(rng, total, config.opponent_samples).into_vec()
    };

    let mut acc = 0.0;
    for code in &draws {
        let mut pick = vec![0usize; roles];
        let mut c = *code;
        for (&r, &n) in others.iter().zip(&sizes).rev() {
            pick[r] = c % n;
            c /= n;
        }
        let mut policies: Vec<&PolicyNet> = Vec::with_capacity(game.num_agents());
        for r in 0..roles {
            let set = if r == role { candidate } else { opponents[r][pick[r]] };
            if set.len() != game.scale.0[r] {
                return contract(format!("opponent set for role {r} has {} agents", set.len()));
            }
            policies.extend(set.policies());
        }
        let stats = play_episodes(game, &policies, config.eval_episodes, seed)?;
        acc += stats.iter().map(|s| s.role_mean_raw[role]).sum::<f64>() / stats.len() as f64;
    }
    Ok(acc / draws.len() as f64)
}
