use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::maddpg::AgentLearner;
use crate::nets::PolicyNet;

/// Where an [`AgentSet`] came from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub stage: usize,
    /// Indices of the two parent sets joined by mix-and-match.
    pub parents: Option<(usize, usize)>,
    pub mutant: Option<usize>,
}

/// Ordered learners of one role; the unit that is crossed, mutated and selected.
#[derive(Clone, Debug)]
pub struct AgentSet {
    pub role: usize,
    pub members: Vec<AgentLearner>,
    pub provenance: Provenance,
}

impl AgentSet {
    pub fn new(role: usize, members: Vec<AgentLearner>, provenance: Provenance) -> Self {
        Self {
            role,
            members,
            provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn policies(&self) -> Vec<&PolicyNet> {
        self.members.iter().map(|m| &m.policy).collect()
    }
}

fn fresh_copies(set: &AgentSet) -> impl Iterator<Item = AgentLearner> + '_ {
    set.members.iter().map(|m| m.clone_fresh(m.policy_opt.config))
}

/// Learner `k` and `k + N` are both copies of source learner `k`, with
/// fresh optimizer moments.
pub fn clone_double(set: &AgentSet) -> Result<AgentSet> {
    if set.is_empty() {
        return contract("cannot clone an empty agent set");
    }
    let members = fresh_copies(set).chain(fresh_copies(set)).collect();
    Ok(AgentSet::new(set.role, members, set.provenance.clone()))
}

/// One doubled set per unordered pair `j1 <= j2`, formed by concatenating
/// sets `j1` and `j2`; `K` inputs give `K(K+1)/2` outputs.
pub fn mix_and_match(sets: &[AgentSet]) -> Result<Vec<AgentSet>> {
    let Some(first) = sets.first() else {
        return contract("mix_and_match needs at least one set");
    };
    if first.is_empty() {
        return contract("cannot mix empty agent sets");
    }
    if sets.iter().any(|s| s.len() != first.len() || s.role != first.role) {
        return contract("mix_and_match needs sets of one role and equal size");
    }
    let mut out = Vec::with_capacity(sets.len() * (sets.len() + 1) / 2);
    for j1 in 0..sets.len() {
        for j2 in j1..sets.len() {
            let members = fresh_copies(&sets[j1]).chain(fresh_copies(&sets[j2])).collect();
            let provenance = Provenance {
                stage: first.provenance.stage,
                parents: Some((j1, j2)),
                mutant: None,
            };
            out.push(AgentSet::new(first.role, members, provenance));
        }
    }
    Ok(out)
}
