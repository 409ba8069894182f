use rand::seq::index;
use rand::Rng;

use crate::error::{contract, Result};

/// Number of distinct cross-role games, `(K(K+1)/2)^roles`.
pub fn c_max(k: usize, roles: usize) -> usize {
    (k * (k + 1) / 2).pow(roles as u32)
}

fn decode(mut code: usize, per_role: &[usize]) -> Vec<usize> {
    let mut out = vec![0; per_role.len()];
    for (slot, &n) in out.iter_mut().zip(per_role).rev() {
        *slot = code % n;
        code /= n;
    }
    out
}

/// Picks `c` distinct games, each choosing one set index per role from
/// `per_role[r]` candidates. All combinations are enumerated (role 0
/// slowest) when `c` equals their count; otherwise `c` are sampled
/// uniformly without replacement and listed in enumeration order.
pub fn compose_games(per_role: &[usize], c: usize, rng: &mut impl Rng) -> Result<Vec<Vec<usize>>> {
    if per_role.is_empty() || per_role.contains(&0) {
        return contract("every role needs at least one candidate set");
    }
    let total: usize = per_role.iter().product();
    if c == 0 || c > total {
        return contract(format!("game count {c} outside 1..={total}"));
    }
    let codes: Vec<usize> = if c == total {
        (0..total).collect()
    } else {
        let mut v = index::sample(rng, total, c).into_vec();
        v.sort_unstable();
        v
    };
    Ok(codes.into_iter().map(|code| decode(code, per_role)).collect())
}

/// Indices of the `k` largest scores, best first; ties go to the lower index.
pub fn select_top_k(scores: &[f64], k: usize) -> Result<Vec<usize>> {
    if k == 0 || k > scores.len() {
        return contract(format!("cannot select top {k} of {} scores", scores.len()));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return contract("fitness scores must be finite");
    }
    let mut ids: Vec<usize> = (0..scores.len()).collect();
    ids.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    ids.truncate(k);
    Ok(ids)
}
