use std::collections::BTreeMap;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::AnalyticsError;
use crate::engine::Attempt;

/// Draws up to `per_problem` attempts per problem uniformly without
/// replacement, reproducibly for a given `seed`. Problems are visited in id
/// order; ids come back in log order within each problem.
pub fn sample_for_coding(
    log: &[Attempt],
    per_problem: usize,
    seed: u64,
) -> Result<Vec<String>, AnalyticsError> {
    if per_problem == 0 {
        return Err(AnalyticsError::InvalidArgument("per_problem must be at least 1".into()));
    }
    let mut by_problem: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for a in log {
        by_problem.entry(&a.problem_id).or_default().push(&a.attempt_id);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for ids in by_problem.values() {
        if ids.len() <= per_problem {
            out.extend(ids.iter().map(|s| s.to_string()));
            continue;
        }
        let mut picked = index::sample(&mut rng, ids.len(), per_problem).into_vec();
        picked.sort_unstable();
        out.extend(picked.into_iter().map(|i| ids[i].to_string()));
    }
    Ok(out)
}
