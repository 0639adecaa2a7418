use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::ParityCheck;
use crate::{Error, Result};

/// Progressive edge growth: variables are connected one edge at a time to
/// the lowest-degree check that is farthest away in the current graph
/// (unreachable if possible), ties broken by a seeded RNG.
pub fn peg_construct(n: usize, m: usize, col_weight: usize, seed: u64) -> Result<ParityCheck> {
    if n == 0 || m == 0 || col_weight == 0 || col_weight > m {
        return Err(Error::InvalidConfig(format!(
            "PEG needs n, m > 0 and 0 < column weight <= m (n = {n}, m = {m}, weight = {col_weight})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut var_checks: Vec<Vec<usize>> = vec![Vec::with_capacity(col_weight); n];
    let mut check_vars: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut seen_check = vec![0u32; m];
    let mut seen_var = vec![0u32; n];
    let mut stamp = 0u32;
    let mut candidates = Vec::new();

    for j in 0..n {
        for k in 0..col_weight {
            candidates.clear();
            if k == 0 {
                candidates.extend(0..m);
            } else {
                stamp += 1;
                seen_var[j] = stamp;
                let mut frontier: Vec<usize> = var_checks[j].clone();
                frontier.iter().for_each(|&c| seen_check[c] = stamp);
                let mut reached = frontier.len();
                loop {
                    let mut next = Vec::new();
                    for &c in &frontier {
                        for &v in &check_vars[c] {
                            if seen_var[v] == stamp {
                                continue;
                            }
                            seen_var[v] = stamp;
                            for &c2 in &var_checks[v] {
                                if seen_check[c2] != stamp {
                                    seen_check[c2] = stamp;
                                    next.push(c2);
                                }
                            }
                        }
                    }
                    if next.is_empty() {
                        candidates.extend((0..m).filter(|&c| seen_check[c] != stamp));
                        break;
                    }
                    reached += next.len();
                    if reached == m {
                        candidates.extend(next);
                        break;
                    }
                    frontier = next;
                }
            }
            let min_deg = candidates
                .iter()
                .map(|&c| check_vars[c].len())
                .min()
                .expect("nonempty");
            candidates.retain(|&c| check_vars[c].len() == min_deg);
            let &c = candidates.choose(&mut rng).expect("nonempty");
            var_checks[j].push(c);
            check_vars[c].push(j);
        }
    }
    ParityCheck::from_rows(n, check_vars)
}
