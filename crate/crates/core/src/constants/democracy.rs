//! Exhaustive democracy constants: every pair of sets, every sign pattern
//! when that is affordable.

use super::engine::{pow_sat, rng_for};
use super::witness::Witness;
use super::Budget;
use crate::exec::Exec;
use crate::greedy::{SignVec, SupportSet};
use crate::scalar::Scalar;
use crate::space::Space;

/// Random sign patterns per set when full enumeration is too large.
const SAMPLED_SIGNS: usize = 64;

#[derive(Clone)]
struct SetNorms<S> {
    max: f64,
    max_signs: Vec<S>,
    min: f64,
    min_signs: Vec<S>,
}

pub(crate) struct DemocracyOutcome<S> {
    pub best: Option<(f64, Witness<S>)>,
    pub evaluations: usize,
    pub strategy: String,
}

fn signs_for<S: Scalar>(signs: &[S], len: usize, mut code: usize) -> Vec<S> {
    (0..len)
        .map(|_| {
            let s = signs[code % signs.len()];
            code /= signs.len();
            s
        })
        .collect()
}

pub(crate) fn democracy<S: Scalar>(space: &Space, signed: bool, budget: &Budget, exec: &Exec) -> DemocracyOutcome<S> {
    let d = space.dim();
    let signs = if signed { S::unit_signs(space.mode()) } else { vec![S::one()] };
    let total: usize = (0..=d)
        .map(|k| pow_sat(signs.len(), k).saturating_mul(binomial(d, k)))
        .fold(0usize, |a, b| a.saturating_add(b));
    let exhaustive = total <= budget.grid_limit.max(1 << 20);
    let n_sets = 1usize << d;

    let per_set = exec.map_reduce(
        n_sets,
        Vec::new(),
        |mask| {
            if mask == 0 {
                return Vec::new();
            }
            let set = SupportSet::from_mask(mask as u32);
            let k = set.len();
            let mut v = vec![S::zero(); d];
            let mut eval = |pattern: &[S]| {
                for (j, s) in set.iter0().zip(pattern) {
                    v[j] = *s;
                }
                space.norm_of(&v)
            };
            let ones = vec![S::one(); k];
            let first = eval(&ones);
            let mut r = SetNorms {
                max: first,
                max_signs: ones.clone(),
                min: first,
                min_signs: ones,
            };
            let mut consider = |pattern: Vec<S>, r: &mut SetNorms<S>| {
                let x = eval(&pattern);
                if x > r.max {
                    r.max = x;
                    r.max_signs = pattern.clone();
                }
                if x < r.min {
                    r.min = x;
                    r.min_signs = pattern;
                }
            };
            let count = pow_sat(signs.len(), k);
            if exhaustive {
                for code in 1..count {
                    consider(signs_for(&signs, k, code), &mut r);
                }
            } else {
                let mut rng = rng_for(budget.seed, mask as u64);
                for _ in 0..SAMPLED_SIGNS.min(count) {
                    let code = rand::Rng::random_range(&mut rng, 0..count);
                    consider(signs_for(&signs, k, code), &mut r);
                }
            }
            let used = if exhaustive { count } else { SAMPLED_SIGNS.min(count) + 1 };
            vec![(mask, r, used)]
        },
        |mut a, mut b| {
            a.append(&mut b);
            a
        },
    );
    let mut table: Vec<Option<SetNorms<S>>> = vec![None; n_sets];
    let mut evaluations = 0;
    for (mask, r, n) in per_set {
        table[mask] = Some(r);
        evaluations += n;
    }

    // lowest-mask minimizer of the minimal norm among sets of size >= c
    let mut best_ge: Vec<Option<usize>> = vec![None; d + 2];
    for c in (1..=d).rev() {
        let mut best = best_ge[c + 1];
        for mask in 1..n_sets {
            if (mask as u32).count_ones() as usize != c {
                continue;
            }
            let m = table[mask].as_ref().map_or(f64::INFINITY, |r| r.min);
            best = match best {
                None => Some(mask),
                Some(b) => {
                    let bm = table[b].as_ref().map_or(f64::INFINITY, |r| r.min);
                    if m < bm || (m == bm && mask < b) {
                        Some(mask)
                    } else {
                        Some(b)
                    }
                }
            };
        }
        best_ge[c] = best;
    }

    let mut best: Option<(f64, usize, usize)> = None;
    for a in 1..n_sets {
        let k = (a as u32).count_ones() as usize;
        let (Some(ra), Some(b)) = (table[a].as_ref(), best_ge[k]) else {
            continue;
        };
        let rb = table[b].as_ref().expect("filled");
        if rb.min <= 0.0 {
            continue;
        }
        let ratio = ra.max / rb.min;
        if best.is_none_or(|(r, _, _)| ratio > r) {
            best = Some((ratio, a, b));
        }
    }

    let best = best.map(|(ratio, a, b)| {
        let (ra, rb) = (table[a].as_ref().unwrap(), table[b].as_ref().unwrap());
        let (sa, sb) = (SupportSet::from_mask(a as u32), SupportSet::from_mask(b as u32));
        (
            ratio,
            Witness::Democracy {
                a: sa,
                eps: SignVec { set: sa, values: ra.max_signs.clone() },
                b: sb,
                eta: SignVec { set: sb, values: rb.min_signs.clone() },
            },
        )
    });
    let strategy = match (signed, exhaustive) {
        (false, _) => "exhaustive-sets",
        (true, true) => "exhaustive-sets+exhaustive-signs",
        (true, false) => "exhaustive-sets+sampled-signs",
    };
    DemocracyOutcome {
        best,
        evaluations,
        strategy: strategy.to_string(),
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(12, 0), 1);
    }

    #[test]
    fn signs_enumeration_starts_with_ones() {
        let s = [1.0, -1.0];
        assert_eq!(signs_for(&s, 3, 0), vec![1.0, 1.0, 1.0]);
        assert_eq!(signs_for(&s, 3, 5), vec![-1.0, 1.0, -1.0]);
    }
}
