//! Three-phase supremum search shared by the sampled constants.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::witness::Witness;
use super::Budget;
use crate::exec::Exec;
use crate::scalar::Scalar;

pub(crate) const PHASE_TRIVIAL: u8 = 0;
pub(crate) const PHASE_GRID: u8 = 1;
pub(crate) const PHASE_RANDOM: u8 = 2;
pub(crate) const PHASE_HILL: u8 = 3;

/// Best inner choice for one outer item, plus skipped degenerate cases.
pub(crate) struct Eval<I> {
    pub best: Option<(f64, I)>,
    pub degenerate: usize,
}

impl<I> Eval<I> {
    pub fn none() -> Self {
        Eval { best: None, degenerate: 0 }
    }

    pub fn degenerate() -> Self {
        Eval { best: None, degenerate: 1 }
    }

    /// Keeps `(ratio, inner)` if it strictly beats the current best.
    pub fn offer(&mut self, ratio: f64, inner: impl FnOnce() -> I) {
        if self.best.as_ref().is_none_or(|(r, _)| ratio > *r) {
            self.best = Some((ratio, inner()));
        }
    }
}

pub(crate) trait Family<S: Scalar>: Sync {
    type Item: Clone + Send + Sync;
    type Inner: Clone + Send + Sync;

    fn trivial(&self) -> Vec<Self::Item>;
    /// Number of grid indices, zero when the family has no grid.
    fn grid_len(&self) -> usize;
    /// `None` for indices filtered out (inadmissible or not canonical).
    fn grid_item(&self, index: usize) -> Option<Self::Item>;
    fn random_item(&self, rng: &mut ChaCha8Rng) -> Option<Self::Item>;
    fn perturb(&self, item: &Self::Item, rng: &mut ChaCha8Rng) -> Option<Self::Item>;
    fn evaluate(&self, item: &Self::Item) -> Eval<Self::Inner>;
    fn witness(&self, item: &Self::Item, inner: &Self::Inner) -> Witness<S>;
}

#[derive(Clone)]
struct Cand<T, I> {
    ratio: f64,
    phase: u8,
    index: usize,
    item: T,
    inner: I,
}

#[derive(Clone)]
struct Acc<T, I> {
    best: Option<Cand<T, I>>,
    used: usize,
    degenerate: usize,
}

impl<T, I> Acc<T, I> {
    fn empty() -> Self {
        Acc { best: None, used: 0, degenerate: 0 }
    }
}

/// Larger ratio wins; ties go to the earlier (phase, index).
fn merge<T, I>(a: Acc<T, I>, b: Acc<T, I>) -> Acc<T, I> {
    let best = match (a.best, b.best) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            let x_wins = match x.ratio.total_cmp(&y.ratio) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => (x.phase, x.index) <= (y.phase, y.index),
            };
            Some(if x_wins { x } else { y })
        }
    };
    Acc {
        best,
        used: a.used + b.used,
        degenerate: a.degenerate + b.degenerate,
    }
}

fn single<S: Scalar, F: Family<S>>(
    family: &F,
    item: Option<F::Item>,
    phase: u8,
    index: usize,
) -> Acc<F::Item, F::Inner> {
    let Some(item) = item else {
        return Acc::empty();
    };
    let e = family.evaluate(&item);
    Acc {
        best: e.best.map(|(ratio, inner)| Cand { ratio, phase, index, item, inner }),
        used: 1,
        degenerate: e.degenerate,
    }
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) struct Outcome<S> {
    pub best: Option<(f64, Witness<S>)>,
    pub samples_used: usize,
    pub degenerate: usize,
    pub strategy: String,
}

/// Runs trivial instances, the grid, seeded random samples and a
/// sequential hill-climb from the best instance found.
pub(crate) fn search<S: Scalar, F: Family<S>>(family: &F, budget: &Budget, dim: usize, exec: &Exec) -> Outcome<S> {
    let trivial = family.trivial();
    let mut acc = trivial
        .into_iter()
        .enumerate()
        .map(|(i, item)| single(family, Some(item), PHASE_TRIVIAL, i))
        .fold(Acc::empty(), merge);

    let mut phases = vec!["trivial"];
    let grid_len = family.grid_len();
    if budget.grid_active(dim) && grid_len > 0 && grid_len <= budget.grid_limit {
        let g = exec.map_reduce(
            grid_len,
            Acc::empty(),
            |i| single(family, family.grid_item(i), PHASE_GRID, i),
            merge,
        );
        acc = merge(acc, g);
        phases.push("grid");
    }

    if budget.samples > 0 {
        let r = exec.map_reduce(
            budget.samples,
            Acc::empty(),
            |i| {
                let mut rng = rng_for(budget.seed, i as u64);
                single(family, family.random_item(&mut rng), PHASE_RANDOM, i)
            },
            merge,
        );
        acc = merge(acc, r);
        phases.push("random");
    }

    if budget.hillclimb_rounds > 0 {
        if let Some(start) = acc.best.clone() {
            let mut rng = rng_for(budget.seed, u64::MAX);
            let mut cur = start;
            for round in 0..budget.hillclimb_rounds {
                let Some(item) = family.perturb(&cur.item, &mut rng) else {
                    continue;
                };
                let e = family.evaluate(&item);
                acc.used += 1;
                acc.degenerate += e.degenerate;
                if let Some((ratio, inner)) = e.best {
                    if ratio > cur.ratio {
                        cur = Cand { ratio, phase: PHASE_HILL, index: round, item, inner };
                    }
                }
            }
            acc.best = Some(cur);
            phases.push("hillclimb");
        }
    }

    Outcome {
        best: acc.best.map(|c| (c.ratio, family.witness(&c.item, &c.inner))),
        samples_used: acc.used,
        degenerate: acc.degenerate,
        strategy: phases.join("+"),
    }
}

/// Splits `index` into `out.len()` digits of the given base, least
/// significant first.
pub(crate) fn digits(mut index: usize, base: usize, out: &mut [usize]) {
    for d in out.iter_mut() {
        *d = index % base;
        index /= base;
    }
}

/// `base^exp`, saturating at `usize::MAX`.
pub(crate) fn pow_sat(base: usize, exp: usize) -> usize {
    (0..exp).fold(1usize, |acc, _| acc.saturating_mul(base))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits_round_trip() {
        let mut d = [0; 3];
        digits(2 + 5 * 3 + 25 * 4, 5, &mut d);
        assert_eq!(d, [2, 3, 4]);
        assert_eq!(pow_sat(7, 3), 343);
        assert_eq!(pow_sat(usize::MAX, 2), usize::MAX);
    }

    #[test]
    fn merge_prefers_earlier_on_ties() {
        let a = Acc {
            best: Some(Cand { ratio: 2.0, phase: 1, index: 9, item: (), inner: () }),
            used: 1,
            degenerate: 0,
        };
        let b = Acc {
            best: Some(Cand { ratio: 2.0, phase: 1, index: 3, item: (), inner: () }),
            used: 2,
            degenerate: 1,
        };
        let m = merge(a.clone(), b.clone());
        assert_eq!(m.best.as_ref().unwrap().index, 3);
        assert_eq!((m.used, m.degenerate), (3, 1));
        assert_eq!(merge(b, a).best.unwrap().index, 3);
    }
}
