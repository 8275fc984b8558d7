//! Thresholding greedy algorithm: ordering, greedy sets and sums,
//! projections, indicator sums and the gap-restricted residuals.

use std::cmp::Ordering;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::oracle::{sigma_m, OracleOptions};
use crate::scalar::Scalar;
use crate::space::{CoeffVec, Space, MAX_DIM};

/// Subset of `{1..d}` stored as a bitmask over 0-based indices. Serialized
/// as the sorted list of 1-based indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct SupportSet(u32);

impl SupportSet {
    pub const EMPTY: SupportSet = SupportSet(0);

    pub fn from_mask(mask: u32) -> Self {
        SupportSet(mask)
    }

    pub fn full(dim: usize) -> Self {
        SupportSet(((1u64 << dim) - 1) as u32)
    }

    pub fn singleton0(j: usize) -> Self {
        SupportSet(1 << j)
    }

    pub fn from_indices0<I: IntoIterator<Item = usize>>(it: I) -> Self {
        SupportSet(it.into_iter().fold(0u32, |m, j| m | (1 << j)))
    }

    /// From 1-based indices, rejecting anything outside `1..=dim` and
    /// repeated entries.
    pub fn from_indices(indices: &[usize], dim: usize) -> Result<Self> {
        let mut mask = 0u32;
        for &n in indices {
            if n == 0 || n > dim {
                return Err(Error::IndexOutOfRange { index: n, dim });
            }
            if mask & (1 << (n - 1)) != 0 {
                return Err(Error::Config(format!("index {n} repeated in set")));
            }
            mask |= 1 << (n - 1);
        }
        Ok(SupportSet(mask))
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains0(self, j: usize) -> bool {
        self.0 & (1 << j) != 0
    }

    pub fn insert0(self, j: usize) -> Self {
        SupportSet(self.0 | (1 << j))
    }

    pub fn remove0(self, j: usize) -> Self {
        SupportSet(self.0 & !(1 << j))
    }

    pub fn union(self, other: Self) -> Self {
        SupportSet(self.0 | other.0)
    }

    pub fn intersect(self, other: Self) -> Self {
        SupportSet(self.0 & other.0)
    }

    pub fn minus(self, other: Self) -> Self {
        SupportSet(self.0 & !other.0)
    }

    pub fn is_disjoint(self, other: Self) -> bool {
        self.0 & other.0 == 0
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    /// 0-based members in increasing order.
    pub fn iter0(self) -> impl Iterator<Item = usize> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            if m == 0 {
                return None;
            }
            let j = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(j)
        })
    }

    /// 1-based members in increasing order.
    pub fn indices(self) -> Vec<usize> {
        self.iter0().map(|j| j + 1).collect()
    }

    /// Smallest 0-based member.
    pub fn first0(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }
}

impl Serialize for SupportSet {
    fn serialize<Se: Serializer>(&self, s: Se) -> std::result::Result<Se::Ok, Se::Error> {
        self.indices().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SupportSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        SupportSet::from_indices(&v, MAX_DIM).map_err(serde::de::Error::custom)
    }
}

/// Enumerates all subsets of `{0..dim}` with exactly `k` members in
/// increasing mask order.
pub fn subsets_of_size(dim: usize, k: usize) -> impl Iterator<Item = SupportSet> {
    let limit = 1u64 << dim;
    let mut next: Option<u64> = if k == 0 {
        Some(0)
    } else if k > dim {
        None
    } else {
        Some((1u64 << k) - 1)
    };
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            // Gosper's hack: next integer with the same popcount
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            let n = (((r ^ cur) >> 2) / c) | r;
            (n < limit).then_some(n)
        };
        Some(SupportSet(cur as u32))
    })
}

/// Unimodular scalars attached to the members of a set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignVec<S> {
    pub set: SupportSet,
    /// One value per member, in increasing index order.
    pub values: Vec<S>,
}

impl<S: Scalar> SignVec<S> {
    pub fn ones(set: SupportSet) -> Self {
        SignVec {
            set,
            values: vec![S::one(); set.len()],
        }
    }

    pub fn new(set: SupportSet, values: Vec<S>) -> Result<Self> {
        let s = SignVec { set, values };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.set.len() || !self.values.iter().all(|v| v.is_unit()) {
            return Err(Error::SignMismatch);
        }
        Ok(())
    }

    /// Sign at the 0-based index `j`, if `j` is in the set.
    pub fn get0(&self, j: usize) -> Option<S> {
        self.set
            .iter0()
            .position(|i| i == j)
            .map(|pos| self.values[pos])
    }
}

/// Natural greedy ordering of all `d` indices, 0-based. The support of `f`
/// comes first; zero coefficients follow in increasing index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyOrdering {
    pub order: Vec<usize>,
}

impl GreedyOrdering {
    pub fn indices(&self) -> Vec<usize> {
        self.order.iter().map(|j| j + 1).collect()
    }

    pub fn prefix_set(&self, m: usize) -> SupportSet {
        SupportSet::from_indices0(self.order.iter().take(m).copied())
    }
}

pub fn greedy_ordering<S: Scalar>(f: &[S]) -> GreedyOrdering {
    let mut order: Vec<usize> = (0..f.len()).collect();
    order.sort_by(|&a, &b| match f[b].modulus().total_cmp(&f[a].modulus()) {
        Ordering::Equal => a.cmp(&b),
        o => o,
    });
    GreedyOrdering { order }
}

/// `A_m(f)`, padded with the smallest unused indices when `m > |supp f|`.
pub fn greedy_set<S: Scalar>(f: &[S], m: usize) -> SupportSet {
    greedy_ordering(f).prefix_set(m)
}

pub fn greedy_sum<S: Scalar>(f: &[S], m: usize) -> CoeffVec<S> {
    project(f, greedy_set(f, m))
}

/// `P_A(f)`.
pub fn project<S: Scalar>(f: &[S], a: SupportSet) -> CoeffVec<S> {
    CoeffVec(
        f.iter()
            .enumerate()
            .map(|(j, x)| if a.contains0(j) { *x } else { S::zero() })
            .collect(),
    )
}

/// `f - P_A(f)`.
pub fn suppress<S: Scalar>(f: &[S], a: SupportSet) -> CoeffVec<S> {
    CoeffVec(
        f.iter()
            .enumerate()
            .map(|(j, x)| if a.contains0(j) { S::zero() } else { *x })
            .collect(),
    )
}

/// `1_{eps A}`, or `1_A` when `eps` is `None`.
pub fn indicator<S: Scalar>(dim: usize, a: SupportSet, eps: Option<&SignVec<S>>) -> Result<CoeffVec<S>> {
    if a.iter0().any(|j| j >= dim) {
        return Err(Error::IndexOutOfRange {
            index: a.iter0().last().unwrap_or(0) + 1,
            dim,
        });
    }
    let mut v = vec![S::zero(); dim];
    match eps {
        None => a.iter0().for_each(|j| v[j] = S::one()),
        Some(e) => {
            if e.set != a {
                return Err(Error::SignMismatch);
            }
            e.validate()?;
            for (j, s) in a.iter0().zip(&e.values) {
                v[j] = *s;
            }
        }
    }
    Ok(CoeffVec(v))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapResidual {
    pub n: usize,
    pub residual_norm: f64,
    pub sigma_n: f64,
}

/// Validates a gap sequence: strictly increasing, within `1..=dim`.
pub fn check_gaps(gaps: &[usize], dim: usize) -> Result<()> {
    let ok = !gaps.is_empty()
        && gaps.iter().all(|&n| (1..=dim).contains(&n))
        && gaps.windows(2).all(|w| w[0] < w[1]);
    if ok {
        Ok(())
    } else {
        Err(Error::BadGaps { dim })
    }
}

/// `||f - G_n(f)||` and `sigma_n(f)` for each `n` in the gap sequence.
pub fn gap_greedy_residual_norms<S: Scalar>(
    space: &Space,
    f: &[S],
    gaps: &[usize],
    opts: &OracleOptions,
) -> Result<Vec<GapResidual>> {
    space.check_vector(f)?;
    check_gaps(gaps, space.dim())?;
    let ordering = greedy_ordering(f);
    gaps.iter()
        .map(|&n| {
            let residual = suppress(f, ordering.prefix_set(n));
            Ok(GapResidual {
                n,
                residual_norm: space.norm_of(&residual),
                sigma_n: sigma_m(space, f, n, opts)?.value,
            })
        })
        .collect()
}
