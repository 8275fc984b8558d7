//! Brute-force best approximation: `sigma_m` over all supports of size `m`
//! and `D_m` over all scaled indicator sums of at most `m` terms.

pub mod minimize;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::greedy::{greedy_set, subsets_of_size, suppress, SupportSet};
use crate::scalar::Scalar;
use crate::space::{CoeffVec, Space};
use minimize::{coordinate_descent, CdOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Closed form when the norm allows it, coordinate descent otherwise.
    #[default]
    Auto,
    Generic,
    #[serde(rename = "fastpath")]
    FastPath,
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "auto" => Ok(Method::Auto),
            "generic" => Ok(Method::Generic),
            "fastpath" => Ok(Method::FastPath),
            _ => Err(format!("unknown method `{s}` (expected auto, generic or fastpath)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub method: Method,
    pub tol_inner: f64,
    pub max_passes: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            method: Method::Auto,
            tol_inner: 1e-10,
            max_passes: 200,
        }
    }
}

impl OracleOptions {
    pub fn generic() -> Self {
        OracleOptions {
            method: Method::Generic,
            ..Self::default()
        }
    }

    fn use_fast_path(&self, space: &Space) -> Result<bool> {
        match self.method {
            Method::Auto => Ok(space.is_separable_fastpath()),
            Method::Generic => Ok(false),
            Method::FastPath if space.is_separable_fastpath() => Ok(true),
            Method::FastPath => Err(Error::FastPathUnavailable),
        }
    }
}

/// Best approximant found by an oracle. For `D_m` the coefficient list is
/// the single scalar `alpha`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxResult<S> {
    pub value: f64,
    pub support: SupportSet,
    pub coeffs: Vec<S>,
    pub converged: bool,
}

impl<S: Scalar> ApproxResult<S> {
    /// `sum_{j in support} a_j x_j`, one coefficient per member.
    pub fn reconstruction(&self, dim: usize) -> CoeffVec<S> {
        let mut v = vec![S::zero(); dim];
        if self.coeffs.len() == 1 && self.support.len() > 1 {
            self.support.iter0().for_each(|j| v[j] = self.coeffs[0]);
        } else {
            for (j, a) in self.support.iter0().zip(&self.coeffs) {
                v[j] = *a;
            }
        }
        CoeffVec(v)
    }
}

/// `min_a ||f - sum_{j in B} a_j x_j||` for a fixed support `B`.
pub fn minimize_coeffs<S: Scalar>(
    space: &Space,
    f: &[S],
    b: SupportSet,
    opts: &OracleOptions,
) -> Result<ApproxResult<S>> {
    space.check_vector(f)?;
    if b.iter0().any(|j| j >= space.dim()) {
        return Err(Error::IndexOutOfRange {
            index: b.iter0().last().unwrap_or(0) + 1,
            dim: space.dim(),
        });
    }
    let fast = opts.use_fast_path(space)?;
    Ok(minimize_unchecked(space, f, b, opts, fast))
}

fn minimize_unchecked<S: Scalar>(
    space: &Space,
    f: &[S],
    b: SupportSet,
    opts: &OracleOptions,
    fast: bool,
) -> ApproxResult<S> {
    let own: Vec<S> = b.iter0().map(|j| f[j]).collect();
    let tail = suppress(f, b);
    let tail_norm = space.norm_of(&tail);
    if fast || b.is_empty() {
        return ApproxResult {
            value: tail_norm,
            support: b,
            coeffs: own,
            converged: true,
        };
    }
    let f_norm = space.norm_of(f);
    let members: Vec<usize> = b.iter0().collect();
    let (start, _) = if tail_norm <= f_norm {
        (own.clone(), tail_norm)
    } else {
        (vec![S::zero(); members.len()], f_norm)
    };
    let radii: Vec<f64> = members
        .iter()
        .map(|&j| f_norm * space.dual0(j) + f[j].modulus() + 1.0)
        .collect();
    let mut residual = f.to_vec();
    let result = coordinate_descent(
        &mut |a: &[S]| {
            for (k, &j) in members.iter().enumerate() {
                residual[j] = f[j] - a[k];
            }
            space.norm_of(&residual)
        },
        start,
        &radii,
        &CdOptions {
            tol: opts.tol_inner,
            max_passes: opts.max_passes,
            pairwise: !space.is_unconditional(),
        },
    );
    ApproxResult {
        value: result.value,
        support: b,
        coeffs: result.coeffs,
        converged: result.converged,
    }
}

fn check_m(space: &Space, m: usize) -> Result<()> {
    if m > space.dim() {
        return Err(Error::Config(format!(
            "m = {m} exceeds the dimension {}",
            space.dim()
        )));
    }
    Ok(())
}

/// Lower bound `max_{j not in B} |f_j| / ||x_j^*||` for any approximant
/// supported on `B`.
fn coordinate_lower_bound<S: Scalar>(space: &Space, f: &[S], b: SupportSet) -> f64 {
    (0..f.len())
        .filter(|&j| !b.contains0(j))
        .map(|j| f[j].modulus() / space.dual0(j))
        .fold(0.0, f64::max)
}

/// `sigma_m(f)`, the smallest error of an approximant with at most `m`
/// terms. Supports are enumerated in increasing mask order; ties keep the
/// first.
pub fn sigma_m<S: Scalar>(space: &Space, f: &[S], m: usize, opts: &OracleOptions) -> Result<ApproxResult<S>> {
    sigma_m_exec(space, f, m, opts, &Exec::Sequential)
}

/// As [`sigma_m`], distributing supports over the executor. The result does
/// not depend on the worker count.
pub fn sigma_m_exec<S: Scalar>(
    space: &Space,
    f: &[S],
    m: usize,
    opts: &OracleOptions,
    exec: &Exec,
) -> Result<ApproxResult<S>> {
    space.check_vector(f)?;
    check_m(space, m)?;
    let fast = opts.use_fast_path(space)?;
    if m == 0 {
        return Ok(ApproxResult {
            value: space.norm_of(f),
            support: SupportSet::EMPTY,
            coeffs: Vec::new(),
            converged: true,
        });
    }
    let supp = CoeffVec(f.to_vec()).support();
    if supp.len() <= m {
        let support = greedy_set(f, m);
        return Ok(ApproxResult {
            value: 0.0,
            support,
            coeffs: support.iter0().map(|j| f[j]).collect(),
            converged: true,
        });
    }
    // the greedy support is a valid competitor; anything with a larger
    // lower bound cannot win
    // numerical dual norms carry small errors, hence the margin
    let greedy = greedy_set(f, m);
    let cutoff = minimize_unchecked(space, f, greedy, opts, fast).value;
    let subsets: Vec<SupportSet> = subsets_of_size(space.dim(), m).collect();
    let best = exec.map_reduce(
        subsets.len(),
        None,
        |i| {
            let b = subsets[i];
            if b != greedy && coordinate_lower_bound(space, f, b) > cutoff * (1.0 + 1e-6) {
                return None;
            }
            Some(minimize_unchecked(space, f, b, opts, fast))
        },
        better,
    );
    Ok(best.expect("the greedy support is never pruned"))
}

/// Argmin by value, then by lowest mask. Associative and commutative.
fn better<S: Scalar>(a: Option<ApproxResult<S>>, b: Option<ApproxResult<S>>) -> Option<ApproxResult<S>> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(a), Some(b)) => {
            let converged = a.converged && b.converged;
            let mut win = match a.value.total_cmp(&b.value) {
                std::cmp::Ordering::Less => a,
                std::cmp::Ordering::Greater => b,
                std::cmp::Ordering::Equal if a.support.mask() <= b.support.mask() => a,
                std::cmp::Ordering::Equal => b,
            };
            win.converged = converged;
            Some(win)
        }
    }
}

/// `D_m(f) = min { ||f - alpha 1_A|| : |A| <= m }`.
pub fn d_m<S: Scalar>(space: &Space, f: &[S], m: usize, opts: &OracleOptions) -> Result<ApproxResult<S>> {
    space.check_vector(f)?;
    check_m(space, m)?;
    let f_norm = space.norm_of(f);
    let mut best = ApproxResult {
        value: f_norm,
        support: SupportSet::EMPTY,
        coeffs: vec![S::zero()],
        converged: true,
    };
    let mut first = true;
    let mut residual = f.to_vec();
    for k in 1..=m {
        for a in subsets_of_size(space.dim(), k) {
            let mut objective = |alpha: S| {
                for j in a.iter0() {
                    residual[j] = f[j] - alpha;
                }
                space.norm_of(&residual)
            };
            // coefficients of f on A are exact minimizers in many cases
            let mut start = (S::zero(), f_norm);
            for j in a.iter0() {
                let v = objective(f[j]);
                if v < start.1 {
                    start = (f[j], v);
                }
            }
            let ones: Vec<S> = (0..f.len())
                .map(|j| if a.contains0(j) { S::one() } else { S::zero() })
                .collect();
            let radius = 2.0 * f_norm / space.norm_of(&ones) + 1.0;
            let (mut alpha, mut value) =
                S::minimize_scalar(&mut objective, start.0, radius, opts.tol_inner * radius.max(1.0));
            if start.1 <= value {
                (alpha, value) = start;
            }
            residual.copy_from_slice(f);
            if first || value < best.value {
                best = ApproxResult {
                    value,
                    support: a,
                    coeffs: vec![alpha],
                    converged: true,
                };
                first = false;
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greedy::greedy_sum;
    use proptest::prelude::*;

    fn set(ix: &[usize], dim: usize) -> SupportSet {
        SupportSet::from_indices(ix, dim).unwrap()
    }

    #[test]
    fn sigma_examples() {
        let o = OracleOptions::default();
        let l2 = Space::real("lp:2", Some(3)).unwrap();
        let r = sigma_m(&l2, &[3.0, 1.0, 0.0], 1, &o).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.support, set(&[1], 3));
        assert_eq!(r.coeffs, vec![3.0]);

        let r = sigma_m(&l2, &[3.0, 1.0, 2.0], 0, &o).unwrap();
        assert_eq!(r.value, 14f64.sqrt());

        let w = Space::real("wl1:1,2", None).unwrap();
        let r = sigma_m(&w, &[1.0, 1.0], 1, &o).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.support, set(&[2], 2));
        let r = sigma_m(&w, &[1.0, 1.0], 1, &OracleOptions::generic()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
        assert_eq!(r.support, set(&[2], 2));
    }

    #[test]
    fn sigma_degenerate_is_exact_zero() {
        let s = Space::real("plugin:sup_plus_half_sum", Some(4)).unwrap();
        let r = sigma_m(&s, &[0.0, 2.0, 0.0, -1.0], 2, &OracleOptions::default()).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.support, set(&[2, 4], 4));
    }

    #[test]
    fn sigma_argument_errors() {
        let l2 = Space::real("lp:2", Some(3)).unwrap();
        assert!(sigma_m(&l2, &[1.0, 2.0], 1, &OracleOptions::default()).is_err());
        assert!(sigma_m(&l2, &[1.0, 2.0, 3.0], 4, &OracleOptions::default()).is_err());
        let lor = Space::real("lorentz:2,1", None).unwrap();
        let fp = OracleOptions {
            method: Method::FastPath,
            ..OracleOptions::default()
        };
        assert_eq!(sigma_m(&lor, &[1.0, 3.0], 1, &fp), Err(Error::FastPathUnavailable));
    }

    #[test]
    fn d_m_examples() {
        let o = OracleOptions::default();
        let l2 = Space::real("lp:2", Some(3)).unwrap();
        let r = d_m(&l2, &[3.0, 1.0, 0.0], 1, &o).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.support, set(&[1], 3));
        assert_eq!(r.coeffs, vec![3.0]);

        let r = d_m(&l2, &[1.0, 0.0, 1.0], 2, &o).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.coeffs, vec![1.0]);

        let r = d_m(&l2, &[3.0, 1.0, 2.0], 0, &o).unwrap();
        assert_eq!(r.value, 14f64.sqrt());
    }

    #[test]
    fn d_2_allows_single_sets() {
        let l2 = Space::real("lp:2", Some(3)).unwrap();
        let o = OracleOptions::default();
        let r = d_m(&l2, &[3.0, 1.0, 0.0], 2, &o).unwrap();
        // A = {1} with alpha = 3 leaves (0, 1, 0)
        assert_eq!(r.value, 1.0);
        assert_eq!(r.support, set(&[1], 3));
        // among two-element sets the best is {1, 2} with alpha = 2
        let mut best_pair = f64::INFINITY;
        for a in subsets_of_size(3, 2) {
            let obj = |alpha: f64| {
                let v: Vec<f64> = [3.0, 1.0, 0.0]
                    .iter()
                    .enumerate()
                    .map(|(j, x)| if a.contains0(j) { x - alpha } else { *x })
                    .collect();
                l2.norm_of(&v)
            };
            let (_, v) = minimize::golden_section(&mut |t| obj(t), -10.0, 10.0, 0.0, 1e-12);
            best_pair = best_pair.min(v);
        }
        assert!((best_pair - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn minimize_coeffs_examples() {
        let o = OracleOptions::default();
        let l3 = Space::real("lp:3", Some(3)).unwrap();
        let r = minimize_coeffs(&l3, &[3.0, 1.0, 0.0], set(&[1], 3), &o).unwrap();
        assert_eq!((r.coeffs.clone(), r.value), (vec![3.0], 1.0));

        let linf = Space::real("lp:inf", Some(2)).unwrap();
        let r = minimize_coeffs(&linf, &[2.0, 1.0], set(&[1], 2), &OracleOptions::generic()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!((1.0..=3.0).contains(&r.coeffs[0]));

        let lor = Space::real("lorentz:2,1", None).unwrap();
        let r = minimize_coeffs(&lor, &[1.0, 3.0], set(&[2], 2), &o).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9);
        assert!((r.coeffs[0] - 3.0).abs() < 1e-6);
        // dense scan of the same one-dimensional problem
        let scan = (0..=6000)
            .map(|i| {
                let a = -1.0 + i as f64 * 1e-3;
                lor.norm_of(&[1.0, 3.0 - a])
            })
            .fold(f64::INFINITY, f64::min);
        assert!((scan - r.value).abs() < 1e-9);
    }

    #[test]
    fn generic_matches_dense_scan_dim2() {
        // two free coordinates on a non-lattice norm, scanned on a grid
        let s = Space::real("plugin:sup_plus_half_sum", Some(3)).unwrap();
        let f = [1.0, -0.5, 0.75];
        let b = set(&[1, 2], 3);
        let r = minimize_coeffs(&s, &f, b, &OracleOptions::generic()).unwrap();
        let mut scan = f64::INFINITY;
        for i in 0..=400 {
            for k in 0..=400 {
                let a0 = -2.0 + i as f64 * 0.01;
                let a1 = -2.0 + k as f64 * 0.01;
                scan = scan.min(s.norm_of(&[f[0] - a0, f[1] - a1, f[2]]));
            }
        }
        assert!(r.value <= scan + 1e-9, "{} vs scan {}", r.value, scan);
        // residual keeps f_3 = 0.75, so the norm is at least 0.75
        assert!(r.value >= 0.75 - 1e-12);
    }

    #[test]
    fn reconstruction_replays_value() {
        let s = Space::real("lorentz:3,2,1,1", None).unwrap();
        let f = [0.3, -1.0, 0.8, 0.1];
        let r = sigma_m(&s, &f, 2, &OracleOptions::default()).unwrap();
        let rec = r.reconstruction(4);
        let res: Vec<f64> = f.iter().zip(rec.iter()).map(|(a, b)| a - b).collect();
        assert!((s.norm_of(&res) - r.value).abs() < 1e-9);
        let d = d_m(&s, &f, 2, &OracleOptions::default()).unwrap();
        let rec = d.reconstruction(4);
        let res: Vec<f64> = f.iter().zip(rec.iter()).map(|(a, b)| a - b).collect();
        assert!((s.norm_of(&res) - d.value).abs() < 1e-9);
    }

    #[test]
    fn parallel_sigma_matches_sequential() {
        let s = Space::real("plugin:summing", Some(6)).unwrap();
        let f = [0.5, -1.0, 0.25, 1.0, -0.5, 0.75];
        let o = OracleOptions::default();
        let seq = sigma_m(&s, &f, 3, &o).unwrap();
        let par = sigma_m_exec(&s, &f, 3, &o, &Exec::with_threads(4)).unwrap();
        assert_eq!(seq, par);
    }

    fn vec_in(dim: usize) -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(
            prop_oneof![Just(0.0), Just(0.5), Just(-1.0), -2.0..2.0f64],
            dim,
        )
    }

    fn spaces() -> Vec<Space> {
        vec![
            Space::real("lp:1", Some(5)).unwrap(),
            Space::real("lp:3", Some(5)).unwrap(),
            Space::real("wl1:1,2,0.5,1,3", None).unwrap(),
            Space::real("lorentz:2,1.5,1,1,0.5", None).unwrap(),
            Space::real("plugin:sup_plus_half_sum", Some(5)).unwrap(),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn sigma_is_monotone(f in vec_in(5)) {
            let o = OracleOptions::default();
            for s in spaces() {
                let mut prev = f64::INFINITY;
                for m in 0..=5 {
                    let v = sigma_m(&s, &f, m, &o).unwrap().value;
                    prop_assert!(v <= prev + 1e-9, "{} m={}", s.descriptor(), m);
                    prev = v;
                }
            }
        }

        #[test]
        fn d_dominates_sigma(f in vec_in(5), m in 0usize..=5) {
            let o = OracleOptions::default();
            for s in spaces() {
                let sig = sigma_m(&s, &f, m, &o).unwrap().value;
                let d = d_m(&s, &f, m, &o).unwrap().value;
                prop_assert!(d >= sig - 1e-9, "{}: D={} sigma={}", s.descriptor(), d, sig);
            }
        }

        #[test]
        fn greedy_residual_dominates_sigma(f in vec_in(5), m in 0usize..=5) {
            let o = OracleOptions::default();
            for s in spaces() {
                let g = greedy_sum(&f, m);
                let res: Vec<f64> = f.iter().zip(g.iter()).map(|(a, b)| a - b).collect();
                let sig = sigma_m(&s, &f, m, &o).unwrap().value;
                prop_assert!(s.norm_of(&res) >= sig - 1e-12);
            }
        }

        #[test]
        fn generic_agrees_with_closed_form(f in vec_in(5), m in 1usize..=3) {
            for s in [&spaces()[0], &spaces()[1], &spaces()[2]] {
                let fast = sigma_m(s, &f, m, &OracleOptions::default()).unwrap().value;
                let generic = sigma_m(s, &f, m, &OracleOptions::generic()).unwrap().value;
                prop_assert!((fast - generic).abs() < 1e-6, "{}: {} vs {}", s.descriptor(), fast, generic);
            }
        }
    }
}
