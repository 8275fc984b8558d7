//! Finite-dimensional sequence spaces with the canonical basis.
//!
//! A point is stored as its coefficient array `(x_n^*(f))_n`, so the basis
//! vectors are the unit coordinate vectors and the biorthogonal functionals
//! are the coordinate maps.

mod norm;
mod parse;

use std::ops::{Deref, DerefMut};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use norm::{plugin, CustomNorm, NormModel, PExp, Summing, SupPlusHalfSum, PLUGIN_NAMES};
pub use parse::parse_norm;

use crate::error::{Error, Result};
use crate::greedy::SupportSet;
use crate::oracle::minimize::{coordinate_descent, CdOptions};
use crate::scalar::{Scalar, ScalarMode};

/// Hard cap on the dimension. Every oracle enumerates subsets of indices.
pub const MAX_DIM: usize = 12;

const AXIOM_SAMPLES: usize = 1000;
const AXIOM_TOL: f64 = 1e-12;
const AXIOM_SEED: u64 = 0x5eed_a110;

/// Coefficient array of a point of the space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoeffVec<S>(pub Vec<S>);

impl<S: Scalar> CoeffVec<S> {
    pub fn zeros(dim: usize) -> Self {
        CoeffVec(vec![S::zero(); dim])
    }

    pub fn from_real(values: &[f64]) -> Self {
        CoeffVec(values.iter().map(|&x| S::from_real(x)).collect())
    }

    pub fn support(&self) -> SupportSet {
        SupportSet::from_indices0(
            self.0
                .iter()
                .enumerate()
                .filter(|(_, x)| **x != S::zero())
                .map(|(i, _)| i),
        )
    }

    /// Largest coefficient modulus, zero for the zero vector.
    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.modulus()))
    }

    pub fn scaled(&self, s: f64) -> Self {
        CoeffVec(self.0.iter().map(|x| x.scale(s)).collect())
    }

    pub fn add(&self, other: &[S]) -> Self {
        CoeffVec(self.0.iter().zip(other).map(|(a, b)| *a + *b).collect())
    }

    pub fn sub(&self, other: &[S]) -> Self {
        CoeffVec(self.0.iter().zip(other).map(|(a, b)| *a - *b).collect())
    }
}

impl<S> Deref for CoeffVec<S> {
    type Target = [S];
    fn deref(&self) -> &[S] {
        &self.0
    }
}

impl<S> DerefMut for CoeffVec<S> {
    fn deref_mut(&mut self) -> &mut [S] {
        &mut self.0
    }
}

impl<S> From<Vec<S>> for CoeffVec<S> {
    fn from(v: Vec<S>) -> Self {
        CoeffVec(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeminormAudit {
    pub c1: f64,
    pub c2: f64,
}

/// A normed space `(F^d, ||.||)` with its canonical basis.
#[derive(Debug, Clone)]
pub struct Space {
    dim: usize,
    norm: NormModel,
    mode: ScalarMode,
    unit: Vec<f64>,
    dual: Vec<f64>,
}

impl Space {
    pub fn new(dim: usize, norm: NormModel, mode: ScalarMode) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::BadDimension(dim));
        }
        if let Some(len) = norm.weight_len() {
            if len != dim {
                return Err(Error::Descriptor(format!(
                    "{} has {len} weights but the space has dimension {dim}",
                    norm.descriptor()
                )));
            }
        }
        if let ScalarMode::Complex { k_roots } = mode {
            if k_roots < 2 {
                return Err(Error::Config(format!("complex mode needs k >= 2, got {k_roots}")));
            }
        }
        let mut space = Space {
            dim,
            norm,
            mode,
            unit: Vec::new(),
            dual: Vec::new(),
        };
        if matches!(space.norm, NormModel::Custom(_)) {
            space.check_axioms()?;
        }
        space.unit = (0..dim)
            .map(|n| match space.norm.closed_form_unit(n) {
                Some((u, _)) => u,
                None => space.norm.eval(&unit_vector::<f64>(dim, n)),
            })
            .collect();
        space.dual = (0..dim)
            .map(|n| match space.norm.closed_form_unit(n) {
                Some((_, d)) => d,
                None => space.numerical_dual(n),
            })
            .collect();
        if space.unit.iter().chain(&space.dual).any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::NormAxiom("basis vectors must have finite positive norm".into()));
        }
        Ok(space)
    }

    /// Builds a space from a descriptor. Weighted families take their
    /// dimension from the weights when `dim` is `None`.
    pub fn parse(descriptor: &str, dim: Option<usize>, mode: ScalarMode) -> Result<Self> {
        let norm = parse_norm(descriptor)?;
        let dim = match (dim, norm.weight_len()) {
            (Some(d), _) => d,
            (None, Some(len)) => len,
            (None, None) => {
                return Err(Error::Config(format!("`{descriptor}` needs an explicit dimension")))
            }
        };
        Space::new(dim, norm, mode)
    }

    pub fn real(descriptor: &str, dim: Option<usize>) -> Result<Self> {
        Space::parse(descriptor, dim, ScalarMode::Real)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn norm(&self) -> &NormModel {
        &self.norm
    }

    pub fn mode(&self) -> ScalarMode {
        self.mode
    }

    pub fn descriptor(&self) -> String {
        self.norm.descriptor()
    }

    pub fn is_unconditional(&self) -> bool {
        self.norm.is_unconditional()
    }

    pub fn is_separable_fastpath(&self) -> bool {
        self.norm.is_separable_fastpath()
    }

    /// Checked norm evaluation.
    pub fn norm_eval<S: Scalar>(&self, v: &[S]) -> Result<f64> {
        self.check_vector(v)?;
        Ok(self.norm.eval(v))
    }

    /// Unchecked norm evaluation for internal hot loops.
    #[inline]
    pub fn norm_of<S: Scalar>(&self, v: &[S]) -> f64 {
        debug_assert_eq!(v.len(), self.dim);
        self.norm.eval(v)
    }

    pub fn check_vector<S: Scalar>(&self, v: &[S]) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        if let Some(index) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index: index + 1 });
        }
        Ok(())
    }

    fn check_index(&self, n: usize) -> Result<usize> {
        if n == 0 || n > self.dim {
            return Err(Error::IndexOutOfRange { index: n, dim: self.dim });
        }
        Ok(n - 1)
    }

    /// `||x_n||` for the 1-based index `n`.
    pub fn unit_norm(&self, n: usize) -> Result<f64> {
        Ok(self.unit[self.check_index(n)?])
    }

    /// `||x_n^*||` for the 1-based index `n`.
    pub fn dual_coord_norm(&self, n: usize) -> Result<f64> {
        Ok(self.dual[self.check_index(n)?])
    }

    /// `||x_j^*||` for the 0-based index `j`.
    #[inline]
    pub(crate) fn dual0(&self, j: usize) -> f64 {
        self.dual[j]
    }

    pub fn seminormalization_audit(&self) -> Result<SeminormAudit> {
        let (mut c1, mut c2) = (f64::INFINITY, 0.0f64);
        for (u, d) in self.unit.iter().zip(&self.dual) {
            c1 = c1.min(u.min(*d));
            c2 = c2.max(u.max(*d));
        }
        if !(c1 > 0.0 && c1 <= c2 && c2.is_finite()) {
            return Err(Error::NormAxiom(format!("basis is not semi-normalized: c1={c1}, c2={c2}")));
        }
        Ok(SeminormAudit { c1, c2 })
    }

    /// `||x_n^*||` by direct search, ignoring any closed form:
    /// `1 / min_a ||x_n + sum_{j != n} a_j x_j||`.
    pub fn numerical_dual(&self, n: usize) -> f64 {
        let dim = self.dim;
        let base = unit_vector::<f64>(dim, n);
        let free: Vec<usize> = (0..dim).filter(|&j| j != n).collect();
        if free.is_empty() {
            return 1.0 / self.norm.eval(&base);
        }
        let scale = self.norm.eval(&base);
        let radii: Vec<f64> = free
            .iter()
            .map(|&j| 2.0 * scale / self.norm.eval(&unit_vector::<f64>(dim, j)) + 1.0)
            .collect();
        let mut v = base.clone();
        let result = coordinate_descent::<f64>(
            &mut |a: &[f64]| {
                for (k, &j) in free.iter().enumerate() {
                    v[j] = a[k];
                }
                self.norm.eval(&v)
            },
            vec![0.0; free.len()],
            &radii,
            &CdOptions {
                tol: 1e-13,
                max_passes: 500,
                pairwise: !self.norm.is_unconditional(),
            },
        );
        1.0 / result.value
    }

    /// Samples the norm axioms on random vectors. Run when a custom norm is
    /// loaded; the built-ins are covered by tests.
    pub fn check_axioms(&self) -> Result<()> {
        match self.mode {
            ScalarMode::Real => check_norm_axioms::<f64>(&self.norm, self.dim, AXIOM_SAMPLES),
            ScalarMode::Complex { .. } => {
                check_norm_axioms::<num_complex::Complex64>(&self.norm, self.dim, AXIOM_SAMPLES)
            }
        }
    }
}

pub fn unit_vector<S: Scalar>(dim: usize, n: usize) -> Vec<S> {
    let mut v = vec![S::zero(); dim];
    v[n] = S::one();
    v
}

/// Nonnegativity, definiteness, homogeneity and the triangle inequality on
/// `samples` seeded random inputs.
pub fn check_norm_axioms<S: Scalar>(norm: &NormModel, dim: usize, samples: usize) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(AXIOM_SEED);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<S> { (0..dim).map(|_| S::gaussian(rng)).collect() };
    let zero = vec![S::zero(); dim];
    if norm.eval(&zero) != 0.0 {
        return Err(Error::NormAxiom("norm of the zero vector is not 0".into()));
    }
    for i in 0..samples {
        let u = draw(&mut rng);
        let v = draw(&mut rng);
        let lambda = S::gaussian(&mut rng);
        let nu = norm.eval(&u);
        let nv = norm.eval(&v);
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::NormAxiom(format!("sample {i}: norm {nu} of a nonzero vector")));
        }
        let lu: Vec<S> = u.iter().map(|x| lambda * *x).collect();
        let lhs = norm.eval(&lu);
        let rhs = lambda.modulus() * nu;
        if (lhs - rhs).abs() > AXIOM_TOL * rhs.max(1.0) {
            return Err(Error::NormAxiom(format!(
                "sample {i}: homogeneity fails ({lhs} vs {rhs})"
            )));
        }
        let sum: Vec<S> = u.iter().zip(&v).map(|(a, b)| *a + *b).collect();
        let ns = norm.eval(&sum);
        if ns > (nu + nv) * (1.0 + AXIOM_TOL) {
            return Err(Error::NormAxiom(format!(
                "sample {i}: triangle inequality fails ({ns} > {nu} + {nv})"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn wl1_12() -> Space {
        Space::real("wl1:1,2", None).unwrap()
    }

    #[test]
    fn norm_eval_examples() {
        let l2 = Space::real("lp:2", Some(3)).unwrap();
        assert_eq!(l2.norm_eval(&[3.0, 4.0, 0.0]).unwrap(), 5.0);
        assert_eq!(wl1_12().norm_eval(&[1.0, 1.0]).unwrap(), 3.0);
        let lor = Space::real("lorentz:2,1", None).unwrap();
        assert_eq!(lor.norm_eval(&[1.0, 3.0]).unwrap(), 7.0);
    }

    #[test]
    fn norm_eval_errors() {
        let l2 = Space::real("lp:2", Some(3)).unwrap();
        assert_eq!(
            l2.norm_eval(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { expected: 3, got: 2 })
        );
        assert_eq!(
            l2.norm_eval(&[1.0, f64::NAN, 0.0]),
            Err(Error::NonFinite { index: 2 })
        );
    }

    #[test]
    fn dual_norms() {
        assert_eq!(Space::real("lp:2", Some(3)).unwrap().dual_coord_norm(1).unwrap(), 1.0);
        assert_eq!(wl1_12().dual_coord_norm(2).unwrap(), 0.5);
        let lor = Space::real("lorentz:2,1", None).unwrap();
        assert_eq!(lor.dual_coord_norm(1).unwrap(), 0.5);
        assert!(wl1_12().dual_coord_norm(3).is_err());
        assert!(wl1_12().dual_coord_norm(0).is_err());
    }

    #[test]
    fn numerical_dual_matches_closed_forms() {
        for (d, dim) in [
            ("lp:1", Some(4)),
            ("lp:2", Some(4)),
            ("lp:4", Some(3)),
            ("lp:inf", Some(4)),
            ("wl1:1,2,0.5", None),
            ("wlp:2:1,4,9", None),
            ("wlp:inf:1,2,3", None),
            ("lorentz:2,1,0.5", None),
        ] {
            let s = Space::real(d, dim).unwrap();
            for n in 0..s.dim() {
                let closed = s.dual[n];
                let num = s.numerical_dual(n);
                assert!((closed - num).abs() < 1e-9, "{d} n={n}: {closed} vs {num}");
            }
        }
    }

    #[test]
    fn custom_dual_is_positive() {
        let s = Space::real("plugin:sup_plus_half_sum", Some(3)).unwrap();
        for n in 1..=3 {
            let d = s.dual_coord_norm(n).unwrap();
            assert!(d > 0.0 && d <= 1.0 + 1e-9, "{d}");
        }
        // ||x_1|| = 1.5 and x_1 - (x_2 + x_3)/2 has norm 1, so ||x_1^*|| >= 1.
        assert!(s.dual_coord_norm(1).unwrap() >= 1.0 - 1e-9);
    }

    #[test]
    fn audit_examples() {
        let a = Space::real("lp:3", Some(4)).unwrap().seminormalization_audit().unwrap();
        assert_eq!((a.c1, a.c2), (1.0, 1.0));
        let a = wl1_12().seminormalization_audit().unwrap();
        assert_eq!((a.c1, a.c2), (0.5, 2.0));
        let a = Space::real("lorentz:2,1", None).unwrap().seminormalization_audit().unwrap();
        assert_eq!((a.c1, a.c2), (0.5, 2.0));
    }

    #[test]
    fn dimension_rules() {
        assert!(Space::real("lp:2", None).is_err());
        assert!(Space::real("lp:2", Some(13)).is_err());
        assert!(Space::real("lp:2", Some(0)).is_err());
        assert!(Space::real("wl1:1,2", Some(3)).is_err());
        assert_eq!(Space::real("wl1:1,2,3", None).unwrap().dim(), 3);
    }

    #[test]
    fn builtins_satisfy_axioms() {
        for d in ["lp:1", "lp:2", "lp:4", "lp:inf", "lp:1.5"] {
            let norm = parse_norm(d).unwrap();
            check_norm_axioms::<f64>(&norm, 5, 1000).unwrap();
            check_norm_axioms::<Complex64>(&norm, 5, 1000).unwrap();
        }
        for d in ["wl1:1,2,0.5,3", "wlp:3:1,2,3,4", "lorentz:3,2,2,1", "plugin:summing"] {
            let norm = parse_norm(d).unwrap();
            check_norm_axioms::<f64>(&norm, 4, 1000).unwrap();
            check_norm_axioms::<Complex64>(&norm, 4, 1000).unwrap();
        }
    }

    #[derive(Debug)]
    struct NotANorm;
    impl CustomNorm for NotANorm {
        fn name(&self) -> &str {
            "squares"
        }
        fn eval_real(&self, v: &[f64]) -> f64 {
            v.iter().map(|x| x * x).sum()
        }
        fn eval_complex(&self, v: &[Complex64]) -> f64 {
            v.iter().map(|x| x.norm_sqr()).sum()
        }
    }

    #[test]
    fn sampler_rejects_non_norms() {
        let norm = NormModel::Custom(std::sync::Arc::new(NotANorm));
        let err = Space::new(3, norm, ScalarMode::Real).unwrap_err();
        assert!(matches!(err, Error::NormAxiom(_)), "{err:?}");
    }

    #[test]
    fn coeffvec_support_and_sup() {
        let f = CoeffVec::<f64>::from_real(&[0.0, -2.0, 1.0]);
        assert_eq!(f.support().indices(), vec![2, 3]);
        assert_eq!(f.sup_norm(), 2.0);
        assert_eq!(CoeffVec::<f64>::zeros(3).sup_norm(), 0.0);
    }
}
