use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::MAX_DIM;
use crate::scalar::Scalar;

/// A norm supplied by the user instead of one of the built-in families.
pub trait CustomNorm: Send + Sync {
    fn name(&self) -> &str;
    fn eval_real(&self, v: &[f64]) -> f64;
    fn eval_complex(&self, v: &[Complex64]) -> f64;
}

/// Exponent of an `l_p` type norm, with the common cases split out so the
/// hot loop avoids `powf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PExp {
    One,
    Two,
    Int(i32),
    Real(f64),
    Inf,
}

impl PExp {
    pub fn new(p: f64) -> Option<PExp> {
        if p.is_nan() || p < 1.0 {
            return None;
        }
        Some(if p.is_infinite() {
            PExp::Inf
        } else if p == 1.0 {
            PExp::One
        } else if p == 2.0 {
            PExp::Two
        } else if p.fract() == 0.0 && p <= 64.0 {
            PExp::Int(p as i32)
        } else {
            PExp::Real(p)
        })
    }

    pub fn value(self) -> f64 {
        match self {
            PExp::One => 1.0,
            PExp::Two => 2.0,
            PExp::Int(k) => f64::from(k),
            PExp::Real(p) => p,
            PExp::Inf => f64::INFINITY,
        }
    }

    #[inline]
    fn pow(self, x: f64) -> f64 {
        match self {
            PExp::One => x,
            PExp::Two => x * x,
            PExp::Int(k) => x.powi(k),
            PExp::Real(p) => x.powf(p),
            PExp::Inf => unreachable!("max norm has no power sum"),
        }
    }

    #[inline]
    fn root(self, s: f64) -> f64 {
        match self {
            PExp::One => s,
            PExp::Two => s.sqrt(),
            PExp::Int(k) => s.powf(1.0 / f64::from(k)),
            PExp::Real(p) => s.powf(1.0 / p),
            PExp::Inf => unreachable!("max norm has no power sum"),
        }
    }
}

impl fmt::Display for PExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PExp::Inf => write!(f, "inf"),
            p => write!(f, "{}", p.value()),
        }
    }
}

#[derive(Clone)]
pub enum NormModel {
    Lp(PExp),
    /// `(sum w_n |v_n|^p)^(1/p)`, or `max w_n |v_n|` for `p = inf`.
    WeightedLp { p: PExp, weights: Vec<f64> },
    /// `sum_k w_k v*_k` with `v*` the decreasing rearrangement of `|v|`.
    Lorentz { weights: Vec<f64> },
    Custom(Arc<dyn CustomNorm>),
}

impl fmt::Debug for NormModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NormModel({})", self.descriptor())
    }
}

fn join_weights(w: &[f64]) -> String {
    w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl NormModel {
    /// Descriptor string in the same grammar the parser accepts.
    pub fn descriptor(&self) -> String {
        match self {
            NormModel::Lp(p) => format!("lp:{p}"),
            NormModel::WeightedLp { p: PExp::One, weights } => {
                format!("wl1:{}", join_weights(weights))
            }
            NormModel::WeightedLp { p, weights } => format!("wlp:{p}:{}", join_weights(weights)),
            NormModel::Lorentz { weights } => format!("lorentz:{}", join_weights(weights)),
            NormModel::Custom(c) => format!("plugin:{}", c.name()),
        }
    }

    /// Whether the norm is known to be 1-unconditional (a lattice norm).
    pub fn is_unconditional(&self) -> bool {
        !matches!(self, NormModel::Custom(_))
    }

    /// Whether `a_j = f_j` is the closed-form inner minimizer.
    pub fn is_separable_fastpath(&self) -> bool {
        matches!(self, NormModel::Lp(_) | NormModel::WeightedLp { .. })
    }

    /// Number of coordinates fixed by the model, if any.
    pub fn weight_len(&self) -> Option<usize> {
        match self {
            NormModel::WeightedLp { weights, .. } | NormModel::Lorentz { weights } => {
                Some(weights.len())
            }
            _ => None,
        }
    }

    /// Closed-form `(||x_n||, ||x_n^*||)` for the built-in families.
    pub(crate) fn closed_form_unit(&self, n: usize) -> Option<(f64, f64)> {
        match self {
            NormModel::Lp(_) => Some((1.0, 1.0)),
            NormModel::WeightedLp { p, weights } => {
                let w = weights[n];
                let u = match p {
                    PExp::Inf => w,
                    p => w.powf(1.0 / p.value()),
                };
                Some((u, 1.0 / u))
            }
            NormModel::Lorentz { weights } => Some((weights[0], 1.0 / weights[0])),
            NormModel::Custom(_) => None,
        }
    }

    #[inline]
    pub fn eval<S: Scalar>(&self, v: &[S]) -> f64 {
        match self {
            NormModel::Lp(PExp::Inf) => v.iter().fold(0.0, |m, x| m.max(x.modulus())),
            NormModel::Lp(p) => p.root(v.iter().map(|x| p.pow(x.modulus())).sum()),
            NormModel::WeightedLp { p: PExp::Inf, weights } => v
                .iter()
                .zip(weights)
                .fold(0.0, |m, (x, w)| m.max(w * x.modulus())),
            NormModel::WeightedLp { p, weights } => p.root(
                v.iter()
                    .zip(weights)
                    .map(|(x, w)| w * p.pow(x.modulus()))
                    .sum(),
            ),
            NormModel::Lorentz { weights } => {
                let mut buf = [0.0f64; MAX_DIM];
                let n = v.len().min(MAX_DIM);
                for (b, x) in buf.iter_mut().zip(v) {
                    *b = x.modulus();
                }
                let buf = &mut buf[..n];
                buf.sort_unstable_by(|a, b| b.total_cmp(a));
                buf.iter().zip(weights).map(|(x, w)| w * x).sum()
            }
            NormModel::Custom(c) => S::eval_custom(c.as_ref(), v),
        }
    }
}

/// `||v||_inf + |sum v_n| / 2`. Not 1-suppression unconditional.
#[derive(Debug)]
pub struct SupPlusHalfSum;

impl CustomNorm for SupPlusHalfSum {
    fn name(&self) -> &str {
        "sup_plus_half_sum"
    }
    fn eval_real(&self, v: &[f64]) -> f64 {
        let sup = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        sup + v.iter().sum::<f64>().abs() / 2.0
    }
    fn eval_complex(&self, v: &[Complex64]) -> f64 {
        let sup = v.iter().fold(0.0f64, |m, x| m.max(x.norm()));
        sup + v.iter().sum::<Complex64>().norm() / 2.0
    }
}

/// Norm of the summing basis: the largest partial sum in modulus.
#[derive(Debug)]
pub struct Summing;

impl CustomNorm for Summing {
    fn name(&self) -> &str {
        "summing"
    }
    fn eval_real(&self, v: &[f64]) -> f64 {
        let mut s = 0.0f64;
        let mut best = 0.0f64;
        for x in v {
            s += x;
            best = best.max(s.abs());
        }
        best
    }
    fn eval_complex(&self, v: &[Complex64]) -> f64 {
        let mut s = Complex64::new(0.0, 0.0);
        let mut best = 0.0f64;
        for x in v {
            s += x;
            best = best.max(s.norm());
        }
        best
    }
}

pub fn plugin(name: &str) -> Option<Arc<dyn CustomNorm>> {
    match name {
        "sup_plus_half_sum" => Some(Arc::new(SupPlusHalfSum)),
        "summing" => Some(Arc::new(Summing)),
        _ => None,
    }
}

pub const PLUGIN_NAMES: [&str; 2] = ["sup_plus_half_sum", "summing"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lp_values() {
        assert_eq!(NormModel::Lp(PExp::Two).eval(&[3.0, 4.0, 0.0]), 5.0);
        assert_eq!(NormModel::Lp(PExp::One).eval(&[3.0, -4.0]), 7.0);
        assert_eq!(NormModel::Lp(PExp::Inf).eval(&[3.0, -4.0]), 4.0);
        let l4 = NormModel::Lp(PExp::new(4.0).unwrap()).eval(&[1.0, 1.0]);
        assert!((l4 - 2f64.powf(0.25)).abs() < 1e-15);
    }

    #[test]
    fn weighted_and_lorentz() {
        let w = NormModel::WeightedLp {
            p: PExp::One,
            weights: vec![1.0, 2.0],
        };
        assert_eq!(w.eval(&[1.0, 1.0]), 3.0);
        let l = NormModel::Lorentz {
            weights: vec![2.0, 1.0],
        };
        assert_eq!(l.eval(&[1.0, 3.0]), 7.0);
        assert_eq!(l.eval(&[-3.0, 1.0]), 7.0);
    }

    #[test]
    fn plugins() {
        let n = plugin("sup_plus_half_sum").unwrap();
        assert_eq!(n.eval_real(&[1.0, -1.0]), 1.0);
        assert_eq!(n.eval_real(&[1.0, 0.0]), 1.5);
        let s = plugin("summing").unwrap();
        assert_eq!(s.eval_real(&[1.0, -1.0, 2.0]), 2.0);
        assert!(plugin("nope").is_none());
    }

    #[test]
    fn exponent_classes() {
        assert_eq!(PExp::new(1.0), Some(PExp::One));
        assert_eq!(PExp::new(4.0), Some(PExp::Int(4)));
        assert_eq!(PExp::new(1.5), Some(PExp::Real(1.5)));
        assert_eq!(PExp::new(f64::INFINITY), Some(PExp::Inf));
        assert_eq!(PExp::new(0.5), None);
    }
}
