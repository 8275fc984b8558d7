use serde::{Deserialize, Serialize};

use super::ConstantKind;
use crate::greedy::{greedy_sum, indicator, project, suppress, SignVec, SupportSet};
use crate::scalar::{Scalar, UNIT_TOL};
use crate::space::{CoeffVec, Space};

/// Recorded best `|B| <= m` approximant of a greedy witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Approximant<S> {
    pub support: SupportSet,
    pub coeffs: Vec<S>,
}

/// A concrete instance realizing a ratio. Indices `n` and `k` are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness<S> {
    /// `||f - G_m f|| / ||f - sum_B a_j x_j||`.
    Greedy {
        f: CoeffVec<S>,
        m: usize,
        approx: Approximant<S>,
    },
    /// `||f - G_m f|| / ||f||`.
    QuasiGreedy { f: CoeffVec<S>, m: usize },
    /// `||f - P_A f|| / ||f||`.
    Suppression { f: CoeffVec<S>, set: SupportSet },
    /// `||1_{eps A}|| / ||1_{eta B}||`.
    Democracy {
        a: SupportSet,
        eps: SignVec<S>,
        b: SupportSet,
        eta: SignVec<S>,
    },
    /// `||f + 1_{eps A}|| / ||f + 1_{eta B}||`.
    Slc {
        f: CoeffVec<S>,
        a: SupportSet,
        eps: SignVec<S>,
        b: SupportSet,
        eta: SignVec<S>,
    },
    /// `||f + 1_{eps A}|| / ||f + y||`.
    QStar {
        f: CoeffVec<S>,
        y: CoeffVec<S>,
        a: SupportSet,
        eps: SignVec<S>,
    },
    /// `||f + eps_n x_n|| / ||f + eta_k x_k + y||`.
    QStarSingleton {
        f: CoeffVec<S>,
        y: CoeffVec<S>,
        n: usize,
        eps_n: S,
        k: usize,
        eta_k: S,
    },
    /// `||P_B f + t 1_{eps A}|| / ||f||` with `eps` the phases of `f` on `A`.
    Cor1 {
        f: CoeffVec<S>,
        b: SupportSet,
        a: SupportSet,
        t: f64,
        eps: SignVec<S>,
    },
    /// `||f|| / ||f - P_{n} f + t eta x_k||`.
    CorSym {
        f: CoeffVec<S>,
        n: usize,
        k: usize,
        t: f64,
        eta: S,
    },
}

fn fail(msg: impl Into<String>) -> Result<(), String> {
    Err(msg.into())
}

fn check_len<S>(v: &[S], dim: usize, what: &str) -> Result<(), String> {
    if v.len() != dim {
        return fail(format!("{what} has length {} instead of {dim}", v.len()));
    }
    Ok(())
}

fn check_signs<S: Scalar>(set: SupportSet, signs: &SignVec<S>, what: &str) -> Result<(), String> {
    if signs.set != set {
        return fail(format!("{what} is not defined exactly on its set"));
    }
    signs.validate().map_err(|_| format!("{what} has an entry of modulus != 1"))
}

fn check_set(set: SupportSet, dim: usize, what: &str) -> Result<(), String> {
    if !set.is_subset(SupportSet::full(dim)) {
        return fail(format!("{what} has indices beyond the dimension"));
    }
    Ok(())
}

fn check_index(i: usize, dim: usize, what: &str) -> Result<usize, String> {
    if i == 0 || i > dim {
        return Err(format!("{what} = {i} outside 1..={dim}"));
    }
    Ok(i - 1)
}

/// Indices where `y` has modulus exactly one (to `UNIT_TOL` for complex).
pub fn unit_set<S: Scalar>(y: &[S]) -> SupportSet {
    SupportSet::from_indices0(
        y.iter()
            .enumerate()
            .filter(|(_, v)| **v != S::zero() && v.is_unit())
            .map(|(j, _)| j),
    )
}

fn finite<S: Scalar>(v: &[S]) -> bool {
    v.iter().all(|x| x.is_finite())
}

impl<S: Scalar> Witness<S> {
    /// Kind of constant whose definition this instance belongs to.
    pub fn kind(&self) -> Option<ConstantKind> {
        Some(match self {
            Witness::Greedy { m: 1, .. } => ConstantKind::CgM1,
            Witness::Greedy { .. } => ConstantKind::Cg,
            Witness::QuasiGreedy { .. } => ConstantKind::Cqg,
            Witness::Suppression { set, .. } if set.len() == 1 => ConstantKind::KsSingle,
            Witness::Suppression { .. } => ConstantKind::Ks,
            Witness::Democracy { eps, eta, .. }
                if eps.values.iter().chain(&eta.values).all(|s| *s == S::one()) =>
            {
                ConstantKind::DeltaD
            }
            Witness::Democracy { .. } => ConstantKind::DeltaS,
            Witness::Slc { .. } => ConstantKind::DeltaSlc,
            Witness::QStar { .. } => ConstantKind::QStar,
            Witness::QStarSingleton { .. } => ConstantKind::QStarSingleton,
            Witness::Cor1 { .. } | Witness::CorSym { .. } => return None,
        })
    }

    /// Checks every precondition of the instance's definition.
    pub fn check_admissible(&self, space: &Space) -> Result<(), String> {
        let d = space.dim();
        match self {
            Witness::Greedy { f, m, approx } => {
                check_len(f, d, "f")?;
                if !finite(f) || !finite(&approx.coeffs) {
                    return fail("non-finite coefficient");
                }
                if *m == 0 || *m > d {
                    return fail(format!("m = {m} outside 1..={d}"));
                }
                if f.support().len() <= *m {
                    return fail("|supp f| <= m makes sigma_m vanish");
                }
                check_set(approx.support, d, "approximant support")?;
                if approx.support.len() > *m || approx.coeffs.len() != approx.support.len() {
                    return fail("approximant has more than m terms");
                }
            }
            Witness::QuasiGreedy { f, m } => {
                check_len(f, d, "f")?;
                if !finite(f) || f.sup_norm() == 0.0 {
                    return fail("f must be finite and nonzero");
                }
                if *m > d {
                    return fail(format!("m = {m} exceeds {d}"));
                }
            }
            Witness::Suppression { f, set } => {
                check_len(f, d, "f")?;
                check_set(*set, d, "A")?;
                if !finite(f) || f.sup_norm() == 0.0 {
                    return fail("f must be finite and nonzero");
                }
            }
            Witness::Democracy { a, eps, b, eta } => {
                check_set(*a, d, "A")?;
                check_set(*b, d, "B")?;
                check_signs(*a, eps, "eps")?;
                check_signs(*b, eta, "eta")?;
                if a.len() > b.len() || b.is_empty() {
                    return fail("need |A| <= |B| and B nonempty");
                }
            }
            Witness::Slc { f, a, eps, b, eta } => {
                check_len(f, d, "f")?;
                check_set(*a, d, "A")?;
                check_set(*b, d, "B")?;
                check_signs(*a, eps, "eps")?;
                check_signs(*b, eta, "eta")?;
                if !finite(f) || f.sup_norm() > 1.0 {
                    return fail("need ||f||_inf <= 1");
                }
                if a.len() > b.len() {
                    return fail("need |A| <= |B|");
                }
                if !a.is_disjoint(*b) {
                    return fail("A and B intersect");
                }
                if !f.support().is_disjoint(a.union(*b)) {
                    return fail("supp f meets A or B");
                }
            }
            Witness::QStar { f, y, a, eps } => {
                check_len(f, d, "f")?;
                check_len(y, d, "y")?;
                check_set(*a, d, "A")?;
                check_signs(*a, eps, "eps")?;
                if !finite(f) || !finite(y) || f.sup_norm() > 1.0 {
                    return fail("need finite f with ||f||_inf <= 1");
                }
                let b = unit_set(y);
                if a.len() > b.len() {
                    return fail("need |A| <= |B| for B the unit set of y");
                }
                if !f.support().is_disjoint(y.support()) {
                    return fail("supp f meets supp y");
                }
                if !f.add(y).support().is_disjoint(*a) {
                    return fail("supp(f + y) meets A");
                }
                // coefficients of y off B must stay clear of modulus one
                for (j, v) in y.iter().enumerate() {
                    if !b.contains0(j) && *v != S::zero() && (v.modulus() - 1.0).abs() <= 1e3 * UNIT_TOL {
                        return fail("y has an ambiguous coefficient of modulus ~1");
                    }
                }
            }
            Witness::QStarSingleton { f, y, n, eps_n, k, eta_k } => {
                check_len(f, d, "f")?;
                check_len(y, d, "y")?;
                let n0 = check_index(*n, d, "n")?;
                let k0 = check_index(*k, d, "k")?;
                if n0 == k0 {
                    return fail("n and k must differ");
                }
                if !finite(f) || !finite(y) || f.sup_norm() > 1.0 {
                    return fail("need finite f with ||f||_inf <= 1");
                }
                if !eps_n.is_unit() || !eta_k.is_unit() {
                    return fail("signs must have modulus 1");
                }
                if !f.support().is_disjoint(y.support()) {
                    return fail("supp f meets supp y");
                }
                let s = f.add(y).support();
                if s.contains0(n0) || s.contains0(k0) {
                    return fail("supp(f + y) meets {n, k}");
                }
            }
            Witness::Cor1 { f, b, a, t, eps } => {
                check_len(f, d, "f")?;
                check_set(*b, d, "B")?;
                check_set(*a, d, "A")?;
                check_signs(*a, eps, "eps")?;
                let supp = f.support();
                if !a.is_subset(supp) || !b.is_subset(supp.minus(*a)) {
                    return fail("need A in supp f and B in supp f minus A");
                }
                let min_a = a.iter0().map(|j| f[j].modulus()).fold(f64::INFINITY, f64::min);
                if !(*t >= 0.0 && *t <= min_a) {
                    return fail("need 0 <= t <= min over A of |f_n|");
                }
                for (j, e) in a.iter0().zip(&eps.values) {
                    if (*e - f[j].phase()).modulus() > UNIT_TOL {
                        return fail("eps must be the phases of f on A");
                    }
                }
            }
            Witness::CorSym { f, n, k, t, eta } => {
                check_len(f, d, "f")?;
                let n0 = check_index(*n, d, "n")?;
                let k0 = check_index(*k, d, "k")?;
                let supp = f.support();
                if !supp.contains0(n0) || supp.contains0(k0) {
                    return fail("need n in supp f and k outside it");
                }
                if !(*t >= f.sup_norm()) {
                    return fail("need t >= ||f||_inf");
                }
                if !eta.is_unit() {
                    return fail("eta must have modulus 1");
                }
            }
        }
        Ok(())
    }

    /// Numerator and denominator norms, evaluated from scratch.
    pub fn norms(&self, space: &Space) -> (f64, f64) {
        let d = space.dim();
        let nrm = |v: &[S]| space.norm_of(v);
        match self {
            Witness::Greedy { f, m, approx } => {
                let g = greedy_sum(f, *m);
                let mut r = f.0.clone();
                for (j, a) in approx.support.iter0().zip(&approx.coeffs) {
                    r[j] = f[j] - *a;
                }
                (nrm(&f.sub(&g)), nrm(&r))
            }
            Witness::QuasiGreedy { f, m } => (nrm(&f.sub(&greedy_sum(f, *m))), nrm(f)),
            Witness::Suppression { f, set } => (nrm(&suppress(f, *set)), nrm(f)),
            Witness::Democracy { a, eps, b, eta } => {
                let ia = indicator(d, *a, Some(eps)).expect("checked signs");
                let ib = indicator(d, *b, Some(eta)).expect("checked signs");
                (nrm(&ia), nrm(&ib))
            }
            Witness::Slc { f, a, eps, b, eta } => {
                let ia = indicator(d, *a, Some(eps)).expect("checked signs");
                let ib = indicator(d, *b, Some(eta)).expect("checked signs");
                (nrm(&f.add(&ia)), nrm(&f.add(&ib)))
            }
            Witness::QStar { f, y, a, eps } => {
                let ia = indicator(d, *a, Some(eps)).expect("checked signs");
                (nrm(&f.add(&ia)), nrm(&f.add(y)))
            }
            Witness::QStarSingleton { f, y, n, eps_n, k, eta_k } => {
                let mut num = f.0.clone();
                num[n - 1] = num[n - 1] + *eps_n;
                let mut den = f.add(y).0;
                den[k - 1] = den[k - 1] + *eta_k;
                (nrm(&num), nrm(&den))
            }
            Witness::Cor1 { f, b, a, t, eps } => {
                let mut v = project(f, *b).0;
                for (j, e) in a.iter0().zip(&eps.values) {
                    v[j] = v[j] + e.scale(*t);
                }
                (nrm(&v), nrm(f))
            }
            Witness::CorSym { f, n, k, t, eta } => {
                let mut v = f.0.clone();
                v[n - 1] = S::zero();
                v[k - 1] = v[k - 1] + eta.scale(*t);
                (nrm(f), nrm(&v))
            }
        }
    }

    /// A singleton instance read as a full (Q*) instance: `A = {n}` and
    /// `y' = y + eta_k x_k`. The ratio is unchanged.
    pub fn singleton_as_q_star(&self) -> Option<Witness<S>> {
        let Witness::QStarSingleton { f, y, n, eps_n, k, eta_k } = self else {
            return None;
        };
        let mut y2 = y.clone();
        y2[k - 1] = y2[k - 1] + *eta_k;
        let a = SupportSet::singleton0(n - 1);
        Some(Witness::QStar {
            f: f.clone(),
            y: y2,
            a,
            eps: SignVec { set: a, values: vec![*eps_n] },
        })
    }

    /// The ratio of the instance; `None` when the denominator vanishes.
    pub fn ratio(&self, space: &Space) -> Option<f64> {
        let (num, den) = self.norms(space);
        (den > 0.0).then(|| num / den)
    }
}
