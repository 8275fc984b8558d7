//! Constructive maps turning a violating instance of one property into a
//! violating instance of another.
//!
//! Reductions split a ratio into a product of links, each an instance of a
//! simpler kind (two-point symmetry, single suppression, or `m = 1` greedy);
//! the largest link exceeds one whenever the product does.

use serde::{Deserialize, Serialize};

use crate::constants::{unit_set, Approximant, Witness};
use crate::greedy::{greedy_ordering, greedy_set, project, suppress, SignVec, SupportSet};
use crate::oracle::{sigma_m, OracleOptions};
use crate::scalar::Scalar;
use crate::space::{CoeffVec, Space};

/// Smallest `gamma` tried by the automatic schedule.
pub const GAMMA_FLOOR: f64 = 1e-6;
/// Relative slack allowed in convexity steps.
const CONVEXITY_SLACK: f64 = 1e-12;
/// Sign patterns enumerated in one convexity step at most.
const MAX_PATTERNS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gamma {
    /// `1, 1/2, 1/4, ...` until the ratio passes `1 + (r - 1) / 2`.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transport<S> {
    pub source_ratio: f64,
    pub witness: Witness<S>,
    pub ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub steps: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransportError {
    #[error("not a {0} instance")]
    WrongForm(&'static str),
    #[error("inadmissible source instance: {0}")]
    Inadmissible(String),
    #[error("gamma schedule exhausted; best transported ratio {best}")]
    GammaExhausted { best: f64 },
    #[error("no link of the reduction exceeds one (source ratio {ratio})")]
    NoLink { ratio: f64 },
    #[error("convexity step failed: {0}")]
    Convexity(String),
    #[error("{0}")]
    Infeasible(String),
}

type TResult<T> = std::result::Result<T, TransportError>;

fn ratio_of<S: Scalar>(space: &Space, w: &Witness<S>) -> f64 {
    w.ratio(space).unwrap_or(0.0)
}

fn admissible<S: Scalar>(space: &Space, w: &Witness<S>) -> TResult<()> {
    w.check_admissible(space).map_err(TransportError::Inadmissible)
}

fn sign_vec<S: Scalar>(set: SupportSet, f: impl Fn(usize) -> S) -> SignVec<S> {
    SignVec {
        set,
        values: set.iter0().map(f).collect(),
    }
}

/// `(f, n, eps, k, eta)` of a two-point symmetry instance, 0-based.
pub fn two_point<S: Scalar>(w: &Witness<S>) -> Option<(&CoeffVec<S>, usize, S, usize, S)> {
    match w {
        Witness::Slc { f, a, eps, b, eta } if a.len() == 1 && b.len() == 1 => {
            Some((f, a.first0()?, eps.values[0], b.first0()?, eta.values[0]))
        }
        _ => None,
    }
}

fn make_two_point<S: Scalar>(f: CoeffVec<S>, n0: usize, eps: S, k0: usize, eta: S) -> Witness<S> {
    let (a, b) = (SupportSet::singleton0(n0), SupportSet::singleton0(k0));
    Witness::Slc {
        f,
        a,
        eps: SignVec { set: a, values: vec![eps] },
        b,
        eta: SignVec { set: b, values: vec![eta] },
    }
}

/// Greedy witness for `h` whose approximant is the better of the oracle's
/// and an explicit competitor.
fn greedy_witness<S: Scalar>(
    space: &Space,
    h: CoeffVec<S>,
    m: usize,
    explicit: Approximant<S>,
    opts: &OracleOptions,
) -> Witness<S> {
    let mut residual = h.0.clone();
    for (j, a) in explicit.support.iter0().zip(&explicit.coeffs) {
        residual[j] = h[j] - *a;
    }
    let explicit_value = space.norm_of(&residual);
    let approx = match sigma_m(space, &h, m, opts) {
        Ok(sig) if sig.value <= explicit_value => Approximant {
            support: sig.support,
            coeffs: sig.coeffs,
        },
        _ => explicit,
    };
    Witness::Greedy { f: h, m, approx }
}

/// Sign pattern on `set` maximizing `||base + t 1_{eps set}||`; first
/// maximizer in enumeration order.
fn max_sign_pattern<S: Scalar>(space: &Space, base: &[S], set: SupportSet, t: f64) -> TResult<(f64, SignVec<S>)> {
    let signs = S::unit_signs(space.mode());
    let k = set.len();
    let count = (0..k).try_fold(1usize, |acc, _| acc.checked_mul(signs.len()).filter(|&c| c <= MAX_PATTERNS));
    let Some(count) = count else {
        return Err(TransportError::Infeasible(format!("too many sign patterns on {k} indices")));
    };
    let mut v = base.to_vec();
    let mut best: Option<(f64, Vec<S>)> = None;
    for code in 0..count {
        let mut c = code;
        let pattern: Vec<S> = (0..k)
            .map(|_| {
                let s = signs[c % signs.len()];
                c /= signs.len();
                s
            })
            .collect();
        for (j, s) in set.iter0().zip(&pattern) {
            v[j] = base[j] + s.scale(t);
        }
        let x = space.norm_of(&v);
        if best.as_ref().is_none_or(|(b, _)| x > *b) {
            best = Some((x, pattern));
        }
    }
    let (x, values) = best.expect("at least one pattern");
    Ok((x, SignVec { set, values }))
}

fn within(small: f64, large: f64) -> bool {
    small <= large * (1.0 + CONVEXITY_SLACK) + 1e-300
}

/// Two-point symmetry violation to an `m = 1` greedy violation through
/// `h = f + eps_n x_n + (1 + gamma) eta_k x_k`.
pub fn transport_slc_to_greedy<S: Scalar>(
    space: &Space,
    w: &Witness<S>,
    gamma: Gamma,
    opts: &OracleOptions,
) -> TResult<Transport<S>> {
    admissible(space, w)?;
    let (f, n0, eps, k0, eta) = two_point(w).ok_or(TransportError::WrongForm("two-point symmetry"))?;
    let r = ratio_of(space, w);
    let schedule: Vec<f64> = match gamma {
        Gamma::Fixed(g) if g > 0.0 && g.is_finite() => vec![g],
        Gamma::Fixed(g) => return Err(TransportError::Infeasible(format!("gamma must be positive, got {g}"))),
        Gamma::Auto => (0..)
            .map(|i| 0.5f64.powi(i))
            .take_while(|g| *g >= GAMMA_FLOOR)
            .collect(),
    };
    let target = 1.0 + (r - 1.0) / 2.0;
    let mut best: Option<Transport<S>> = None;
    for g in schedule {
        let mut h = f.clone();
        h[n0] = h[n0] + eps;
        h[k0] = h[k0] + eta.scale(1.0 + g);
        // keeping x_n leaves f + (1 + gamma) eta_k x_k
        let explicit = Approximant {
            support: SupportSet::singleton0(n0),
            coeffs: vec![h[n0]],
        };
        let witness = greedy_witness(space, h, 1, explicit, opts);
        let ratio = ratio_of(space, &witness);
        let t = Transport {
            source_ratio: r,
            witness,
            ratio,
            gamma: Some(g),
            alpha: None,
            steps: vec![format!("h = f + eps_n x_n + (1 + {g}) eta_k x_k")],
        };
        if matches!(gamma, Gamma::Fixed(_)) || r <= 1.0 || ratio > target {
            return Ok(t);
        }
        if best.as_ref().is_none_or(|b| ratio > b.ratio) {
            best = Some(t);
        }
    }
    Err(TransportError::GammaExhausted {
        best: best.map_or(0.0, |b| b.ratio),
    })
}

/// Single-suppression violation to an `m = 1` greedy violation through
/// `g = f + alpha x_j` with `alpha = 2 (||f||_inf + 1)`.
pub fn transport_uncond_to_greedy<S: Scalar>(
    space: &Space,
    w: &Witness<S>,
    opts: &OracleOptions,
) -> TResult<Transport<S>> {
    admissible(space, w)?;
    let Witness::Suppression { f, set } = w else {
        return Err(TransportError::WrongForm("single suppression"));
    };
    if set.len() != 1 {
        return Err(TransportError::WrongForm("single suppression"));
    }
    let j = set.first0().expect("one member");
    if f.support().minus(*set).is_empty() {
        return Err(TransportError::Infeasible(
            "f lives on the suppressed index; nothing to transport".into(),
        ));
    }
    let r = ratio_of(space, w);
    let alpha = 2.0 * (f.sup_norm() + 1.0);
    let mut g = f.clone();
    g[j] = S::from_real(alpha) + f[j];
    let explicit = Approximant {
        support: *set,
        coeffs: vec![S::from_real(alpha)],
    };
    let witness = greedy_witness(space, g, 1, explicit, opts);
    let ratio = ratio_of(space, &witness);
    Ok(Transport {
        source_ratio: r,
        witness,
        ratio,
        gamma: None,
        alpha: Some(alpha),
        steps: vec![format!("g = f + {alpha} x_{}", j + 1)],
    })
}

/// `m = 1` greedy violation to a violation at `m = n`: `n - 1` unused
/// indices receive a coefficient above `||f||_inf`, so the greedy sets and
/// approximants shift by exactly those indices.
pub fn pad_greedy_m1_to_gap<S: Scalar>(
    space: &Space,
    w: &Witness<S>,
    n: usize,
    opts: &OracleOptions,
) -> TResult<Transport<S>> {
    admissible(space, w)?;
    let Witness::Greedy { f, m: 1, approx } = w else {
        return Err(TransportError::WrongForm("m = 1 greedy"));
    };
    let r = ratio_of(space, w);
    if n == 1 {
        return Ok(Transport {
            source_ratio: r,
            witness: w.clone(),
            ratio: r,
            gamma: None,
            alpha: None,
            steps: vec!["identity".into()],
        });
    }
    let used = f.support().union(approx.support);
    let free: Vec<usize> = (0..space.dim()).filter(|&j| !used.contains0(j)).take(n - 1).collect();
    if free.len() < n - 1 {
        return Err(TransportError::Infeasible(format!(
            "dimension {} leaves {} unused indices, padding needs {}",
            space.dim(),
            free.len(),
            n - 1
        )));
    }
    let pad = SupportSet::from_indices0(free.iter().copied());
    let level = f.sup_norm() + 1.0;
    let mut h = f.clone();
    for j in pad.iter0() {
        h[j] = S::from_real(level);
    }
    let support = pad.union(approx.support);
    let coeffs = support
        .iter0()
        .map(|j| {
            if pad.contains0(j) {
                S::from_real(level)
            } else {
                let pos = approx.support.iter0().position(|i| i == j).expect("member");
                approx.coeffs[pos]
            }
        })
        .collect();
    let witness = greedy_witness(space, h, n, Approximant { support, coeffs }, opts);
    let ratio = ratio_of(space, &witness);
    Ok(Transport {
        source_ratio: r,
        witness,
        ratio,
        gamma: None,
        alpha: None,
        steps: vec![format!("pad {} indices with {level}", n - 1)],
    })
}

/// Splits a greedy violation `(f, m, approximant)` into a symmetry instance
/// and a suppression instance:
/// `||f - G_m f|| <= L1`, `L1 / L2` symmetry, `L2 <= L3`, `L3 / ||f - y||`
/// suppression, with both inequalities from convexity.
pub fn greedy_chain<S: Scalar>(space: &Space, w: &Witness<S>) -> TResult<(Witness<S>, Witness<S>)> {
    admissible(space, w)?;
    let Witness::Greedy { f, m, approx } = w else {
        return Err(TransportError::WrongForm("greedy"));
    };
    let a = greedy_set(f, *m);
    let b = approx.support;
    let t = a.iter0().map(|j| f[j].modulus()).fold(f64::INFINITY, f64::min);
    let g0 = suppress(f, a.union(b));
    let (d, e) = (b.minus(a), a.minus(b));

    let l0 = space.norm_of(&suppress(f, a));
    let (l1, eps) = max_sign_pattern(space, &g0, d, t)?;
    if !within(l0, l1) {
        return Err(TransportError::Convexity(format!(
            "||f - G_m f|| = {l0} exceeds the signed bound {l1}"
        )));
    }
    let eta = sign_vec(e, |j| f[j].phase());
    let slc = Witness::Slc {
        f: g0.scaled(1.0 / t),
        a: d,
        eps,
        b: e,
        eta: eta.clone(),
    };

    let mut v = g0.0.clone();
    for (j, s) in e.iter0().zip(&eta.values) {
        v[j] = s.scale(t);
    }
    let l2 = space.norm_of(&v);
    let mut best: Option<(f64, SupportSet)> = None;
    let emask = e.mask();
    let mut sub = 0u32;
    loop {
        let s = SupportSet::from_mask(sub);
        let x = space.norm_of(&g0.add(&project(f, s)));
        if best.is_none_or(|(bx, _)| x > bx) {
            best = Some((x, s));
        }
        if sub == emask {
            break;
        }
        sub = sub.wrapping_sub(emask) & emask;
    }
    let (l3, s_best) = best.expect("the empty set");
    if !within(l2, l3) {
        return Err(TransportError::Convexity(format!(
            "large-coefficient bound {l2} exceeds {l3}"
        )));
    }
    let mut residual = f.clone();
    for (j, c) in b.iter0().zip(&approx.coeffs) {
        residual[j] = f[j] - *c;
    }
    let supp = Witness::Suppression {
        f: residual,
        set: b.union(e.minus(s_best)),
    };
    Ok((slc, supp))
}

/// Links of a suppression instance, removing one index at a time.
fn suppression_links<S: Scalar>(f: &CoeffVec<S>, set: SupportSet) -> Vec<Witness<S>> {
    let mut cur = f.clone();
    let mut out = Vec::new();
    for j in set.intersect(f.support()).iter0() {
        out.push(Witness::Suppression {
            f: cur.clone(),
            set: SupportSet::singleton0(j),
        });
        cur[j] = S::zero();
    }
    out
}

/// Two-point links swapping `A` into the first `|A|` members of `B`, then
/// the suppression link dropping the remaining members of `B`.
fn slc_links<S: Scalar>(
    f: &CoeffVec<S>,
    a: SupportSet,
    eps: &SignVec<S>,
    b: SupportSet,
    eta: &SignVec<S>,
) -> Vec<Witness<S>> {
    let am: Vec<(usize, S)> = a.iter0().zip(eps.values.iter().copied()).collect();
    let bm: Vec<(usize, S)> = b.iter0().zip(eta.values.iter().copied()).collect();
    let mut out = Vec::new();
    for i in 0..am.len() {
        let mut base = f.clone();
        for &(j, s) in &am[i + 1..] {
            base[j] = s;
        }
        for &(j, s) in &bm[..i] {
            base[j] = s;
        }
        out.push(make_two_point(base, am[i].0, am[i].1, bm[i].0, bm[i].1));
    }
    if bm.len() > am.len() {
        let mut h = f.clone();
        for &(j, s) in &bm {
            h[j] = s;
        }
        let rest = SupportSet::from_indices0(bm[am.len()..].iter().map(|(j, _)| *j));
        out.extend(suppression_links(&h, rest));
    }
    out
}

/// Basic links (two-point symmetry, single suppression, `m = 1` greedy)
/// whose ratios multiply to at least the ratio of `w`.
pub fn reduction_links<S: Scalar>(space: &Space, w: &Witness<S>) -> TResult<Vec<Witness<S>>> {
    admissible(space, w)?;
    Ok(match w {
        Witness::Greedy { m: 1, .. } => vec![w.clone()],
        Witness::Greedy { .. } => {
            let (slc, supp) = greedy_chain(space, w)?;
            let mut out = reduction_links(space, &slc)?;
            out.extend(reduction_links(space, &supp)?);
            out
        }
        Witness::QuasiGreedy { f, m } => suppression_links(f, greedy_set(f, *m)),
        Witness::Suppression { f, set } => suppression_links(f, *set),
        Witness::Slc { f, a, eps, b, eta } => slc_links(f, *a, eps, *b, eta),
        Witness::Democracy { a, eps, b, eta } => {
            if !a.is_disjoint(*b) {
                return Err(TransportError::WrongForm("democracy instance with disjoint sets"));
            }
            let d = space.dim();
            slc_links(&CoeffVec::zeros(d), *a, eps, *b, eta)
        }
        Witness::QStar { f, y, a, eps } => {
            let (slc, supp) = q_star_split(f, y, *a, eps);
            let mut out = reduction_links(space, &slc)?;
            out.extend(reduction_links(space, &supp)?);
            out
        }
        Witness::QStarSingleton { f, y, n, eps_n, k, eta_k } => {
            let mut h = f.add(y);
            h[k - 1] = *eta_k;
            let mut out = vec![make_two_point(f.clone(), n - 1, *eps_n, k - 1, *eta_k)];
            out.extend(suppression_links(&h, y.support()));
            out
        }
        Witness::Cor1 { .. } | Witness::CorSym { .. } => {
            return Err(TransportError::WrongForm("constant-defining"));
        }
    })
}

/// A full (Q*) instance as a symmetry instance against the first `|A|` unit
/// coefficients of `y`, times the suppression of the rest of `y`.
fn q_star_split<S: Scalar>(
    f: &CoeffVec<S>,
    y: &CoeffVec<S>,
    a: SupportSet,
    eps: &SignVec<S>,
) -> (Witness<S>, Witness<S>) {
    let b = SupportSet::from_indices0(unit_set(y).iter0().take(a.len()));
    let eta = sign_vec(b, |j| y[j]);
    let slc = Witness::Slc {
        f: f.clone(),
        a,
        eps: eps.clone(),
        b,
        eta,
    };
    let h = f.add(y);
    let supp = Witness::Suppression {
        f: h,
        set: y.support().minus(b),
    };
    (slc, supp)
}

/// Largest-ratio member; the first on ties.
pub fn best_link<S: Scalar>(space: &Space, links: &[Witness<S>]) -> Option<(f64, Witness<S>)> {
    let mut best: Option<(f64, &Witness<S>)> = None;
    for w in links {
        let r = ratio_of(space, w);
        if best.is_none_or(|(b, _)| r > b) {
            best = Some((r, w));
        }
    }
    best.map(|(r, w)| (r, w.clone()))
}

/// Any supported violation to an `m = 1` greedy violation.
pub fn to_greedy_m1<S: Scalar>(space: &Space, w: &Witness<S>, opts: &OracleOptions) -> TResult<Transport<S>> {
    let r = ratio_of(space, w);
    let links = reduction_links(space, w)?;
    let (lr, link) = best_link(space, &links)
        .filter(|(lr, _)| *lr > 1.0)
        .ok_or(TransportError::NoLink { ratio: r })?;
    let step = format!("largest of {} links, ratio {lr}", links.len());
    let mut t = match &link {
        Witness::Greedy { .. } => Transport {
            source_ratio: lr,
            witness: link.clone(),
            ratio: lr,
            gamma: None,
            alpha: None,
            steps: vec!["identity".into()],
        },
        Witness::Suppression { .. } => transport_uncond_to_greedy(space, &link, opts)?,
        _ => transport_slc_to_greedy(space, &link, Gamma::Auto, opts)?,
    };
    t.source_ratio = r;
    t.steps.insert(0, step);
    Ok(t)
}

/// Reads a symmetry or suppression violation as a (Q*) violation: `y` is
/// `1_{eta B}`, or the suppressed part of the normalized `f` with `A`
/// empty.
pub fn to_q_star<S: Scalar>(space: &Space, w: &Witness<S>) -> TResult<Witness<S>> {
    admissible(space, w)?;
    let q = match w {
        Witness::Slc { f, a, eps, b, eta } => {
            let mut y = CoeffVec::zeros(space.dim());
            for (j, s) in b.iter0().zip(&eta.values) {
                y[j] = *s;
            }
            Witness::QStar { f: f.clone(), y, a: *a, eps: eps.clone() }
        }
        Witness::Suppression { f, set } => {
            let sup = f.sup_norm();
            let f1 = CoeffVec(
                f.iter()
                    .map(|x| {
                        let v = x.scale(1.0 / sup);
                        // snap to the unit circle what only rounding moved off it
                        if (v.modulus() - 1.0).abs() < 1e-12 {
                            v.phase()
                        } else {
                            v
                        }
                    })
                    .collect(),
            );
            Witness::QStar {
                f: suppress(&f1, *set),
                y: project(&f1, *set),
                a: SupportSet::EMPTY,
                eps: SignVec::ones(SupportSet::EMPTY),
            }
        }
        _ => return Err(TransportError::WrongForm("symmetry or suppression")),
    };
    admissible(space, &q)?;
    Ok(q)
}

/// Links of a (Q*) instance that are singleton instances, following the
/// induction on `|A|`. With `A` empty a free index `n` and a unit
/// coefficient of `y` are needed.
pub fn q_star_singleton_links<S: Scalar>(space: &Space, w: &Witness<S>) -> TResult<Vec<Witness<S>>> {
    admissible(space, w)?;
    let Witness::QStar { f, y, a, eps } = w else {
        return Err(TransportError::WrongForm("(Q*)"));
    };
    let units: Vec<usize> = unit_set(y).iter0().collect();
    let singleton = |f: CoeffVec<S>, y: CoeffVec<S>, n0: usize, e: S, k0: usize, h: S| Witness::QStarSingleton {
        f,
        y,
        n: n0 + 1,
        eps_n: e,
        k: k0 + 1,
        eta_k: h,
    };
    if a.is_empty() {
        let used = f.support().union(y.support());
        let n0 = (0..space.dim())
            .find(|&j| !used.contains0(j))
            .ok_or_else(|| TransportError::Infeasible("no index outside supp(f + y)".into()))?;
        let &k0 = units
            .first()
            .ok_or_else(|| TransportError::Infeasible("A is empty and y has no unit coefficient".into()))?;
        let (top, e) = max_sign_pattern(space, f, SupportSet::singleton0(n0), 1.0)?;
        if !within(space.norm_of(f), top) {
            return Err(TransportError::Convexity("||f|| exceeds max over signs of ||f + eps x_n||".into()));
        }
        let mut rest = y.clone();
        rest[k0] = S::zero();
        return Ok(vec![singleton(f.clone(), rest, n0, e.values[0], k0, y[k0])]);
    }
    let am: Vec<(usize, S)> = a.iter0().zip(eps.values.iter().copied()).collect();
    let bm: Vec<(usize, S)> = units.iter().take(am.len()).map(|&j| (j, y[j])).collect();
    let mut tail = y.clone();
    for &(j, _) in &bm {
        tail[j] = S::zero();
    }
    let p = am.len();
    let mut out = Vec::new();
    for i in 0..p {
        let mut base = f.clone();
        for &(j, s) in &am[i + 1..] {
            base[j] = s;
        }
        for &(j, s) in &bm[..i] {
            base[j] = s;
        }
        let extra = if i + 1 == p { tail.clone() } else { CoeffVec::zeros(space.dim()) };
        out.push(singleton(base, extra, am[i].0, am[i].1, bm[i].0, bm[i].1));
    }
    Ok(out)
}

/// The best singleton link of a (Q*) violation.
pub fn reduce_q_star_to_singleton<S: Scalar>(space: &Space, w: &Witness<S>) -> TResult<Transport<S>> {
    let r = ratio_of(space, w);
    let links = q_star_singleton_links(space, w)?;
    let (lr, link) = best_link(space, &links).ok_or(TransportError::NoLink { ratio: r })?;
    Ok(Transport {
        source_ratio: r,
        witness: link,
        ratio: lr,
        gamma: None,
        alpha: None,
        steps: vec![format!("largest of {} singleton links", links.len())],
    })
}

/// The symmetric-corollary instance as a two-point symmetry instance:
/// `||f|| <= max_eps ||g + t eps x_n||` with `g = f - P_{n} f`.
pub fn corsym_link<S: Scalar>(space: &Space, w: &Witness<S>) -> TResult<Witness<S>> {
    admissible(space, w)?;
    let Witness::CorSym { f, n, k, t, eta } = w else {
        return Err(TransportError::WrongForm("symmetric corollary"));
    };
    let mut g = f.clone();
    g[n - 1] = S::zero();
    let (top, e) = max_sign_pattern(space, &g, SupportSet::singleton0(n - 1), *t)?;
    if !within(space.norm_of(f), top) {
        return Err(TransportError::Convexity(format!(
            "||f|| exceeds max over signs of ||g + t eps x_n|| = {top}"
        )));
    }
    Ok(make_two_point(g.scaled(1.0 / t), n - 1, e.values[0], k - 1, *eta))
}

/// Bound `max_{S in A} ||P_{B u S} f|| / ||f||` for the bounded-coefficient
/// instance, with the suppression instance attaining it.
pub fn cor1_bound<S: Scalar>(space: &Space, w: &Witness<S>) -> TResult<(f64, Witness<S>)> {
    let Witness::Cor1 { f, b, a, .. } = w else {
        return Err(TransportError::WrongForm("bounded-coefficient"));
    };
    let supp = f.support();
    let mut best: Option<(f64, Witness<S>)> = None;
    let amask = a.mask();
    let mut sub = 0u32;
    loop {
        let keep = b.union(SupportSet::from_mask(sub));
        let s = Witness::Suppression {
            f: f.clone(),
            set: supp.minus(keep),
        };
        let r = ratio_of(space, &s);
        if best.as_ref().is_none_or(|(x, _)| r > *x) {
            best = Some((r, s));
        }
        if sub == amask {
            break;
        }
        sub = sub.wrapping_sub(amask) & amask;
    }
    Ok(best.expect("the empty set"))
}

/// Residual chain of a quasi-greedy instance: `f_i = f_{i-1} - G_1 f_{i-1}`.
pub fn quasi_greedy_links<S: Scalar>(w: &Witness<S>) -> TResult<Vec<Witness<S>>> {
    let Witness::QuasiGreedy { f, m } = w else {
        return Err(TransportError::WrongForm("quasi-greedy"));
    };
    let mut cur = f.clone();
    let mut out = Vec::new();
    for _ in 0..*m {
        if cur.sup_norm() == 0.0 {
            break;
        }
        out.push(Witness::QuasiGreedy { f: cur.clone(), m: 1 });
        let top = greedy_ordering(&cur).order[0];
        cur[top] = S::zero();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(ix: &[usize], d: usize) -> SupportSet {
        SupportSet::from_indices(ix, d).unwrap()
    }

    fn slc_example(d: usize) -> Witness<f64> {
        make_two_point(CoeffVec::zeros(d), 1, 1.0, 0, 1.0)
    }

    #[test]
    fn gamma_half_gives_four_thirds() {
        let s = Space::real("wl1:1,2", None).unwrap();
        let o = OracleOptions::default();
        let t = transport_slc_to_greedy(&s, &slc_example(2), Gamma::Fixed(0.5), &o).unwrap();
        assert_eq!(t.source_ratio, 2.0);
        let Witness::Greedy { f, m, .. } = &t.witness else { panic!() };
        assert_eq!((f.0.clone(), *m), (vec![1.5, 1.0], 1));
        assert!((t.ratio - 4.0 / 3.0).abs() < 1e-12);
        t.witness.check_admissible(&s).unwrap();
        assert_eq!(greedy_set(f, 1), set(&[1], 2));
    }

    #[test]
    fn auto_schedule_reaches_target() {
        let s = Space::real("wl1:1,2", None).unwrap();
        let t = transport_slc_to_greedy(&s, &slc_example(2), Gamma::Auto, &OracleOptions::default()).unwrap();
        assert_eq!(t.gamma, Some(0.25));
        assert!(t.ratio > 1.5);
    }

    #[test]
    fn small_gamma_approaches_source_ratio() {
        let s = Space::real("wl1:1,2", None).unwrap();
        let t = transport_slc_to_greedy(&s, &slc_example(2), Gamma::Fixed(1e-4), &OracleOptions::default()).unwrap();
        assert!((t.ratio - 2.0).abs() < 1e-3);
    }

    #[test]
    fn ratio_one_reports_no_violation() {
        let s = Space::real("lp:2", Some(3)).unwrap();
        let w = make_two_point(CoeffVec::from_real(&[0.0, 0.0, 0.5]), 0, 1.0, 1, -1.0);
        let t = transport_slc_to_greedy(&s, &w, Gamma::Auto, &OracleOptions::default()).unwrap();
        assert!(t.ratio <= 1.0 + 1e-12);
    }

    #[test]
    fn alpha_transport_on_plugin() {
        let s = Space::real("plugin:sup_plus_half_sum", Some(2)).unwrap();
        let w = Witness::<f64>::Suppression {
            f: CoeffVec::from_real(&[1.0, -1.0]),
            set: set(&[2], 2),
        };
        let t = transport_uncond_to_greedy(&s, &w, &OracleOptions::default()).unwrap();
        assert_eq!(t.alpha, Some(4.0));
        assert!(t.ratio >= 1.5 - 1e-12, "{}", t.ratio);
        t.witness.check_admissible(&s).unwrap();
        let Witness::Greedy { f, .. } = &t.witness else { panic!() };
        assert_eq!(greedy_set(f, 1), set(&[2], 2));

        let lone = Witness::<f64>::Suppression {
            f: CoeffVec::from_real(&[0.0, 2.0]),
            set: set(&[2], 2),
        };
        assert!(transport_uncond_to_greedy(&s, &lone, &OracleOptions::default()).is_err());
    }

    #[test]
    fn padding_keeps_the_ratio() {
        let s = Space::real("wl1:1,2,1,1", None).unwrap();
        let o = OracleOptions::default();
        let w = transport_slc_to_greedy(&s, &slc_example(4), Gamma::Fixed(0.5), &o).unwrap().witness;
        let r = w.ratio(&s).unwrap();
        let p = pad_greedy_m1_to_gap(&s, &w, 3, &o).unwrap();
        assert!(p.ratio >= r - 1e-12);
        p.witness.check_admissible(&s).unwrap();
        assert!(pad_greedy_m1_to_gap(&s, &w, 4, &o).is_err());
    }

    #[test]
    fn links_multiply_back() {
        let s = Space::real("wl1:1,2,3,1", None).unwrap();
        let (a, b) = (set(&[3, 2], 4), set(&[1, 4], 4));
        let w = Witness::Slc {
            f: CoeffVec::<f64>::zeros(4),
            a: set(&[2], 4),
            eps: SignVec::ones(set(&[2], 4)),
            b,
            eta: SignVec::ones(b),
        };
        let links = reduction_links(&s, &w).unwrap();
        assert_eq!(links.len(), 2);
        let prod: f64 = links.iter().map(|l| l.ratio(&s).unwrap()).product();
        assert!((prod - w.ratio(&s).unwrap()).abs() < 1e-12);
        for l in &links {
            l.check_admissible(&s).unwrap();
        }
        let q = Witness::QStar {
            f: CoeffVec::<f64>::from_real(&[0.0, 0.0, 0.0, 0.5]),
            y: CoeffVec::from_real(&[1.0, 2.5, 0.0, 0.0]),
            a: set(&[3], 4),
            eps: SignVec::ones(set(&[3], 4)),
        };
        let links = reduction_links(&s, &q).unwrap();
        let prod: f64 = links.iter().map(|l| l.ratio(&s).unwrap()).product();
        assert!((prod - q.ratio(&s).unwrap()).abs() < 1e-12);
        let _ = a;
    }

    #[test]
    fn greedy_chain_bounds_the_ratio() {
        let s = Space::real("wl1:1,2,1", None).unwrap();
        let w = Witness::Greedy {
            f: CoeffVec::from_real(&[1.0, 0.5, 0.5]),
            m: 2,
            approx: Approximant {
                support: set(&[1, 2], 3),
                coeffs: vec![1.0, 0.5],
            },
        };
        let r = w.ratio(&s).unwrap();
        let (slc, supp) = greedy_chain(&s, &w).unwrap();
        slc.check_admissible(&s).unwrap();
        supp.check_admissible(&s).unwrap();
        assert!(slc.ratio(&s).unwrap() * supp.ratio(&s).unwrap() >= r - 1e-12);
        let t = to_greedy_m1(&s, &w, &OracleOptions::default());
        assert!(r <= 1.0 || t.unwrap().ratio > 1.0);
    }

    #[test]
    fn singleton_reduction() {
        let s = Space::real("wl1:1,2,1", None).unwrap();
        let q = Witness::QStar {
            f: CoeffVec::<f64>::zeros(3),
            y: CoeffVec::from_real(&[1.0, 0.0, 1.0]),
            a: set(&[2], 3),
            eps: SignVec::ones(set(&[2], 3)),
        };
        let t = reduce_q_star_to_singleton(&s, &q).unwrap();
        t.witness.check_admissible(&s).unwrap();
        assert!((t.ratio - 1.0).abs() < 1e-12 || t.ratio >= q.ratio(&s).unwrap() - 1e-12);
        // no room in dimension two once A is empty
        let p = Space::real("plugin:sup_plus_half_sum", Some(2)).unwrap();
        let q = Witness::QStar {
            f: CoeffVec::<f64>::from_real(&[1.0, 0.0]),
            y: CoeffVec::from_real(&[0.0, -1.0]),
            a: SupportSet::EMPTY,
            eps: SignVec::ones(SupportSet::EMPTY),
        };
        assert!(q.ratio(&p).unwrap() > 1.0);
        assert!(matches!(reduce_q_star_to_singleton(&p, &q), Err(TransportError::Infeasible(_))));
    }

    #[test]
    fn corsym_example_is_equality() {
        let s = Space::real("lp:2", Some(3)).unwrap();
        let w = Witness::CorSym {
            f: CoeffVec::from_real(&[1.0, 1.0, 0.0]),
            n: 1,
            k: 3,
            t: 1.0,
            eta: 1.0,
        };
        let link = corsym_link(&s, &w).unwrap();
        link.check_admissible(&s).unwrap();
        assert!((link.ratio(&s).unwrap() - 1.0).abs() < 1e-12);
        let l1 = Space::real("lp:1", Some(3)).unwrap();
        let w = Witness::CorSym {
            f: CoeffVec::from_real(&[0.5, 0.5, 0.0]),
            n: 2,
            k: 3,
            t: 0.5,
            eta: 1.0,
        };
        assert_eq!(w.ratio(&l1), Some(1.0));
    }

    #[test]
    fn to_q_star_keeps_ratio() {
        let p = Space::real("plugin:sup_plus_half_sum", Some(2)).unwrap();
        let w = Witness::<f64>::Suppression {
            f: CoeffVec::from_real(&[3.0, -3.0]),
            set: set(&[2], 2),
        };
        let q = to_q_star(&p, &w).unwrap();
        assert!((q.ratio(&p).unwrap() - w.ratio(&p).unwrap()).abs() < 1e-12);
    }
}
