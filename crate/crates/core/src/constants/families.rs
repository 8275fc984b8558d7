//! Instance generators for each sampled constant.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::engine::{digits, pow_sat, Eval, Family};
use super::witness::{unit_set, Approximant, Witness};
use super::Grid;
use crate::greedy::{greedy_ordering, suppress, SignVec, SupportSet};
use crate::oracle::{sigma_m, ApproxResult, OracleOptions};
use crate::scalar::Scalar;
use crate::space::{CoeffVec, Space};

/// Magnitudes used for `y` coefficients off the unit set.
const Y_OFF_GRID: [f64; 2] = [0.5, 2.0];
/// Magnitudes of free `y` coefficients in the singleton family.
const Y_FREE_GRID: [f64; 4] = [0.25, 0.5, 1.0, 2.0];

/// Grid coefficients `0` and `c * s` for each magnitude `c` and sign `s`.
/// Digit `1 + ci * n_signs + si` encodes magnitude `ci` with sign `si`.
pub(crate) struct GridValues<S> {
    pub values: Vec<S>,
    pub n_signs: usize,
}

impl<S: Scalar> GridValues<S> {
    pub fn new(grid: Grid, signs: &[S]) -> Self {
        let mags: &[f64] = match grid {
            Grid::Off => &[],
            Grid::Coarse => &[1.0, 0.5],
            Grid::Fine => &[1.0, 0.5, 0.25],
        };
        let mut values = Vec::new();
        if !mags.is_empty() {
            values.push(S::zero());
            for &c in mags {
                values.extend(signs.iter().map(|s| s.scale(c)));
            }
        }
        GridValues {
            values,
            n_signs: signs.len(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    fn has_modulus_one(&self, d: usize) -> bool {
        (1..=self.n_signs).contains(&d)
    }

    fn is_positive(&self, d: usize) -> bool {
        d > 0 && (d - 1) % self.n_signs == 0
    }
}

fn pick<S: Copy>(v: &[S], rng: &mut ChaCha8Rng) -> S {
    v[rng.random_range(0..v.len())]
}

fn clip<S: Scalar>(x: S) -> S {
    let m = x.modulus();
    if m > 1.0 {
        x.scale(1.0 / m)
    } else {
        x
    }
}

/// A coefficient with modulus drawn from `(0, 1)` or `(1, 3]`.
fn off_unit<S: Scalar>(signs: &[S], rng: &mut ChaCha8Rng) -> S {
    let mag = if rng.random_bool(0.5) {
        rng.random_range(0.01..0.99)
    } else {
        rng.random_range(1.01..=3.0)
    };
    pick(signs, rng).scale(mag)
}

fn sign_vec<S: Scalar>(entries: &[(usize, S)]) -> SignVec<S> {
    SignVec {
        set: SupportSet::from_indices0(entries.iter().map(|(j, _)| *j)),
        values: entries.iter().map(|(_, s)| *s).collect(),
    }
}

fn replace_sign<S: Scalar>(v: &SignVec<S>, j: usize, s: S) -> SignVec<S> {
    let mut out = v.clone();
    if let Some(pos) = v.set.iter0().position(|i| i == j) {
        out.values[pos] = s;
    }
    out
}

/// Source of `f` vectors for the homogeneous constants. Grid vectors are
/// normalized: sup norm one and first nonzero coefficient equal to its
/// modulus. Both ratios are invariant under `f -> lambda f`, so this loses
/// nothing.
pub(crate) struct FSource<S> {
    pub dim: usize,
    pub grid: GridValues<S>,
}

impl<S: Scalar> FSource<S> {
    pub fn new(space: &Space, grid: Grid) -> Self {
        let signs = S::unit_signs(space.mode());
        FSource {
            dim: space.dim(),
            grid: GridValues::new(grid, &signs),
        }
    }

    pub fn grid_len(&self) -> usize {
        if self.grid.len() == 0 {
            0
        } else {
            pow_sat(self.grid.len(), self.dim)
        }
    }

    pub fn grid_f(&self, index: usize) -> Option<CoeffVec<S>> {
        let mut d = vec![0; self.dim];
        digits(index, self.grid.len(), &mut d);
        if !d.iter().any(|&x| self.grid.has_modulus_one(x)) {
            return None;
        }
        let first = d.iter().find(|&&x| x != 0)?;
        if !self.grid.is_positive(*first) {
            return None;
        }
        Some(CoeffVec(d.iter().map(|&x| self.grid.values[x]).collect()))
    }

    pub fn random_f(&self, rng: &mut ChaCha8Rng) -> CoeffVec<S> {
        let mut f: Vec<S> = (0..self.dim)
            .map(|_| if rng.random_bool(0.25) { S::zero() } else { S::gaussian(rng) })
            .collect();
        if f.iter().all(|x| *x == S::zero()) {
            f[0] = S::gaussian(rng);
        }
        CoeffVec(f)
    }

    pub fn perturb_f(&self, f: &CoeffVec<S>, rng: &mut ChaCha8Rng) -> Option<CoeffVec<S>> {
        let mut g = f.clone();
        let j = rng.random_range(0..self.dim);
        if rng.random_bool(0.1) {
            g[j] = S::zero();
        } else {
            let step = 0.3 * f.sup_norm().max(1e-3);
            g[j] = g[j] + S::gaussian(rng).scale(step);
        }
        (g.sup_norm() > 0.0).then_some(g)
    }

    fn first_ones(&self, k: usize) -> CoeffVec<S> {
        CoeffVec((0..self.dim).map(|j| if j < k { S::one() } else { S::zero() }).collect())
    }
}

/// `||f - G_m f|| / sigma_m(f)` over `m` in a fixed list.
pub(crate) struct GreedyFamily<'a, S> {
    pub space: &'a Space,
    pub src: FSource<S>,
    pub ms: Vec<usize>,
    pub opts: OracleOptions,
}

impl<S: Scalar> Family<S> for GreedyFamily<'_, S> {
    type Item = CoeffVec<S>;
    type Inner = (usize, ApproxResult<S>);

    fn trivial(&self) -> Vec<CoeffVec<S>> {
        self.ms
            .iter()
            .copied()
            .filter(|&m| m >= 1 && m < self.src.dim)
            .min()
            .map(|m| vec![self.src.first_ones(m + 1)])
            .unwrap_or_default()
    }

    fn grid_len(&self) -> usize {
        self.src.grid_len()
    }

    fn grid_item(&self, index: usize) -> Option<CoeffVec<S>> {
        self.src.grid_f(index)
    }

    fn random_item(&self, rng: &mut ChaCha8Rng) -> Option<CoeffVec<S>> {
        Some(self.src.random_f(rng))
    }

    fn perturb(&self, item: &CoeffVec<S>, rng: &mut ChaCha8Rng) -> Option<CoeffVec<S>> {
        self.src.perturb_f(item, rng)
    }

    fn evaluate(&self, f: &CoeffVec<S>) -> Eval<Self::Inner> {
        let mut out = Eval::none();
        let supp = f.support().len();
        let order = greedy_ordering(f);
        for &m in &self.ms {
            if m == 0 || m >= supp {
                continue;
            }
            let Ok(sig) = sigma_m(self.space, f, m, &self.opts) else {
                out.degenerate += 1;
                continue;
            };
            if sig.value < 1e-12 {
                out.degenerate += 1;
                continue;
            }
            let residual = self.space.norm_of(&suppress(f, order.prefix_set(m)));
            out.offer(residual / sig.value, || (m, sig));
        }
        out
    }

    fn witness(&self, f: &CoeffVec<S>, (m, sig): &Self::Inner) -> Witness<S> {
        Witness::Greedy {
            f: f.clone(),
            m: *m,
            approx: Approximant {
                support: sig.support,
                coeffs: sig.coeffs.clone(),
            },
        }
    }
}

/// `||f - G_m f|| / ||f||`. The value `m = 0` is always included, so every
/// nonzero `f` realizes ratio one.
pub(crate) struct QuasiGreedyFamily<'a, S> {
    pub space: &'a Space,
    pub src: FSource<S>,
    /// `None` allows every `m`.
    pub ms: Option<Vec<usize>>,
}

impl<S: Scalar> Family<S> for QuasiGreedyFamily<'_, S> {
    type Item = CoeffVec<S>;
    type Inner = usize;

    fn trivial(&self) -> Vec<CoeffVec<S>> {
        vec![self.src.first_ones(1)]
    }

    fn grid_len(&self) -> usize {
        self.src.grid_len()
    }

    fn grid_item(&self, index: usize) -> Option<CoeffVec<S>> {
        self.src.grid_f(index)
    }

    fn random_item(&self, rng: &mut ChaCha8Rng) -> Option<CoeffVec<S>> {
        Some(self.src.random_f(rng))
    }

    fn perturb(&self, item: &CoeffVec<S>, rng: &mut ChaCha8Rng) -> Option<CoeffVec<S>> {
        self.src.perturb_f(item, rng)
    }

    fn evaluate(&self, f: &CoeffVec<S>) -> Eval<usize> {
        let norm = self.space.norm_of(f);
        if norm == 0.0 {
            return Eval::degenerate();
        }
        let supp = f.support().len();
        let order = greedy_ordering(f);
        let mut out = Eval::none();
        out.offer(1.0, || 0);
        let all: Vec<usize> = (1..supp).collect();
        for &m in self.ms.as_ref().unwrap_or(&all) {
            if m == 0 || m >= supp {
                continue;
            }
            let residual = self.space.norm_of(&suppress(f, order.prefix_set(m)));
            out.offer(residual / norm, || m);
        }
        out
    }

    fn witness(&self, f: &CoeffVec<S>, m: &usize) -> Witness<S> {
        Witness::QuasiGreedy { f: f.clone(), m: *m }
    }
}

/// `||f - P_A f|| / ||f||` over every `A` inside the support (including the
/// empty set), or over singletons `{j}`, `j` arbitrary.
pub(crate) struct SuppressionFamily<'a, S> {
    pub space: &'a Space,
    pub src: FSource<S>,
    pub single: bool,
}

impl<S: Scalar> Family<S> for SuppressionFamily<'_, S> {
    type Item = CoeffVec<S>;
    type Inner = SupportSet;

    fn trivial(&self) -> Vec<CoeffVec<S>> {
        vec![self.src.first_ones(1)]
    }

    fn grid_len(&self) -> usize {
        self.src.grid_len()
    }

    fn grid_item(&self, index: usize) -> Option<CoeffVec<S>> {
        self.src.grid_f(index)
    }

    fn random_item(&self, rng: &mut ChaCha8Rng) -> Option<CoeffVec<S>> {
        Some(self.src.random_f(rng))
    }

    fn perturb(&self, item: &CoeffVec<S>, rng: &mut ChaCha8Rng) -> Option<CoeffVec<S>> {
        self.src.perturb_f(item, rng)
    }

    fn evaluate(&self, f: &CoeffVec<S>) -> Eval<SupportSet> {
        let norm = self.space.norm_of(f);
        if norm == 0.0 {
            return Eval::degenerate();
        }
        let mut out = Eval::none();
        if self.single {
            for j in 0..self.src.dim {
                let a = SupportSet::singleton0(j);
                out.offer(self.space.norm_of(&suppress(f, a)) / norm, || a);
            }
        } else {
            let supp = f.support().mask();
            // submasks of the support in increasing order
            let mut sub = 0u32;
            loop {
                let a = SupportSet::from_mask(sub);
                out.offer(self.space.norm_of(&suppress(f, a)) / norm, || a);
                if sub == supp {
                    break;
                }
                sub = (sub.wrapping_sub(supp)) & supp;
            }
        }
        out
    }

    fn witness(&self, f: &CoeffVec<S>, a: &SupportSet) -> Witness<S> {
        Witness::Suppression { f: f.clone(), set: *a }
    }
}

fn ratio_eval<S: Scalar>(space: &Space, w: &Witness<S>) -> Eval<()> {
    match w.ratio(space) {
        Some(r) => Eval { best: Some((r, ())), degenerate: 0 },
        None => Eval::degenerate(),
    }
}

/// Shared pieces of the instance families whose items are witnesses.
pub(crate) struct Roles<'a, S> {
    pub space: &'a Space,
    pub dim: usize,
    pub grid: GridValues<S>,
    pub signs: Vec<S>,
}

impl<'a, S: Scalar> Roles<'a, S> {
    pub fn new(space: &'a Space, grid: Grid) -> Self {
        let signs = S::unit_signs(space.mode());
        Roles {
            space,
            dim: space.dim(),
            grid: GridValues::new(grid, &signs),
            signs,
        }
    }

    fn small(&self, rng: &mut ChaCha8Rng) -> S {
        if rng.random_bool(0.2) {
            S::zero()
        } else {
            clip(S::gaussian(rng))
        }
    }

    fn other_sign(&self, s: S, rng: &mut ChaCha8Rng) -> S {
        if self.signs.len() == 1 {
            return s;
        }
        loop {
            let t = pick(&self.signs, rng);
            if t != s {
                return t;
            }
        }
    }
}

/// `||f + 1_{eps A}|| / ||f + 1_{eta B}||`.
pub(crate) struct SlcFamily<'a, S>(pub Roles<'a, S>);

impl<S: Scalar> SlcFamily<'_, S> {
    fn base(&self) -> usize {
        self.0.grid.len() + 2 * self.0.signs.len()
    }
}

impl<S: Scalar> Family<S> for SlcFamily<'_, S> {
    type Item = Witness<S>;
    type Inner = ();

    fn trivial(&self) -> Vec<Witness<S>> {
        let mut f = CoeffVec::zeros(self.0.dim);
        f[0] = S::one();
        vec![Witness::Slc {
            f,
            a: SupportSet::EMPTY,
            eps: SignVec::ones(SupportSet::EMPTY),
            b: SupportSet::EMPTY,
            eta: SignVec::ones(SupportSet::EMPTY),
        }]
    }

    fn grid_len(&self) -> usize {
        if self.0.grid.len() == 0 {
            0
        } else {
            pow_sat(self.base(), self.0.dim)
        }
    }

    fn grid_item(&self, index: usize) -> Option<Witness<S>> {
        let r = &self.0;
        let (nv, ns) = (r.grid.len(), r.signs.len());
        let mut d = vec![0; r.dim];
        digits(index, self.base(), &mut d);
        let mut f = CoeffVec::zeros(r.dim);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for (j, &x) in d.iter().enumerate() {
            if x < nv {
                f[j] = r.grid.values[x];
            } else if x < nv + ns {
                a.push((j, r.signs[x - nv]));
            } else {
                b.push((j, r.signs[x - nv - ns]));
            }
        }
        if a.len() > b.len() {
            return None;
        }
        let (eps, eta) = (sign_vec(&a), sign_vec(&b));
        Some(Witness::Slc { f, a: eps.set, eps, b: eta.set, eta })
    }

    fn random_item(&self, rng: &mut ChaCha8Rng) -> Option<Witness<S>> {
        let r = &self.0;
        let mut f = CoeffVec::zeros(r.dim);
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for j in 0..r.dim {
            let u: f64 = rng.random();
            if u < 0.5 {
                f[j] = r.small(rng);
            } else if u < 0.75 {
                a.push((j, pick(&r.signs, rng)));
            } else {
                b.push((j, pick(&r.signs, rng)));
            }
        }
        if a.len() > b.len() {
            std::mem::swap(&mut a, &mut b);
        }
        let (eps, eta) = (sign_vec(&a), sign_vec(&b));
        Some(Witness::Slc { f, a: eps.set, eps, b: eta.set, eta })
    }

    fn perturb(&self, item: &Witness<S>, rng: &mut ChaCha8Rng) -> Option<Witness<S>> {
        let Witness::Slc { f, a, eps, b, eta } = item else {
            return None;
        };
        let r = &self.0;
        let j = rng.random_range(0..r.dim);
        let mut w = item.clone();
        if let Witness::Slc { f: wf, eps: we, eta: wh, .. } = &mut w {
            if a.contains0(j) {
                *we = replace_sign(eps, j, r.other_sign(eps.get0(j)?, rng));
            } else if b.contains0(j) {
                *wh = replace_sign(eta, j, r.other_sign(eta.get0(j)?, rng));
            } else {
                wf[j] = clip(f[j] + S::gaussian(rng).scale(0.3));
            }
        }
        Some(w)
    }

    fn evaluate(&self, item: &Witness<S>) -> Eval<()> {
        ratio_eval(self.0.space, item)
    }

    fn witness(&self, item: &Witness<S>, _: &()) -> Witness<S> {
        item.clone()
    }
}

/// `||f + 1_{eps A}|| / ||f + y||` with `|A| <= |{n : |y_n| = 1}|`.
pub(crate) struct QStarFamily<'a, S>(pub Roles<'a, S>);

impl<S: Scalar> QStarFamily<'_, S> {
    fn base(&self) -> usize {
        self.0.grid.len() + (2 + Y_OFF_GRID.len()) * self.0.signs.len()
    }
}

fn q_star_from_parts<S: Scalar>(f: CoeffVec<S>, y: CoeffVec<S>, a: &[(usize, S)]) -> Option<Witness<S>> {
    if a.len() > unit_set(&y).len() {
        return None;
    }
    let eps = sign_vec(a);
    Some(Witness::QStar { f, y, a: eps.set, eps })
}

impl<S: Scalar> Family<S> for QStarFamily<'_, S> {
    type Item = Witness<S>;
    type Inner = ();

    fn trivial(&self) -> Vec<Witness<S>> {
        let mut f = CoeffVec::zeros(self.0.dim);
        f[0] = S::one();
        vec![Witness::QStar {
            f,
            y: CoeffVec::zeros(self.0.dim),
            a: SupportSet::EMPTY,
            eps: SignVec::ones(SupportSet::EMPTY),
        }]
    }

    fn grid_len(&self) -> usize {
        if self.0.grid.len() == 0 {
            0
        } else {
            pow_sat(self.base(), self.0.dim)
        }
    }

    fn grid_item(&self, index: usize) -> Option<Witness<S>> {
        let r = &self.0;
        let (nv, ns) = (r.grid.len(), r.signs.len());
        let mut d = vec![0; r.dim];
        digits(index, self.base(), &mut d);
        let mut f = CoeffVec::zeros(r.dim);
        let mut y = CoeffVec::zeros(r.dim);
        let mut a = Vec::new();
        for (j, &x) in d.iter().enumerate() {
            if x < nv {
                f[j] = r.grid.values[x];
            } else if x < nv + ns {
                a.push((j, r.signs[x - nv]));
            } else if x < nv + 2 * ns {
                y[j] = r.signs[x - nv - ns];
            } else {
                let k = x - nv - 2 * ns;
                y[j] = r.signs[k % ns].scale(Y_OFF_GRID[k / ns]);
            }
        }
        q_star_from_parts(f, y, &a)
    }

    fn random_item(&self, rng: &mut ChaCha8Rng) -> Option<Witness<S>> {
        let r = &self.0;
        let mut f = CoeffVec::zeros(r.dim);
        let mut y = CoeffVec::zeros(r.dim);
        let mut a = Vec::new();
        for j in 0..r.dim {
            let u: f64 = rng.random();
            if u < 0.4 {
                f[j] = r.small(rng);
            } else if u < 0.6 {
                a.push((j, pick(&r.signs, rng)));
            } else if u < 0.8 {
                y[j] = pick(&r.signs, rng);
            } else {
                y[j] = off_unit(&r.signs, rng);
            }
        }
        // surplus members of A become unit coefficients of y
        while a.len() > unit_set(&y).len() {
            let (j, s) = a.pop()?;
            y[j] = s;
        }
        q_star_from_parts(f, y, &a)
    }

    fn perturb(&self, item: &Witness<S>, rng: &mut ChaCha8Rng) -> Option<Witness<S>> {
        let Witness::QStar { f, y, a, eps } = item else {
            return None;
        };
        let r = &self.0;
        let j = rng.random_range(0..r.dim);
        let (mut f, mut y, mut eps) = (f.clone(), y.clone(), eps.clone());
        if a.contains0(j) {
            eps = replace_sign(&eps, j, r.other_sign(eps.get0(j)?, rng));
        } else if y[j] != S::zero() && y[j].is_unit() {
            y[j] = r.other_sign(y[j], rng);
        } else if y[j] != S::zero() {
            let g: f64 = rand_distr::Distribution::sample(&rand_distr::StandardNormal, rng);
            let v = y[j].scale((0.3 * g).exp());
            if (v.modulus() - 1.0).abs() < 1e-3 {
                return None;
            }
            y[j] = v;
        } else {
            f[j] = clip(f[j] + S::gaussian(rng).scale(0.3));
        }
        let a: Vec<(usize, S)> = eps.set.iter0().zip(eps.values.iter().copied()).collect();
        q_star_from_parts(f, y, &a)
    }

    fn evaluate(&self, item: &Witness<S>) -> Eval<()> {
        ratio_eval(self.0.space, item)
    }

    fn witness(&self, item: &Witness<S>, _: &()) -> Witness<S> {
        item.clone()
    }
}

/// `||f + eps_n x_n|| / ||f + eta_k x_k + y||`.
pub(crate) struct SingletonFamily<'a, S>(pub Roles<'a, S>);

impl<S: Scalar> SingletonFamily<'_, S> {
    fn rest_base(&self) -> usize {
        self.0.grid.len() + Y_FREE_GRID.len() * self.0.signs.len()
    }

    fn pairs(&self) -> usize {
        self.0.dim * self.0.dim.saturating_sub(1)
    }

    fn make(&self, f: CoeffVec<S>, y: CoeffVec<S>, n0: usize, eps_n: S, k0: usize, eta_k: S) -> Witness<S> {
        Witness::QStarSingleton { f, y, n: n0 + 1, eps_n, k: k0 + 1, eta_k }
    }
}

impl<S: Scalar> Family<S> for SingletonFamily<'_, S> {
    type Item = Witness<S>;
    type Inner = ();

    fn trivial(&self) -> Vec<Witness<S>> {
        let d = self.0.dim;
        if d < 2 {
            return Vec::new();
        }
        let z = CoeffVec::zeros(d);
        vec![
            self.make(z.clone(), z.clone(), 0, S::one(), 1, S::one()),
            self.make(z.clone(), z, 1, S::one(), 0, S::one()),
        ]
    }

    fn grid_len(&self) -> usize {
        let r = &self.0;
        if r.grid.len() == 0 || r.dim < 2 {
            return 0;
        }
        self.pairs()
            .saturating_mul(r.signs.len() * r.signs.len())
            .saturating_mul(pow_sat(self.rest_base(), r.dim - 2))
    }

    fn grid_item(&self, index: usize) -> Option<Witness<S>> {
        let r = &self.0;
        let (nv, ns, d) = (r.grid.len(), r.signs.len(), r.dim);
        let mut rest = index;
        let p = rest % self.pairs();
        rest /= self.pairs();
        let e = rest % ns;
        rest /= ns;
        let h = rest % ns;
        rest /= ns;
        let n0 = p / (d - 1);
        let k0 = match p % (d - 1) {
            k if k >= n0 => k + 1,
            k => k,
        };
        let mut dig = vec![0; d - 2];
        digits(rest, self.rest_base(), &mut dig);
        let mut f = CoeffVec::zeros(d);
        let mut y = CoeffVec::zeros(d);
        let others = (0..d).filter(|&j| j != n0 && j != k0);
        for (j, &x) in others.zip(&dig) {
            if x < nv {
                f[j] = r.grid.values[x];
            } else {
                let k = x - nv;
                y[j] = r.signs[k % ns].scale(Y_FREE_GRID[k / ns]);
            }
        }
        Some(self.make(f, y, n0, r.signs[e], k0, r.signs[h]))
    }

    fn random_item(&self, rng: &mut ChaCha8Rng) -> Option<Witness<S>> {
        let r = &self.0;
        let d = r.dim;
        if d < 2 {
            return None;
        }
        let n0 = rng.random_range(0..d);
        let k0 = (n0 + rng.random_range(1..d)) % d;
        let mut f = CoeffVec::zeros(d);
        let mut y = CoeffVec::zeros(d);
        for j in (0..d).filter(|&j| j != n0 && j != k0) {
            let u: f64 = rng.random();
            if u < 0.4 {
                f[j] = r.small(rng);
            } else if u < 0.8 {
                y[j] = S::gaussian(rng).scale(1.5);
            }
        }
        Some(self.make(f, y, n0, pick(&r.signs, rng), k0, pick(&r.signs, rng)))
    }

    fn perturb(&self, item: &Witness<S>, rng: &mut ChaCha8Rng) -> Option<Witness<S>> {
        let Witness::QStarSingleton { f, y, n, eps_n, k, eta_k } = item else {
            return None;
        };
        let r = &self.0;
        let (mut f, mut y, mut eps_n, mut eta_k) = (f.clone(), y.clone(), *eps_n, *eta_k);
        let j = rng.random_range(0..r.dim);
        if j == n - 1 {
            eps_n = r.other_sign(eps_n, rng);
        } else if j == k - 1 {
            eta_k = r.other_sign(eta_k, rng);
        } else if y[j] != S::zero() {
            y[j] = y[j] + S::gaussian(rng).scale(0.3);
        } else {
            f[j] = clip(f[j] + S::gaussian(rng).scale(0.3));
        }
        Some(self.make(f, y, n - 1, eps_n, k - 1, eta_k))
    }

    fn evaluate(&self, item: &Witness<S>) -> Eval<()> {
        ratio_eval(self.0.space, item)
    }

    fn witness(&self, item: &Witness<S>, _: &()) -> Witness<S> {
        item.clone()
    }
}
