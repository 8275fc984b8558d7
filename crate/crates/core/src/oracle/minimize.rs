//! Derivative-free minimizers for convex, possibly non-smooth objectives.

use crate::scalar::Scalar;

const INV_PHI: f64 = 0.618_033_988_749_894_9;
const MAX_GOLDEN_ITERS: usize = 200;
const MAX_EXPANSIONS: usize = 12;

/// Golden-section search on `[lo, hi]`. The returned point is never worse
/// than `start`, which is evaluated as well.
pub fn golden_section(
    f: &mut dyn FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    start: f64,
    tol: f64,
) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..MAX_GOLDEN_ITERS {
        if (b - a).abs() <= tol {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let (mut x, mut fx) = if fc <= fd { (c, fc) } else { (d, fd) };
    let fs = f(start);
    if fs <= fx {
        x = start;
        fx = fs;
    }
    (x, fx)
}

/// Nelder-Mead on the plane. Never returns a point worse than `start`.
pub fn nelder_mead_2d(
    f: &mut dyn FnMut([f64; 2]) -> f64,
    start: [f64; 2],
    step: f64,
    tol: f64,
) -> ([f64; 2], f64) {
    let mut simplex = [
        start,
        [start[0] + step, start[1]],
        [start[0], start[1] + step],
    ];
    let mut values = [f(simplex[0]), f(simplex[1]), f(simplex[2])];
    let start_value = values[0];
    for _ in 0..2000 {
        let mut idx = [0usize, 1, 2];
        idx.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        let (best, mid, worst) = (idx[0], idx[1], idx[2]);
        let size = (0..2)
            .map(|k| {
                (simplex[mid][k] - simplex[best][k])
                    .abs()
                    .max((simplex[worst][k] - simplex[best][k]).abs())
            })
            .fold(0.0, f64::max);
        if size <= tol && values[worst] - values[best] <= tol {
            break;
        }
        let centroid = [
            (simplex[best][0] + simplex[mid][0]) / 2.0,
            (simplex[best][1] + simplex[mid][1]) / 2.0,
        ];
        let along = |t: f64| {
            [
                centroid[0] + t * (simplex[worst][0] - centroid[0]),
                centroid[1] + t * (simplex[worst][1] - centroid[1]),
            ]
        };
        let xr = along(-1.0);
        let fr = f(xr);
        if fr < values[best] {
            let xe = along(-2.0);
            let fe = f(xe);
            if fe < fr {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
        } else if fr < values[mid] {
            simplex[worst] = xr;
            values[worst] = fr;
        } else {
            let xc = if fr < values[worst] { along(-0.5) } else { along(0.5) };
            let fc = f(xc);
            if fc < values[worst].min(fr) {
                simplex[worst] = xc;
                values[worst] = fc;
            } else {
                for i in [mid, worst] {
                    simplex[i] = [
                        (simplex[i][0] + simplex[best][0]) / 2.0,
                        (simplex[i][1] + simplex[best][1]) / 2.0,
                    ];
                    values[i] = f(simplex[i]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap_or(0);
    if values[best] <= start_value {
        (simplex[best], values[best])
    } else {
        (start, start_value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdOptions {
    /// A pass that improves the value by less than this ends the descent.
    pub tol: f64,
    pub max_passes: usize,
    /// Also search along `e_i +- e_j`. Needed for norms whose unit ball has
    /// corners that are not aligned with the coordinate axes.
    pub pairwise: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CdResult<S> {
    pub coeffs: Vec<S>,
    pub value: f64,
    pub converged: bool,
}

/// Cyclic coordinate descent with an exact line search per coordinate.
/// Coordinate `j` is searched in the ball of radius `radii[j]`, enlarged
/// when the minimizer sits on the boundary. Only improving moves are kept.
pub fn coordinate_descent<S: Scalar>(
    eval: &mut dyn FnMut(&[S]) -> f64,
    start: Vec<S>,
    radii: &[f64],
    opts: &CdOptions,
) -> CdResult<S> {
    let k = start.len();
    let mut a = start;
    let mut best = eval(&a);
    let mut trial = a.clone();
    let mut converged = false;
    for _ in 0..opts.max_passes {
        let before = best;
        for j in 0..k {
            let mut radius = radii[j].max(a[j].modulus() + 1.0);
            for _ in 0..MAX_EXPANSIONS {
                trial.copy_from_slice(&a);
                let (x, fx) = S::minimize_scalar(
                    &mut |t| {
                        trial[j] = t;
                        eval(&trial)
                    },
                    a[j],
                    radius,
                    1e-10 * radius.max(1.0),
                );
                let improved = fx < best;
                if improved {
                    a[j] = x;
                    best = fx;
                }
                if !(improved && x.modulus() > 0.98 * radius) {
                    break;
                }
                radius *= 4.0;
            }
        }
        if opts.pairwise {
            for i in 0..k {
                for j in (i + 1)..k {
                    for sign in [1.0, -1.0] {
                        let radius = radii[i].max(radii[j]) + a[i].modulus() + a[j].modulus();
                        let (ai, aj) = (a[i], a[j]);
                        trial.copy_from_slice(&a);
                        let (t, ft) = S::minimize_scalar(
                            &mut |t| {
                                trial[i] = ai + t;
                                trial[j] = aj + t.scale(sign);
                                eval(&trial)
                            },
                            S::zero(),
                            radius,
                            1e-10 * radius.max(1.0),
                        );
                        if ft < best {
                            a[i] = ai + t;
                            a[j] = aj + t.scale(sign);
                            best = ft;
                        }
                    }
                }
            }
        }
        if before - best < opts.tol {
            converged = true;
            break;
        }
    }
    CdResult {
        coeffs: a,
        value: best,
        converged,
    }
}
