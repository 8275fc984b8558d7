//! Scalar fields for coefficient arrays.
//!
//! Real scalars are the default and use the signs `{+1, -1}`. The complex
//! mode replaces the unit circle by the `k`-th roots of unity so that every
//! search over signs stays finite.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::oracle::minimize;
use crate::space::CustomNorm;

/// Tolerance used to decide whether a complex coefficient has modulus one.
pub const UNIT_TOL: f64 = 1e-12;

/// Scalar field selection of a space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "field", rename_all = "snake_case")]
pub enum ScalarMode {
    Real,
    Complex { k_roots: u32 },
}

impl Default for ScalarMode {
    fn default() -> Self {
        ScalarMode::Real
    }
}

impl std::fmt::Display for ScalarMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScalarMode::Real => write!(f, "real"),
            ScalarMode::Complex { k_roots } => write!(f, "complex:{k_roots}"),
        }
    }
}

impl std::str::FromStr for ScalarMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "real" {
            return Ok(ScalarMode::Real);
        }
        match s.strip_prefix("complex:") {
            Some(k) => {
                let k: u32 = k
                    .trim()
                    .parse()
                    .map_err(|_| format!("invalid root count in `{s}`"))?;
                if k < 2 {
                    return Err(format!("complex mode needs at least 2 roots, got {k}"));
                }
                Ok(ScalarMode::Complex { k_roots: k })
            }
            None => Err(format!("unknown scalar mode `{s}` (expected `real` or `complex:<k>`)")),
        }
    }
}

/// Which concrete Rust type backs a scalar mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarKind {
    Real,
    Complex,
}

impl ScalarMode {
    pub fn kind(self) -> ScalarKind {
        match self {
            ScalarMode::Real => ScalarKind::Real,
            ScalarMode::Complex { .. } => ScalarKind::Complex,
        }
    }
}

/// Field element stored in a coefficient array.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + 'static
{
    const KIND: ScalarKind;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_real(x: f64) -> Self;
    fn modulus(self) -> f64;
    fn scale(self, s: f64) -> Self;
    fn is_finite(self) -> bool;

    /// `x / |x|`, or one for zero.
    fn phase(self) -> Self;

    /// Unimodular scalars admitted as signs, `+1` first.
    fn unit_signs(mode: ScalarMode) -> Vec<Self>;

    fn is_unit(self) -> bool {
        (self.modulus() - 1.0).abs() <= UNIT_TOL
    }

    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Uniform sample from the closed unit ball of the field.
    fn uniform_unit_ball<R: Rng + ?Sized>(rng: &mut R) -> Self;

    fn eval_custom(norm: &dyn CustomNorm, v: &[Self]) -> f64;

    /// Minimizes a convex function of one scalar inside the ball of the
    /// given radius about the origin. Returns the argmin and its value.
    fn minimize_scalar(
        objective: &mut dyn FnMut(Self) -> f64,
        start: Self,
        radius: f64,
        tol: f64,
    ) -> (Self, f64);
}

impl Scalar for f64 {
    const KIND: ScalarKind = ScalarKind::Real;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn phase(self) -> Self {
        if self < 0.0 {
            -1.0
        } else {
            1.0
        }
    }
    fn unit_signs(_mode: ScalarMode) -> Vec<Self> {
        vec![1.0, -1.0]
    }
    fn is_unit(self) -> bool {
        self.abs() == 1.0
    }
    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }
    fn uniform_unit_ball<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.random_range(-1.0..=1.0)
    }
    fn eval_custom(norm: &dyn CustomNorm, v: &[Self]) -> f64 {
        norm.eval_real(v)
    }
    fn minimize_scalar(
        objective: &mut dyn FnMut(Self) -> f64,
        start: Self,
        radius: f64,
        tol: f64,
    ) -> (Self, f64) {
        minimize::golden_section(objective, -radius, radius, start, tol)
    }
}

impl Scalar for Complex64 {
    const KIND: ScalarKind = ScalarKind::Complex;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_real(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn scale(self, s: f64) -> Self {
        self * s
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn phase(self) -> Self {
        let r = self.norm();
        if r == 0.0 {
            Self::one()
        } else {
            self / r
        }
    }
    fn unit_signs(mode: ScalarMode) -> Vec<Self> {
        let k = match mode {
            ScalarMode::Real => 2,
            ScalarMode::Complex { k_roots } => k_roots,
        };
        (0..k)
            .map(|j| {
                if j == 0 {
                    return Self::one();
                }
                let theta = std::f64::consts::TAU * f64::from(j) / f64::from(k);
                Complex64::from_polar(1.0, theta)
            })
            .collect()
    }
    fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
    }
    fn uniform_unit_ball<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let r: f64 = rng.random::<f64>().sqrt();
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        Complex64::from_polar(r, theta)
    }
    fn eval_custom(norm: &dyn CustomNorm, v: &[Self]) -> f64 {
        norm.eval_complex(v)
    }
    fn minimize_scalar(
        objective: &mut dyn FnMut(Self) -> f64,
        start: Self,
        radius: f64,
        tol: f64,
    ) -> (Self, f64) {
        let (point, value) = minimize::nelder_mead_2d(
            &mut |p: [f64; 2]| {
                let z = Complex64::new(p[0], p[1]);
                if z.norm() > radius {
                    // outside the bracket: the convex objective grows linearly
                    objective(z * (radius / z.norm())) + (z.norm() - radius)
                } else {
                    objective(z)
                }
            },
            [start.re, start.im],
            (radius / 4.0).max(tol),
            tol,
        );
        (Complex64::new(point[0], point[1]), value)
    }
}
