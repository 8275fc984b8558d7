//! Lower-bound estimates of the greedy-type basis constants. Each value is
//! the largest ratio found over admissible instances and comes with the
//! instance that realizes it.

mod democracy;
pub(crate) mod engine;
pub(crate) mod families;
pub mod witness;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::greedy::check_gaps;
use crate::oracle::OracleOptions;
use crate::scalar::Scalar;
use crate::space::Space;
use engine::{search, Outcome};
use families::{
    FSource, GreedyFamily, QStarFamily, QuasiGreedyFamily, Roles, SingletonFamily, SlcFamily, SuppressionFamily,
};
pub use witness::{unit_set, Approximant, Witness};

/// Largest dimension at which grids are enumerated.
pub const GRID_MAX_DIM: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Grid {
    Off,
    Coarse,
    /// Coefficients in `{0, +-1/4, +-1/2, +-1}`.
    #[default]
    Fine,
}

impl FromStr for Grid {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "off" => Ok(Grid::Off),
            "coarse" => Ok(Grid::Coarse),
            "fine" => Ok(Grid::Fine),
            _ => Err(format!("unknown grid `{s}` (expected off, coarse or fine)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budget {
    pub grid: Grid,
    pub samples: usize,
    pub hillclimb_rounds: usize,
    pub seed: u64,
    /// Grids with more instances than this are skipped.
    pub grid_limit: usize,
    pub oracle: OracleOptions,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            grid: Grid::Fine,
            samples: 1000,
            hillclimb_rounds: 200,
            seed: 0,
            grid_limit: 4_000_000,
            oracle: OracleOptions::default(),
        }
    }
}

impl Budget {
    /// Grid only, no random phases.
    pub fn exhaustive(grid: Grid) -> Self {
        Budget {
            grid,
            samples: 0,
            hillclimb_rounds: 0,
            ..Budget::default()
        }
    }

    pub fn grid_active(&self, dim: usize) -> bool {
        self.grid != Grid::Off && dim <= GRID_MAX_DIM
    }

    pub fn is_randomized(&self) -> bool {
        self.samples > 0 || self.hillclimb_rounds > 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConstantKind {
    #[serde(rename = "C_g")]
    Cg,
    #[serde(rename = "C_g_m1")]
    CgM1,
    #[serde(rename = "C_qg")]
    Cqg,
    #[serde(rename = "K_s")]
    Ks,
    #[serde(rename = "K_s_single")]
    KsSingle,
    #[serde(rename = "Delta_d")]
    DeltaD,
    #[serde(rename = "Delta_s")]
    DeltaS,
    #[serde(rename = "Delta_slc")]
    DeltaSlc,
    #[serde(rename = "Q_star")]
    QStar,
    #[serde(rename = "Q_star_singleton")]
    QStarSingleton,
}

impl ConstantKind {
    pub const ALL: [ConstantKind; 10] = [
        ConstantKind::Cg,
        ConstantKind::CgM1,
        ConstantKind::Cqg,
        ConstantKind::Ks,
        ConstantKind::KsSingle,
        ConstantKind::DeltaD,
        ConstantKind::DeltaS,
        ConstantKind::DeltaSlc,
        ConstantKind::QStar,
        ConstantKind::QStarSingleton,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConstantKind::Cg => "C_g",
            ConstantKind::CgM1 => "C_g_m1",
            ConstantKind::Cqg => "C_qg",
            ConstantKind::Ks => "K_s",
            ConstantKind::KsSingle => "K_s_single",
            ConstantKind::DeltaD => "Delta_d",
            ConstantKind::DeltaS => "Delta_s",
            ConstantKind::DeltaSlc => "Delta_slc",
            ConstantKind::QStar => "Q_star",
            ConstantKind::QStarSingleton => "Q_star_singleton",
        }
    }
}

impl fmt::Display for ConstantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConstantKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ConstantKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown constant `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundDirection {
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate<S> {
    pub kind: ConstantKind,
    pub value: f64,
    pub bound_direction: BoundDirection,
    /// Absent only when no admissible instance reached ratio one.
    pub witness: Option<Witness<S>>,
    pub samples_used: usize,
    pub degenerate_skipped: usize,
    pub strategy: String,
}

impl<S: Scalar> ConstantEstimate<S> {
    fn from_outcome(kind: ConstantKind, o: Outcome<S>) -> Self {
        let (value, witness) = match o.best {
            Some((r, w)) if r >= 1.0 => (r, Some(w)),
            _ => (1.0, None),
        };
        ConstantEstimate {
            kind,
            value,
            bound_direction: BoundDirection::Lower,
            witness,
            samples_used: o.samples_used,
            degenerate_skipped: o.degenerate,
            strategy: o.strategy,
        }
    }

    /// Keeps the larger of two estimates of the same constant; `self` wins
    /// ties. Counters add up.
    fn absorb(mut self, other: Self, label: &str) -> Self {
        if other.value > self.value {
            self.value = other.value;
            self.witness = other.witness;
        }
        self.samples_used += other.samples_used;
        self.degenerate_skipped += other.degenerate_skipped;
        self.strategy = format!("{}; {label}: {}", self.strategy, other.strategy);
        self
    }

    /// Re-evaluates the witness from scratch.
    pub fn replay(&self, space: &Space) -> Option<f64> {
        self.witness.as_ref().and_then(|w| w.ratio(space))
    }
}

pub(crate) fn check_field<S: Scalar>(space: &Space) -> Result<()> {
    if S::KIND != space.mode().kind() {
        return Err(Error::Config(format!(
            "scalar type does not match the space's field ({})",
            space.mode()
        )));
    }
    Ok(())
}

fn greedy_family<'a, S: Scalar>(space: &'a Space, budget: &Budget, ms: Vec<usize>) -> GreedyFamily<'a, S> {
    GreedyFamily {
        space,
        src: FSource::new(space, budget.grid),
        ms,
        opts: budget.oracle,
    }
}

/// `sup ||f - G_m f|| / sigma_m(f)` over `m` in `ms`, reported as `kind`.
pub(crate) fn greedy_estimate<S: Scalar>(
    space: &Space,
    kind: ConstantKind,
    ms: Vec<usize>,
    budget: &Budget,
    exec: &Exec,
) -> ConstantEstimate<S> {
    let o = search(&greedy_family(space, budget, ms), budget, space.dim(), exec);
    ConstantEstimate::from_outcome(kind, o)
}

/// Greedy constant restricted to the gap sequence `gaps`.
pub fn estimate_gap_constant<S: Scalar>(
    space: &Space,
    gaps: &[usize],
    budget: &Budget,
    exec: &Exec,
) -> Result<ConstantEstimate<S>> {
    check_field::<S>(space)?;
    check_gaps(gaps, space.dim())?;
    let mut e = greedy_estimate(space, ConstantKind::Cg, gaps.to_vec(), budget, exec);
    let list: Vec<String> = gaps.iter().map(|n| n.to_string()).collect();
    e.strategy = format!("gaps {}: {}", list.join(","), e.strategy);
    Ok(e)
}

/// Quasi-greedy ratio restricted to `m` in `ms` (all `m` when `None`).
pub(crate) fn quasi_greedy_estimate<S: Scalar>(
    space: &Space,
    ms: Option<Vec<usize>>,
    budget: &Budget,
    exec: &Exec,
) -> ConstantEstimate<S> {
    let fam = QuasiGreedyFamily {
        space,
        src: FSource::new(space, budget.grid),
        ms,
    };
    ConstantEstimate::from_outcome(ConstantKind::Cqg, search(&fam, budget, space.dim(), exec))
}

fn suppression_estimate<S: Scalar>(space: &Space, single: bool, budget: &Budget, exec: &Exec) -> ConstantEstimate<S> {
    let fam = SuppressionFamily {
        space,
        src: FSource::new(space, budget.grid),
        single,
    };
    let kind = if single { ConstantKind::KsSingle } else { ConstantKind::Ks };
    ConstantEstimate::from_outcome(kind, search(&fam, budget, space.dim(), exec))
}

fn democracy_estimate<S: Scalar>(space: &Space, signed: bool, budget: &Budget, exec: &Exec) -> ConstantEstimate<S> {
    let o = democracy::democracy(space, signed, budget, exec);
    let kind = if signed { ConstantKind::DeltaS } else { ConstantKind::DeltaD };
    ConstantEstimate::from_outcome(
        kind,
        Outcome {
            best: o.best,
            samples_used: o.evaluations,
            degenerate: 0,
            strategy: o.strategy,
        },
    )
}

/// Estimates one constant on the given budget.
pub fn estimate<S: Scalar>(
    space: &Space,
    kind: ConstantKind,
    budget: &Budget,
    exec: &Exec,
) -> Result<ConstantEstimate<S>> {
    check_field::<S>(space)?;
    let d = space.dim();
    let roles = || Roles::<S>::new(space, budget.grid);
    Ok(match kind {
        ConstantKind::Cg => {
            let native = greedy_estimate(space, kind, (1..d).collect(), budget, exec);
            let m1 = greedy_estimate(space, kind, vec![1], budget, exec);
            native.absorb(m1, "m=1")
        }
        ConstantKind::CgM1 => greedy_estimate(space, kind, vec![1], budget, exec),
        ConstantKind::Cqg => quasi_greedy_estimate(space, None, budget, exec),
        ConstantKind::Ks => {
            let native = suppression_estimate(space, false, budget, exec);
            let single = suppression_estimate(space, true, budget, exec);
            let mut e = native.absorb(single, "singletons");
            e.kind = ConstantKind::Ks;
            e
        }
        ConstantKind::KsSingle => suppression_estimate(space, true, budget, exec),
        ConstantKind::DeltaD => democracy_estimate(space, false, budget, exec),
        ConstantKind::DeltaS => democracy_estimate(space, true, budget, exec),
        ConstantKind::DeltaSlc => {
            ConstantEstimate::from_outcome(kind, search(&SlcFamily(roles()), budget, d, exec))
        }
        ConstantKind::QStar => {
            let native = ConstantEstimate::from_outcome(kind, search(&QStarFamily(roles()), budget, d, exec));
            let mut single = ConstantEstimate::from_outcome(kind, search(&SingletonFamily(roles()), budget, d, exec));
            single.witness = single.witness.map(|w| w.singleton_as_q_star().unwrap_or(w));
            native.absorb(single, "singletons")
        }
        ConstantKind::QStarSingleton => {
            ConstantEstimate::from_outcome(kind, search(&SingletonFamily(roles()), budget, d, exec))
        }
    })
}
