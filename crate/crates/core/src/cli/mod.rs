//! Batch front-end: run configurations, reports and exit codes.
//!
//! A report is a header (tool, timing) plus a config echo and per-space
//! results. Everything outside the header is a pure function of the
//! config, so reruns produce identical bytes there.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{estimate, Budget, ConstantEstimate, ConstantKind, Grid};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::greedy::{check_gaps, greedy_ordering, suppress, SupportSet};
use crate::oracle::{sigma_m, Method, OracleOptions};
use crate::scalar::{Scalar, ScalarMode};
use crate::space::{CoeffVec, Space, MAX_DIM};
use crate::theorems::{self, Status, Verdict};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "tga";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATED: i32 = 2;
pub const EXIT_ATTENTION: i32 = 3;
pub const EXIT_CONFIG: i32 = 64;
pub const EXIT_SPACE: i32 = 65;
pub const EXIT_IO: i32 = 74;

/// Scalar mode as `real` or `complex:<k>`.
mod mode_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::scalar::ScalarMode;

    pub fn serialize<Se: Serializer>(m: &ScalarMode, s: Se) -> Result<Se::Ok, Se::Error> {
        s.collect_str(m)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ScalarMode, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(format!("unknown format `{s}` (expected json or csv)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Suite {
    #[serde(rename = "1un")]
    OneUn,
    #[serde(rename = "qg")]
    QuasiGreedy,
    #[serde(rename = "cor1")]
    Cor1,
    #[serde(rename = "corsym")]
    CorSym,
    #[serde(rename = "1sym")]
    OneSym,
    #[serde(rename = "main")]
    Main,
    #[serde(rename = "gaps")]
    Gaps,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::OneUn,
        Suite::QuasiGreedy,
        Suite::Cor1,
        Suite::CorSym,
        Suite::OneSym,
        Suite::Main,
        Suite::Gaps,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::OneUn => "1un",
            Suite::QuasiGreedy => "qg",
            Suite::Cor1 => "cor1",
            Suite::CorSym => "corsym",
            Suite::OneSym => "1sym",
            Suite::Main => "main",
            Suite::Gaps => "gaps",
        }
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}` (expected 1un, qg, cor1, corsym, 1sym, main or gaps)"))
    }
}

/// Short names accepted next to the canonical ones.
pub fn parse_kind(s: &str) -> std::result::Result<ConstantKind, String> {
    let k = match s.trim() {
        "Cg" => ConstantKind::Cg,
        "Cg1" | "Cgm1" => ConstantKind::CgM1,
        "Cqg" => ConstantKind::Cqg,
        "Ks" => ConstantKind::Ks,
        "Ks1" => ConstantKind::KsSingle,
        "Delta" | "Deltad" => ConstantKind::DeltaD,
        "Deltas" => ConstantKind::DeltaS,
        "Deltaslc" => ConstantKind::DeltaSlc,
        "Q" => ConstantKind::QStar,
        "Q1" => ConstantKind::QStarSingleton,
        other => return other.parse(),
    };
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetSpec {
    pub grid: Grid,
    pub samples: usize,
    pub hillclimb_rounds: usize,
    pub grid_limit: usize,
    pub method: Method,
}

impl Default for BudgetSpec {
    fn default() -> Self {
        let b = Budget::default();
        BudgetSpec {
            grid: b.grid,
            samples: b.samples,
            hillclimb_rounds: b.hillclimb_rounds,
            grid_limit: b.grid_limit,
            method: b.oracle.method,
        }
    }
}

impl BudgetSpec {
    pub fn is_randomized(&self) -> bool {
        self.samples > 0 || self.hillclimb_rounds > 0
    }

    pub fn to_budget(self, seed: u64) -> Budget {
        Budget {
            grid: self.grid,
            samples: self.samples,
            hillclimb_rounds: self.hillclimb_rounds,
            seed,
            grid_limit: self.grid_limit,
            oracle: OracleOptions {
                method: self.method,
                ..OracleOptions::default()
            },
        }
    }
}

/// One batch run. The worker count is not part of the config: it never
/// changes results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub space: String,
    /// Empty for weighted families, which take the dimension from their
    /// weights.
    #[serde(default)]
    pub dims: Vec<usize>,
    #[serde(default, with = "mode_text")]
    pub field: ScalarMode,
    #[serde(default)]
    pub kinds: Vec<String>,
    #[serde(default)]
    pub suites: Vec<String>,
    #[serde(default)]
    pub gaps: Vec<usize>,
    #[serde(default)]
    pub budget: BudgetSpec,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

impl RunConfig {
    pub fn new(space: impl Into<String>) -> Self {
        RunConfig {
            space: space.into(),
            dims: Vec::new(),
            field: ScalarMode::Real,
            kinds: Vec::new(),
            suites: Vec::new(),
            gaps: Vec::new(),
            budget: BudgetSpec::default(),
            seed: None,
            out: None,
            format: Format::Json,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks everything that does not need a space.
    pub fn validate(&self) -> Result<(Vec<ConstantKind>, Vec<Suite>)> {
        let bad = |m: String| Err(Error::Config(m));
        let kinds = self
            .kinds
            .iter()
            .map(|k| parse_kind(k).map_err(Error::Config))
            .collect::<Result<Vec<_>>>()?;
        let suites = self
            .suites
            .iter()
            .map(|s| s.trim().parse::<Suite>().map_err(Error::Config))
            .collect::<Result<Vec<_>>>()?;
        if kinds.is_empty() && suites.is_empty() {
            return bad("nothing to run: the kinds and suites lists are empty".into());
        }
        if let Some(&d) = self.dims.iter().find(|&&d| d == 0 || d > MAX_DIM) {
            return bad(format!("dimension {d} outside 1..={MAX_DIM}"));
        }
        if self.budget.is_randomized() && self.seed.is_none() {
            return bad("a seed is required when samples or hill-climb rounds are nonzero".into());
        }
        if suites.contains(&Suite::Gaps) && self.gaps.is_empty() {
            return bad("the gaps suite needs a gap sequence".into());
        }
        Ok((kinds, suites))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub started_unix_ms: u128,
    pub wall_time_ms: u128,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Findings<S> {
    pub estimates: Vec<ConstantEstimate<S>>,
    pub verdicts: Vec<Verdict<S>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldFindings {
    Real(Findings<f64>),
    Complex(Findings<Complex64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceResult {
    pub space: String,
    pub dim: usize,
    #[serde(with = "mode_text")]
    pub field: ScalarMode,
    pub seed: Option<u64>,
    pub findings: FieldFindings,
}

impl SpaceResult {
    fn statuses(&self) -> Vec<(bool, bool)> {
        fn of<S>(v: &[Verdict<S>]) -> Vec<(bool, bool)> {
            v.iter()
                .map(|v| (v.is_violated(), matches!(v.status, Status::NeedsAttention { .. })))
                .collect()
        }
        match &self.findings {
            FieldFindings::Real(f) => of(&f.verdicts),
            FieldFindings::Complex(f) => of(&f.verdicts),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub header: Header,
    pub config: RunConfig,
    pub results: Vec<SpaceResult>,
}

impl Report {
    /// 0 when every verdict holds, 2 on a violation, 3 when a verdict needs
    /// attention (a failed transport among them).
    pub fn exit_code(&self) -> i32 {
        let all: Vec<(bool, bool)> = self.results.iter().flat_map(|r| r.statuses()).collect();
        if all.iter().any(|s| s.0) {
            EXIT_VIOLATED
        } else if all.iter().any(|s| s.1) {
            EXIT_ATTENTION
        } else {
            EXIT_OK
        }
    }
}

pub fn error_exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::BadGaps { .. } => EXIT_CONFIG,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_SPACE,
    }
}

fn run_space<S: Scalar>(
    space: &Space,
    kinds: &[ConstantKind],
    suites: &[Suite],
    gaps: &[usize],
    budget: &Budget,
    exec: &Exec,
) -> Result<Findings<S>> {
    let estimates = kinds
        .iter()
        .map(|&k| estimate::<S>(space, k, budget, exec))
        .collect::<Result<Vec<_>>>()?;
    let verdicts = suites
        .iter()
        .map(|s| match s {
            Suite::OneUn => theorems::check_prop_1un(space, budget, exec),
            Suite::QuasiGreedy => theorems::check_quasi_greedy_induction(space, budget, exec),
            Suite::Cor1 => theorems::check_cor1(space, budget, exec),
            Suite::CorSym => theorems::check_corsym(space, budget, exec),
            Suite::OneSym => theorems::check_theorem_1sym(space, budget, exec),
            Suite::Main => theorems::check_theorem_main(space, budget, exec),
            Suite::Gaps => theorems::check_gap_corollary(space, gaps, budget, exec),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Findings { estimates, verdicts })
}

/// Executes a config. Results do not depend on the executor.
pub fn run(config: &RunConfig, exec: &Exec) -> Result<Report> {
    let start = Instant::now();
    let started_unix_ms = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis());
    let (kinds, suites) = config.validate()?;
    let budget = config.budget.to_budget(config.seed.unwrap_or(0));
    let dims: Vec<Option<usize>> = if config.dims.is_empty() {
        vec![None]
    } else {
        config.dims.iter().map(|&d| Some(d)).collect()
    };
    let mut results = Vec::new();
    for dim in dims {
        let space = Space::parse(&config.space, dim, config.field)?;
        if suites.contains(&Suite::Gaps) {
            check_gaps(&config.gaps, space.dim())?;
        }
        let findings = match config.field {
            ScalarMode::Real => {
                FieldFindings::Real(run_space(&space, &kinds, &suites, &config.gaps, &budget, exec)?)
            }
            ScalarMode::Complex { .. } => {
                FieldFindings::Complex(run_space(&space, &kinds, &suites, &config.gaps, &budget, exec)?)
            }
        };
        results.push(SpaceResult {
            space: space.descriptor(),
            dim: space.dim(),
            field: config.field,
            seed: config.seed,
            findings,
        });
    }
    Ok(Report {
        schema_version: SCHEMA_VERSION,
        header: Header {
            tool: TOOL.into(),
            version: VERSION.into(),
            started_unix_ms,
            wall_time_ms: start.elapsed().as_millis(),
        },
        config: config.clone(),
        results,
    })
}

/// Rectangular row of the CSV flattening; witnesses stay in JSON.
#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    section: &'static str,
    space: &'a str,
    dim: usize,
    field: String,
    seed: Option<u64>,
    name: String,
    value: f64,
    status: String,
    samples_used: usize,
    degenerate_skipped: usize,
    summary: String,
}

fn csv_rows<'a, S>(r: &'a SpaceResult, f: &Findings<S>, out: &mut Vec<CsvRow<'a>>) {
    for e in &f.estimates {
        out.push(CsvRow {
            section: "estimate",
            space: &r.space,
            dim: r.dim,
            field: r.field.to_string(),
            seed: r.seed,
            name: e.kind.name().into(),
            value: e.value,
            status: "lower_bound".into(),
            samples_used: e.samples_used,
            degenerate_skipped: e.degenerate_skipped,
            summary: e.strategy.clone(),
        });
    }
    for v in &f.verdicts {
        let status = match &v.status {
            Status::HoldsOnBudget => "holds_on_budget",
            Status::Violated { .. } => "violated",
            Status::NeedsAttention { .. } => "needs_attention",
        };
        out.push(CsvRow {
            section: "verdict",
            space: &r.space,
            dim: r.dim,
            field: r.field.to_string(),
            seed: r.seed,
            name: v.claim_id.clone(),
            value: v.detail.worst_ratio,
            status: status.into(),
            samples_used: v.detail.instances,
            degenerate_skipped: 0,
            summary: v.detail.summary.clone(),
        });
    }
}

pub fn to_csv(report: &Report) -> Result<String> {
    let mut rows = Vec::new();
    for r in &report.results {
        match &r.findings {
            FieldFindings::Real(f) => csv_rows(r, f, &mut rows),
            FieldFindings::Complex(f) => csv_rows(r, f, &mut rows),
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

pub fn to_json(report: &Report) -> Result<String> {
    serde_json::to_string_pretty(report).map_err(|e| Error::Io(e.to_string()))
}

pub fn render(report: &Report, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(report),
        Format::Csv => to_csv(report),
    }
}

pub fn write_report(report: &Report, path: &Path, format: Format) -> Result<()> {
    std::fs::write(path, render(report, format)?)?;
    Ok(())
}

/// Coefficients separated by commas or whitespace; complex entries as
/// `a+bi`.
pub fn parse_vector<S: Scalar + FromStr>(text: &str) -> Result<CoeffVec<S>> {
    let v = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<S>().map_err(|_| Error::Config(format!("cannot parse coefficient `{t}`"))))
        .collect::<Result<Vec<S>>>()?;
    if v.is_empty() {
        return Err(Error::Config("empty vector".into()));
    }
    Ok(CoeffVec(v))
}

fn one_based(s: SupportSet) -> Vec<usize> {
    s.iter0().map(|j| j + 1).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreedyReport {
    pub ordering: Vec<usize>,
    pub greedy_set: Vec<usize>,
    pub residual_norm: f64,
}

pub fn greedy_report<S: Scalar>(space: &Space, f: &CoeffVec<S>, m: usize) -> Result<GreedyReport> {
    space.check_vector(f)?;
    if m > space.dim() {
        return Err(Error::Config(format!("m = {m} exceeds the dimension {}", space.dim())));
    }
    let ordering = greedy_ordering(f);
    let set = ordering.prefix_set(m);
    Ok(GreedyReport {
        ordering: ordering.order.iter().map(|j| j + 1).collect(),
        greedy_set: one_based(set),
        residual_norm: space.norm_of(&suppress(f, set)),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaReport<S> {
    pub value: f64,
    pub support: Vec<usize>,
    pub coeffs: Vec<S>,
}

pub fn sigma_report<S: Scalar>(space: &Space, f: &CoeffVec<S>, m: usize, method: Method) -> Result<SigmaReport<S>> {
    let opts = OracleOptions {
        method,
        ..OracleOptions::default()
    };
    let r = sigma_m(space, f, m, &opts)?;
    Ok(SigmaReport {
        value: r.value,
        support: one_based(r.support),
        coeffs: r.coeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> RunConfig {
        RunConfig {
            dims: vec![3],
            kinds: vec!["Cg".into(), "Delta".into()],
            seed: Some(7),
            budget: BudgetSpec {
                samples: 50,
                hillclimb_rounds: 10,
                ..BudgetSpec::default()
            },
            ..RunConfig::new("lp:2")
        }
    }

    #[test]
    fn kind_aliases() {
        assert_eq!(parse_kind("Cg"), Ok(ConstantKind::Cg));
        assert_eq!(parse_kind("Q"), Ok(ConstantKind::QStar));
        assert_eq!(parse_kind("K_s_single"), Ok(ConstantKind::KsSingle));
        assert!(parse_kind("nope").is_err());
    }

    #[test]
    fn validation() {
        let mut c = config();
        c.kinds.clear();
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let mut c = config();
        c.seed = None;
        assert!(c.validate().is_err());
        c.budget = BudgetSpec {
            samples: 0,
            hillclimb_rounds: 0,
            ..BudgetSpec::default()
        };
        assert!(c.validate().is_ok());
        let mut c = config();
        c.dims = vec![13];
        assert_eq!(error_exit_code(&c.validate().unwrap_err()), EXIT_CONFIG);
    }

    #[test]
    fn report_round_trip_and_determinism() {
        let c = config();
        let a = run(&c, &Exec::Sequential).unwrap();
        let b = run(&c, &Exec::with_threads(3)).unwrap();
        assert_eq!(a.results, b.results);
        let text = to_json(&a).unwrap();
        let back: Report = serde_json::from_str(&text).unwrap();
        assert_eq!(back, a);
        assert_eq!(a.exit_code(), EXIT_OK);
        let csv = to_csv(&a).unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(!csv.contains("witness"));
    }

    #[test]
    fn toml_config() {
        let c = RunConfig::from_toml(
            r#"
            space = "wl1:1,2"
            suites = ["main"]
            seed = 7
            field = "complex:4"
            [budget]
            samples = 20
            "#,
        )
        .unwrap();
        assert_eq!(c.budget.samples, 20);
        assert_eq!(c.budget.grid, Grid::Fine);
        assert_eq!(c.field, ScalarMode::Complex { k_roots: 4 });
        assert!(RunConfig::from_toml("space = 1").is_err());
    }

    #[test]
    fn bad_space_is_a_space_error() {
        let mut c = config();
        c.space = "lp:0.5".into();
        let e = run(&c, &Exec::Sequential).unwrap_err();
        assert_eq!(error_exit_code(&e), EXIT_SPACE);
    }

    #[test]
    fn greedy_and_sigma_reports() {
        let s = Space::real("lp:2", Some(3)).unwrap();
        let f = parse_vector::<f64>("3, -4 0").unwrap();
        let g = greedy_report(&s, &f, 1).unwrap();
        assert_eq!(g.ordering, vec![2, 1, 3]);
        assert_eq!(g.greedy_set, vec![2]);
        assert!((g.residual_norm - 3.0).abs() < 1e-12);
        let r = sigma_report(&s, &f, 1, Method::Auto).unwrap();
        assert_eq!(r.support, vec![2]);
        let z = parse_vector::<Complex64>("1+2i,0").unwrap();
        assert_eq!(z[0], Complex64::new(1.0, 2.0));
        assert!(parse_vector::<f64>("x").is_err());
    }
}
