//! Acceptance suite: one pass/fail line per criterion.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use tga::constants::estimate_gap_constant;
use tga::greedy::{greedy_set, suppress};
use tga::theorems::{
    chaining_identity, check_cor1, check_corsym, check_gap_corollary, check_prop_1un, check_quasi_greedy_induction,
    check_theorem_1sym, check_theorem_main, transport_slc_to_greedy, Gamma, Status, TransportOutcome,
    SUMMARY_ALL_EXCEED, SUMMARY_ALL_ONES,
};
use tga::{
    estimate, sigma_m, Budget, CoeffVec, ConstantKind, Exec, Grid, Method, OracleOptions, SignVec, Space, SupportSet,
    Witness,
};

type Check = std::result::Result<String, String>;

const LP: [&str; 4] = ["1", "2", "4", "inf"];
const GRID: [f64; 7] = [0.0, 0.25, -0.25, 0.5, -0.5, 1.0, -1.0];

fn exec() -> Exec {
    Exec::from_env(None)
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn grid_vectors(dim: usize) -> impl Iterator<Item = Vec<f64>> {
    (0..GRID.len().pow(dim as u32)).map(move |mut i| {
        (0..dim)
            .map(|_| {
                let v = GRID[i % GRID.len()];
                i /= GRID.len();
                v
            })
            .collect()
    })
}

fn random_vectors(dim: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    if rng.random_bool(0.2) {
                        0.0
                    } else {
                        rng.sample::<f64, _>(StandardNormal)
                    }
                })
                .collect()
        })
        .collect()
}

/// First nonzero coefficient positive and largest modulus one: the ratio
/// is invariant under the scalings that reach this form.
fn canonical(f: &[f64]) -> bool {
    f.iter().find(|x| **x != 0.0).is_some_and(|x| *x > 0.0) && f.iter().any(|x| x.abs() == 1.0)
}

/// Largest `|ratio - 1|` of `||f - G_m f|| / sigma_m(f)` over `m`.
fn greedy_defect(space: &Space, f: &[f64], opts: &OracleOptions) -> f64 {
    let supp = f.iter().filter(|x| **x != 0.0).count();
    (1..supp)
        .map(|m| {
            let res = space.norm_of(&suppress(f, greedy_set(f, m)));
            let sig = sigma_m(space, f, m, opts).expect("oracle").value;
            (res / sig - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

fn criterion_1() -> Check {
    let fast = OracleOptions {
        method: Method::FastPath,
        ..OracleOptions::default()
    };
    let generic = OracleOptions::generic();
    let ex = exec();
    let mut slowest = Duration::ZERO;
    for p in LP {
        for dim in 3..=6 {
            let space = Space::real(&format!("lp:{p}"), Some(dim)).map_err(|e| e.to_string())?;
            let start = Instant::now();
            let grid: Vec<Vec<f64>> = grid_vectors(dim).collect();
            let random = random_vectors(dim, 2000, 1000 + dim as u64);
            let worst = |vs: &[Vec<f64>], opts: &OracleOptions, filter: fn(&[f64]) -> bool| {
                ex.map_reduce(
                    vs.len(),
                    0.0f64,
                    |i| if filter(&vs[i]) { greedy_defect(&space, &vs[i], opts) } else { 0.0 },
                    f64::max,
                )
            };
            let all: fn(&[f64]) -> bool = |_| true;
            let fast_worst = worst(&grid, &fast, all).max(worst(&random, &fast, all));
            ensure(fast_worst <= 1e-9, || format!("lp:{p} dim {dim}: fast path defect {fast_worst:e}"))?;
            let gen_worst = worst(&grid, &generic, canonical).max(worst(&random, &generic, all));
            ensure(gen_worst <= 1e-6, || format!("lp:{p} dim {dim}: generic defect {gen_worst:e}"))?;
            let took = start.elapsed();
            ensure(took < Duration::from_secs(60), || format!("lp:{p} dim {dim} took {took:?}"))?;
            slowest = slowest.max(took);
        }
    }
    Ok(format!("all ratios 1, slowest (p, dim) {:.1}s", slowest.as_secs_f64()))
}

/// Weighted l1 norm, written out independently of the library.
fn wl1(w: &[f64], v: &[f64]) -> f64 {
    w.iter().zip(v).map(|(w, x)| w * x.abs()).sum()
}

/// `sigma_1` by scanning every index and a dense coefficient grid.
fn brute_sigma1(w: &[f64], h: &[f64]) -> f64 {
    let mut best = f64::INFINITY;
    for j in 0..h.len() {
        let mut cands: Vec<f64> = (-40_000..=40_000).map(|i| i as f64 * 1e-4).collect();
        cands.push(h[j]);
        for c in cands {
            let mut v = h.to_vec();
            v[j] -= c;
            best = best.min(wl1(w, &v));
        }
    }
    best
}

fn criterion_2() -> Check {
    let ex = exec();
    let budget = Budget {
        samples: 300,
        hillclimb_rounds: 50,
        seed: 11,
        ..Budget::default()
    };
    let mut ones = Vec::new();
    for p in LP {
        for dim in 2..=5 {
            ones.push((format!("lp:{p}"), Some(dim)));
        }
    }
    ones.push(("lorentz:1,1,1".into(), None));
    ones.push(("lorentz:2,2,2,2".into(), None));
    for (desc, dim) in &ones {
        let space = Space::real(desc, *dim).map_err(|e| e.to_string())?;
        let v = check_theorem_main::<f64>(&space, &budget, &ex).map_err(|e| e.to_string())?;
        ensure(v.holds() && v.detail.summary == SUMMARY_ALL_ONES, || {
            format!("{desc} dim {dim:?}: {:?} / {}", v.status, v.detail.summary)
        })?;
    }
    for desc in ["wl1:1,2", "wl1:1,2,1,1"] {
        let space = Space::real(desc, None).map_err(|e| e.to_string())?;
        let v = check_theorem_main::<f64>(&space, &budget, &ex).map_err(|e| e.to_string())?;
        ensure(v.holds() && v.detail.summary == SUMMARY_ALL_EXCEED, || {
            format!("{desc}: {:?} / {}", v.status, v.detail.summary)
        })?;
        ensure(!v.detail.transports.is_empty(), || format!("{desc}: no transports recorded"))?;
        for rec in &v.detail.transports {
            let t = match &rec.outcome {
                TransportOutcome::Transported(t) => t,
                TransportOutcome::Failed { reason } => {
                    return Err(format!("{desc}: {} -> {} failed: {reason}", rec.from, rec.to));
                }
            };
            t.witness.check_admissible(&space)?;
            let r = t.witness.ratio(&space).unwrap_or(0.0);
            ensure((r - t.ratio).abs() <= 1e-9, || format!("{desc}: replay {r} vs {}", t.ratio))?;
        }
    }

    let w = [1.0, 2.0];
    let space = Space::real("wl1:1,2", None).map_err(|e| e.to_string())?;
    let (a, b) = (SupportSet::singleton0(1), SupportSet::singleton0(0));
    let delta = Witness::Slc {
        f: CoeffVec::zeros(2),
        a,
        eps: SignVec::ones(a),
        b,
        eta: SignVec::ones(b),
    };
    let t = transport_slc_to_greedy(&space, &delta, Gamma::Fixed(0.5), &OracleOptions::default())
        .map_err(|e| e.to_string())?;
    let Witness::Greedy { f: h, m: 1, .. } = &t.witness else {
        return Err("transport did not produce an m = 1 greedy instance".into());
    };
    ensure(h.0 == vec![1.5, 1.0], || format!("h = {:?}", h.0))?;
    let residual = wl1(&w, &suppress(h, greedy_set(h, 1)));
    let ratio = residual / brute_sigma1(&w, h);
    ensure(ratio >= 4.0 / 3.0 - 1e-9, || format!("brute-force ratio {ratio}"))?;
    ensure((t.ratio - ratio).abs() <= 1e-9, || format!("library ratio {} vs brute force {ratio}", t.ratio))?;
    ensure((t.witness.ratio(&space).unwrap() - t.ratio).abs() <= 1e-9, || "replay drift".into())?;
    Ok(format!("{} all-ones spaces, 2 all-exceed spaces, gamma = 1/2 ratio {ratio:.12}", ones.len()))
}

fn criterion_3() -> Check {
    let fast = OracleOptions {
        method: Method::FastPath,
        ..OracleOptions::default()
    };
    let generic = OracleOptions::generic();
    let ex = exec();
    let spaces = [
        "lp:1",
        "lp:2",
        "lp:4",
        "lp:inf",
        "wlp:1:1,2,3,1,0.5,2",
        "wlp:2:1,2,3,1,0.5,2",
        "wlp:3:0.5,1,1,4,1,2",
    ];
    let mut worst = 0.0f64;
    for desc in spaces {
        let space = Space::real(desc, Some(6)).map_err(|e| e.to_string())?;
        let vs = random_vectors(6, 1000, 3);
        let w = ex.map_reduce(
            vs.len(),
            0.0f64,
            |i| {
                (1..=3)
                    .map(|m| {
                        let a = sigma_m(&space, &vs[i], m, &fast).expect("fast path").value;
                        let b = sigma_m(&space, &vs[i], m, &generic).expect("generic").value;
                        (a - b).abs()
                    })
                    .fold(0.0, f64::max)
            },
            f64::max,
        );
        ensure(w <= 1e-6, || format!("{desc}: generic and closed form differ by {w:e}"))?;
        worst = worst.max(w);
    }
    Ok(format!("7 spaces x 1000 vectors x m in 1..3, max gap {worst:.1e}"))
}

fn criterion_4() -> Check {
    let ex = exec();
    let budget = Budget::exhaustive(Grid::Fine);
    let space = Space::real("wl1:1,2", None).map_err(|e| e.to_string())?;
    let e = estimate::<f64>(&space, ConstantKind::DeltaD, &budget, &ex).map_err(|e| e.to_string())?;
    ensure(e.value == 2.0, || format!("Delta_d on wl1:1,2 = {}", e.value))?;
    match &e.witness {
        Some(Witness::Democracy { a, b, .. }) if a.indices() == vec![2] && b.indices() == vec![1] => {}
        other => return Err(format!("unexpected witness {other:?}")),
    }
    for p in LP {
        for dim in [2, 4, 6] {
            let space = Space::real(&format!("lp:{p}"), Some(dim)).map_err(|e| e.to_string())?;
            for kind in [ConstantKind::DeltaD, ConstantKind::DeltaS] {
                let e = estimate::<f64>(&space, kind, &budget, &ex).map_err(|e| e.to_string())?;
                ensure(e.value == 1.0, || format!("{kind} on lp:{p} dim {dim} = {}", e.value))?;
            }
        }
    }
    Ok("Delta = 2 with A = {2}, B = {1} on wl1:1,2; exactly 1 on lp".into())
}

fn criterion_5() -> Check {
    let ex = exec();
    let budget = Budget {
        samples: 500,
        hillclimb_rounds: 100,
        seed: 5,
        ..Budget::default()
    };
    let space = Space::real("wl1:1,2", None).map_err(|e| e.to_string())?;
    let q = estimate::<f64>(&space, ConstantKind::QStar, &budget, &ex).map_err(|e| e.to_string())?;
    ensure(q.value >= 2.0 - 1e-9, || format!("Q_star = {}", q.value))?;
    let expected = Witness::QStar {
        f: CoeffVec::zeros(2),
        y: CoeffVec::from_real(&[1.0, 0.0]),
        a: SupportSet::singleton0(1),
        eps: SignVec::ones(SupportSet::singleton0(1)),
    };
    ensure(q.witness.as_ref() == Some(&expected), || format!("Q_star witness {:?}", q.witness))?;
    ensure((q.replay(&space).unwrap() - q.value).abs() <= 1e-9, || "Q_star replay drift".into())?;

    let v = check_theorem_1sym::<f64>(&space, &budget, &ex).map_err(|e| e.to_string())?;
    ensure(v.holds(), || format!("1sym verdict {:?}", v.status))?;
    let single = v
        .detail
        .estimates
        .iter()
        .find(|e| e.kind == ConstantKind::QStarSingleton)
        .ok_or("no singleton estimate")?;
    ensure((single.value - q.value).abs() <= 1e-9, || format!("singleton {} vs full {}", single.value, q.value))?;
    let embedded = v
        .detail
        .transports
        .iter()
        .find_map(|t| match &t.outcome {
            TransportOutcome::Transported(t) => Some(t),
            TransportOutcome::Failed { .. } => None,
        })
        .ok_or("no identity transport")?;
    ensure(embedded.witness == expected, || format!("embedded witness {:?}", embedded.witness))?;
    ensure((embedded.ratio - single.value).abs() <= 1e-9, || "embedding changed the ratio".into())?;
    Ok(format!("Q_star = Q_star_singleton = {}", q.value))
}

/// `sigma_n` in l2: drop the `n` largest squares, by enumeration of sets.
fn brute_sigma_l2(f: &[f64], n: usize) -> f64 {
    let d = f.len();
    (0u32..1 << d)
        .filter(|m| m.count_ones() as usize == n)
        .map(|m| {
            (0..d)
                .filter(|j| m & (1 << j) == 0)
                .map(|j| f[j] * f[j])
                .sum::<f64>()
                .sqrt()
        })
        .fold(f64::INFINITY, f64::min)
}

fn criterion_6() -> Check {
    let ex = exec();
    let space = Space::real("lp:2", Some(6)).map_err(|e| e.to_string())?;
    let budget = Budget {
        grid: Grid::Off,
        samples: 500,
        hillclimb_rounds: 0,
        seed: 6,
        ..Budget::default()
    };
    let v = check_gap_corollary::<f64>(&space, &[2, 5], &budget, &ex).map_err(|e| e.to_string())?;
    ensure(v.holds(), || format!("gap verdict {:?}", v.status))?;
    ensure(v.detail.instances == 1000, || format!("{} equalities checked", v.detail.instances))?;
    let mut worst = 0.0f64;
    for f in random_vectors(6, 500, 66) {
        for n in [2, 5] {
            let res = space.norm_of(&suppress(&f, greedy_set(&f, n)));
            worst = worst.max((res - brute_sigma_l2(&f, n)).abs());
        }
    }
    ensure(worst <= 1e-6, || format!("independent check differs by {worst:e}"))?;
    let gap = estimate_gap_constant::<f64>(&space, &[2, 5], &budget, &ex).map_err(|e| e.to_string())?;
    ensure(gap.value == 1.0, || format!("gap constant {}", gap.value))?;
    Ok(format!("1000 equalities, independent max gap {worst:.1e}"))
}

fn criterion_7() -> Check {
    let ex = exec();
    let budget = Budget::exhaustive(Grid::Fine);
    let spaces: Vec<(&str, Option<usize>)> = vec![
        ("lp:1", Some(5)),
        ("lp:2", Some(5)),
        ("lp:4", Some(4)),
        ("lp:inf", Some(5)),
        ("lp:1.5", Some(4)),
        ("wl1:1,2", None),
        ("wl1:1,2,1,1", None),
        ("wlp:2:1,2,3,1", None),
        ("wlp:3:0.5,1,2,1,1", None),
        ("lorentz:2,1", None),
        ("lorentz:1,1,1,1,1", None),
        ("lorentz:3,2,1,1", None),
        ("plugin:sup_plus_half_sum", Some(4)),
        ("plugin:summing", Some(4)),
    ];
    let mut explained = 0;
    for (desc, dim) in &spaces {
        let space = Space::real(desc, *dim).map_err(|e| e.to_string())?;
        let verdicts = [
            check_prop_1un::<f64>(&space, &budget, &ex),
            check_quasi_greedy_induction::<f64>(&space, &budget, &ex),
            check_cor1::<f64>(&space, &budget, &ex),
            check_corsym::<f64>(&space, &budget, &ex),
        ];
        for v in verdicts {
            let v = v.map_err(|e| e.to_string())?;
            if let Status::Violated { witness, .. } = &v.status {
                witness.check_admissible(&space)?;
            }
            ensure(v.holds(), || format!("{desc}: {} -> {:?}", v.claim_id, v.status))?;
            explained += v.detail.explained;
        }
    }
    let chained = chaining_identity::<f64>(6, 500, 7).map_err(|(f, m)| format!("chaining fails at m = {m}, f = {:?}", f.0))?;
    Ok(format!(
        "{} spaces x 4 suites hold ({explained} exceedances explained); chaining exact in {chained} cases",
        spaces.len()
    ))
}

fn results_bytes(threads: &str) -> std::result::Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_tga"))
        .args([
            "estimate", "--space", "wl1:1,2,1,3", "--kinds", "Cg,Ks,Delta,Q", "--samples", "400", "--seed", "7",
        ])
        .env("TGA_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || String::from_utf8_lossy(&out.stderr).into_owned())?;
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    serde_json::to_string(&v["results"]).map_err(|e| e.to_string())
}

fn criterion_8() -> Check {
    let one = results_bytes("1")?;
    let eight = results_bytes("8")?;
    ensure(one == eight, || "results differ between 1 and 8 workers".into())?;
    ensure(one.len() > 100, || "empty results".into())?;
    Ok(format!("{} result bytes identical for 1 and 8 workers", one.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("1 lp bases are 1-greedy on the grid and random vectors", criterion_1),
        ("2 joint verdicts and the gamma = 1/2 transport", criterion_2),
        ("3 generic oracle agrees with the closed form", criterion_3),
        ("4 democracy constants", criterion_4),
        ("5 (Q*) chain on weighted l1", criterion_5),
        ("6 gap corollary in l2", criterion_6),
        ("7 proposition suites on built-in spaces", criterion_7),
        ("8 results independent of the worker count", criterion_8),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("criterion {name}: PASS ({msg}; {secs:.1}s)"),
            Err(msg) => {
                failed += 1;
                println!("criterion {name}: FAIL ({msg}; {secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
