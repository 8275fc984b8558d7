use std::process::{Command, Output};

use serde_json::Value;
use tga::cli::Report;

fn tga(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tga"))
        .args(args)
        .env("TGA_THREADS", "2")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn greedy_subcommand() {
    let v = json(&tga(&["greedy", "--space", "lp:2", "--vector", "3,-4,0", "--m", "1"]));
    assert_eq!(v["ordering"], serde_json::json!([2, 1, 3]));
    assert_eq!(v["greedy_set"], serde_json::json!([2]));
    assert_eq!(v["residual_norm"], 3.0);
}

#[test]
fn sigma_subcommand() {
    let v = json(&tga(&["sigma", "--space", "wl1:1,2", "--vector", "1,1", "--m", "1", "--method", "generic"]));
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(v["support"], serde_json::json!([2]));
}

#[test]
fn estimate_report_parses_back() {
    let out = tga(&["estimate", "--space", "lp:1", "--dim", "3", "--kinds", "Cg,Delta", "--seed", "3", "--samples", "50"]);
    let report: Report = serde_json::from_slice(&json_bytes(&out)).unwrap();
    assert_eq!(report.schema_version, 1);
    let again: Report = serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(report, again);
}

fn json_bytes(out: &Output) -> Vec<u8> {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out.stdout.clone()
}

#[test]
fn verify_exit_codes() {
    let ok = tga(&["verify", "--space", "wl1:1,2", "--suite", "main,1sym", "--seed", "1", "--samples", "50"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let v = json(&ok);
    let verdicts = &v["results"][0]["findings"]["real"]["verdicts"];
    assert_eq!(verdicts.as_array().unwrap().len(), 2);
    assert_eq!(verdicts[0]["status"]["status"], "holds_on_budget");
}

#[test]
fn bad_input_exit_codes() {
    assert_eq!(tga(&["estimate", "--space", "lp:2", "--kinds", "Cg"]).status.code(), Some(64));
    assert_eq!(tga(&["estimate", "--space", "lp:2", "--kinds", "Nope", "--seed", "1"]).status.code(), Some(64));
    assert_eq!(tga(&["estimate", "--space", "lp:0.3", "--kinds", "Cg", "--seed", "1"]).status.code(), Some(65));
    assert_eq!(tga(&["estimate", "--space", "lp:2", "--dim", "13", "--kinds", "Cg", "--seed", "1"]).status.code(), Some(64));
    assert_eq!(tga(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(tga(&["--help"]).status.code(), Some(0));
}

#[test]
fn run_config_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.csv");
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "space = \"lp:2\"\ndims = [2, 3]\nkinds = [\"Ks\", \"Q\"]\nseed = 9\nout = {:?}\nformat = \"csv\"\n\n[budget]\nsamples = 30\nhillclimb_rounds = 5\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let res = tga(&["run", cfg.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let mut rdr = csv::Reader::from_path(&out).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    assert!(rdr.headers().unwrap().iter().all(|h| h != "witness"));
}

#[test]
fn missing_config_is_a_config_error() {
    assert_eq!(tga(&["run", "/nonexistent/run.toml"]).status.code(), Some(64));
}
