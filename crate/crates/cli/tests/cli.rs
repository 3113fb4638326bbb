use std::process::{Command, Output};

use serde_json::Value;

fn ordstat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ordstat"))
        .args(args)
        .env_remove("ORDSTAT_ENUM_BUDGET")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn num(v: &Value, path: &[&str]) -> f64 {
    path.iter().fold(v, |v, k| &v[*k]).as_f64().unwrap_or_else(|| panic!("no number at {path:?}"))
}

#[test]
fn bound_for_three_points() {
    let out = ordstat(&["bound", "--N", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(num(&v, &["outputs", "rho_bound"]), 0.421052631579);
    assert_eq!(v["outputs"]["rho_bound_exact"], "8/19");
}

#[test]
fn bound_for_rational_masses_and_pairs() {
    let v = json(&ordstat(&["bound", "--p", "1/16,3/8,9/16", "--i", "1", "--j", "2", "--n", "2"]));
    assert_eq!(v["outputs"]["rational_bound_exact"], "85/171");
    assert_eq!(num(&v, &["outputs", "rational_denominator"]), 16.0);
    assert_eq!(num(&v, &["outputs", "tsm_bound"]), 0.5);
}

#[test]
fn rho_from_population_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pop.json");
    std::fs::write(&path, r#"{"values": [1, 2, 4]}"#).unwrap();
    let out = ordstat(&["rho", "--pop", path.to_str().unwrap(), "--i", "1", "--j", "2", "--n", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let rho = num(&json(&out), &["outputs", "rho"]);
    assert!((rho - 1.0 / 6f64.sqrt()).abs() < 1e-11, "{rho}");
}

#[test]
fn maxcorr_three_points() {
    let v = json(&ordstat(&["maxcorr", "--N", "3"]));
    let r = num(&v, &["outputs", "R"]);
    assert!((r - (2.0 + 19f64.sqrt()) / 15.0).abs() < 1e-11);
}

#[test]
fn quartic_regimes() {
    for (gamma, kind) in [
        ("1,1", "min_at_zero"),
        ("4/3,2/3", "interior_min_positive"),
        ("1,8/5", "min_negative"),
        ("1,2", "unbounded_below"),
    ] {
        let out = ordstat(&["quartic", "--lambda", "0.6875", "--gamma", gamma]);
        assert_eq!(out.status.code(), Some(0), "{gamma}");
        assert_eq!(json(&out)["outputs"]["kind"], kind, "{gamma}");
    }
    let v = json(&ordstat(&["quartic", "--from-N", "9"]));
    assert_eq!(v["outputs"]["kind"], "min_at_zero");
}

#[test]
fn search_is_deterministic_and_records_seed() {
    let args = ["search", "--p", "1/16,3/8,9/16", "--monotone", "--restarts", "12", "--seed", "7"];
    let a = ordstat(&args);
    let b = ordstat(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(num(&v, &["inputs", "seed"]), 7.0);
    assert!(num(&v, &["outputs", "value"]) > 0.3623);
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = ordstat(&["sweep", "--from-N", "3", "--to-N", "8", "--csv", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("N,rho_lattice,bound,maxcorr,margin"));
    assert_eq!(lines.count(), 6);
    assert_eq!(json(&out)["outputs"]["rows"].as_array().unwrap().len(), 6);
}

#[test]
fn verify_passes_without_conjecture_checks() {
    let out = ordstat(&["verify", "--no-conjecture"]);
    let v = json(&out);
    let failed: Vec<&Value> = v["checks"].as_array().unwrap().iter().filter(|c| c["pass"] == false).collect();
    assert!(failed.is_empty(), "{failed:?}");
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn verify_flags_the_three_sample_formula() {
    let out = ordstat(&["verify", "--restarts", "16"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    let failed: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["pass"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(!failed.is_empty());
    assert!(failed.iter().all(|n| n.starts_with("search_1_3_3_N")), "{failed:?}");
    assert!(!failed.contains(&"search_1_3_3_N3"));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(ordstat(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(ordstat(&["rho", "--N", "3", "--p", "1/2,1/2"]).status.code(), Some(2));
    assert_eq!(ordstat(&["rho", "--pop", "/nonexistent/pop.json"]).status.code(), Some(2));
    assert_eq!(ordstat(&["rho", "--N", "3", "--i", "2", "--j", "1"]).status.code(), Some(2));
    assert_eq!(ordstat(&["bound"]).status.code(), Some(2));
    assert_eq!(ordstat(&["quartic", "--lambda", "-1", "--gamma", "1"]).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_ordstat"))
        .args(["rho", "--N", "3"])
        .env("ORDSTAT_ENUM_BUDGET", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn budget_only_changes_the_method() {
    let args = ["rho", "--N", "6", "--i", "2", "--j", "4", "--n", "5"];
    let a = json(&ordstat(&args));
    let out = Command::new(env!("CARGO_BIN_EXE_ordstat")).args(args).env("ORDSTAT_ENUM_BUDGET", "0").output().unwrap();
    let b = json(&out);
    let (x, y) = (num(&a, &["outputs", "rho"]), num(&b, &["outputs", "rho"]));
    assert!((x - y).abs() < 1e-11, "{x} vs {y}");
}

#[test]
fn timing_is_opt_in() {
    assert!(json(&ordstat(&["bound", "--N", "4"])).get("elapsed_ms").is_none());
    assert!(json(&ordstat(&["bound", "--N", "4", "--timing"])).get("elapsed_ms").is_some());
}
