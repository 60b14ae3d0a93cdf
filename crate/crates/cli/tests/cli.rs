use std::path::Path;
use std::process::{Command, Output};

use resonance_core::construct::{check_support, BandGeometry};
use resonance_core::quadform::resonance_ratio;
use resonance_core::ResonatorSet;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_resonance"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "bad JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn construct_gal_writes_eight_elements() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("gal.json");
    let out = run(&["construct", "--kind", "gal", "--x", "5", "--ell", "2", "--out", p(&file)]);
    assert!(out.status.success());
    let summary = json(&out);
    assert_eq!(summary["size"], 8);
    let set = ResonatorSet::load(&file).unwrap();
    assert_eq!(set.len(), 8);
}

#[test]
fn construct_near_half_is_threshold_compliant_on_reload() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("nh.json");
    let out = run(&[
        "construct", "--kind", "near-half", "--N", "10000", "--sigma", "0.6", "--budget", "2000", "--out", p(&file),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["thresholdCompliant"], true);
    let set = ResonatorSet::load(&file).unwrap();
    assert!(set.len() <= 2000);
    let params = set.params();
    let g = BandGeometry::new(params.n, params.sigma, params.alpha).unwrap();
    check_support(&set, &g, params.a).unwrap();
}

#[test]
fn a_alpha_violation_exits_2() {
    let out = run(&["construct", "--kind", "near-half", "--N", "10000", "--sigma", "0.6", "--alpha", "0.9", "--a", "1.2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("a*alpha < 1"));
}

#[test]
fn ratio_gal_with_oracle() {
    let out = run(&["ratio", "--gal", "--x", "5", "--ell", "2", "--sigma", "1", "--oracle"]);
    assert!(out.status.success());
    let v = json(&out);
    assert!((v["ratio"].as_f64().unwrap() - 77.0 / 48.0).abs() < 1e-14);
    assert_eq!(v["oracle-match"], true);
}

#[test]
fn ratio_klimit_one_is_one() {
    let out = run(&["ratio", "--gal", "--x", "7", "--ell", "3", "--sigma", "0.7", "--klimit", "1"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["ratio"].as_f64(), Some(1.0));
}

#[test]
fn ratio_on_saved_set_matches_in_process() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("nh.json");
    let c = run(&["construct", "--kind", "near-half", "--N", "1000", "--sigma", "0.7", "--budget", "300", "--out", p(&file)]);
    assert!(c.status.success());
    let out = run(&["ratio", "--set", p(&file), "--oracle"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let set = ResonatorSet::load(&file).unwrap();
    let direct = resonance_ratio(&set, set.params().sigma, f64::INFINITY).unwrap().ratio;
    assert_eq!(v["ratio"].as_f64(), Some(direct));
    assert_eq!(v["oracle-match"], true);
}

#[test]
fn ratio_without_a_set_is_a_parameter_error() {
    assert_eq!(run(&["ratio"]).status.code(), Some(2));
}

#[test]
fn certify_gal_logs_witness() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("runs.jsonl");
    let out = run(&["certify", "--kind", "gal", "--sigma", "1", "--T", "5000", "--run-log", p(&log)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let cert = v["certificate"].as_f64().unwrap();
    assert!((cert - 1.6).abs() < 0.01);
    assert!(v["witness"]["value"].as_f64().unwrap() >= cert);
    let lines = std::fs::read_to_string(&log).unwrap();
    assert_eq!(lines.lines().count(), 1);
    let rec: Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    assert_eq!(rec["config"]["command"], "certify");
    assert_eq!(rec["result"]["certificate"].as_f64(), Some(cert));
}

#[test]
fn certify_singleton_stays_below_scan() {
    let out = run(&["certify", "--kind", "gal", "--x", "1.5", "--ell", "1", "--sigma", "0.75", "--T", "2000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(v["certificate"].as_f64().unwrap() <= v["witness"]["value"].as_f64().unwrap());
}

#[test]
fn unconverged_quadrature_exits_3() {
    let out = run(&["certify", "--kind", "gal", "--T", "5000", "--max-levels", "0"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn desk_cap_refuses_large_t() {
    let out = run(&["scan", "--T", "1e6"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("desk cap"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"sigma": 0.75, "x": 7, "ell": 2, "deskCaps": {"maxT": 100}}"#).unwrap();
    let out = run(&["ratio", "--gal", "--config", p(&cfg), "--sigma", "1"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["sigma"].as_f64(), Some(1.0));
    // x = 7 comes from the file
    let table = resonance_core::sieve_primes(10).unwrap();
    let want = resonance_core::quadform::gal_ratio_product(&table, 7.0, 2, 1.0).unwrap();
    assert_eq!(v["ratio"].as_f64(), Some(want));
    // the file's desk cap applies
    let out = run(&["scan", "--config", p(&cfg), "--T", "1000"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"sigmaa": 0.75}"#).unwrap();
    assert_eq!(run(&["bounds", "--config", p(&cfg)]).status.code(), Some(2));
}

#[test]
fn scan_is_reproducible_per_seed() {
    let args = ["scan", "--T", "3000", "--budget", "300", "--seed", "9"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert!(v["tStar"].as_f64().unwrap() >= 1500.0);
}

#[test]
fn bounds_emits_csv_by_default() {
    let out = run(&["bounds", "--sigma", "0.6,0.8", "--T", "1e6,1e8"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("sigma,T,nuFloor,nuAsym,predictedLogMax,levinson,W,fgh"));
    assert_eq!(lines.count(), 4);
    let out = run(&["bounds", "--sigma", "0.6", "--T", "1e6", "--format", "json"]);
    assert_eq!(json(&out)[0]["nuFloor"].as_f64(), Some(1.25));
}

#[test]
fn csv_unavailable_for_ratio() {
    assert_eq!(run(&["ratio", "--gal", "--format", "csv"]).status.code(), Some(2));
}

#[test]
fn verify_only_runs_subset() {
    let out = run(&["verify", "--only", "quadform", "--seed", "42"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let gates = v["gates"].as_array().unwrap();
    assert!(!gates.is_empty());
    assert!(gates.iter().all(|g| g["group"] == "quadform" && g["passed"] == true));
    assert!(gates.iter().all(|g| g["measured"].is_object()));
}

#[test]
fn verify_unknown_group_exits_2() {
    assert_eq!(run(&["verify", "--only", "everything"]).status.code(), Some(2));
}
