use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn setyoung(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_setyoung")).args(args).output().unwrap()
}

fn write_config(dir: &Path, v: Value) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, v.to_string()).unwrap();
    p.to_str().unwrap().to_string()
}

fn results(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("results.json")).unwrap()).unwrap()
}

#[test]
fn every_claim_carries_provenance() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), serde_json::json!({"params": {"samples": 4000, "lipschitz_pairs": 20}}));
    let out = d.path().join("out");
    let o = setyoung(&["steiner", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = results(&out);
    let allowed = ["paper_bound", "our_constant_choice", "measured"];
    for c in r["claims"].as_array().unwrap() {
        assert!(allowed.contains(&c["provenance"].as_str().unwrap()));
    }
    for c in r["checks"].as_array().unwrap() {
        assert_eq!(c["measured"]["provenance"], "measured");
        assert!(allowed.contains(&c["bound"]["provenance"].as_str().unwrap()));
    }
    let csv = std::fs::read_to_string(out.join("series.csv")).unwrap();
    assert!(csv.starts_with("samples,error_norm,std_error_norm\n"));
}

#[test]
fn seed_flag_overrides_config() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), serde_json::json!({"seed": 1, "params": {"hurst": 0.7, "seeds": 50}}));
    let out = d.path().join("out");
    let o = setyoung(&["fbm-check", "--config", &cfg, "--seed", "9", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(results(&out)["seed"], 9);
}

#[test]
fn out_dir_from_config_is_used() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("from-config");
    let cfg = write_config(
        d.path(),
        serde_json::json!({"out_dir": out.to_str().unwrap(), "params": {"hurst": 0.7, "seeds": 50}}),
    );
    assert!(setyoung(&["fbm-check", "--config", &cfg]).status.success());
    assert!(out.join("results.json").exists());
}

#[test]
fn usage_errors_exit_with_two() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().to_str().unwrap();
    assert_eq!(setyoung(&["no-such-command"]).status.code(), Some(2));
    let cfg = write_config(d.path(), serde_json::json!({"params": {"stpes": 10}}));
    let o = setyoung(&["young", "--config", &cfg, "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("stpes"));
    let cfg = write_config(d.path(), serde_json::json!({"command": "young"}));
    assert_eq!(setyoung(&["metrics", "--config", &cfg, "--out", out]).status.code(), Some(2));
    // example3 has no default for n_max
    assert_eq!(setyoung(&["example3", "--out", out]).status.code(), Some(2));
}

#[test]
fn strict_mode_turns_failed_checks_into_exit_one() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("out");
    let cfg = write_config(d.path(), serde_json::json!({"params": {"relative_tolerance": 1e-9}}));
    let o = setyoung(&["discretize", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(results(&out)["all_checks_passed"], false);
    let o = setyoung(&["discretize", "--config", &cfg, "--out", out.to_str().unwrap(), "--strict"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn numerical_failures_exit_with_three() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), serde_json::json!({"params": {"r": 1e-9, "steps": 32}}));
    let o = setyoung(&["aumann", "--config", &cfg, "--out", d.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}
