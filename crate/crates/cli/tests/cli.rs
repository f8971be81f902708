use std::process::{Command, Output};

use exactgeom::scroll::{double_conic_verify, instance_from_seed, InstanceJson, QuarticInstance};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn exactgeom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_exactgeom"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn small_n_is_a_usage_error() {
    let out = exactgeom(&["verify", "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("usage error"));
}

#[test]
fn bad_filter_and_range_are_usage_errors() {
    assert_eq!(exactgeom(&["verify", "--n", "6", "--filter", "["]).status.code(), Some(2));
    assert_eq!(exactgeom(&["verify", "--n", "6", "--filter", "none.*"]).status.code(), Some(2));
    assert_eq!(exactgeom(&["verify", "--range", "6-8"]).status.code(), Some(2));
    assert_eq!(exactgeom(&["verify"]).status.code(), Some(2));
    assert_eq!(exactgeom(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn list_checks_prints_catalogue() {
    let out = exactgeom(&["list-checks"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("l1.pairing.gamma")));
    assert!(text.lines().any(|l| l.starts_with("scroll.smoothness")));
}

#[test]
fn verify_emits_json_report() {
    let out = exactgeom(&["verify", "--range", "5..6", "--filter", "surface.*,moduli.*", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["meta"]["n_range"], serde_json::json!([5, 6]));
    assert_eq!(v["meta"]["seed"], 3);
    assert_eq!(v["summary"]["fail"], 0);
    assert!(v["checks"].as_array().unwrap().len() > 10);
}

#[test]
fn verify_text_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.txt");
    let out = exactgeom(&[
        "verify", "--n", "6", "--filter", "elimination.*", "--format", "text", "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("FLAG n=6   elimination.twistor-first"));
    assert!(text.contains("summary:"));
}

#[test]
fn scroll_reports_are_deterministic() {
    let args = ["verify", "--n", "5", "--filter", "scroll.*", "--seed", "42", "--instances", "4", "--samples", "2"];
    let a = exactgeom(&args);
    let b = exactgeom(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn emit_instance_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.json");
    let out = exactgeom(&["emit-instance", "--n", "6", "--seed", "9", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let j: InstanceJson = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let inst = QuarticInstance::from_json(&j).unwrap();
    let orig = instance_from_seed(6, 9).unwrap();
    assert_eq!(inst.big_f, orig.big_f);
    assert_eq!(inst.to_json(), j);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    assert!(double_conic_verify(&inst, &mut rng).unwrap().pass());
}

#[test]
fn emitted_quartic_shape() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("four.json");
    assert!(exactgeom(&["emit-instance", "--n", "4", "--seed", "1", "--out", path.to_str().unwrap()])
        .status
        .success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for key in v["F"].as_object().unwrap().keys() {
        let exps: Vec<u32> = key.split(',').map(|e| e.parse().unwrap()).collect();
        assert_eq!(exps.len(), 5);
        assert_eq!(exps.iter().sum::<u32>(), 4);
    }
}

#[test]
fn unwritable_path_fails() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("x.json");
    let out = exactgeom(&["emit-instance", "--n", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}
