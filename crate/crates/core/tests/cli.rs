use std::path::Path;
use std::process::{Command, Output};

use eol_core::harness::write_json_sorted;
use eol_core::simulator::synthetic_annotation;

fn eol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eol"))
        .args(args)
        .output()
        .unwrap()
}

fn eol_ok(args: &[&str]) -> String {
    let out = eol(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn extract_prints_object_words() {
    let out = eol_ok(&[
        "extract",
        "--sentence",
        "A woman is seen speaking to the camera while holding a accordion",
    ]);
    assert_eq!(out, "woman\naccordion\n");
}

#[test]
fn extract_without_pos_filter_keeps_camera() {
    let out = eol_ok(&[
        "extract",
        "--sentence",
        "A woman is seen speaking to the camera while holding a accordion",
        "--pos-filter",
        "false",
    ]);
    assert_eq!(out, "woman\ncamera\naccordion\n");
}

#[test]
fn usage_error_exits_2() {
    let out = eol(&["extract", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn data_error_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{not json").unwrap();
    let out = eol(&[
        "eval-loc",
        "--ann",
        bad.to_str().unwrap(),
        "--results",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bad.json"), "{stderr}");
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, String)> {
    let mut files: Vec<(String, String)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                std::fs::read_to_string(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn simulate_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let gt_path = dir.path().join("gt.json");
    write_json_sorted(&gt_path, &synthetic_annotation(5, 3, false, 7)).unwrap();
    let gt = gt_path.to_str().unwrap();

    for (name, seed) in [("a", "11"), ("b", "11"), ("c", "12")] {
        let out = dir.path().join(name);
        eol_ok(&[
            "--seed",
            seed,
            "simulate",
            "--ann",
            gt,
            "--out",
            out.to_str().unwrap(),
            "--jitter",
            "0.1",
            "--miss",
            "0.1",
        ]);
    }
    let a = read_dir_sorted(&dir.path().join("a"));
    let b = read_dir_sorted(&dir.path().join("b"));
    let c = read_dir_sorted(&dir.path().join("c"));
    assert_eq!(a.len(), 7);
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn noisy_round_trip_produces_sane_report() {
    let dir = tempfile::tempdir().unwrap();
    let gt_path = dir.path().join("gt.json");
    write_json_sorted(&gt_path, &synthetic_annotation(10, 3, true, 3)).unwrap();
    let gt = gt_path.to_str().unwrap();
    let sim = dir.path().join("sim");
    eol_ok(&[
        "simulate",
        "--ann",
        gt,
        "--out",
        sim.to_str().unwrap(),
        "--jitter",
        "0.15",
        "--miss",
        "0.2",
        "--distractors",
        "2",
    ]);
    let res = dir.path().join("res.json");
    eol_ok(&[
        "ground1",
        "--ann",
        gt,
        "--cands",
        sim.to_str().unwrap(),
        "--unify-coref",
        "--out",
        res.to_str().unwrap(),
    ]);
    let report_path = dir.path().join("report.json");
    let stdout = eol_ok(&[
        "eval-loc",
        "--ann",
        gt,
        "--results",
        res.to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
    ]);
    // stdout and --out carry the same bytes
    assert_eq!(stdout, std::fs::read_to_string(&report_path).unwrap());
    let report: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    let macro_acc = report["macro_accuracy"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&macro_acc));
    assert!(!report["per_category"].as_object().unwrap().is_empty());
}

#[test]
fn mask_is_seed_deterministic() {
    let sentence = "A man walks a dog past a car near a table and a chair";
    let args = |seed: &'static str| {
        vec!["--seed", seed, "mask", "--sentence", sentence, "--mask-rate", "0.5"]
    };
    let a = eol_ok(&args("5"));
    let b = eol_ok(&args("5"));
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(
        v["tokens"].as_array().unwrap().len(),
        sentence.split_whitespace().count()
    );
}

#[test]
fn concepts_selects_top_m() {
    let dir = tempfile::tempdir().unwrap();
    let probs = dir.path().join("probs.json");
    std::fs::write(&probs, "[[0.9, 0.1, 0.5], [0.7, 0.3, 0.5]]").unwrap();
    let out = eol_ok(&["concepts", "--probs", probs.to_str().unwrap(), "--m", "2"]);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["concepts"], serde_json::json!([0, 2]));
}
