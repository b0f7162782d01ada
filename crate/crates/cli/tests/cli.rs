// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const DATA: &str = "synthetic:linearly_separable:1000:1";

fn recourse(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_recourse"))
        .args(args)
        .current_dir(dir)
        .env_remove("RECOURSE_SEED")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = recourse(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn read_json(p: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn linear_model(dir: &Path) -> String {
    ok(dir, &["train", "--data", DATA, "--model", "linear", "--seed", "1", "-o", "m.json"])
}

#[test]
fn train_prints_accuracy() {
    let dir = tempfile::tempdir().unwrap();
    let line = linear_model(dir.path());
    let acc: f64 = line
        .split_whitespace()
        .find_map(|w| w.strip_prefix("accuracy="))
        .unwrap()
        .parse()
        .unwrap();
    assert!(acc >= 0.95, "{line}");
    assert!(line.contains("loss="));
    assert!(dir.path().join("m.json").is_file());
}

#[test]
fn train_on_missing_file_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = recourse(dir.path(), &["train", "--data", "nope.csv", "--target", "y", "-o", "m.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn unknown_subcommand_and_preset_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(recourse(dir.path(), &["frobnicate"]).status.code(), Some(2));
    linear_model(dir.path());
    let out = recourse(
        dir.path(),
        &["generate", "--data", DATA, "--model", "m.json", "--target", "2", "--generator", "wizard"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("wizard"));
}

#[test]
fn generate_writes_valid_explanation() {
    let dir = tempfile::tempdir().unwrap();
    linear_model(dir.path());
    ok(
        dir.path(),
        &["generate", "--data", DATA, "--model", "m.json", "--target", "2", "--seed", "4", "-o", "e.json"],
    );
    let e = read_json(dir.path().join("e.json"));
    assert_eq!(e["target"], 2);
    assert_eq!(e["generator"], "generic");
    assert_eq!(e["valid"][0], true);
    assert_eq!(e["converged_reason"], "threshold_reached");
    let path = e["path"].as_array().unwrap();
    assert_eq!(path.len(), e["iterations"].as_u64().unwrap() as usize + 1);
    assert_eq!(path[0][0], e["factual"]);
}

#[test]
fn generate_dice_returns_requested_count() {
    let dir = tempfile::tempdir().unwrap();
    linear_model(dir.path());
    ok(
        dir.path(),
        &[
            "generate", "--data", DATA, "--model", "m.json", "--target", "2", "--generator", "dice",
            "--num-counterfactuals", "5", "-o", "d.json",
        ],
    );
    let e = read_json(dir.path().join("d.json"));
    assert_eq!(e["counterfactuals"].as_array().unwrap().len(), 5);
}

#[test]
fn generate_count_writes_an_array() {
    let dir = tempfile::tempdir().unwrap();
    linear_model(dir.path());
    ok(
        dir.path(),
        &["generate", "--data", DATA, "--model", "m.json", "--target", "2", "--count", "3", "-o", "e.json"],
    );
    let e = read_json(dir.path().join("e.json"));
    assert_eq!(e.as_array().unwrap().len(), 3);
}

#[test]
fn unreachable_boundary_exits_one_with_output() {
    let dir = tempfile::tempdir().unwrap();
    linear_model(dir.path());
    let out = recourse(
        dir.path(),
        &[
            "generate", "--data", DATA, "--model", "m.json", "--target", "2", "--mutability", "none,both",
            "--max-iter", "30", "-o", "e.json",
        ],
    );
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    let e = read_json(dir.path().join("e.json"));
    assert_eq!(e["converged_reason"], "max_iter");
    assert_eq!(e["valid"][0], false);
}

#[test]
fn evaluate_reports_requested_measures() {
    let dir = tempfile::tempdir().unwrap();
    linear_model(dir.path());
    ok(
        dir.path(),
        &["generate", "--data", DATA, "--model", "m.json", "--target", "2", "--count", "4", "-o", "e.json"],
    );
    let csv = ok(
        dir.path(),
        &[
            "evaluate", "--data", DATA, "--model", "m.json", "--explanations", "e.json", "--measure",
            "distance_mad", "--json", "r.json",
        ],
    );
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "index,validity,distance_mad,iterations,reason");
    assert_eq!(lines.count(), 4);
    let r = read_json(dir.path().join("r.json"));
    assert!(r["aggregates"]["distance_mad"]["mean"].as_f64().unwrap() > 0.0);
}

#[test]
fn evaluate_empty_list_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    linear_model(dir.path());
    std::fs::write(dir.path().join("e.json"), "[]").unwrap();
    let out = recourse(
        dir.path(),
        &["evaluate", "--data", DATA, "--model", "m.json", "--explanations", "e.json"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn benchmark_summary_lists_every_generator() {
    let dir = tempfile::tempdir().unwrap();
    linear_model(dir.path());
    let summary = ok(
        dir.path(),
        &[
            "benchmark", "--data", DATA, "--model", "m.json", "--generator", "generic,gravitational", "--target",
            "2", "--n-samples", "8", "--seed", "2", "-o", "b.csv", "--summary", "s.txt",
        ],
    );
    let rows: Vec<&str> = summary.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].split_whitespace().nth(1) == Some("generic"));
    assert!(rows[1].split_whitespace().nth(1) == Some("gravitational"));
    assert_eq!(std::fs::read_to_string(dir.path().join("s.txt")).unwrap(), summary);
    let csv = std::fs::read_to_string(dir.path().join("b.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), recourse::eval::BENCHMARK_HEADER);
    assert_eq!(csv.lines().count(), 1 + 2 * 8);
}

#[test]
fn seed_falls_back_to_environment() {
    let dir = tempfile::tempdir().unwrap();
    linear_model(dir.path());
    let run = |seed: &str, out: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_recourse"))
            .args(["generate", "--data", DATA, "--model", "m.json", "--target", "2", "-o", out])
            .current_dir(dir.path())
            .env("RECOURSE_SEED", seed)
            .status()
            .unwrap();
        assert!(status.success());
    };
    run("11", "a.json");
    ok(
        dir.path(),
        &["generate", "--data", DATA, "--model", "m.json", "--target", "2", "--seed", "11", "-o", "b.json"],
    );
    assert_eq!(
        std::fs::read(dir.path().join("a.json")).unwrap(),
        std::fs::read(dir.path().join("b.json")).unwrap()
    );
}

#[test]
fn plot_writes_grid_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    linear_model(dir.path());
    ok(
        dir.path(),
        &["generate", "--data", DATA, "--model", "m.json", "--target", "2", "--index", "0", "-o", "e.json"],
    );
    ok(
        dir.path(),
        &[
            "plot", "--data", DATA, "--model", "m.json", "--target", "2", "--explanations", "e.json", "--grid", "30",
            "-o", "p.svg",
        ],
    );
    let grid = std::fs::read_to_string(dir.path().join("p.csv")).unwrap();
    assert_eq!(grid.lines().count(), 30 * 30 + 1);
    assert_eq!(grid.lines().next().unwrap(), "x1,x2,p_target");
    let svg = std::fs::read_to_string(dir.path().join("p.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert!(svg.contains(r#"class="path""#) && svg.contains(r#"class="factual""#));
}

#[test]
fn plot_path_is_vertical_for_immutable_first_feature() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["train", "--data", "synthetic:overlapping", "--model", "linear", "--seed", "1", "-o", "m.json"],
    );
    let out = recourse(
        dir.path(),
        &[
            "generate", "--data", "synthetic:overlapping", "--model", "m.json", "--target", "2", "--mutability",
            "none,both", "--max-iter", "40", "--index", "0", "-o", "e.json", "--plot", "p.svg",
        ],
    );
    assert!(matches!(out.status.code(), Some(0 | 1)));
    let svg = std::fs::read_to_string(dir.path().join("p.svg")).unwrap();
    let line = svg.lines().find(|l| l.contains(r#"class="path""#)).unwrap();
    let points = line.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
    let xs: Vec<&str> = points.split(' ').map(|p| p.split(',').next().unwrap()).collect();
    assert!(xs.len() > 1);
    assert!(xs.iter().all(|x| *x == xs[0]), "{xs:?}");
}

#[test]
fn plot_refuses_more_than_two_features() {
    let dir = tempfile::tempdir().unwrap();
    let gmsc = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/gmsc_standin.csv");
    ok(
        dir.path(),
        &["train", "--data", gmsc, "--target", "SeriousDlqin2yrs", "--model", "linear", "--epochs", "5", "-o", "m.json"],
    );
    let out = recourse(
        dir.path(),
        &["plot", "--data", gmsc, "--target-column", "SeriousDlqin2yrs", "--model", "m.json", "--target", "0", "-o", "p.svg"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2-D"));
    assert!(!dir.path().join("p.svg").exists());
}

#[test]
fn gmsc_age_never_decreases() {
    let dir = tempfile::tempdir().unwrap();
    let gmsc = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/gmsc_standin.csv");
    ok(
        dir.path(),
        &["train", "--data", gmsc, "--target", "SeriousDlqin2yrs", "--model", "mlp", "--epochs", "30", "-o", "m.json"],
    );
    let out = recourse(
        dir.path(),
        &[
            "generate", "--data", gmsc, "--target-column", "SeriousDlqin2yrs", "--model", "m.json", "--target", "0",
            "--mutability", "age=increase", "--generator", "gravitational", "--count", "5", "-o", "e.json",
        ],
    );
    assert!(matches!(out.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&out.stderr));
    let list = read_json(dir.path().join("e.json"));
    for e in list.as_array().unwrap() {
        let age0 = e["factual"][1].as_f64().unwrap();
        for step in e["path"].as_array().unwrap() {
            assert!(step[0][1].as_f64().unwrap() >= age0);
        }
        let orig0 = e["factual_original"][1].as_f64().unwrap();
        assert!(e["counterfactuals_original"][0][1].as_f64().unwrap() >= orig0 - 1e-9);
    }
}
