// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cogload"))
        .args(args)
        .current_dir(root())
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, extra: &[&str]) -> PathBuf {
    let mut args = vec!["synth", "--out", s(dir)];
    args.extend_from_slice(extra);
    let out = run(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    dir.join("trace.jsonl")
}

#[test]
fn missing_input_is_a_usage_error() {
    let out = run(&["compute", "no/such/trace.jsonl"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("no/such/trace.jsonl"));
}

#[test]
fn bad_usage_exits_two() {
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["compute"])), 2);
    assert_eq!(
        code(&run(&["plot", "pie", "fixtures/golden_full.jsonl"])),
        2
    );
}

#[test]
fn corrupt_trace_names_the_step() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(root().join("fixtures/golden_full.jsonl")).unwrap();
    let lines: Vec<String> = text
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 4 {
                let start = l.find("\"cache_hits\":").unwrap() + "\"cache_hits\":".len();
                let end = start + l[start..].find(',').unwrap();
                format!("{}999{}", &l[..start], &l[end..])
            } else {
                l.to_string()
            }
        })
        .collect();
    let bad = dir.path().join("bad.jsonl");
    std::fs::write(&bad, lines.join("\n") + "\n").unwrap();

    for cmd in ["validate", "compute"] {
        let out = run(&[cmd, s(&bad), "--out", s(dir.path())]);
        assert_eq!(code(&out), 1, "{cmd}");
        assert!(stderr(&out).contains("step 3"), "{cmd}: {}", stderr(&out));
    }
    assert_eq!(code(&run(&["validate", "fixtures/golden_full.jsonl"])), 0);
    assert_eq!(code(&run(&["validate", "fixtures/golden_digest.jsonl"])), 0);
}

#[test]
fn inverted_thresholds_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lgd.json");
    std::fs::write(&cfg, r#"{"tau_warn": 0.8, "tau_act": 0.6}"#).unwrap();
    let out = run(&[
        "lgd",
        "--trace",
        "fixtures/golden_full.jsonl",
        "--lgd",
        s(&cfg),
        "--interventions",
        "configs/interventions.json",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("tau"), "{}", stderr(&out));
}

#[test]
fn fit_needs_labels() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(root().join("fixtures/golden_full.jsonl")).unwrap();
    let stripped = text
        .replace(",\"error_event\":true", "")
        .replace(",\"error_event\":false", "");
    assert_ne!(stripped, text);
    let path = dir.path().join("unlabeled.jsonl");
    std::fs::write(&path, stripped).unwrap();
    let out = run(&["fit", s(&path), "--out", s(dir.path())]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("error_event"), "{}", stderr(&out));
}

#[test]
fn fitted_weights_feed_compute() {
    let dir = tempfile::tempdir().unwrap();
    let mut traces = Vec::new();
    for seed in 0..4 {
        let d = dir.path().join(format!("t{seed}"));
        traces.push(synth(
            &d,
            &["--preset", "strong-coupling", "--seed", &seed.to_string()],
        ));
    }
    let mut args = vec!["fit", "--out", s(dir.path())];
    args.extend(traces.iter().map(|p| s(p)));
    let out = run(&args);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(dir.path().join("fit_report.txt").exists());

    let weights = dir.path().join("weights.json");
    let out_dir = dir.path().join("compute");
    let out = run(&[
        "compute",
        s(&traces[0]),
        "--weights",
        s(&weights),
        "--out",
        s(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    for f in ["points.csv", "norm_stats.json", "summary.txt"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
}

#[test]
fn empty_intervention_set_leaves_runs_identical() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("none.json");
    std::fs::write(&empty, r#"{"interventions": []}"#).unwrap();
    let never = dir.path().join("never.json");
    std::fs::write(&never, r#"{"tau_warn": 0.999, "tau_act": 1.0}"#).unwrap();
    let out = run(&[
        "lgd-simulate",
        "--synth",
        "configs/synth-default.json",
        "--lgd",
        s(&never),
        "--interventions",
        s(&empty),
        "--runs",
        "3",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let base = std::fs::read_to_string(dir.path().join("baseline_points.csv")).unwrap();
    let ctrl = std::fs::read_to_string(dir.path().join("controlled_points.csv")).unwrap();
    assert_eq!(base, ctrl);
    let history = std::fs::read_to_string(dir.path().join("history.csv")).unwrap();
    assert_eq!(history.lines().count(), 1);
}

#[test]
fn replay_writes_points_and_history() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "lgd",
        "--trace",
        "fixtures/golden_full.jsonl",
        "--lgd",
        "configs/lgd.json",
        "--interventions",
        "configs/interventions.json",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let points = std::fs::read_to_string(dir.path().join("points.csv")).unwrap();
    assert_eq!(points.lines().count(), 17);
    assert!(dir.path().join("history.csv").exists());
    let offline = run(&[
        "lgd",
        "--trace",
        "fixtures/golden_full.jsonl",
        "--lgd",
        "configs/lgd.json",
        "--interventions",
        "configs/interventions.json",
        "--mode",
        "offline",
        "--out",
        s(dir.path()),
    ]);
    assert_ne!(code(&offline), 0);
}

#[test]
fn seeded_synth_is_byte_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = synth(&dir.path().join("a"), &["--seed", "123", "--steps", "40"]);
    let b = synth(&dir.path().join("b"), &["--seed", "123", "--steps", "40"]);
    let c = synth(&dir.path().join("c"), &["--seed", "124", "--steps", "40"]);
    let read = |p: &Path| std::fs::read(p).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert_eq!(
        read(&dir.path().join("a/phases.csv")),
        read(&dir.path().join("b/phases.csv"))
    );
    let digest = synth(
        &dir.path().join("d"),
        &["--seed", "123", "--steps", "40", "--digest"],
    );
    assert_eq!(code(&run(&["validate", s(&digest)])), 0);
}

#[test]
fn every_figure_exports() {
    let dir = tempfile::tempdir().unwrap();
    let t1 = synth(&dir.path().join("s1"), &["--seed", "1", "--steps", "60"]);
    let t2 = synth(&dir.path().join("s2"), &["--seed", "2", "--steps", "60"]);
    let cases: [(&str, &[&str], &str); 7] = [
        ("curves", &[], "curves"),
        ("simplex", &["--k", "3"], "simplex"),
        ("heatmap", &[], "heatmap_entropy"),
        ("heatmap", &["--signal", "dispersion"], "heatmap_dispersion"),
        ("radar", &[], "radar"),
        ("parallel", &["--k", "3"], "parallel"),
        ("bands", &["--component", "cli"], "bands_cli"),
    ];
    for (figure, extra, name) in cases {
        let out_dir = dir.path().join(name);
        let mut args = vec!["plot", figure, s(&t1)];
        if figure == "bands" {
            args.push(s(&t2));
        }
        args.extend_from_slice(extra);
        args.extend(["--out", s(&out_dir)]);
        let out = run(&args);
        assert_eq!(code(&out), 0, "{figure}: {}", stderr(&out));
        let svg = std::fs::read_to_string(out_dir.join(format!("{name}.svg"))).unwrap();
        assert!(
            svg.starts_with("<?xml") || svg.starts_with("<svg"),
            "{name}"
        );
        assert!(svg.trim_end().ends_with("</svg>"));
        let csv = std::fs::read_to_string(out_dir.join(format!("{name}.csv"))).unwrap();
        assert!(csv.lines().count() > 1, "{name}");
    }
    let single = run(&["plot", "bands", s(&t1), "--out", s(dir.path())]);
    assert_eq!(code(&single), 1);
}

#[test]
fn analyze_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&[
        "analyze",
        "fixtures/golden_full.jsonl",
        "--out",
        s(dir.path()),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = std::fs::read_to_string(dir.path().join("analysis.txt")).unwrap();
    assert!(!text.is_empty());
    let clusters = std::fs::read_to_string(dir.path().join("clusters.csv")).unwrap();
    assert_eq!(clusters.lines().count(), 17);
}
