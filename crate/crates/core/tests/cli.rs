use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn twostate(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twostate"))
        .args(args)
        .env_remove("TWOSTATE_SEED")
        .output()
        .expect("binary runs")
}

fn scenario(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    root.join(name).display().to_string()
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

fn headline(doc: &Value, name: &str) -> f64 {
    doc["headline"]
        .as_array()
        .unwrap()
        .iter()
        .find(|h| h["name"] == name)
        .unwrap_or_else(|| panic!("no headline {name}"))["value"]
        .as_f64()
        .unwrap()
}

fn probability(doc: &Value, label: &str, eigenvalue: f64) -> f64 {
    let m = doc["runs"][0]["measurements"]
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["label"] == label)
        .unwrap();
    m["outcomes"]
        .as_array()
        .unwrap()
        .iter()
        .find(|o| (o["eigenvalue"].as_f64().unwrap() - eigenvalue).abs() < 1e-9)
        .unwrap()["probability"]
        .as_f64()
        .unwrap()
}

#[test]
fn three_box_scenario_finds_the_ball() {
    let out = twostate(&["run", &scenario("three_box.json"), "--exact"]);
    let doc = stdout_json(&out);
    assert!((probability(&doc, "box1", 1.0) - 1.0).abs() < 1e-12);
    assert_eq!(doc["mode"], "exact");
}

#[test]
fn every_shipped_scenario_runs_except_the_inconsistent_one() {
    for name in [
        "three_box.json",
        "erased_past.json",
        "teleport_backward.json",
        "flip_singlet.json",
    ] {
        for format in ["json", "csv", "table"] {
            let out = twostate(&["run", &scenario(name), "--format", format]);
            assert!(
                out.status.success(),
                "{name} {format}: {}",
                String::from_utf8_lossy(&out.stderr)
            );
        }
    }
}

#[test]
fn inconsistent_selection_exits_3() {
    let out = twostate(&["run", &scenario("inconsistent.json")]);
    assert_eq!(out.status.code(), Some(3));
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn malformed_event_names_its_index() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"version": 1, "systems": [{"name": "q", "dim": 2}],
            "events": [{"type": "preselect", "state": "up"},
                       {"type": "teleport", "targets": ["q"]}]}"#,
    )
    .unwrap();
    let out = twostate(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("event 1"), "{err}");
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"version": 1, "systems": [{"name": "q", "dim": 2}],
            "events": [{"type": "measure", "observable": "sigma_z", "targets": ["r"], "label": "m"}]}"#,
    )
    .unwrap();
    let out = twostate(&["run", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let missing = twostate(&["run", "/nonexistent/scenario.json"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn sampled_runs_follow_the_seed() {
    let path = scenario("erased_past.json");
    let run = |seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_twostate"));
        cmd.args(["run", &path, "--shots", "20000"])
            .env_remove("TWOSTATE_SEED");
        if let Some(s) = seed {
            cmd.env("TWOSTATE_SEED", s);
        }
        stdout_json(&cmd.output().unwrap())
    };
    let default = run(None);
    assert_eq!(default["seed"], 1);
    assert_eq!(default["mode"], "sampled");
    assert_eq!(default, run(None));
    let seeded = run(Some("7"));
    assert_eq!(seeded["seed"], 7);
    assert_ne!(default["runs"], seeded["runs"]);
}

#[test]
fn teleported_outcome_is_certain() {
    let out = twostate(&[
        "experiment",
        "teleport-backward",
        "--A",
        "sigma_z",
        "--a",
        "+1",
        "--B",
        "sigma_z",
        "--format",
        "json",
    ]);
    let doc = stdout_json(&out);
    assert!((headline(&doc, "p(+1)") - 1.0).abs() < 1e-12);
    for bell in ["phi+", "phi-", "psi+", "psi-"] {
        assert!((headline(&doc, &format!("p_bell_{bell}")) - 0.25).abs() < 1e-12);
    }
}

#[test]
fn negative_eigenvalue_flag() {
    let out = twostate(&[
        "experiment",
        "teleport-backward",
        "--a",
        "-1",
        "--B",
        "sigma_x",
        "--format",
        "json",
    ]);
    let doc = stdout_json(&out);
    assert!((headline(&doc, "p(+1)") - 0.5).abs() < 1e-12);
    let bad = twostate(&["experiment", "teleport-backward", "--a", "3"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn cloning_audit_separates_the_cloner_from_physical_channels() {
    let ideal = stdout_json(&twostate(&[
        "experiment",
        "cloning-audit",
        "--format",
        "json",
    ]));
    assert!((headline(&ideal, "trace_distance") - 0.5).abs() < 1e-12);
    assert_eq!(headline(&ideal, "physical"), 0.0);

    let random = stdout_json(&twostate(&[
        "experiment",
        "cloning-audit",
        "--channel",
        "random-cptp",
        "--trials",
        "100",
        "--format",
        "json",
    ]));
    assert!(headline(&random, "max_trace_distance") <= 1e-10);
    assert_eq!(headline(&random, "trials"), 100.0);
}

#[test]
fn unknown_experiment_lists_the_catalog() {
    let out = twostate(&["experiment", "four-box"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    for name in [
        "erase",
        "three-box",
        "teleport-backward",
        "flip",
        "cloning-audit",
    ] {
        assert!(err.contains(name), "{err}");
    }
}

#[test]
fn list_is_stable() {
    let a = twostate(&["list"]);
    let b = twostate(&["list"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("three-box"));
    assert!(text.contains("cloning-audit"));
}

#[test]
fn csv_and_json_carry_the_same_digits() {
    let path = scenario("teleport_backward.json");
    let json = stdout_json(&twostate(&["run", &path, "--format", "json"]));
    let csv = twostate(&["run", &path, "--format", "csv"]);
    let csv = String::from_utf8(csv.stdout).unwrap();
    let mut rows = csv.lines();
    assert_eq!(rows.next(), Some("section,label,index,eigenvalue,value"));
    let mut from_csv = Vec::new();
    for row in rows {
        let cells: Vec<&str> = row.split(',').collect();
        if cells[1] != "postselection_probability" {
            from_csv.push(cells[4].parse::<f64>().unwrap());
        }
    }
    let from_json: Vec<f64> = json["runs"][0]["measurements"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|m| m["outcomes"].as_array().unwrap().clone())
        .map(|o| o["probability"].as_f64().unwrap())
        .collect();
    assert_eq!(from_csv, from_json);
}
