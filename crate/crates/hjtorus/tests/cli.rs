use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hjtorus::io::parse_grid_csv;
use serde_json::Value;

fn hjtorus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hjtorus")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_weak_kam_drops_by_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"hamiltonian":{"kind":"pendulum"},"u0":"pendulum-weak-kam","t":[0,1]}"#);
    let out = dir.path().join("run");
    let res = hjtorus(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));

    let u0 = parse_grid_csv(&fs::read_to_string(out.join("u_t0.csv")).unwrap()).unwrap();
    let u1 = parse_grid_csv(&fs::read_to_string(out.join("u_t1.csv")).unwrap()).unwrap();
    assert_eq!(u0.n(), 512);
    assert!(u1.sup_distance(&u0.shifted(-1.0)) <= 0.05);

    let manifest = read_json(&out.join("manifest.json"));
    assert_eq!(manifest["command"], "solve");
    assert_eq!(manifest["n"], 512);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    for key in ["dx", "dt", "theta", "P"] {
        assert!(manifest[key].as_f64().unwrap() > 0.0, "{key}");
    }
    let slab = fs::read_to_string(out.join("slab.csv")).unwrap();
    assert!(slab.starts_with("t,x,u\n"));
    assert_eq!(slab.lines().count(), 1 + 2 * 512);
}

#[test]
fn kinetic_constant_stays_flat() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"hamiltonian":{"kind":"kinetic"},"u0":"const:0.3"}"#);
    let out = dir.path().join("flat");
    let res = hjtorus(&["solve", "--config", &cfg, "--n", "128", "--t", "0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    let u = parse_grid_csv(&fs::read_to_string(out.join("u_t0.5.csv")).unwrap()).unwrap();
    assert!(u.values().iter().all(|&v| v == 0.3));
}

#[test]
fn oracle_within_tolerance_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"hamiltonian":{"kind":"kinetic"},"u0":"sawtooth","t":[0.25]}"#);
    let out = dir.path().join("oracle");
    assert_eq!(hjtorus(&["oracle", "--config", &cfg, "--out", out.to_str().unwrap()]).status.code(), Some(0));
    let csv = fs::read_to_string(out.join("compare_t0.25.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,scheme,hopf_lax,abs_error,tolerance"));
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert!(cols[3] <= cols[4], "{line}");
    }
    assert_eq!(read_json(&out.join("oracle.json"))[0]["within"], true);
}

#[test]
fn oracle_rejects_other_hamiltonians() {
    let dir = tempfile::tempdir().unwrap();
    let res = hjtorus(&["oracle", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    for bad in [
        "{",
        "[]",
        r#"{"n": "big"}"#,
        r#"{"unknown": 1}"#,
        r#"{"hamiltonian":{"kind":"spline"}}"#,
        r#"{"u0":"nope"}"#,
        r#"{"t":[-1]}"#,
    ] {
        let cfg = write_config(dir.path(), bad);
        let res = hjtorus(&["solve", "--config", &cfg, "--out", out]);
        assert_eq!(res.status.code(), Some(2), "{bad}");
        assert!(!String::from_utf8_lossy(&res.stderr).contains("panicked"));
    }
    assert_eq!(hjtorus(&["solve", "--n", "100", "--out", out]).status.code(), Some(2));
    assert_eq!(hjtorus(&["solve", "--config", "/nonexistent/config.json"]).status.code(), Some(2));
    assert_eq!(hjtorus(&["solve", "--t", "0.5,abc"]).status.code(), Some(2));
    assert_eq!(hjtorus(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"hamiltonian":{"kind":"mechanical","cos":[2000]},"u0":"cosine"}"#);
    let res = hjtorus(&["solve", "--config", &cfg, "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn reruns_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"hamiltonian":{"kind":"pendulum"},"u0":"sawtooth","t":[0.25,0.5],"n":256}"#);
    let out = dir.path().join("run");
    let read_all = || {
        let mut files: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().path()).collect();
        files.sort();
        files.into_iter().map(|p| (p.clone(), fs::read(p).unwrap())).collect::<Vec<_>>()
    };
    assert_eq!(hjtorus(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]).status.code(), Some(0));
    let first = read_all();
    assert_eq!(hjtorus(&["solve", "--config", &cfg, "--out", out.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(first, read_all());
    assert!(first.iter().all(|(p, _)| p.extension().unwrap() != "tmp"));
}

#[test]
fn bracket_of_pendulum_pair_vanishes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    assert_eq!(hjtorus(&["bracket", "--out", out.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(read_json(&out.join("bracket.json"))["bracket_sup"], 0.0);

    let cfg = write_config(dir.path(), r#"{"hamiltonian":{"kind":"pendulum"},"second":{"kind":"kinetic"},"radius":2}"#);
    assert_eq!(hjtorus(&["bracket", "--config", &cfg, "--out", out.to_str().unwrap()]).status.code(), Some(0));
    assert!(read_json(&out.join("bracket.json"))["bracket_sup"].as_f64().unwrap() > 1.0);
}

#[test]
fn critical_value_of_pendulum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let res = hjtorus(&["critical", "--n", "256", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    let report = read_json(&out.join("critical.json"));
    let c = report["c_estimate"].as_f64().unwrap();
    assert!((0.95..=1.05).contains(&c));
    assert_eq!(report["history"].as_array().unwrap().len(), 4);
}

#[test]
fn defect_report_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    let res = hjtorus(&["defect", "--n", "128", "--t", "0,0.5", "--s", "0,0.25,0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    let report = read_json(&out.join("defect.json"));
    let keys: Vec<&str> = report.as_object().unwrap().keys().map(String::as_str).collect();
    let mut expected = vec!["argmax", "defect", "max_defect", "refinement", "s_grid", "t_grid", "verdict"];
    expected.sort();
    let mut keys = keys;
    keys.sort();
    assert_eq!(keys, expected);
    assert_eq!(report["defect"].as_array().unwrap().len(), 2);
    assert_eq!(report["defect"][0].as_array().unwrap().len(), 3);
    assert_eq!(report["refinement"][1][0], 256);
    assert_eq!(report["verdict"], "nonexistence_evidence");

    let cfg = write_config(dir.path(), r#"{"hamiltonian":{"kind":"pendulum"},"second":{"kind":"kinetic"},"n":128}"#);
    assert_eq!(hjtorus(&["defect", "--config", &cfg, "--out", out.to_str().unwrap()]).status.code(), Some(0));
    assert_eq!(read_json(&out.join("defect.json"))["verdict"], "unclassified");
}

#[test]
fn flow_and_regularity_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f");
    let cfg = write_config(dir.path(), r#"{"hamiltonian":{"kind":"kinetic"},"u0":"const:1","n":128,"t":[0.5,1]}"#);
    assert_eq!(hjtorus(&["flow", "--config", &cfg, "--out", out.to_str().unwrap()]).status.code(), Some(0));
    let flow = read_json(&out.join("flow.json"));
    assert_eq!(flow["invariant"], true);
    assert_eq!(flow["pushes"].as_array().unwrap().len(), 2);
    assert!(fs::read_to_string(out.join("graph_t1.csv")).unwrap().starts_with("x,p\n"));

    let out = dir.path().join("r");
    let res = hjtorus(&["regularity", "--n", "256", "--t", "0,0.5", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0));
    let reg = read_json(&out.join("regularity.json"));
    assert_eq!(reg[0]["c11"], true);
    assert!(reg[1]["semiconcavity_C"].as_f64().unwrap() >= reg[1]["semiconvexity_C"].as_f64().unwrap());
}

#[test]
fn pendulum_demo_reports_nonexistence() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("demo");
    let res = hjtorus(&["pendulum-demo", "--n", "256", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let summary = read_json(&out.join("summary.json"));
    assert_eq!(summary["verdict"], "nonexistence_evidence");
    assert_eq!(summary["weak_kam_c11"], false);
    assert_eq!(summary["zero_section_folds"], true);
    let c = summary["critical_value"].as_f64().unwrap();
    assert!((0.95..=1.05).contains(&c));
    for name in ["defect.json", "regularity.json", "critical.json", "weak_kam.csv", "manifest.json"] {
        assert!(out.join(name).exists(), "{name}");
    }
}
