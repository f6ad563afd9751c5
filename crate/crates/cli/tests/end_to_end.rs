use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

const BIN: &str = env!("CARGO_BIN_EXE_bryant-forge");

const FIXTURES: [&str; 5] = ["horosphere", "enneper-cousin", "catenoid-cousin-dual", "elliptic-catenoid-face", "irregular-end"];

const MODULES: [&str; 6] = ["bryant_data", "null_lift", "immersion", "duality", "geometry_analysis", "coverage"];

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{name}.json"))
}

fn run(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args);
    match threads {
        Some(n) => cmd.env("BRYANT_FORGE_THREADS", n),
        None => cmd.env_remove("BRYANT_FORGE_THREADS"),
    };
    cmd.output().expect("binary runs")
}

fn analyze(config: &Path, threads: Option<&str>) -> Output {
    run(&["analyze", "--config", config.to_str().unwrap()], threads)
}

fn write_json(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn load(name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(fixture(name)).unwrap()).unwrap()
}

#[test]
fn exit_code_triple() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(&["validate", "--config", fixture("horosphere").to_str().unwrap()], None);
    assert_eq!(ok.status.code(), Some(0));

    // g = 1/z has a simple pole at 0 that f = 1 does not compensate
    let mut bad = load("horosphere");
    bad["g"] = json!({"numer": [[1, 0]], "denom": [[0, 0], [1, 0]]});
    bad["base_point"] = json!([1, 0]);
    bad["charts"] = json!([{"kind": "rect", "name": "core", "x": [0.5, 1.5], "y": [-0.5, 0.5], "n": [16, 16]}]);
    bad["analysis"] = json!({});
    bad.as_object_mut().unwrap().remove("gauss");
    let p = write_json(dir.path(), "bad.json", &bad);
    let out = run(&["validate", "--config", p.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["verdict"], "fail");
    assert_eq!(report["diagnostics"][0]["kind"], "pole_zero_mismatch");

    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, "{\"name\": \"x\",\n \"target\": ").unwrap();
    let out = run(&["validate", "--config", broken.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("line 2"), "{msg}");
}

#[test]
fn unknown_flags_and_keys_are_config_errors() {
    let out = run(&["analyze", "--config", fixture("horosphere").to_str().unwrap(), "--bogus"], None);
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let mut v = load("horosphere");
    v["colour"] = json!("red");
    let p = write_json(dir.path(), "extra.json", &v);
    assert_eq!(run(&["analyze", "--config", p.to_str().unwrap()], None).status.code(), Some(2));
}

#[test]
fn injected_omitted_values_fail_the_picard_check() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = load("catenoid-cousin-dual");
    v["test_hooks"] = json!({"inject_omitted": [[1, 0]]});
    let p = write_json(dir.path(), "inject.json", &v);
    let out = run(&["coverage", "--config", p.to_str().unwrap()], None);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["coverage"]["report"]["omitted_count"], 3);
    assert_eq!(report["coverage"]["verdict"]["status"], "fail");
    assert_eq!(report["verdict"], "fail");
}

#[test]
fn analyze_is_byte_identical_across_runs_and_thread_counts() {
    for name in FIXTURES {
        let a = analyze(&fixture(name), None);
        let b = analyze(&fixture(name), Some("1"));
        assert_eq!(a.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&a.stderr));
        assert!(a.stdout == b.stdout, "{name}: reports differ");
    }
}

#[test]
fn synth_meshes_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut meshes = Vec::new();
    for (k, threads) in [None, Some("2")].into_iter().enumerate() {
        let out = dir.path().join(format!("run{k}.ply"));
        let o = run(
            &["synth", "--config", fixture("enneper-cousin").to_str().unwrap(), "--out", out.to_str().unwrap()],
            threads,
        );
        assert_eq!(o.status.code(), Some(0));
        meshes.push(std::fs::read(&out).unwrap());
    }
    assert!(meshes[0].starts_with(b"ply\n"));
    assert!(meshes[0] == meshes[1]);
}

#[test]
fn every_fixture_exercises_every_module() {
    for name in FIXTURES {
        let out = analyze(&fixture(name), None);
        let report: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(report["schema"], 1);
        let entries = report["entries"].as_array().unwrap();
        for m in MODULES {
            assert!(entries.iter().any(|e| e["module"] == m), "{name} has no {m} entry");
        }
    }
}

#[test]
fn report_is_written_to_out() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["coverage", "--config", fixture("horosphere").to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(report["coverage"]["report"]["omitted_count"], "constant");
    assert!(report["coverage"]["verdict"]["annotation"].as_str().unwrap().contains("horosphere"));
}
