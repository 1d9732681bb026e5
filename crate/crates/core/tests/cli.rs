use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn chronoscope(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chronoscope"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn lists_presets() {
    let tmp = tempfile::tempdir().unwrap();
    let out = chronoscope(&["list-experiments"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["ising-fringe", "two-arrows", "pxp-scars", "wavepacket", "theorem", "qec", "sdo", "custom"] {
        assert!(text.contains(name));
    }
}

#[test]
fn bad_configs_exit_2_and_write_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        ("syntax.json", "{\n  \"experiment\": \"two-arrows\",\n  \"n_qubits\": 4,,\n}", "line 3"),
        ("unknown.json", "{\n  \"experiment\": \"two-arrows\",\n  \"n_qbits\": 4\n}", "line 3"),
        ("semantic.json", "{\n  \"experiment\": \"two-arrows\",\n  \"dt\": 0\n}", "line 3"),
        ("label.json", "{\n  \"experiment\": \"custom\",\n  \"n_qubits\": 3,\n  \"model\": {\"kind\": \"pxp\"},\n  \"n_steps\": 2,\n  \"initial_state\": {\"kind\": \"product\", \"label\": \"01\"}\n}", "line 6"),
    ];
    for (name, text, anchor) in cases {
        fs::write(tmp.path().join(name), text).unwrap();
        let out = chronoscope(&["aot-field", "--config", name, "--out", "res"], tmp.path());
        assert_eq!(out.status.code(), Some(2), "{name}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(name) && err.contains(anchor), "{name}: {err}");
        assert!(!tmp.path().join("res").exists());
    }
    let out = chronoscope(&["run", "two-arrows", "--config", "unknown.json"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let out = chronoscope(&["run", "nonsense"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_chronoscope"))
        .args(["list-experiments"])
        .env("CHRONOSCOPE_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compute_failures_exit_3_and_clean_up() {
    let tmp = tempfile::tempdir().unwrap();
    // five region qubits exceed the ancilla register
    let out = chronoscope(&["sdo", "--a", "0,1,2", "--b", "3,1", "--out", "res"], tmp.path());
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!tmp.path().join("res").exists());
}

#[test]
fn field_runs_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |d: &'static str| ["run", "ising-fringe", "--n", "4", "--T", "0.05", "--out", d];
    let a = chronoscope(&args("a"), tmp.path());
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    let b = Command::new(env!("CARGO_BIN_EXE_chronoscope"))
        .args(args("b"))
        .current_dir(tmp.path())
        .env("CHRONOSCOPE_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(b.status.code(), Some(0));
    for f in ["field.json", "entropy.csv", "field.svg", "summary.json"] {
        let x = fs::read(tmp.path().join("a").join(f)).unwrap();
        let y = fs::read(tmp.path().join("b").join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
    let records: Vec<serde_json::Value> =
        serde_json::from_slice(&fs::read(tmp.path().join("a/field.json")).unwrap()).unwrap();
    assert_eq!(records.len(), 4 * 11);
    assert_eq!(records[0]["contributions"].as_array().unwrap().len(), 8);
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("a/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["plan"]["n"], 4);
    assert_eq!(manifest["experiment"], "ising-fringe");
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn custom_config_with_flag_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{
  "experiment": "custom",
  "n_qubits": 3,
  "model": {"kind": "pauli", "terms": [{"coeff": 1.0, "string": "XXI"}, {"coeff": 0.5, "string": "IZZ"}]},
  "dt": 0.05,
  "n_steps": 4,
  "initial_state": {"kind": "product", "label": "0+1"},
  "output": {"dir": "from-config", "svg": false}
}"#;
    fs::write(tmp.path().join("c.json"), cfg).unwrap();
    let out = chronoscope(&["aot-field", "--config", "c.json", "--steps", "2", "--out", "over"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!tmp.path().join("from-config").exists());
    assert!(!tmp.path().join("over/field.svg").exists());
    let csv = fs::read_to_string(tmp.path().join("over/entropy.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 3);
}

#[test]
fn one_shot_subcommands_print_json() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let out = chronoscope(&["theorem-check"], d);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["engineered"]["verdict"], true);

    let out = chronoscope(&["qec", "--code", "repetition-x:3", "--state", "random:3"], d);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let rep = &v["repetition"];
    let diff = rep["channel"]["phys_to_logical"].as_f64().unwrap() - rep["closed_form"]["phys_to_logical"].as_f64().unwrap();
    assert!(diff.abs() < 1e-9);

    let out = chronoscope(&["sdo", "--n", "3", "--a", "0", "--b", "2", "--t-b", "0.4"], d);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!(v["max_deviation_from_direct"].as_f64().unwrap() < 1e-10);
    assert_eq!(v["correlators"].as_array().unwrap().len(), 16);

    let out = chronoscope(
        &["ci", "--n", "3", "--model", "ising:1,0.3,0.2", "--state", "0r1", "--source", "0", "--target", "1", "--tau", "0.5", "--samples", "4000"],
        d,
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert!(v["exact"]["value"].as_f64().unwrap() > 0.0);
    assert!(v["deviation_in_stderr"].as_f64().unwrap() < 5.0);

    let out = chronoscope(&["evolve", "--n", "3", "--model", "pxp", "--state", "000", "--T", "0.7"], d);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!((json(&out)["norm"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let out = chronoscope(&["evolve", "--n", "2"], d);
    assert_eq!(out.status.code(), Some(2));
    assert!(fs::read_dir(d).unwrap().next().is_none());
}
