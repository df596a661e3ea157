use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const W_SPEC: &str = r#"{"modes":3,"input":{"type":"number","coefficients":[[0,0],[1,0]]}}"#;
const GHZ3_SPEC: &str = r#"{"modes":3,"input":{"type":"cat","terms":[
    {"c":[1,0],"alpha":[1.8,0]},{"c":[1,0],"alpha":[-0.9,1.5588457268119895]},{"c":[1,0],"alpha":[-0.9,-1.5588457268119895]}]}}"#;
const HYBRID_SPEC: &str = r#"{"modes":2,"cutoff":"auto","input":{"type":"hybrid",
    "number":{"coefficients":[[0.4,0.1],[0.8,0]]},"cat":{"terms":[{"c":[0.6,-0.2],"alpha":[1.1,0.3]}]}}}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mbs-slocc"))
}

fn write(dir: &TempDir, name: &str, content: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, content).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(bytes)))
}

#[test]
fn classify_w_spec() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "w.json", W_SPEC);
    let out = run(&["classify", "--spec", s(&spec)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out.stdout);
    assert_eq!(report["status"], "success");
    assert_eq!(report["label"]["name"], "C1");
    assert_eq!(report["label"]["variant"], "C");
    assert_eq!(report["label"]["N"], 1);
    assert_eq!(report["schmidt_rank"], 2);
    assert_eq!(report["schmidt_ranks"].as_object().unwrap().len(), 3);
    assert!(report["fidelity"].as_f64().unwrap() >= 1.0 - 1e-10);
    assert_eq!(report["certificate"]["global_scalar"].as_array().unwrap().len(), 2);
    assert!(report.get("a_values").is_none());
}

#[test]
fn classify_with_a_values() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "w.json", W_SPEC);
    let out = run(&["classify", "--spec", s(&spec), "--compute-a", "--seed", "3"]);
    assert!(out.status.success());
    assert_eq!(json(&out.stdout)["a_values"], serde_json::json!([1, 1, 1]));
}

#[test]
fn rank_ghz3_all_three() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "ghz.json", GHZ3_SPEC);
    let out = run(&["rank", "--spec", s(&spec)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let ranks = json(&out.stdout);
    let table = ranks["schmidt_ranks"].as_object().unwrap();
    assert_eq!(table.len(), 3);
    assert!(table.values().all(|r| r == 3));

    let csv = run(&["rank", "--spec", s(&spec), "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "bipartition,rank");
    assert_eq!(lines.len(), 4);
    assert!(lines[1..].iter().all(|l| l.ends_with(",3")));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "h.json", HYBRID_SPEC);
    let a = run(&["classify", "--spec", s(&spec), "--seed", "11"]);
    let b = run(&["classify", "--spec", s(&spec), "--seed", "11"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);

    let spec3 = write(&dir, "w.json", W_SPEC);
    let a = run(&["classify", "--spec", s(&spec3), "--compute-a", "--seed", "5"]);
    let b = run(&["classify", "--spec", s(&spec3), "--compute-a", "--seed", "5"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn report_round_trip_replays_to_same_fidelity() {
    let dir = TempDir::new().unwrap();
    for (name, doc) in [("w.json", W_SPEC), ("ghz.json", GHZ3_SPEC), ("h.json", HYBRID_SPEC)] {
        let spec = write(&dir, name, doc);
        let report_path = dir.path().join(format!("{name}.report"));
        let out = run(&["classify", "--spec", s(&spec), "--out", s(&report_path)]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty());
        let report = json(&std::fs::read(&report_path).unwrap());

        let out = run(&["verify", "--spec", s(&spec), "--report", s(&report_path)]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let v = json(&out.stdout);
        assert_eq!(v["ok"], true);
        let (f0, f1) = (report["fidelity"].as_f64().unwrap(), v["fidelity"].as_f64().unwrap());
        assert!((f0 - f1).abs() <= 1e-12, "{name}: {f0} vs {f1}");
    }
}

#[test]
fn tampered_certificate_fails_verification() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "w.json", W_SPEC);
    let out = run(&["classify", "--spec", s(&spec)]);
    let mut report = json(&out.stdout);
    // Perturb an off-diagonal entry of the first step.
    report["certificate"]["steps"][0]["matrix"][0][1] = serde_json::json!([0.5, 0.0]);
    let tampered = write(&dir, "bad.json", &report.to_string());

    let out = run(&["verify", "--spec", s(&spec), "--report", s(&tampered)]);
    assert_eq!(out.status.code(), Some(1));
    let stdout = json(&out.stdout);
    assert_eq!(stdout["ok"], false);
    let err = json(&out.stderr);
    assert_eq!(err["error"]["kind"], "VerificationFailed");
    assert!(err["error"]["fidelity"].as_f64().unwrap() < 1.0 - 1e-10);
}

#[test]
fn structured_errors_on_stderr() {
    let dir = TempDir::new().unwrap();
    let dup = write(
        &dir,
        "dup.json",
        r#"{"modes":2,"input":{"type":"cat","terms":[{"c":[1,0],"alpha":[1,0]},{"c":[2,0],"alpha":[1,0]}]}}"#,
    );
    let out = run(&["classify", "--spec", s(&dup)]);
    assert_eq!(out.status.code(), Some(2));
    let err = json(&out.stderr);
    assert_eq!(err["error"]["kind"], "InvariantError");
    assert_eq!(err["error"]["detail"], "CoincidentCoherentAmplitudes");

    let bad = write(&dir, "bad.json", r#"{"modes":2,"input":{"type":"number","coefficients":[[1,0],"x"]}}"#);
    let err = json(&run(&["build", "--spec", s(&bad)]).stderr);
    assert_eq!(err["error"]["kind"], "SchemaError");
    assert_eq!(err["error"]["pointer"], "/input/coefficients/1");

    let err = json(&run(&["rank", "--spec", s(&dir.path().join("missing.json"))]).stderr);
    assert_eq!(err["error"]["kind"], "IoError");
}

#[test]
fn build_and_dump_matrix() {
    let dir = TempDir::new().unwrap();
    let spec = write(&dir, "w.json", W_SPEC);
    let out = run(&["build", "--spec", s(&spec)]);
    assert!(out.status.success());
    let doc = json(&out.stdout);
    assert_eq!(doc["cutoff"], 2);
    let amps = doc["amplitudes"].as_array().unwrap();
    assert_eq!(amps.len(), 8);
    let a = 1.0 / 3f64.sqrt();
    for idx in [1usize, 2, 4] {
        assert!((amps[idx][0].as_f64().unwrap() - a).abs() < 1e-15);
    }

    let out = run(&["dump-matrix", "--spec", s(&spec)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    // d = 2 rows per block, two blocks of columns for m = 3.
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[2], "|");
    assert_eq!(lines[0].split(' ').count(), 2);
}

#[test]
fn hierarchy_command() {
    let out = run(&["hierarchy", "--scenario", "cat", "--upto", "3"]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("R1 ⊂ R2 ⊂ R3\n"));
    let out = run(&["hierarchy", "--format", "json", "--upto", "2"]);
    assert_eq!(json(&out.stdout)["chain"], serde_json::json!(["C0", "C1", "C2"]));
}
