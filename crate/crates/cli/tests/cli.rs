use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fivevec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fivevec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

const SPRING_PAIR: &str = r#"{"particles": [
    {"m": 1.0, "x": [0, 0, 0], "v": [0, 0.5, 0]},
    {"m": 2.0, "x": [1.5, 0, 0], "v": [0, -0.25, 0.1]}],
  "force": {"kind": "pairwise_spring", "k": 5.0, "rest_length": 1.0}}"#;

const FREE_BODY: &str = r#"{"particles": [
    {"m": 1.0, "x": [1, 0, 0], "v": [0, 1, 0]},
    {"m": 2.0, "x": [0, 1, 0], "v": [-1, 0, 0.5]},
    {"m": 0.5, "x": [0, 0, 1], "v": [0.3, 0.3, 0]}]}"#;

#[test]
fn verify_is_reproducible() {
    let a = fivevec(&["verify", "--seed", "7", "--cases", "10"]);
    let b = fivevec(&["verify", "--seed", "7", "--cases", "10"]);
    assert_eq!(
        a.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&a.stderr)
    );
    assert_eq!(a.stdout, b.stdout);
    let report = json(&a);
    assert_eq!(report["seed"], 7);
    assert_eq!(report["pass"], true);
    assert!(String::from_utf8_lossy(&a.stderr)
        .lines()
        .all(|l| l.starts_with("PASS")));
}

#[test]
fn verify_fails_below_rounding() {
    let out = fivevec(&[
        "verify",
        "--cases",
        "5",
        "--only",
        "transport.chain",
        "--tolerance",
        "1e-16",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn verify_sequential_matches_parallel() {
    let a = fivevec(&["verify", "--cases", "6", "--only", "rigid."]);
    let b = fivevec(&["verify", "--cases", "6", "--only", "rigid.", "--sequential"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn malformed_input_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", "{\"particles\": [");
    assert_eq!(
        fivevec(&["simulate", "--input", s(&bad)]).status.code(),
        Some(2)
    );
    assert_eq!(
        fivevec(&["derive", "--input", s(&bad)]).status.code(),
        Some(2)
    );
    let schema = write(
        dir.path(),
        "schema.json",
        r#"{"particles": [{"m": 1, "x": [0, 0], "v": [0, 0, 0]}]}"#,
    );
    assert_eq!(
        fivevec(&["simulate", "--input", s(&schema)]).status.code(),
        Some(2)
    );
    assert_eq!(fivevec(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn coarse_steps_exceed_tolerance() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "spring.json", SPRING_PAIR);
    let summary = dir.path().join("summary.json");
    let out = fivevec(&[
        "simulate",
        "--input",
        s(&input),
        "--dt",
        "1.0",
        "--steps",
        "10",
        "--summary",
        s(&summary),
    ]);
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert_eq!(doc["pass"], false);
    assert!(doc["balance_max_residual"].as_f64().unwrap() > 1e-6);
}

#[test]
fn free_body_conserves_momentum() {
    let dir = TempDir::new().unwrap();
    let input = write(dir.path(), "free.json", FREE_BODY);
    let csv_path = dir.path().join("traj.csv");
    let summary = dir.path().join("summary.json");
    let out = fivevec(&[
        "simulate",
        "--input",
        s(&input),
        "--dt",
        "1e-3",
        "--steps",
        "10000",
        "--record-every",
        "1000",
        "--out",
        s(&csv_path),
        "--summary",
        s(&summary),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&summary).unwrap()).unwrap();
    assert!(doc["momentum_tensor_drift"].as_f64().unwrap() <= 1e-8);
    assert_eq!(doc["pass"], true);

    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let headers = reader.headers().unwrap().clone();
    assert_eq!(&headers[0], "t");
    assert!(headers.iter().any(|h| h == "E_kin"));
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 11);
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let px = |r: &csv::StringRecord| r[col("P_x")].parse::<f64>().unwrap();
    assert!((px(&rows[0]) - px(&rows[10])).abs() < 1e-12);
    assert!((rows[10][0].parse::<f64>().unwrap() - 10.0).abs() < 1e-9);
}

#[test]
fn derive_of_a_coordinate() {
    let dir = TempDir::new().unwrap();
    let input = write(
        dir.path(),
        "f.json",
        r#"{"kind": "scalar", "terms": [{"exps": [1, 0, 0], "coef": 1.0}]}"#,
    );
    let out = fivevec(&["derive", "--input", s(&input), "--residual"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc = json(&out);
    assert_eq!(doc["kind"], "scalar");
    let pairs = doc["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 6);
    let pair = |k: u64, l: u64| {
        pairs.iter().find(|p| p["k"] == k && p["l"] == l).unwrap()["field"]["terms"].clone()
    };
    // D_{15} x^1 = 1
    assert_eq!(
        pair(0, 3),
        serde_json::json!([{"exps": [0, 0, 0], "coef": 1.0}])
    );
    // D_{12} x^1 = x_2 d_1 x^1 = x^2
    assert_eq!(
        pair(0, 1),
        serde_json::json!([{"exps": [0, 1, 0], "coef": 1.0}])
    );
    assert_eq!(pair(1, 2), serde_json::json!([]));
    assert!(doc["residual"]["max"].as_f64().unwrap() <= 1e-7);
}

#[test]
fn identity_transform_echoes_input() {
    let dir = TempDir::new().unwrap();
    let field = r#"{"kind": "vector", "components": [
        [{"exps": [1, 0, 0], "coef": 2.0}], [{"exps": [0, 0, 2], "coef": -1.5}], []]}"#;
    let input = write(dir.path(), "u.json", field);
    let motion = write(
        dir.path(),
        "id.json",
        r#"{"L": [[1, 0, 0], [0, 1, 0], [0, 0, 1]], "a": [0, 0, 0]}"#,
    );
    let out = fivevec(&["transform", "--input", s(&input), "--motion", s(&motion)]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let got = json(&out);
    let expected: Value = serde_json::from_str(field).unwrap();
    assert_eq!(got["components"], expected["components"]);

    let tensor = r#"{"metric": "euclidean3", "frame": {"anchor": [1, 2, 3], "kind": "p_basis"},
        "rank": [1, 0], "comps": [0.5, -1.0, 2.0, 0.25]}"#;
    let input = write(dir.path(), "t.json", tensor);
    let out = fivevec(&["transform", "--input", s(&input), "--motion", s(&motion)]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(
        json(&out)["comps"],
        serde_json::json!([0.5, -1.0, 2.0, 0.25])
    );
}

#[test]
fn rotating_a_vector_field() {
    let dir = TempDir::new().unwrap();
    // U = e_1 everywhere, rotated a quarter turn about the third axis
    let input = write(
        dir.path(),
        "u.json",
        r#"{"kind": "vector", "components": [[{"exps": [0, 0, 0], "coef": 1.0}], [], []]}"#,
    );
    let motion = write(
        dir.path(),
        "rot.json",
        r#"{"L": [[0, -1, 0], [1, 0, 0], [0, 0, 1]], "a": [1, 0, 0]}"#,
    );
    let out = fivevec(&["transform", "--input", s(&input), "--motion", s(&motion)]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let comps = json(&out)["components"].clone();
    assert_eq!(comps[0], serde_json::json!([]));
    assert_eq!(
        comps[1],
        serde_json::json!([{"exps": [0, 0, 0], "coef": 1.0}])
    );
    assert_eq!(comps[2], serde_json::json!([]));

    let skew = write(
        dir.path(),
        "skew.json",
        r#"{"L": [[2, 0, 0], [0, 1, 0], [0, 0, 1]], "a": [0, 0, 0]}"#,
    );
    assert_eq!(
        fivevec(&["transform", "--input", s(&input), "--motion", s(&skew)])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn config_files_supply_settings() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "free.json", FREE_BODY);
    let config = write(
        dir.path(),
        "run.toml",
        "command = \"simulate\"\ninput = \"free.json\"\nsummary = \"summary.json\"\nout = \"traj.csv\"\ndt = 1e-2\nsteps = 50\n",
    );
    let out = fivevec(&["--config", s(&config)]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let doc: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(doc["steps"], 50);
    assert!(dir.path().join("traj.csv").exists());

    let typo = write(dir.path(), "typo.toml", "comand = \"verify\"\n");
    assert_eq!(fivevec(&["--config", s(&typo)]).status.code(), Some(2));
}
