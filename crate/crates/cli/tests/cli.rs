//! Black-box tests of the `ccsim` binary: artifact layout, exit codes,
//! schema stability, and byte-level reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ccsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ccsim"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn type_matches(t: &str, v: &Value) -> bool {
    match t {
        "null" => v.is_null(),
        "boolean" => v.is_boolean(),
        "integer" => v.is_i64() || v.is_u64(),
        "number" => v.is_number(),
        "array" => v.is_array(),
        "object" => v.is_object(),
        "string" => v.is_string(),
        _ => false,
    }
}

fn allowed_types(spec: &Value) -> Vec<String> {
    match &spec["type"] {
        Value::String(s) => vec![s.clone()],
        Value::Array(a) => a
            .iter()
            .map(|v| v.as_str().unwrap().to_string())
            .collect(),
        other => panic!("schema type must be string or array, got {other}"),
    }
}

/// Minimal structural validation: required keys, declared types, no
/// undeclared keys, array item types.
fn validate_schema(value: &Value, schema: &Value) {
    let obj = value.as_object().expect("document must be an object");
    let props = schema["properties"].as_object().unwrap();
    for key in schema["required"].as_array().unwrap() {
        let key = key.as_str().unwrap();
        assert!(obj.contains_key(key), "missing required field {key}");
    }
    if schema["additionalProperties"] == Value::Bool(false) {
        for key in obj.keys() {
            assert!(props.contains_key(key), "undeclared field {key}");
        }
    }
    for (key, spec) in props {
        let Some(field) = obj.get(key) else { continue };
        let types = allowed_types(spec);
        assert!(
            types.iter().any(|t| type_matches(t, field)),
            "field {key} = {field} does not match {types:?}"
        );
        if let (Some(items), Value::Array(arr)) = (spec.get("items"), field) {
            let item_types = allowed_types(items);
            for v in arr {
                assert!(
                    item_types.iter().any(|t| type_matches(t, v)),
                    "item {v} in {key} does not match {item_types:?}"
                );
            }
        }
    }
}

fn small_run(dir: &Path) -> Output {
    ccsim(&[
        "run", "--nodes", "6", "--dim", "2", "--epsilon", "0.5", "--graph", "ring", "--seed",
        "3", "--max-rounds", "500", "--out", dir.to_str().unwrap(),
    ])
}

#[test]
fn run_writes_verified_artifacts_matching_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = small_run(dir.path());
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("t,node,r2,center_norm\n"));

    let summary = read_json(&dir.path().join("summary.json"));
    let schema: Value = serde_json::from_str(include_str!("../schemas/summary.schema.json")).unwrap();
    validate_schema(&summary, &schema);
    assert_eq!(summary["converged"], Value::Bool(true));
    assert_eq!(summary["seed"], 3);
    assert_eq!(summary["config"]["epsilon"], 0.5);

    let config = read_json(&dir.path().join("config.json"));
    assert_eq!(config, summary["config"]);
}

#[test]
fn identical_configs_produce_identical_bytes() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    assert_eq!(small_run(dir_a.path()).status.code(), Some(0));
    assert_eq!(small_run(dir_b.path()).status.code(), Some(0));
    for name in ["config.json", "trace.csv", "summary.json"] {
        let a = fs::read(dir_a.path().join(name)).unwrap();
        let b = fs::read(dir_b.path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn timeout_exits_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = ccsim(&[
        "run", "--nodes", "4", "--dim", "2", "--epsilon", "0.5", "--graph", "er:0.0", "--seed",
        "1", "--max-rounds", "3", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let summary = read_json(&dir.path().join("summary.json"));
    assert_eq!(summary["converged"], Value::Bool(false));
    assert!(dir.path().join("trace.csv").exists());
}

#[test]
fn verify_passes_a_good_run_and_rejects_a_truncated_coreset() {
    let dir = tempfile::tempdir().unwrap();
    let out = ccsim(&[
        "run", "--nodes", "12", "--dim", "2", "--epsilon", "0.34", "--graph", "ring", "--seed",
        "5", "--max-rounds", "1000", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let good = ccsim(&["verify", "--dir", dir.path().to_str().unwrap()]);
    assert_eq!(good.status.code(), Some(0));
    assert!(stdout(&good).contains("PASS"), "stdout: {}", stdout(&good));

    // Negative control: drop the final core-set to a single member. Its
    // ball degenerates to a point, which cannot cover the cloud.
    let summary_path = dir.path().join("summary.json");
    let mut summary = read_json(&summary_path);
    let ids = summary["final_coreset"].as_array().unwrap().clone();
    assert!(ids.len() > 1);
    summary["final_coreset"] = Value::Array(vec![ids[0].clone()]);
    fs::write(&summary_path, serde_json::to_string_pretty(&summary).unwrap()).unwrap();

    let bad = ccsim(&["verify", "--dir", dir.path().to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(stdout(&bad).contains("FAIL"), "stdout: {}", stdout(&bad));
}

#[test]
fn gen_then_train_exports_an_accurate_model() {
    let dir = tempfile::tempdir().unwrap();
    let train_csv = dir.path().join("train.csv");
    let holdout_csv = dir.path().join("holdout.csv");
    let gen = ccsim(&[
        "gen", "--kind", "two-gaussians", "--n", "24", "--dim", "2", "--separation", "6",
        "--seed", "7", "--out", train_csv.to_str().unwrap(),
    ]);
    assert_eq!(gen.status.code(), Some(0));
    let gen2 = ccsim(&[
        "gen", "--kind", "two-gaussians", "--n", "12", "--dim", "2", "--separation", "6",
        "--seed", "8", "--out", holdout_csv.to_str().unwrap(),
    ]);
    assert_eq!(gen2.status.code(), Some(0));

    let run_dir = dir.path().join("run");
    let train = ccsim(&[
        "train", "--dataset", train_csv.to_str().unwrap(), "--holdout",
        holdout_csv.to_str().unwrap(), "--kernel", "gaussian:0.5", "--C", "10", "--epsilon",
        "0.25", "--nodes", "8", "--graph", "er:0.3", "--seed", "2", "--max-rounds", "2000",
        "--out", run_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        train.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&train.stderr)
    );

    let model = read_json(&run_dir.join("model.json"));
    assert_eq!(model["C"], 10.0);
    assert_eq!(model["kernel"]["type"], "gaussian");
    assert!(model["support"].as_array().unwrap().len() >= 2);
    assert!(model["rho"].as_f64().unwrap() > 0.0);

    let summary = read_json(&run_dir.join("summary.json"));
    let accuracy = summary["holdout_accuracy"].as_f64().unwrap();
    assert!(accuracy >= 0.9, "holdout accuracy {accuracy}");
}

#[test]
fn sweep_fans_out_per_seed_directories() {
    let dir = tempfile::tempdir().unwrap();
    let out = ccsim(&[
        "run", "--nodes", "5", "--dim", "2", "--epsilon", "0.5", "--graph", "ring", "--seed",
        "0", "--sweep", "2", "--max-rounds", "500", "--out", dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("seed 0:"), "stdout: {text}");
    assert!(text.contains("seed 1:"), "stdout: {text}");
    assert!(dir.path().join("seed-0000/summary.json").exists());
    assert!(dir.path().join("seed-0001/summary.json").exists());
}

#[test]
fn custom_schedule_file_drives_the_topology() {
    let dir = tempfile::tempdir().unwrap();
    let schedule = dir.path().join("schedule.json");
    // A 3-cycle split over two phases; each phase alone is disconnected.
    fs::write(&schedule, "[[[0,1],[1,2]],[[2,0]]]").unwrap();
    let out_dir = dir.path().join("run");
    let out = ccsim(&[
        "run", "--nodes", "3", "--dim", "2", "--epsilon", "0.5", "--graph",
        &format!("file:{}", schedule.display()), "--seed", "4", "--max-rounds", "500", "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let summary = read_json(&out_dir.join("summary.json"));
    assert_eq!(summary["converged"], Value::Bool(true));
}

#[test]
fn malformed_flags_are_rejected() {
    let out = ccsim(&["run", "--graph", "mesh"]);
    assert_ne!(out.status.code(), Some(0));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("er:P"), "stderr: {err}");
}
