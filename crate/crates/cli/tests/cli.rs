//! The binary end to end on coarse configurations.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

const COARSE: &str = "\
[grid]
nx = 16
ny = 9

[integration]
t_end = 0.5
report_stride = 5

[experiment]
oracle_steps = 40
lambdas = 4, 16, 64
dirac_horizon = 0.2
";

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    fs::write(dir.join("run.ini"), config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_cgmem"))
        .current_dir(dir)
        .args(args)
        .args(["--config", "run.ini", "--out", "out"])
        .output()
        .unwrap()
}

fn type_matches(value: &Value, ty: &str) -> bool {
    match ty {
        "object" => value.is_object(),
        "array" => value.is_array(),
        "string" => value.is_string(),
        "boolean" => value.is_boolean(),
        "null" => value.is_null(),
        "number" => value.is_number(),
        "integer" => value.is_u64() || value.is_i64(),
        other => panic!("schema type {other} not handled"),
    }
}

/// Checks the keywords the published schema uses.
fn validate(value: &Value, schema: &Value, path: &str) -> Vec<String> {
    let mut errors = Vec::new();
    if let Some(ty) = schema.get("type") {
        let ok = match ty {
            Value::String(t) => type_matches(value, t),
            Value::Array(ts) => ts.iter().any(|t| type_matches(value, t.as_str().unwrap())),
            _ => false,
        };
        if !ok {
            errors.push(format!("{path}: expected type {ty}, found {value}"));
            return errors;
        }
    }
    if let Some(Value::Array(options)) = schema.get("enum") {
        if !options.contains(value) {
            errors.push(format!("{path}: {value} not in {options:?}"));
        }
    }
    if let (Some(min), Some(x)) = (schema.get("minimum").and_then(Value::as_f64), value.as_f64()) {
        if x < min {
            errors.push(format!("{path}: {x} < {min}"));
        }
    }
    if let (Some(max), Some(x)) = (schema.get("maximum").and_then(Value::as_f64), value.as_f64()) {
        if x > max {
            errors.push(format!("{path}: {x} > {max}"));
        }
    }
    if let Some(obj) = value.as_object() {
        if let Some(Value::Array(required)) = schema.get("required") {
            for r in required {
                if !obj.contains_key(r.as_str().unwrap()) {
                    errors.push(format!("{path}: missing {r}"));
                }
            }
        }
        let props = schema.get("properties").and_then(Value::as_object);
        for (k, v) in obj {
            let sub = format!("{path}.{k}");
            match (props.and_then(|p| p.get(k)), schema.get("additionalProperties")) {
                (Some(s), _) => errors.extend(validate(v, s, &sub)),
                (None, Some(Value::Bool(false))) => errors.push(format!("{sub}: not allowed")),
                (None, Some(s @ Value::Object(_))) => errors.extend(validate(v, s, &sub)),
                _ => {}
            }
        }
    }
    if let (Some(items), Some(arr)) = (schema.get("items"), value.as_array()) {
        for (i, v) in arr.iter().enumerate() {
            errors.extend(validate(v, items, &format!("{path}[{i}]")));
        }
    }
    errors
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out/summary.json")).unwrap()).unwrap()
}

#[test]
fn oracle_run_writes_valid_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), COARSE, &["oracle"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let s = summary(tmp.path());
    let schema: Value = serde_json::from_str(cgmem_cli::output::SUMMARY_SCHEMA).unwrap();
    let errors = validate(&s, &schema, "$");
    assert!(errors.is_empty(), "{errors:#?}");
    assert_eq!(s["criteria"][0]["id"], 3);
    assert_eq!(s["criteria"][0]["status"], "pass");

    let manifest = fs::read_to_string(tmp.path().join("out/manifest.txt")).unwrap();
    let names: Vec<&str> = manifest.lines().map(|l| l.split_once("  ").unwrap().1).collect();
    assert_eq!(names, ["series.csv", "summary.json"]);
    for line in manifest.lines() {
        let (hash, name) = line.split_once("  ").unwrap();
        let bytes = fs::read(tmp.path().join("out").join(name)).unwrap();
        assert_eq!(hash, hex::encode(Sha256::digest(&bytes)));
    }
}

#[test]
fn identical_inputs_give_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [a.path(), b.path()] {
        let out = run(dir, COARSE, &["dirac-limit", "--seed", "7"]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["series.csv", "summary.json", "manifest.txt"] {
        let x = fs::read(a.path().join("out").join(name)).unwrap();
        let y = fs::read(b.path().join("out").join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
    assert_eq!(summary(a.path())["config"]["run"]["initial"]["seed"], 7);
}

#[test]
fn bad_omega_is_a_configuration_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), "[physics]\nomega = 1.2\n", &["decay"]);
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("physics.omega") && stderr.contains("(0, 1)"), "{stderr}");
    assert!(stderr.contains("line 2"), "{stderr}");
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn missing_config_file_is_a_configuration_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_cgmem"))
        .args(["oracle", "--config", "/nonexistent/run.ini"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_experiment_is_rejected_by_the_parser() {
    let out = Command::new(env!("CARGO_BIN_EXE_cgmem")).args(["attractor", "--config", "x.ini"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn blow_up_is_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let config = format!("{COARSE}\n[initial]\namplitude = 10000\n");
    let out = run(tmp.path(), &config, &["oracle", "--override", "integration.dt=0.05"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    let diagnostic: Value = serde_json::from_str(String::from_utf8_lossy(&out.stderr).trim()).unwrap();
    assert_eq!(diagnostic["error"], "runtime");
}

#[test]
fn failed_criterion_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), COARSE, &["dirac-limit", "--override", "experiment.lambdas=64, 16, 4"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(summary(tmp.path())["passed"], false);
}

#[test]
fn smallness_violation_is_gated() {
    let tmp = tempfile::tempdir().unwrap();
    let config = format!("{COARSE}\n[kernel.boundary]\nweights = 1\nrates = 10\n");
    let out = run(tmp.path(), &config, &["decay"]);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("warning"), "{stderr}");
    let s = summary(tmp.path());
    assert_eq!(s["smallness"]["assk"], false);
    for c in s["criteria"].as_array().unwrap() {
        if c["id"] == 2 || c["id"] == 8 {
            assert_eq!(c["status"], "out-of-hypothesis");
        }
    }
    assert_eq!(out.status.code(), Some(u8::from(s["passed"] == false).into()));
}

fn shipped(name: &str) -> String {
    fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)).unwrap()
}

#[test]
fn shipped_default_config_matches_library_defaults() {
    let c = cgmem_cli::config::parse_config(&shipped("default.ini")).unwrap();
    assert_eq!(c, cgmem_cli::config::CliConfig::default());
    let text = shipped("default.ini");
    for key in cgmem_cli::config::KEYS {
        let (section, name) = key.rsplit_once('.').unwrap();
        let documented = text.contains(&format!("[{section}]")) && text.lines().any(|l| l.starts_with(&format!("{name} ")));
        assert!(documented || *key == "initial.saturation", "{key} is not documented");
    }
}

#[test]
fn decay_on_linear_defaults_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &shipped("linear.ini"), &["decay"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let s = summary(tmp.path());
    let ids: Vec<u64> = s["criteria"].as_array().unwrap().iter().map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, [1, 2, 4, 5, 8]);
}

#[test]
fn oracle_on_defaults_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &shipped("default.ini"), &["oracle"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(summary(tmp.path())["metrics"]["load_relative_max"].as_f64().unwrap() <= 1e-10);
}
