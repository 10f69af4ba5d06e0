use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn lieforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lieforge"))
        .args(args)
        .env_remove("LIEFORGE_FIXTURES")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn schema() -> &'static jsonschema::Validator {
    static S: OnceLock<jsonschema::Validator> = OnceLock::new();
    S.get_or_init(|| {
        let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/report.schema.json")).unwrap();
        jsonschema::validator_for(&serde_json::from_str(&text).unwrap()).unwrap()
    })
}

fn assert_valid(v: &Value) {
    let errs: Vec<String> = schema().iter_errors(v).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errs.is_empty(), "{errs:?}");
}

fn default_audit() -> &'static (Output, Output) {
    static A: OnceLock<(Output, Output)> = OnceLock::new();
    A.get_or_init(|| (lieforge(&["audit", "--format", "json"]), lieforge(&["audit", "--format", "text"])))
}

/// A scratch copy of the fixture directory.
fn scratch() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for e in std::fs::read_dir(fixtures()).unwrap() {
        let p = e.unwrap().path();
        std::fs::copy(&p, dir.path().join(p.file_name().unwrap())).unwrap();
    }
    dir
}

#[test]
fn default_audit_is_green() {
    let (j, _) = default_audit();
    assert_eq!(code(j), 0, "{}", String::from_utf8_lossy(&j.stderr));
    let v = json(j);
    assert_valid(&v);
    assert_eq!(v["summary"]["unexpected"], 0);
    assert!(v["summary"]["pass"].as_u64().unwrap() > 50);
    assert!(v["summary"]["documented_discrepancy"].as_u64().unwrap() > 0);
    let ids: Vec<&str> = v["items"].as_array().unwrap().iter().map(|i| i["id"].as_str().unwrap()).collect();
    for want in ["determining.system", "determining.Dt", "determining.v1", "table", "table.jacobi", "reduce.s1_fpde", "solution.S5.numeric", "orbit.S1c.X6.exact"] {
        assert!(ids.contains(&want), "{want}");
    }
}

#[test]
fn text_and_json_verdicts_agree() {
    let (j, t) = default_audit();
    assert_eq!(code(j), code(t));
    let v = json(j);
    let from_json: Vec<(String, String)> = v["items"]
        .as_array()
        .unwrap()
        .iter()
        .map(|i| (i["id"].as_str().unwrap().to_string(), i["verdict"].as_str().unwrap().to_string()))
        .collect();
    let text = String::from_utf8(t.stdout.clone()).unwrap();
    let from_text: Vec<(String, String)> = text
        .lines()
        .filter_map(|l| {
            let rest = l.strip_prefix('[')?;
            let (tag, rest) = rest.split_once("] ")?;
            let (id, _) = rest.split_once(": ")?;
            let tag = if tag == "UNEXPECTED" { "unexpected" } else { tag };
            Some((id.to_string(), tag.to_string()))
        })
        .collect();
    assert_eq!(from_json, from_text);
}

#[test]
fn corrupted_table_entry_is_unexpected() {
    let dir = scratch();
    let path = dir.path().join("manifest.json");
    let mut m: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    m["table"]["entries"][0][1] = Value::String("2*v2".into());
    std::fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
    let o = lieforge(&["audit", "--format", "json", "--fixtures", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_valid(&v);
    let bad: Vec<&str> = v["items"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|i| i["verdict"] == "unexpected")
        .map(|i| i["id"].as_str().unwrap())
        .collect();
    assert_eq!(bad, ["table"]);
}

#[test]
fn changed_recorded_residual_is_unexpected() {
    let dir = scratch();
    let path = dir.path().join("manifest.json");
    let mut m: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    m["expected"]["solution.S1.symbolic"]["residual"] = Value::String("1/t/x^2".into());
    std::fs::write(&path, serde_json::to_string(&m).unwrap()).unwrap();
    let o = lieforge(&["audit", "--format", "json", "--fixtures", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn missing_fixture_is_a_config_error() {
    let dir = scratch();
    std::fs::remove_file(dir.path().join("solutions.lie")).unwrap();
    let o = lieforge(&["audit", "--fixtures", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("solutions.lie"));
    let o = Command::new(env!("CARGO_BIN_EXE_lieforge"))
        .arg("audit")
        .env("LIEFORGE_FIXTURES", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn bad_flags_are_config_errors() {
    assert_eq!(code(&lieforge(&["--params", "a=1,b=1,c=1,d=1", "audit"])), 2);
    assert_eq!(code(&lieforge(&["--spec", "lambda=x,gamma=sideways", "table"])), 2);
    assert_eq!(code(&lieforge(&["--format", "yaml", "audit"])), 2);
    assert_eq!(code(&lieforge(&["frobnicate"])), 2);
}

#[test]
fn prolong_translation_is_zero() {
    let o = lieforge(&["prolong", "Dt", "--order", "4", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_valid(&v);
    let items = v["items"].as_array().unwrap();
    // eta plus every derivative of orders 1 to 4 in four variables.
    assert_eq!(items.len(), 70);
    assert!(items.iter().all(|i| i["data"]["value"] == "0"));
}

#[test]
fn prolong_scaling_contains_hand_coefficient() {
    let o = lieforge(&["prolong", "v1", "--order", "1", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let ux = v["items"].as_array().unwrap().iter().find(|i| i["data"]["index"] == "eta[d(u,x)]").unwrap();
    assert_eq!(ux["data"]["value"], "-2*d(u,x)");
}

#[test]
fn unknown_field_exits_two() {
    let o = lieforge(&["prolong", "v9"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("v9"));
    assert_eq!(code(&lieforge(&["check", "nope"])), 2);
    assert_eq!(code(&lieforge(&["table", "--basis", "v1,nope"])), 2);
}

#[test]
fn single_field_table_is_zero() {
    let o = lieforge(&["table", "--basis", "v4", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["items"][0]["data"]["entries"], serde_json::json!([["0"]]));
}

#[test]
fn generic_kernels_flag_entries_outside_the_span() {
    let o = lieforge(&["--spec", "lambda=generic,gamma=generic", "table", "--basis", "v1,v2,v4", "--format", "json"]);
    let v = json(&o);
    assert_valid(&v);
    let t = &v["items"][0];
    assert_eq!(t["observed"], "fail");
    assert!(t["residual"].as_str().unwrap().contains("outside span"));
    assert_eq!(code(&o), 1);
}

#[test]
fn subcommands_emit_valid_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let runs: [&[&str]; 6] = [
        &["determining"],
        &["check", "v3"],
        &["reduce", "cbs", "s1_invariants", "--printed", "s1_fpde"],
        &["verify", "S5"],
        &["orbit", "S1c", "4", "--first-order"],
        &["table"],
    ];
    for args in runs {
        let mut a = args.to_vec();
        a.extend(["--format", "json", "--out", out.to_str().unwrap()]);
        let o = lieforge(&a);
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(o.stdout.is_empty());
        let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
        assert_valid(&v);
        assert_eq!(v["summary"]["unexpected"], 0, "{args:?}");
    }
}

#[test]
fn seed_changes_samples_not_verdicts() {
    let a = json(&lieforge(&["verify", "S3", "--format", "json", "--seed", "1"]));
    let b = json(&lieforge(&["verify", "S3", "--format", "json", "--seed", "2"]));
    assert_eq!(a["items"][1]["verdict"], b["items"][1]["verdict"]);
    assert_ne!(a["items"][1]["metrics"], b["items"][1]["metrics"]);
}
