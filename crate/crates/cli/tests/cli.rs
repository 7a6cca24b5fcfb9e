use std::f64::consts::PI;
use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_exchange-lab"))
}

fn run(args: &[&str]) -> Output {
    exe().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&o.stdout))
    })
}

fn phase(doc: &Value) -> f64 {
    doc["phase_rad"].as_f64().expect("phase present")
}

#[test]
fn half_swap_fermions() {
    let o = run(&["run", "half-swap", "--modes", "4"]);
    assert_eq!(code(&o), 0);
    let doc = json(&o);
    assert!((phase(&doc) - PI).abs() < 1e-10);
    assert_eq!(doc["visibility"].as_f64(), Some(1.0));
    assert_eq!(doc["version"], 1);
    assert_eq!(doc["experiment"], "half-swap");
}

#[test]
fn half_swap_bosons() {
    let o = run(&["run", "half-swap", "--statistics", "boson"]);
    assert_eq!(code(&o), 0);
    assert_eq!(phase(&json(&o)), 0.0);
}

#[test]
fn ring_of_three() {
    let o = run(&["run", "ring", "--n", "3"]);
    assert_eq!(code(&o), 0);
    let doc = json(&o);
    assert_eq!(phase(&doc), 0.0);
    let wraps: Vec<&Value> = doc["ledgers"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|l| l.as_array().unwrap())
        .filter(|e| e["wrap"] == true)
        .collect();
    assert_eq!(wraps.len(), 1);
    assert_eq!(wraps[0]["interval_parity"], 2);
    assert_eq!(wraps[0]["sign"], 1);
}

#[test]
fn mixed_species_full_swap() {
    let o = run(&["run", "full-swap", "--statistics", "mixed:-1,-1;-1,-1"]);
    assert_eq!(code(&o), 0);
    assert!((phase(&json(&o)) - PI).abs() < 1e-10);
    let o = run(&["run", "full-swap", "--statistics", "mixed:-1,1;1,-1"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn literal_full_swap_uses_printed_strings() {
    let o = run(&["run", "full-swap", "--mode", "literal"]);
    assert_eq!(code(&o), 0);
    assert_eq!(phase(&json(&o)), 0.0);
}

#[test]
fn pulse_defaults_and_theta() {
    let doc = json(&run(&["run", "pulse"]));
    assert!((phase(&doc) - PI).abs() < 1e-10);
    let doc = json(&run(&["run", "pulse", "--theta", "0.7853981633974483"]));
    assert!(doc["visibility"].as_f64().unwrap() < 1e-12);
    assert!(doc["phase_rad"].is_null());
}

#[test]
fn pulse_schedule_file() {
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("schedule.json");
    std::fs::write(
        &path,
        r#"{"branch0": [{"from":1,"to":2,"theta":1.5707963267948966},{"from":3,"to":4,"theta":1.5707963267948966}],
            "branch1": [{"from":1,"to":4,"theta":1.5707963267948966},{"from":3,"to":2,"theta":1.5707963267948966}]}"#,
    )
    .unwrap();
    let o = run(&["run", "pulse", "--schedule", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!((phase(&json(&o)) - PI).abs() < 1e-10);

    let bad = path.with_file_name("bad_schedule.json");
    std::fs::write(&bad, r#"{"branch0": [], "branch1": [], "extra": 1}"#).unwrap();
    assert_eq!(code(&run(&["run", "pulse", "--schedule", bad.to_str().unwrap()])), 2);
}

#[test]
fn shots_are_reproducible() {
    let args = ["run", "pulse", "--theta", "0.5", "--shots", "1000", "--seed", "42"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let doc = json(&a);
    assert_eq!(doc["seed"], 42);
    assert_eq!(doc["probabilities"]["counts"]["shots"], 1000);
}

#[test]
fn bad_input_exits_2() {
    for args in [
        &["run", "pulse", "--shots", "10"][..],
        &["run", "half-swap", "--modes", "5"],
        &["run", "ring", "--n", "0"],
        &["run", "half-swap", "--statistics", "anyon"],
        &["run", "half-swap", "--statistics", "mixed:-1,1;-1,-1"],
        &["run", "teleport"],
        &["run", "half-swap", "--bogus"],
    ] {
        let o = run(args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn json_keys_sorted_and_reparse() {
    let o = run(&["run", "full-swap"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let doc: Value = serde_json::from_str(&text).unwrap();
    let keys: Vec<&String> = doc.as_object().unwrap().keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    for k in ["experiment", "params", "phase_rad", "visibility", "branch_final", "ledgers", "probabilities", "seed", "version"] {
        assert!(doc.get(k).is_some(), "missing {k}");
    }
    let first = text.find("\"branch_final\"").unwrap();
    assert!(first < text.find("\"experiment\"").unwrap());
}

#[test]
fn run_csv() {
    let o = run(&["run", "half-swap", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("experiment,phase_rad,visibility"));
    assert!(lines.next().unwrap().starts_with("half-swap,3.141592653589793,1,"));
}

#[test]
fn verify_passes() {
    let o = run(&["verify", "--modes", "8", "--trials", "500", "--seed", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("verify: PASS"));
}

#[test]
fn verify_cap() {
    let o = run(&["verify", "--modes", "20"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("12"));
}

#[test]
fn verify_cap_env_override() {
    let o = exe()
        .args(["verify", "--modes", "13", "--trials", "0"])
        .env("EXCHANGE_LAB_ORACLE_MAX_MODES", "13")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
}

#[test]
fn verify_zero_trials() {
    let o = run(&["verify", "--trials", "0", "--format", "json"]);
    assert_eq!(code(&o), 0);
    let doc = json(&o);
    assert_eq!(doc["cross_check"]["trials"], 0);
    assert_eq!(doc["passed"], true);
}

fn attribute(args: &[&str]) -> Value {
    let mut full = vec!["attribute"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--format", "json"]);
    let o = run(&full);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    json(&o)
}

fn rows<'a>(doc: &'a Value, branch: &str) -> Vec<&'a Value> {
    doc["rows"].as_array().unwrap().iter().filter(|r| r["branch"] == branch).collect()
}

#[test]
fn attribute_half_swap() {
    let doc = attribute(&["half-swap"]);
    let minus: Vec<_> = rows(&doc, "backward").into_iter().filter(|r| r["sign"] == -1).collect();
    assert_eq!(minus.len(), 1);
    assert_eq!((minus[0]["from"].as_u64(), minus[0]["to"].as_u64()), (Some(1), Some(4)));
    assert!(rows(&doc, "forward").iter().all(|r| r["sign"] == 1));
    assert_eq!(doc["footer"]["relative_sign"], -1);
}

#[test]
fn attribute_bosons_all_plus() {
    let doc = attribute(&["half-swap", "--statistics", "boson"]);
    assert!(doc["rows"].as_array().unwrap().iter().all(|r| r["sign"] == 1));
}

#[test]
fn attribute_ring_four() {
    let doc = attribute(&["ring", "--n", "4"]);
    let wrap: Vec<_> = doc["rows"].as_array().unwrap().iter().filter(|r| r["wrap"] == true).collect();
    assert_eq!(wrap.len(), 1);
    assert_eq!(wrap[0]["interval_parity"], 3);
    assert_eq!(wrap[0]["sign"], -1);
    assert!((doc["footer"]["phase_rad"].as_f64().unwrap() - PI).abs() < 1e-10);
}

#[test]
fn attribute_csv_footer() {
    let o = run(&["attribute", "half-swap", "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "branch,step,from,to,interval_parity,sign,wrap,phase_rad");
    assert!(lines.contains(&"backward,1,1,4,1,-1,false,"));
    assert!(lines.contains(&"backward,product,,,,-1,,"));
    assert_eq!(*lines.last().unwrap(), "relative,,,,,-1,,3.141592653589793");
}

#[test]
fn attribute_rejects_literal() {
    let o = run(&["attribute", "half-swap", "--mode", "literal"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn reference_demo_and_stdin() {
    let doc = json(&run(&["reference", "--demo"]));
    assert_eq!(doc["optical_phase_rad"].as_f64(), Some(PI));
    assert!(doc["cow_phase_rad"].as_f64().unwrap() > 0.0);

    let mut child = exe()
        .arg("reference")
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(br#"{"cow": {"mass": 1.0, "gravity": 2.0, "height": 3.0, "time": 4.0}}"#)
        .unwrap();
    let o = child.wait_with_output().unwrap();
    assert_eq!(code(&o), 0);
    let doc = json(&o);
    let expected = 24.0 / doc["hbar"].as_f64().unwrap();
    assert!((doc["cow_phase_rad"].as_f64().unwrap() / expected - 1.0).abs() < 1e-12);
    assert!(doc.get("optical_phase_rad").is_none());

    let mut child = exe().arg("reference").stdin(Stdio::piped()).stderr(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(b"{}").unwrap();
    assert_eq!(code(&child.wait_with_output().unwrap()), 2);
}
