use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sepscope(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sepscope")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn entangled_by(report: &Value) -> Vec<String> {
    report["entangled_by"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect()
}

fn verdict<'a>(report: &'a Value, name: &str) -> &'a Value {
    report["verdicts"].as_array().unwrap().iter().find(|v| v["criterion"] == name).unwrap()
}

#[test]
fn isotropic_above_threshold_is_entangled() {
    let out = sepscope(&["analyze", "--state", "isotropic", "--d", "2", "--F", "0.6"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["classification"], "Entangled");
    let by = entangled_by(&r);
    assert!(by.contains(&"criterion_1".into()) && by.contains(&"ppt".into()), "{by:?}");
}

#[test]
fn isotropic_below_threshold_is_separable() {
    let r = json(&sepscope(&["analyze", "--state", "isotropic", "--F", "0.45"]));
    assert_eq!(r["classification"], "Separable");
    assert_eq!(r["decomposition"]["verified"], true);
}

#[test]
fn five_by_five_needs_criterion_2() {
    let r = json(&sepscope(&["analyze", "--state", "five-by-five"]));
    assert_eq!(r["classification"], "Entangled");
    assert_eq!(verdict(&r, "criterion_2")["result"], "Entangled");
    assert_eq!(verdict(&r, "criterion_1")["result"], "Inconclusive");
}

#[test]
fn upb_tiles_is_ppt_but_certified() {
    let r = json(&sepscope(&["analyze", "--state", "upb-tiles"]));
    assert_eq!(verdict(&r, "ppt")["result"], "Inconclusive");
    assert_eq!(r["certificate"]["result"], "Entangled");
    assert_eq!(r["classification"], "Entangled");
}

#[test]
fn criteria_selection() {
    let r = json(&sepscope(&["analyze", "--state", "bell", "--criteria", "ppt,rank_inequality"]));
    assert_eq!(r["verdicts"].as_array().unwrap().len(), 2);
    let out = sepscope(&["analyze", "--state", "bell", "--criteria", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn decompose_then_verify() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dec.json");
    let out = sepscope(&["decompose", "--family", "isotropic", "--F", "0.4"]);
    assert_eq!(out.status.code(), Some(0));
    std::fs::write(&path, &out.stdout).unwrap();
    let p = path.to_str().unwrap();

    let ok = sepscope(&["verify", "--state", "isotropic", "--F", "0.4", "--decomposition", p]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["result"], "PASS");

    let bad = sepscope(&["verify", "--state", "isotropic", "--F", "0.3", "--decomposition", p]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(json(&bad)["result"], "FAIL");
}

#[test]
fn bell_mixture_decomposition_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dec.json");
    std::fs::write(&path, sepscope(&["decompose", "--family", "bell-mixture"]).stdout).unwrap();
    let p = path.to_str().unwrap();
    assert_eq!(sepscope(&["verify", "--state", "bell-mixture", "--p", "0.5", "--decomposition", p]).status.code(), Some(0));
    assert_eq!(sepscope(&["verify", "--state", "bell-mixture", "--p", "0.6", "--decomposition", p]).status.code(), Some(1));
}

#[test]
fn search_finds_equal_bell_mixture() {
    let out = sepscope(&["search", "--state", "bell-mixture", "--p", "0.5", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["found"], true);
    assert!(r["residual"].as_f64().unwrap() < 1e-10);
    assert_eq!(r["seed"], 7);
    assert_eq!(r["restarts"], 64);
    assert!(r["V"].is_array());
}

#[test]
fn search_output_is_byte_identical_across_thread_counts() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_sepscope"))
            .args(["search", "--state", "isotropic", "--F", "0.4", "--seed", "3", "--restarts", "8"])
            .env("SEPSCOPE_THREADS", threads)
            .output()
            .unwrap()
            .stdout
    };
    let one = run("1");
    assert_eq!(one, run("1"));
    assert_eq!(one, run("3"));
}

#[test]
fn kraus_output_round_trips_through_state_file() {
    let out = sepscope(&["kraus", "--state", "upb-tiles"]);
    let k = json(&out);
    assert_eq!(k["dim_a"], 3);
    assert_eq!(k["ops"].as_array().unwrap().len(), 4);
    let spectral = json(&sepscope(&["kraus", "--state", "upb-tiles", "--spectral"]));
    assert_eq!(spectral["ops"].as_array().unwrap().len(), 4);
}

#[test]
fn file_input_matches_named_state() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.json");
    let h = 0.5f64.sqrt();
    // |Φ+><Φ+|
    let mut m = vec![vec![[0.0, 0.0]; 4]; 4];
    for &i in &[0usize, 3] {
        for &j in &[0usize, 3] {
            m[i][j] = [h * h, 0.0];
        }
    }
    let body = serde_json::json!({ "dim_a": 2, "dim_b": 2, "matrix": m });
    std::fs::write(&path, body.to_string()).unwrap();
    let r = json(&sepscope(&["analyze", "--input", path.to_str().unwrap()]));
    assert_eq!(r["classification"], "Entangled");
    assert!((verdict(&r, "ppt")["witness"]["min_eigenvalue"].as_f64().unwrap() + 0.5).abs() < 1e-12);
}

#[test]
fn invalid_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad: &Path = &dir.path().join("bad.json");
    std::fs::write(bad, "{\n  \"dim_a\": 2,\n  \"dim_b\": 2,\n  \"matrix\": [[[1, 0]] oops\n}").unwrap();
    let out = sepscope(&["analyze", "--input", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4"), "{err}");

    let nonherm = dir.path().join("nonherm.json");
    std::fs::write(&nonherm, r#"{"dim_a":1,"dim_b":2,"matrix":[[[0.5,0],[0.3,0]],[[0,0],[0.5,0]]]}"#).unwrap();
    let out = sepscope(&["analyze", "--input", nonherm.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not Hermitian"));

    assert_eq!(sepscope(&["analyze", "--state", "no-such-state"]).status.code(), Some(2));
    assert_eq!(sepscope(&["decompose", "--family", "isotropic", "--F", "0.9"]).status.code(), Some(2));
    assert_eq!(sepscope(&["analyze"]).status.code(), Some(2));
}

#[test]
fn list_states_is_json() {
    let list = json(&sepscope(&["list-states"]));
    let names: Vec<&str> = list.as_array().unwrap().iter().map(|v| v["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"upb-tiles") && names.contains(&"isotropic"));
}
