use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nonmarkov"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env("NONMARKOV_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str], config: &Path, out: &Path) {
    let o = run(args, config, out);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn blp_on_sin_damping() {
    let out = tempfile::tempdir().unwrap();
    run_ok(&["blp"], &scenario("damping_sin.json"), out.path());
    let doc = json(out.path().join("blp.json"));
    let value = doc["result"]["value"].as_f64().unwrap();
    assert!((value - (1.0 - (-2.0f64).exp())).abs() <= 5e-3, "{value}");
    assert_eq!(doc["result"]["label"], "e/g antipodal pair");
    assert_eq!(doc["seed"], 7);
    assert_eq!(doc["scenario_hash"].as_str().unwrap().len(), 64);
    let csv = std::fs::read_to_string(out.path().join("blp_series.csv")).unwrap();
    assert!(csv.starts_with("t,D\n"));
    assert!(!csv.contains('\r'));
    assert_eq!(csv.lines().count(), 2002);
}

#[test]
fn rhp_on_sin_dephasing() {
    let out = tempfile::tempdir().unwrap();
    run_ok(&["rhp"], &scenario("dephasing_sin.json"), out.path());
    let doc = json(out.path().join("rhp.json"));
    let value = doc["result"]["value"].as_f64().unwrap();
    assert!((value - 4.0).abs() <= 0.05, "{value}");
    assert!((doc["result"]["truncated_at"].as_f64().unwrap() - 2.0 * std::f64::consts::PI).abs() < 1e-9);
}

#[test]
fn eps_flag_overrides_the_default_step() {
    let out = tempfile::tempdir().unwrap();
    let dt = 2.0 * std::f64::consts::PI / 2000.0;
    run_ok(&["rhp", "--eps", &format!("{}", 2.0 * dt)], &scenario("dephasing_sin.json"), out.path());
    let doc = json(out.path().join("rhp.json"));
    assert!((doc["result"]["eps"].as_f64().unwrap() - 2.0 * dt).abs() < 1e-12);
}

#[test]
fn evolve_without_dynamics_gives_constant_rows() {
    let out = tempfile::tempdir().unwrap();
    run_ok(&["evolve"], &scenario("zero.json"), out.path());
    let csv = std::fs::read_to_string(out.path().join("evolve.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,re_00,im_00,re_01,im_01,re_10,im_10,re_11,im_11");
    let rows: Vec<&str> = lines.map(|l| l.split_once(',').unwrap().1).collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| *r == "0.5,0,0.5,0,0.5,0,0.5,0"), "{rows:?}");
}

#[test]
fn divisibility_of_the_eternal_channel() {
    let out = tempfile::tempdir().unwrap();
    run_ok(&["divisibility"], &scenario("pauli_eternal.json"), out.path());
    let r = &json(out.path().join("divisibility.json"))["result"];
    assert_eq!(r["p_divisible"], true);
    assert_eq!(r["cp_divisible"], false);
    assert_eq!(r["samples"], 500);
}

#[test]
fn classical_copy_of_the_past() {
    let out = tempfile::tempdir().unwrap();
    run_ok(&["classical-check"], &scenario("classical_copy.json"), out.path());
    let r = &json(out.path().join("classical_check.json"))["result"];
    assert_eq!(r["divisibility"]["failures"], serde_json::json!(["composition"]));
    assert_eq!(r["divisibility"]["composition"]["max_violation"], 0.5);
    assert_eq!(r["markov"]["markov"], false);
}

#[test]
fn causal_break_on_exchange_witnesses_memory() {
    let out = tempfile::tempdir().unwrap();
    run_ok(&["causal-break"], &scenario("exchange_causal_break.json"), out.path());
    let r = &json(out.path().join("causal_break.json"))["result"];
    assert!(r["max_defect"].as_f64().unwrap() > 0.01);
    assert_eq!(r["points"].as_array().unwrap().len(), 8);
}

#[test]
fn helstrom_and_ancilla_on_sin_damping() {
    let out = tempfile::tempdir().unwrap();
    run_ok(&["helstrom"], &scenario("damping_sin.json"), out.path());
    let r = &json(out.path().join("helstrom.json"))["result"];
    assert!((r["total_increase"].as_f64().unwrap() - (1.0 - (-2.0f64).exp())).abs() < 1e-3);

    run_ok(&["ancilla-distance"], &scenario("damping_sin.json"), out.path());
    let r = &json(out.path().join("ancilla_distance.json"))["result"];
    assert_eq!(r["pairs"].as_array().unwrap().len(), 21);
    assert_eq!(r["backflow"], true);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "nmqj.json",
        r#"{"model": {"builtin": "amplitude_damping", "rate": {"kind": "sinusoid"}},
            "grid": {"t_max": "2pi", "n_steps": 200}, "seed": 5,
            "nmqj": {"ensemble_size": 2000, "initial_state": "+"}}"#,
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for cmd in ["nmqj", "blp"] {
        run_ok(&[cmd], &config, &a);
        run_ok(&[cmd], &config, &b);
    }
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 5, "{names:?}");
    for n in names {
        assert_eq!(std::fs::read(a.join(&n)).unwrap(), std::fs::read(b.join(&n)).unwrap(), "{n:?}");
    }
    // A different seed changes the trajectory log.
    let c = dir.path().join("c");
    run_ok(&["nmqj", "--seed", "6"], &config, &c);
    assert_ne!(std::fs::read(a.join("nmqj_events.csv")).unwrap(), std::fs::read(c.join("nmqj_events.csv")).unwrap());
}

#[test]
fn invalid_input_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"model": {"builtin": "zero"}, "grid": {"t_max": 1, "n_steps": -3}}"#);
    let o = run(&["evolve"], &bad, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid.n_steps"));
    assert!(!dir.path().join("out").exists());

    let unseeded = write(dir.path(), "unseeded.json", r#"{"model": {"builtin": "pauli_eternal"}, "grid": {"t_max": 1, "n_steps": 100}}"#);
    let o = run(&["divisibility"], &unseeded, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));

    let o = run(&["blp"], &dir.path().join("missing.json"), &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "stiff.json",
        r#"{"model": {"builtin": "amplitude_damping", "rate": {"kind": "constant", "value": 1e7}},
            "grid": {"t_max": 1, "n_steps": 10}, "seed": 1, "initial_state": "e",
            "nmqj": {"ensemble_size": 1000}}"#,
    );
    let o = run(&["nmqj"], &config, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}
