use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

use mftg_core::fixtures::example2_escape_probability;

fn mftg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mftg")).args(args).env_remove("MFTG_THREADS").output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = mftg(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fails_with(args: &[&str], code: i32) -> Value {
    let out = mftg(args);
    assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let line = String::from_utf8(out.stderr).unwrap();
    let err: Value = serde_json::from_str(line.lines().last().unwrap()).expect("JSON error on stderr");
    assert_eq!(err["error"]["exit_code"], code);
    err
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Value column of a grid CSV, keyed by row order.
fn csv_values(path: &Path) -> Vec<(usize, f64)> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            (f[0].parse().unwrap(), f.last().unwrap().parse().unwrap())
        })
        .collect()
}

/// Two-state affine model in which Blue's action 0 stays and 1 moves,
/// while Red cannot move; zero reward.
fn frozen_model(horizon: usize) -> Value {
    let stay_move = json!([[[1.0, 0.0], [0.0, 1.0]], [[0.0, 1.0], [1.0, 0.0]]]);
    let frozen = json!([[[1.0, 0.0], [1.0, 0.0]], [[0.0, 1.0], [0.0, 1.0]]]);
    let zeros = json!([[[[0, 0], [0, 0]], [[0, 0], [0, 0]]], [[[0, 0], [0, 0]], [[0, 0], [0, 0]]]]);
    let rep = |v: &Value| Value::Array(vec![v.clone(); horizon]);
    json!({
        "name": "frozen",
        "sizes": {"blue_states": 2, "red_states": 2, "blue_actions": 2, "red_actions": 2, "horizon": horizon},
        "rho": 0.5,
        "blue_kernel": {"base": rep(&stay_move), "mu_weights": rep(&zeros), "nu_weights": rep(&zeros)},
        "red_kernel": {"base": rep(&frozen), "mu_weights": rep(&zeros), "nu_weights": rep(&zeros)},
        "reward": {"base": vec![0; horizon + 1], "mu_coeffs": vec![[0, 0]; horizon + 1], "nu_coeffs": vec![[0, 0]; horizon + 1]}
    })
}

#[test]
fn example1_solve_and_policy() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solve");
    ok(&["solve", "--model", "example1", "--bins", "500", "--kind", "both", "--out", p(&out)]);
    let s = read_json(&out.join("summary.json"));
    let at = &s["value_at"];
    assert_eq!(at["mu"], json!([0.96, 0.04]));
    assert!((at["lower"].as_f64().unwrap() - 0.5298).abs() <= 0.005, "{at}");
    assert!((at["upper"].as_f64().unwrap() - 0.5384).abs() <= 0.005, "{at}");
    assert_eq!(s["G"], 500);
    assert_eq!(s["kind"], "both");
    assert!(s["runtime_secs"].as_f64().unwrap() > 0.0);
    assert_eq!(s["provenance"]["args"][0], "solve");

    let text = ok(&["policy", "--model", "example1", "--solve-artifact", p(&out), "--t", "0", "--mu", "0.96,0.04", "--nu", "0.04,0.96", "--kind", "blue"]);
    let pol: Value = serde_json::from_str(&text).unwrap();
    let succ = pol["successor"][0].as_f64().unwrap();
    assert!((succ - 0.4172).abs() <= 0.01, "{pol}");
    assert!(pol["residual"].as_f64().unwrap() <= pol["membership_tol"].as_f64().unwrap());
    for row in pol["policy"].as_array().unwrap() {
        let sum: f64 = row.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).sum();
        assert!((sum - 1.0).abs() < 1e-9);
    }
}

#[test]
fn example2_bounds_coincide_and_policy_hits_target() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solve");
    ok(&["solve", "--model", "example2", "--bins", "200", "--kind", "both", "--out", p(&out)]);
    let s = read_json(&out.join("summary.json"));
    assert!(s["max_abs_gap"].as_f64().unwrap() <= 0.01, "{s}");

    // value at t=1 against nu = [0.6, 0.4], by first Blue coordinate
    let rows: Vec<Vec<f64>> = fs::read_to_string(out.join("lower.csv"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .filter(|r: &Vec<f64>| r[0] == 1.0 && (r[5] - 0.6).abs() < 1e-9)
        .collect();
    let value_at = |m: f64| rows.iter().find(|r| (r[3] - m).abs() < 1e-9).unwrap()[7];
    let target = std::f64::consts::FRAC_1_SQRT_2;
    for mu in ["1,0", "0.3,0.7"] {
        let text = ok(&["policy", "--model", "example2", "--solve-artifact", p(&out), "--mu", mu, "--nu", "0.6,0.4"]);
        let pol: Value = serde_json::from_str(&text).unwrap();
        let succ = pol["successor"][0].as_f64().unwrap();
        assert!((succ - target).abs() <= 0.025, "{pol}");
        assert_eq!(value_at(succ), value_at(0.705), "{pol}");
        assert_eq!(pol["residual"], 0.0);
    }
}

#[test]
fn zero_reward_model_file() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("frozen.json");
    fs::write(&model, frozen_model(2).to_string()).unwrap();
    let out = dir.path().join("solve");
    ok(&["solve", "--model", p(&model), "--bins", "10", "--kind", "lower", "--out", p(&out)]);
    let values = csv_values(&out.join("lower.csv"));
    assert_eq!(values.len(), 3 * 11 * 11);
    assert!(values.iter().all(|(_, v)| *v == 0.0));
    assert!(!out.join("upper.csv").exists());
    let s = read_json(&out.join("summary.json"));
    assert!(s["value_at"].is_null());

    let text = ok(&["policy", "--model", p(&model), "--solve-artifact", p(&out), "--mu", "0.3,0.7", "--nu", "0.5,0.5", "--kind", "red", "--t", "1"]);
    let pol: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(pol["successor"], json!([0.5, 0.5]));
    assert_eq!(pol["grid"], "lower");
}

#[test]
fn tampered_successor_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("frozen.json");
    fs::write(&model, frozen_model(1).to_string()).unwrap();
    let out = dir.path().join("solve");
    ok(&["solve", "--model", p(&model), "--bins", "4", "--kind", "lower", "--out", p(&out)]);
    // point every recorded Red successor at a different grid point
    let path = out.join("lower_successors.csv");
    let text = fs::read_to_string(&path).unwrap();
    let edited: String = text
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            match f[..] {
                [t, i, j, a, _] if t == "0" => format!("{t},{i},{j},{a},{}", if j == "0" { 4 } else { 0 }),
                _ => l.to_string(),
            }
        })
        .map(|l| l + "\n")
        .collect();
    fs::write(&path, edited).unwrap();
    let err = fails_with(&["policy", "--model", p(&model), "--solve-artifact", p(&out), "--mu", "1,0", "--nu", "0.5,0.5", "--kind", "red"], 4);
    assert_eq!(err["error"]["kind"], "infeasible");
    assert!(err["error"]["residual"].as_f64().unwrap() >= 0.25 - 1e-9);
}

#[test]
fn invalid_models_and_flags_are_validation_errors() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = frozen_model(1);
    m["blue_kernel"]["base"][0][0][0] = json!([0.6, 0.6]);
    let bad = dir.path().join("bad.json");
    fs::write(&bad, m.to_string()).unwrap();
    let err = fails_with(&["solve", "--model", p(&bad), "--bins", "4", "--out", p(&dir.path().join("x"))], 2);
    assert_eq!(err["error"]["kind"], "model_validation");

    fails_with(&["solve", "--model", "nope", "--bins", "4", "--out", p(&dir.path().join("x"))], 2);
    fails_with(&["solve", "--model", "example1", "--bins", "1", "--out", p(&dir.path().join("x"))], 2);
    fails_with(&["verify", "--suite", "everything"], 2);
}

#[test]
fn oversized_grid_is_a_capacity_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = fails_with(&["solve", "--model", "example1", "--bins", "6000000", "--out", p(&dir.path().join("x"))], 3);
    assert_eq!(err["error"]["kind"], "capacity");
}

#[test]
fn two_node_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    ok(&[
        "simulate", "--model", "two_node", "--n1", "2", "--n2", "2", "--blue", "pure:1,1", "--red", "pure:0,0", "--episodes", "40000", "--seed", "5", "--out",
        p(&out),
    ]);
    let s = read_json(&out.join("summary.json"));
    let (mean, se) = (s["mean"].as_f64().unwrap(), s["stderr"].as_f64().unwrap());
    assert!((mean - 0.625).abs() <= 3.0 * se, "{mean} {se}");
    assert_eq!(s["provenance"]["seed"], 5);

    let text = fs::read_to_string(out.join("episodes.jsonl")).unwrap();
    let mut lines = text.lines();
    let head: Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(head["provenance"]["tool"], "mftg");
    let logs: Vec<mftg_core::simulator::EpisodeLog> = lines.map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(logs.len(), 40000);
    let m: f64 = logs.iter().map(|l| l.total).sum::<f64>() / logs.len() as f64;
    assert!((m - mean).abs() < 1e-12);
}

#[test]
fn deterministic_fixture_has_zero_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    ok(&["simulate", "--model", "info_counterexample", "--n1", "2", "--n2", "1", "--blue", "info-counterexample", "--episodes", "50", "--out", p(&out)]);
    let s = read_json(&out.join("summary.json"));
    assert_eq!(s["stderr"].as_f64().unwrap(), 0.0);
    assert_eq!(s["mean"].as_f64().unwrap(), 0.0);
}

#[test]
fn example2_red_transition_estimate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    ok(&[
        "simulate", "--model", "example2", "--n1", "3", "--n2", "5", "--blue", "example2-target", "--red", "pure:1,1", "--episodes", "100000", "--seed", "11",
        "--out", p(&out),
    ]);
    let text = fs::read_to_string(out.join("episodes.jsonl")).unwrap();
    let escapes: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| {
            let log: mftg_core::simulator::EpisodeLog = serde_json::from_str(l).unwrap();
            example2_escape_probability(log.steps[1].mu.as_slice())
        })
        .collect();
    let mean = escapes.iter().sum::<f64>() / escapes.len() as f64;
    assert!((mean - 0.518).abs() <= 0.002, "{mean}");
}

#[test]
fn coordinator_needs_a_solve_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let err = fails_with(&["simulate", "--model", "example1", "--n1", "4", "--n2", "4", "--blue", "coordinator", "--out", p(&out)], 2);
    assert_eq!(err["error"]["kind"], "missing_artifact");
    let err = fails_with(
        &["simulate", "--model", "example1", "--n1", "4", "--n2", "4", "--blue", "coordinator", "--solve-artifact", p(dir.path()), "--out", p(&out)],
        2,
    );
    assert_eq!(err["error"]["kind"], "missing_artifact");
}

#[test]
fn coordinator_simulation_from_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let solved = dir.path().join("solve");
    ok(&["solve", "--model", "two_node", "--horizon", "2", "--bins", "20", "--out", p(&solved)]);
    let out = dir.path().join("sim");
    let args = [
        "simulate", "--model", "two_node", "--horizon", "2", "--n1", "6", "--n2", "6", "--blue", "coordinator", "--red", "coordinator", "--solve-artifact",
        p(&solved), "--episodes", "200", "--out", p(&out),
    ];
    ok(&args);
    let s = read_json(&out.join("summary.json"));
    assert!(s["mean"].as_f64().unwrap().is_finite());

    let mismatched = [
        "simulate", "--model", "example1", "--n1", "6", "--n2", "6", "--blue", "coordinator", "--solve-artifact", p(&solved), "--out", p(&out),
    ];
    let err = fails_with(&mismatched, 2);
    assert_eq!(err["error"]["kind"], "usage");
}

#[test]
fn sweep_matches_exact_gap() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let stdout = ok(&["sweep", "--model", "example2", "--n-list", "3,6,12", "--nu0", "0.6,0.4", "--episodes", "0", "--seed", "1", "--out", p(&out)]);
    assert!(stdout.contains("K "));
    let csv = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert!(csv.starts_with("# tool: mftg"));
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip_while(|l| *l != "n1,n2,gap,stderr,exact_opt,coord_value")
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    assert_eq!((rows[0][0], rows[0][1]), (3.0, 5.0));
    assert!((rows[0][2] - 0.2008).abs() <= 1e-3, "{rows:?}");
    let s = read_json(&out.join("summary.json"));
    let k = s["K"].as_f64().unwrap();
    assert!((k - rows[0][2] * 3f64.sqrt()).abs() < 1e-12);
    assert_eq!(s["envelope_holds"], true);
    for r in &rows {
        assert!(r[2] >= -1e-12 && r[2] <= k / r[0].sqrt() + 1e-12);
    }

    let err = fails_with(&["sweep", "--n-list", "40", "--state-cap", "10", "--out", p(&out)], 3);
    assert_eq!(err["error"]["kind"], "capacity");
}

#[test]
fn verify_is_deterministic() {
    let a = ok(&["verify", "--suite", "core", "--seed", "3"]);
    let b = ok(&["verify", "--suite", "core", "--seed", "3"]);
    assert_eq!(a, b);
    assert!(a.starts_with("TAP version 13"), "{a}");
    assert!(a.contains("ok ") && !a.contains("not ok"));
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_mftg"))
            .args(["solve", "--model", "two_node", "--bins", "30", "--out", p(&out)])
            .env("MFTG_THREADS", threads)
            .output()
            .unwrap();
        assert!(status.status.success());
        let data = |f: &str| -> Vec<String> { fs::read_to_string(out.join(f)).unwrap().lines().filter(|l| !l.starts_with('#')).map(str::to_string).collect() };
        (data("lower.csv"), data("upper_successors.csv"))
    };
    assert_eq!(run("1", "one"), run("3", "three"));
}
