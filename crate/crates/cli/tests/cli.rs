use std::path::Path;
use std::process::Command;

fn bo(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_bo")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, json).unwrap();
    path.display().to_string()
}

#[test]
fn simulate_succeeds_and_reports_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "sim.json",
        r#"{"scenario": "simulate", "grid": {"M": 32}, "physics": {"T": 0.2, "dt": 0.01}}"#,
    );
    let out = dir.path().join("out");
    let res = bo(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let report: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(report["scenario"], "simulate");
    assert!(out.join("trajectory.csv").exists());
    assert!(out.join("run.json").exists());
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "stab.json",
        r#"{"scenario": "stabilize", "grid": {"M": 32}, "physics": {"T": 1, "dt": 0.01},
            "initial": {"kind": "random", "seed": 1}}"#,
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let res = bo(&["stabilize", "--config", &cfg, "--seed", "7", "--out", out.to_str().unwrap()]);
        assert_eq!(res.status.code(), Some(0));
    }
    for file in ["trajectory.csv", "decay.json"] {
        assert_eq!(std::fs::read(a.join(file)).unwrap(), std::fs::read(b.join(file)).unwrap());
    }
    let run: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("run.json")).unwrap()).unwrap();
    assert_eq!(run["config"]["initial"]["seed"], 7);
}

#[test]
fn invalid_config_exits_with_two_and_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.json",
        r#"{"scenario": "simulate", "grid": {"M": 32}, "physics": {"epsilon": 3}}"#,
    );
    let res = bo(&["simulate", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("physics.epsilon"));

    let res = bo(&["stabilize", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("scenario"));
}

#[test]
fn blow_up_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "blow.json",
        r#"{"scenario": "simulate", "grid": {"M": 64}, "damping": "off", "physics": {"T": 5, "dt": 0.5},
            "initial": {"kind": "random", "seed": 3, "target_norm": 1000}}"#,
    );
    let res = bo(&["simulate", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stderr).contains("diverged"));
}

#[test]
fn stalled_control_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "ctl.json",
        r#"{"scenario": "control-linear", "grid": {"M": 32}, "physics": {"T": 1, "dt": 0.01},
            "initial": {"kind": "modes", "mode_list": [{"k": 1, "cos": 0}]},
            "target": {"kind": "random", "seed": 2, "target_norm": 0.1},
            "control": {"cg_tol": 1e-12, "max_iter": 1}}"#,
    );
    let res = bo(&["control-linear", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(4), "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn verify_flag_reports_the_replayed_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "ctl.json",
        r#"{"scenario": "control-linear", "grid": {"M": 32}, "physics": {"T": 1, "dt": 0.01},
            "initial": {"kind": "modes", "mode_list": [{"k": 1, "cos": 0}]},
            "target": {"kind": "modes", "mode_list": [{"k": 1, "cos": 0.1}]}}"#,
    );
    let out = dir.path().join("out");
    let res = bo(&["control-linear", "--config", &cfg, "--verify", "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let report: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert!(report["summary"]["verified_terminal_error"].as_f64().unwrap() < 1e-6);
    assert!(out.join("verification.json").exists());
}
