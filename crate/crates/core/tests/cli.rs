use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use combcpt::config::load_config;
use combcpt::output::{read_sweep_csv, read_trajectory_csv, SWEEP_HEADER, TRAJECTORY_HEADER};

fn combcpt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_combcpt"))
        .args(args)
        .env_remove("COMBCPT_WORKERS")
        .output()
        .expect("spawn combcpt")
}

fn emit_preset(name: &str, dir: &Path) -> String {
    let path = dir.join(format!("{name}.toml"));
    let out = combcpt(&["preset", name, "--emit-config", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path.to_str().unwrap().to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn run_writes_trajectory_matching_library() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = emit_preset("fig2a", dir.path());
    let csv = dir.path().join("a.csv");
    let out = combcpt(&["run", "--config", &cfg, "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));

    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), TRAJECTORY_HEADER.join(","));
    let rows = read_trajectory_csv(&csv).unwrap();
    assert_eq!(rows.len(), 251);

    let traj = load_config(&cfg).unwrap().scenario().unwrap().run().unwrap();
    for (row, snap) in rows.iter().zip(&traj.snapshots) {
        assert_eq!(row.pulse, snap.pulse_index);
        assert_eq!(row.values[0], snap.time);
        assert_eq!(row.values[1], snap.populations()[0]);
        assert_eq!(row.values[7], snap.abs_rho12());
    }
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = emit_preset("fig2b", dir.path());
    let a = combcpt(&["run", "--config", &cfg]);
    let b = combcpt(&["run", "--config", &cfg]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn sweep_is_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("radial.toml");
    let text = fs::read_to_string(emit_preset("fig8a", dir.path())).unwrap();
    let text = text.replace("stop = 150.0", "stop = 20.0").replace("step = 1.0", "step = 5.0");
    fs::write(&path, text).unwrap();
    let p = path.to_str().unwrap();

    let one = combcpt(&["sweep", "--config", p, "--workers", "1"]);
    let two = combcpt(&["sweep", "--config", p, "--workers", "2"]);
    assert!(one.status.success(), "{}", stderr(&one));
    assert_eq!(one.stdout, two.stdout);

    let csv = dir.path().join("s.csv");
    fs::write(&csv, &one.stdout).unwrap();
    let rows = read_sweep_csv(&csv).unwrap();
    assert_eq!(rows.len(), 5 * 41);
    assert_eq!(rows[41].axis_value, 5e-6);
    assert!(String::from_utf8_lossy(&one.stdout).starts_with(&SWEEP_HEADER.join(",")));
}

#[test]
fn preset_subcommand_runs_rep_rate() {
    let out = combcpt(&["preset", "fig4"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 151);
}

#[test]
fn oracle_reports_deviation() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("oracle.toml");
    let text = fs::read_to_string(emit_preset("fig2a", dir.path())).unwrap();
    let text = text
        .replace("mode = \"single\"", "mode = \"oracle\"")
        .replace("pulses = 250", "pulses = 1")
        + "\n[oracle]\nstep_fs = 0.01\n";
    fs::write(&path, text).unwrap();
    let out = combcpt(&["oracle", "--config", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("deviation"));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 3);
}

#[test]
fn exit_codes_by_category() {
    let dir = tempfile::tempdir().unwrap();

    let out = combcpt(&["preset", "fig9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).starts_with("error[config]"));
    assert!(stderr(&out).contains("fig2a"));

    let out = combcpt(&["run", "--config", "/nonexistent/cfg.toml"]);
    assert_eq!(out.status.code(), Some(5));
    assert!(stderr(&out).starts_with("error[io]"));

    let cfg = emit_preset("fig2a", dir.path());
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, fs::read_to_string(&cfg).unwrap().replace("gamma41 = 20000000.0", "gamma41 = -1.0")).unwrap();
    let out = combcpt(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("gamma41"));

    let missing = dir.path().join("missing.toml");
    fs::write(&missing, fs::read_to_string(&cfg).unwrap().replace("tau0_fs = 10.0\n", "")).unwrap();
    let out = combcpt(&["run", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("tau0"));

    let out = combcpt(&["run", "--config", &cfg, "--steps-per-cycle", "4"]);
    assert_eq!(out.status.code(), Some(2));

    let out = combcpt(&["oracle", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("guard"));

    let out = combcpt(&["run", "--config", &cfg, "--out", "/nonexistent/out.csv"]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn overrides_change_the_integration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = emit_preset("fig2c", dir.path());
    let base = combcpt(&["run", "--config", &cfg]);
    let fine = combcpt(&["run", "--config", &cfg, "--steps-per-cycle", "96", "--window", "6"]);
    assert!(fine.status.success(), "{}", stderr(&fine));
    assert_ne!(base.stdout, fine.stdout);
}
