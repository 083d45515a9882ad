use std::path::Path;
use std::process::{Command, Output};

use pcflow::runner::io::{emit_snapshot, load_snapshot, read_csv};
use pcflow::runner::{parse_config, ExperimentConfig};
use pcflow::vaisman::{assess, make_noncsc_vaisman, make_standard_vaisman};

fn pcflow(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pcflow"))
        .current_dir(dir)
        .env("PCFLOW_THREADS", "2")
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

fn verdict(dir: &Path, preset: &str) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("out").join(format!("{preset}_verdict.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn suite_passes_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = pcflow(dir.path(), &["suite", "--out-dir", "out"]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("# preset = identity_suite"));
    assert!(!stdout.contains("FAIL"));
    assert!(dir.path().join("out/identity_suite.json").exists());
}

#[test]
fn impossible_tolerance_is_an_assertion_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = pcflow(dir.path(), &["suite", "--out-dir", "out", "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "bad.cfg", "preset = stationary_csc\nn = 7\n");
    let out = pcflow(dir.path(), &["run", "bad.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    write(dir.path(), "typo.cfg", "preset = identity_suite\nsamples = 2\nsampels = 3\n");
    let strict = pcflow(dir.path(), &["--out-dir", "out", "run", "typo.cfg"]);
    assert_eq!(strict.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&strict.stderr).contains("unknown key `sampels`"));
    let lenient = pcflow(dir.path(), &["--strict", "false", "--out-dir", "out", "run", "typo.cfg"]);
    assert_eq!(lenient.status.code(), Some(0));
}

#[test]
fn stationary_preset_stays_vaisman_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "a.cfg", "preset = stationary_csc\nt_end = 2e-3\nrecord_every = 5\n");
    let first = pcflow(dir.path(), &["--out-dir", "out", "run", "a.cfg"]);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stdout));
    let v = verdict(dir.path(), "stationary_csc");
    assert_eq!(v["stays_vaisman"], serde_json::Value::Bool(true));
    let csv_a = std::fs::read(dir.path().join("out/stationary_csc_trace.csv")).unwrap();

    let second = pcflow(dir.path(), &["--out-dir", "out2", "run", "a.cfg"]);
    assert_eq!(second.status.code(), Some(0));
    let csv_b = std::fs::read(dir.path().join("out2/stationary_csc_trace.csv")).unwrap();
    assert_eq!(csv_a, csv_b);
    assert_eq!(read_csv(&dir.path().join("out/stationary_csc_trace.csv")).unwrap().len(), 5);
}

#[test]
fn noncsc_preset_leaves_vaisman() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "b.cfg",
        "preset = noncsc_vaisman\nepsilon = 0.1\nmode = 1,1\nt_end = 3e-3\nrecord_every = 10\n",
    );
    let out = pcflow(dir.path(), &["--out-dir", "out", "run", "b.cfg"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = verdict(dir.path(), "noncsc_vaisman");
    assert_eq!(v["stays_vaisman"], serde_json::Value::Bool(false));
    assert!(v["exit_time"].as_f64().unwrap() > 0.0);
}

#[test]
fn numerical_abort_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let snap = dir.path().join("seed.json");
    let m = make_noncsc_vaisman(pcflow::grid::BaseGrid::new(32).unwrap(), 0.1, (1, 1)).unwrap();
    emit_snapshot(&m, &snap).unwrap();
    // the loosest admissible step: spectral RK4 diverges before t = 0.02
    let dt = pcflow::flow::cfl_bound(&m, 0.5);
    write(
        dir.path(),
        "c.cfg",
        &format!("preset = custom\nsnapshot = seed.json\ncfl_safety = 0.5\ndt = {dt:?}\nt_end = 0.02\n"),
    );
    let out = pcflow(dir.path(), &["--out-dir", "out", "run", "c.cfg"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("out/custom_trace.csv").exists());
    assert_eq!(verdict(dir.path(), "custom")["completed"], serde_json::Value::Bool(false));
}

#[test]
fn list_names_every_preset() {
    let dir = tempfile::tempdir().unwrap();
    let out = pcflow(dir.path(), &["list"]);
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["identity_suite", "stationary_csc", "noncsc_vaisman", "custom"] {
        assert!(text.contains(name));
    }
}

#[test]
fn config_text_round_trips() {
    let text = "preset = noncsc_vaisman\nepsilon = -0.2\nmode = 2,3\ndt = 3.3e-5\nseed = 99\nout_dir = results/a\n";
    let cfg = parse_config(text, true).unwrap();
    assert_eq!(parse_config(&cfg.to_text(), true).unwrap(), cfg);
    let custom = ExperimentConfig {
        preset: "custom".into(),
        snapshot: Some("x/y.json".into()),
        ..ExperimentConfig::default()
    };
    assert_eq!(parse_config(&custom.to_text(), true).unwrap(), custom);
}

#[test]
fn snapshot_reload_gives_identical_assessment() {
    let dir = tempfile::tempdir().unwrap();
    let grid = pcflow::grid::BaseGrid::new(32).unwrap();
    for m in [make_standard_vaisman(grid, 1.0).unwrap(), make_noncsc_vaisman(grid, 0.1, (1, 1)).unwrap()] {
        let path = dir.path().join("s.json");
        emit_snapshot(&m, &path).unwrap();
        let back = load_snapshot(&path).unwrap();
        assert_eq!(back, m);
        assert_eq!(assess(&back, 1e-14).unwrap(), assess(&m, 1e-14).unwrap());
    }
    let standard: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("s.json")).unwrap()).unwrap();
    assert_eq!(standard["n"], 32);
    let path = dir.path().join("std.json");
    emit_snapshot(&make_standard_vaisman(grid, 1.0).unwrap(), &path).unwrap();
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    for (key, value) in [("u", 1.0), ("lambda", 1.0), ("p", 0.0), ("q", 0.0)] {
        assert!(v[key].as_array().unwrap().iter().all(|x| x.as_f64() == Some(value)));
    }
}
