use std::path::Path;
use std::process::{Command, Output};

use gsm_threshold::config::RunConfig;

fn bin(out: &Path) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_gsm-threshold"));
    cmd.env_remove("GSM_THRESHOLD_OUT").current_dir(out);
    cmd
}

fn run(out: &Path, args: &[&str]) -> Output {
    bin(out).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn verify_minimal_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify", "--arch", "minimal"]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(dir.path().join("results/verify_minimal.json").exists());
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn corrupted_verify_exits_with_runtime_code() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["verify", "--corrupt", "--k", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn efficiency_table_matches_printed_anchors() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &["efficiency", "--table", "I", "--out", "tables"],
    );
    assert_eq!(o.status.code(), Some(0));
    let csv = stdout(&o);
    assert!(csv.starts_with("n,m,eta,efficiency\n"));
    for anchor in ["2,2,0,0.7383", "2,2,0.001,0.7349"] {
        assert!(csv.contains(anchor), "missing {anchor}");
    }
    let written =
        std::fs::read_to_string(dir.path().join("tables/efficiency_table_I.csv")).unwrap();
    assert_eq!(written, csv);
}

#[test]
fn single_efficiency_is_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "efficiency",
            "--n",
            "1",
            "--m",
            "1",
            "--eta",
            "0",
            "--convention",
            "hadamard",
        ],
    );
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["p_joint"], 0.5);
    assert_eq!(v["p_zz"], 1.0);
}

#[test]
fn validation_errors_exit_one_and_name_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "efficiency",
            "--protocol",
            "active",
            "--m",
            "2",
            "--j",
            "2",
            "--eta",
            "0.01",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("j"));
    assert_eq!(
        run(dir.path(), &["verify", "--no-such-flag"]).status.code(),
        Some(1)
    );
    assert_eq!(run(dir.path(), &["efficiency"]).status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("blocker"), "").unwrap();
    let o = run(
        dir.path(),
        &["efficiency", "--table", "II", "--out", "blocker/sub"],
    );
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn print_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let first = run(
        dir.path(),
        &[
            "threshold",
            "--print-config",
            "--n",
            "4",
            "--m",
            "3",
            "--eta-grid",
            "0.03:0.05:3",
        ],
    );
    assert_eq!(first.status.code(), Some(0));
    let text = stdout(&first);
    let cfg = RunConfig::from_toml_str(&text).unwrap();
    assert_eq!((cfg.n, cfg.m), (4, 3));
    std::fs::write(dir.path().join("run.toml"), &text).unwrap();
    let second = run(dir.path(), &["--config", "run.toml", "--print-config"]);
    assert_eq!(stdout(&second), text);
}

#[test]
fn empty_config_gives_defaults() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("empty.toml"), "").unwrap();
    let o = run(dir.path(), &["--config", "empty.toml", "--print-config"]);
    let cfg = RunConfig::from_toml_str(&stdout(&o)).unwrap();
    let defaults = RunConfig {
        output_dir: "results".into(),
        ..RunConfig::default()
    };
    assert_eq!(cfg, defaults);
}

#[test]
fn flag_grid_overrides_file_grid() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.toml"),
        "eta_grid = [0.01, 0.02]\nsamples = 50\n",
    )
    .unwrap();
    let o = run(
        dir.path(),
        &[
            "--config",
            "run.toml",
            "--eta-grid",
            "0.03:0.046:9",
            "--print-config",
        ],
    );
    let cfg = RunConfig::from_toml_str(&stdout(&o)).unwrap();
    let grid = cfg.eta_grid.unwrap();
    assert_eq!(grid.len(), 9);
    assert!((grid[0] - 0.03).abs() < 1e-12 && (grid[8] - 0.046).abs() < 1e-12);
    assert_eq!(cfg.samples, 50);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("run.toml"), "smaples = 5\n").unwrap();
    let o = run(dir.path(), &["--config", "run.toml", "verify"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("smaples"));
}

#[test]
fn small_threshold_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(dir.path())
        .env("GSM_THRESHOLD_OUT", "env_out")
        .args([
            "threshold",
            "--distances",
            "5,7",
            "--samples",
            "300",
            "--eta-grid",
            "0.02:0.05:4",
        ])
        .output()
        .unwrap();
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let out = dir.path().join("env_out");
    let json: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out.join("threshold_cyclic_static_3-2.json")).unwrap(),
    )
    .unwrap();
    let entry = &json["families"][0]["thresholds"]["3,2"];
    assert_eq!(entry["photons_per_resource_state"], 24);
    assert_eq!(entry["reference"], 0.0381);
    let csv = std::fs::read_to_string(out.join("threshold_cyclic_static_3-2.csv")).unwrap();
    assert_eq!(
        csv.lines().filter(|l| !l.starts_with('#')).count(),
        1 + 2 * 4
    );
    let svg = std::fs::read_to_string(out.join("threshold_cyclic_static_3-2.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
}

#[test]
fn sweep_rates_rise_with_loss() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        dir.path(),
        &[
            "sweep",
            "--distances",
            "5,7",
            "--samples",
            "2000",
            "--eta-grid",
            "0.03:0.046:2",
            "--out",
            ".",
        ],
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let csv = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .find(|p| p.extension().is_some_and(|x| x == "csv"))
        .unwrap();
    let text = std::fs::read_to_string(csv).unwrap();
    let rows: Vec<(String, f64)> = text
        .lines()
        .skip_while(|l| l.starts_with('#') || l.starts_with("architecture"))
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            (cols[6].to_string(), cols[8].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 4);
    for pair in rows.chunks(2) {
        assert_eq!(pair[0].0, pair[1].0);
        assert!(pair[0].1 < pair[1].1, "{rows:?}");
    }
}
