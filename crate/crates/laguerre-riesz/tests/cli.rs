//! CLI surface checks: the registry listing, the debug evaluation flag,
//! config handling, and the run-directory layout.

use std::process::Command;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_laguerre-riesz")
}

#[test]
fn list_names_every_experiment() {
    let out = Command::new(bin()).arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in [
        "local_mass_decay",
        "trace_lower",
        "norm_asymptotics",
        "weighted_eigen",
        "projection_growth",
        "convergence_sweep",
        "square_function_scaling",
        "operator_inequalities",
        "weighted_smoothing",
    ] {
        assert!(text.contains(name), "missing {name} in list output");
    }
}

#[test]
fn dump_special_prints_full_precision() {
    let out = Command::new(bin())
        .args([
            "dump-special",
            "--fn",
            "laguerre_poly",
            "--args",
            "3,0.5,2.0",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let val: f64 = String::from_utf8(out.stdout)
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!((val - (-0.8958333333333333)).abs() < 1e-13);

    let bad = Command::new(bin())
        .args(["dump-special", "--fn", "nope", "--args", "1"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
}

#[test]
fn run_writes_run_directory_and_respects_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("cfg.txt");
    std::fs::write(&config, "beta = 0.25\nalpha = 0.5\n").unwrap();
    let out = Command::new(bin())
        .args(["run", "weighted_smoothing", "--seed", "3", "--config"])
        .arg(&config)
        .args(["--set", "beta=0.0", "--out"])
        .arg(dir.path().join("runs"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let runs: Vec<_> = std::fs::read_dir(dir.path().join("runs"))
        .unwrap()
        .collect();
    assert_eq!(runs.len(), 1);
    let run_dir = runs[0].as_ref().unwrap().path();
    for f in ["report.json", "samples.csv", "config.txt", "plot.svg"] {
        assert!(run_dir.join(f).exists(), "{f} missing");
    }
    // --set wins over the config file
    let cfg_text = std::fs::read_to_string(run_dir.join("config.txt")).unwrap();
    assert!(cfg_text.contains("beta = 0.0"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("report.json")).unwrap())
            .unwrap();
    assert_eq!(report["params"]["beta"], "0");
    assert_eq!(report["verdict"], "pass");
    assert_eq!(report["seed"], 3);
}

#[test]
fn unknown_experiment_fails() {
    let out = Command::new(bin())
        .args(["run", "not_real"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}
