//! End-to-end checks of the binary: exit codes, output formats, config
//! layering and determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fracpois(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fracpois"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn tmp(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("fracpois_cli_tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn eval_ml_prints_value() {
    let out = fracpois(&["eval", "ml", "--alpha", "0.5", "--x", "-1"]);
    assert!(out.status.success());
    let v: f64 = stdout(&out).trim().parse().unwrap();
    assert!((v - 0.42758357615).abs() < 1e-9);
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        vec!["eval", "ml", "--alpha", "1.5", "--x", "-1"],
        vec!["eval", "ml", "--alpha", "0.5", "--x", "1"],
        vec!["sample", "fnpp", "--alpha", "0.5", "--rate", "nope:z=1", "--t", "1", "--n", "5", "--seed", "1"],
        vec!["no-such-command"],
        vec!["density", "inv-subordinator", "--alpha", "0.6", "--t", "-2"],
    ] {
        let out = fracpois(&args);
        assert_eq!(out.status.code(), Some(2), "args {args:?}");
    }
}

#[test]
fn seed_is_required_for_sampling() {
    let out = fracpois(&["sample", "fnpp", "--alpha", "0.5", "--rate", "linear:lambda=1", "--t", "1", "--n", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_errors_exit_3() {
    // Makeham cumulative overflows at b*t = 800.
    let out = fracpois(&[
        "sample", "nhpp-path", "--rate", "makeham:c=1,b=1,mu=0", "--horizon", "800", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn density_csv_round_trip() {
    let path = tmp("h.csv");
    let out = fracpois(&[
        "density", "inv-subordinator", "--alpha", "0.6", "--t", "10", "--xmax", "auto",
        "--n-points", "128", "--out", path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,h"));
    assert_eq!(lines.count(), 128);

    // Explicit xmax variant.
    let out = fracpois(&[
        "density", "inv-subordinator", "--alpha", "0.6", "--t", "1", "--xmax", "3.5",
        "--n-points", "64",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 65);
}

#[test]
fn sample_dumps_have_value_header_and_are_deterministic() {
    let args = [
        "sample", "fnpp", "--alpha", "0.9", "--rate", "weibull:b=1,c=0.7", "--t", "2",
        "--n", "64", "--seed", "7",
    ];
    let a = fracpois(&args);
    let b = fracpois(&args);
    assert!(a.status.success());
    assert_eq!(stdout(&a), stdout(&b));
    let text = stdout(&a);
    assert!(text.starts_with("value\n"));
    assert_eq!(text.lines().count(), 65);
}

#[test]
fn path_dumps_have_event_time_header() {
    let out = fracpois(&[
        "sample", "fhpp-path", "--alpha", "0.9", "--lambda", "2", "--horizon", "5",
        "--seed", "3",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("event_time\n"));

    let out = fracpois(&[
        "sample", "fnpp-path", "--alpha", "0.9", "--rate", "linear:lambda=1",
        "--horizon", "5", "--grid-step", "0.05", "--seed", "3",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let events: Vec<f64> = text.lines().skip(1).map(|l| l.parse().unwrap()).collect();
    assert!(events.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn pmf_table_shape() {
    let out = fracpois(&[
        "pmf", "--alpha", "0.5", "--rate", "linear:lambda=1", "--t", "1", "--k-max", "10",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("k,pmf\n"));
    assert_eq!(text.lines().count(), 12);
    let p0: f64 = text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((p0 - 0.42758358).abs() < 1e-4);
}

#[test]
fn experiment_json_and_verdict_exit_codes() {
    let path = tmp("clt.json");
    let out = fracpois(&[
        "experiment", "clt", "--alpha", "0.9", "--rate", "linear:lambda=1",
        "--times", "10,1000", "--n", "2000", "--seed", "1",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report = fracpois::experiments::ExperimentReport::from_json_str(
        &std::fs::read_to_string(&path).unwrap(),
    )
    .unwrap();
    assert_eq!(report.name, "clt");
    assert_eq!(report.n_samples, 2000);

    // A threshold no experiment can beat forces verdict failure -> exit 1.
    let out = fracpois(&[
        "experiment", "clt", "--alpha", "0.9", "--rate", "linear:lambda=1",
        "--times", "10,1000", "--n", "2000", "--seed", "1",
        "--threshold", "final_ks=0.0",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn experiment_csv_sections() {
    let out = fracpois(&[
        "experiment", "stability", "--alpha", "0.9", "--lambda", "1",
        "--times", "10,100", "--epsilons", "0.5,1.0", "--n", "1000", "--seed", "5",
        "--format", "csv", "--threshold", "max_final_exceedance=1.0",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("# per_time t,ks,mean,variance\n"));
    assert!(text.contains("# histogram lo,hi,count\n"));
    // 2 section headers + 2 per_time rows + 60 histogram bins
    assert_eq!(text.lines().count(), 64);
}

#[test]
fn worker_count_does_not_change_bytes() {
    let p1 = tmp("w1.json");
    let p4 = tmp("w4.json");
    for (workers, path) in [("1", &p1), ("4", &p4)] {
        let out = fracpois(&[
            "experiment", "scaling", "--alpha", "0.9", "--rate", "weibull:b=1,c=0.7",
            "--times", "10,100", "--n", "4000", "--seed", "9", "--workers", workers,
            "--threshold", "final_ks=1.0", "--out", path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(&p1).unwrap();
    let b = std::fs::read(&p4).unwrap();
    assert_eq!(a, b);
}

#[test]
fn config_file_supplies_defaults_flags_win() {
    let cfg = tmp("exp.cfg");
    std::fs::write(&cfg, "n = 500\nseed = 11\nthreshold = final_ks=1.0\n").unwrap();
    let out = fracpois(&[
        "experiment", "clt", "--alpha", "0.9", "--rate", "linear:lambda=1",
        "--times", "10,100", "--config", cfg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report =
        fracpois::experiments::ExperimentReport::from_json_str(&stdout(&out)).unwrap();
    assert_eq!(report.n_samples, 500);
    assert_eq!(report.seed, 11);

    // Explicit flag beats the config value.
    let out = fracpois(&[
        "experiment", "clt", "--alpha", "0.9", "--rate", "linear:lambda=1",
        "--times", "10,100", "--n", "300", "--config", cfg.to_str().unwrap(),
    ]);
    let report =
        fracpois::experiments::ExperimentReport::from_json_str(&stdout(&out)).unwrap();
    assert_eq!(report.n_samples, 300);
}

#[test]
fn density_limit_command_emits_grid() {
    let out = fracpois(&[
        "density", "limit", "--alpha", "0.9", "--beta", "0.7", "--t", "1",
        "--n-points", "128",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("x,h\n"));
    assert_eq!(text.lines().count(), 129);
}

#[test]
fn gergely_config_rejection_is_usage_error() {
    let out = fracpois(&[
        "sample", "gergely", "--alpha", "0.9", "--rate", "linear:lambda=50",
        "--t", "100", "--n", "10", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_zero() {
    let out = fracpois(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("experiment"));
}
