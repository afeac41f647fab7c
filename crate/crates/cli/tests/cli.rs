use std::path::Path;
use std::process::{Command, Output};

fn logshrink(args: &[&str], dir: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_logshrink"));
    cmd.args(args).env_remove("LOGSHRINK_THREADS");
    if let Some(dir) = dir {
        cmd.arg("--out-dir").arg(dir);
    }
    cmd.output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn csv_lines(dir: &Path, name: &str) -> Vec<String> {
    std::fs::read_to_string(dir.join(name)).unwrap().lines().map(str::to_owned).collect()
}

#[test]
fn phase_writes_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = logshrink(&["phase", "--M", "100", "--N", "200", "--K", "10:60:10", "--trials", "3", "--seed", "7"], Some(dir.path()));
    assert!(out.status.success(), "{}", stderr(&out));
    let lines = csv_lines(dir.path(), "phase.csv");
    assert_eq!(lines[0], "experiment,algorithm,K,trials,value_kind,value");
    assert_eq!(lines.len() - 1, 36);
    assert!(lines[1].starts_with("phase,IST,10,3,avg_error,"));
    assert!(lines.iter().skip(1).all(|l| l.split(',').count() == 6));
}

#[test]
fn noisy_path_defaults_cover_k_1_to_30() {
    let dir = tempfile::tempdir().unwrap();
    let out = logshrink(&["noisy-path", "--trials", "2"], Some(dir.path()));
    assert!(out.status.success(), "{}", stderr(&out));
    let lines = csv_lines(dir.path(), "path.csv");
    assert_eq!(lines[0], "experiment,algorithm,sparsity_k,trials,value_kind,value");
    assert_eq!(lines.len() - 1, 90);
    let ks: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(ks[0], "1");
    assert_eq!(ks[89], "30");
}

#[test]
fn complete_writes_three_curves() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["complete", "--N", "50", "--rank", "2", "--obs", "0.3", "--trials", "20", "--iters", "100"];
    let out = logshrink(&args, Some(dir.path()));
    assert!(out.status.success(), "{}", stderr(&out));
    let lines = csv_lines(dir.path(), "completion.csv");
    assert_eq!(lines[0], "experiment,algorithm,iteration,trials,value_kind,value");
    assert_eq!(lines.len() - 1, 300);
    // every algorithm starts from the same matrix
    let starts: Vec<&str> = lines[1..]
        .iter()
        .filter(|l| l.split(',').nth(2) == Some("0"))
        .map(|l| l.rsplit(',').next().unwrap())
        .collect();
    assert_eq!(starts.len(), 3);
    assert!(starts.iter().all(|v| *v == starts[0]));
}

#[test]
fn invalid_flags_exit_1_and_name_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [(&[&str], &str); 6] = [
        (&["phase", "--N", "200", "--K", "300"], "--K"),
        (&["noisy-path", "--noise", "0"], "--noise"),
        (&["complete", "--obs", "1.2"], "--obs"),
        (&["phase", "--K", "5:1"], "--K"),
        (&["complete", "--rank", "0"], "--rank"),
        (&["phase", "--trials", "0"], "--trials"),
    ];
    for (args, flag) in cases {
        let out = logshrink(args, Some(dir.path()));
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(stderr(&out).contains(flag), "{args:?}: {}", stderr(&out));
    }
    // validation happens before anything is written
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn bad_thread_setting_is_a_usage_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_logshrink"))
        .args(["threshold", "--kind", "soft", "--x", "1", "--lambda", "0.5"])
        .env("LOGSHRINK_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("LOGSHRINK_THREADS"));
}

#[test]
fn help_exits_zero() {
    assert_eq!(logshrink(&["--help"], None).status.code(), Some(0));
    assert_eq!(logshrink(&["frobnicate"], None).status.code(), Some(1));
}

fn key(text: &str, name: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{name}=")))
        .unwrap_or_else(|| panic!("no {name} in {text}"))
        .to_owned()
}

#[test]
fn threshold_reports_value_and_dead_zone() {
    let out = logshrink(&["threshold", "--kind", "log", "--x", "2.0", "--lambda", "0.5", "--delta", "0.01"], None);
    assert!(out.status.success());
    let text = stdout(&out);
    let value: f64 = key(&text, "value").parse().unwrap();
    assert!((value - 1.866794).abs() < 1e-6);
    let x0: f64 = key(&text, "x0").parse().unwrap();
    assert!((x0 - 0.99).abs() < 1e-12);
    assert_eq!(key(&text, "delta_condition_satisfied"), "true");

    let out = logshrink(&["threshold", "--kind", "soft", "--x", "3", "--lambda", "1"], None);
    assert_eq!(key(&stdout(&out), "value"), "2");

    let out = logshrink(&["threshold", "--kind", "hard", "--x", "-3", "--lambda", "2"], None);
    assert_eq!(key(&stdout(&out), "value"), "-3");

    let out = logshrink(&["threshold", "--kind", "log", "--x", "1", "--lambda", "0"], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("--lambda"));

    // 2λ = δ² leaves no dead zone and is rejected
    let out = logshrink(&["threshold", "--kind", "log", "--x", "1", "--lambda", "0.125", "--delta", "0.5"], None);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn selfcheck_passes_and_catches_an_injected_fault() {
    let out = logshrink(&["selfcheck"], None);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    for suite in ["stationarity", "sandwich", "monotonicity", "fixed-point"] {
        assert!(text.contains(&format!("[PASS] {suite}")), "{text}");
    }

    let out = logshrink(&["selfcheck", "--inject-fault"], None);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout(&out).matches("[FAIL]").count(), 4);
}

#[test]
fn selfcheck_can_run_one_suite() {
    let out = logshrink(&["selfcheck", "--suite", "monotonicity", "--trials", "200"], None);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("[PASS] monotonicity"));
    assert!(text.contains("instances=200"));

    assert_eq!(logshrink(&["selfcheck", "--suite", "nope"], None).status.code(), Some(1));
}

#[test]
fn repeated_runs_are_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["noisy-path", "--k", "3:5", "--trials", "4", "--seed", "99"];
    assert!(logshrink(&args, Some(a.path())).status.success());
    assert!(logshrink(&args, Some(b.path())).status.success());
    assert_eq!(csv_lines(a.path(), "path.csv"), csv_lines(b.path(), "path.csv"));
}
