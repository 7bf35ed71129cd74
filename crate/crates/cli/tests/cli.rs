use std::path::Path;
use std::process::{Command, Output};

use mehler_cli::report::parse_json;
use mehler_cli::Verdict;

fn mehler(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mehler"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn kernels_suite_passes_at_half() {
    let out = mehler(&["run", "--suite", "kernels", "--epsilon", "0.5", "--basis-size", "64"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = parse_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(report.records.len() >= 7);
    assert!(report.records.iter().all(|r| r.verdict == Verdict::Pass));
    assert!(report.records.windows(2).all(|w| w[0].id < w[1].id));
}

#[test]
fn small_quadrature_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "suite = \"all\"\nbasis_size = 4\nquad_order = 3\n");
    let out = mehler(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("quad_order"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "suite = \"kernels\"\nepsilons = [0.5,\nseed = 1\n");
    let out = mehler(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let cfg = write(dir.path(), "range.toml", "epsilons = [0.5, 1.0]\n");
    let out = mehler(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilons[1]"));
}

#[test]
fn flags_override_config_and_csv_goes_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.toml", "suite = \"kernels\"\nepsilons = [0.3]\nformat = \"json\"\n");
    let target = dir.path().join("out.csv");
    let out = mehler(&[
        "run",
        "--config",
        &cfg,
        "--epsilon",
        "0.4,0.6",
        "--format",
        "csv",
        "--output",
        target.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        rows.headers().unwrap().iter().collect::<Vec<_>>(),
        mehler_cli::report::CSV_HEADER.to_vec()
    );
    let ids: Vec<String> = rows.records().map(|r| r.unwrap()[0].to_string()).collect();
    assert!(ids.iter().any(|i| i.ends_with("eps=0.4")));
    assert!(ids.iter().any(|i| i.ends_with("eps=0.6")));
    assert!(!ids.iter().any(|i| i.ends_with("eps=0.3")));
}

#[test]
fn failing_checks_give_exit_one() {
    let out = mehler(&["run", "--suite", "asymptotics", "--basis-size", "6"]);
    assert_eq!(out.status.code(), Some(1));
    let report = parse_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert!(report.has_failures());
}

#[test]
fn unwritable_output_is_reported() {
    let out = mehler(&["run", "--suite", "kernels", "--output", "/nonexistent/dir/report.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = mehler(&["run", "--suite", "operators", "--epsilon", "0.5", "--seed", "7"]);
    let b = mehler(&["run", "--suite", "operators", "--epsilon", "0.5", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}
