use std::path::PathBuf;
use std::process::{Command, Output};

use splitting_lab::json::{ReportDocument, SeriesDocument, REPORT_FORMAT, SERIES_FORMAT};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_splitting-lab"));
    c.env_remove("SPLITTING_LAB_BITS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn series_table_has_first_polynomial() {
    let o = run(&["series", "--order", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("A_1 = -1/4 u\n"), "{text}");
    assert!(text.contains("A_3 = 91/864 u^3 - 47/576 u\n"));
}

#[test]
fn alpha_matches_reference() {
    let o = run(&["alpha", "--order", "40"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("alpha = ")).unwrap();
    let value: f64 = line["alpha = ".len()..].split_whitespace().next().unwrap().parse().unwrap();
    assert!((value - 89.0334).abs() < 0.05, "{value}");
}

#[test]
fn validate_passes_and_catches_corruption() {
    let ok = run(&["validate"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    let bad = run(&["validate", "--corrupt-tau", "7"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stdout(&bad).contains("FAIL tau identity"));
}

#[test]
fn config_errors_exit_one() {
    for args in [&["series", "--order", "7"][..], &["series", "--bits", "100"], &["series", "--order", "6"], &["splitting", "--eps", "-1"]] {
        assert_eq!(run(args).status.code(), Some(1), "{args:?}");
    }
    let via_env = bin().args(["series", "--order", "8"]).env("SPLITTING_LAB_BITS", "100").output().unwrap();
    assert_eq!(via_env.status.code(), Some(1));
    let flag_wins = bin().args(["series", "--order", "8", "--bits", "192"]).env("SPLITTING_LAB_BITS", "100").output().unwrap();
    assert_eq!(flag_wins.status.code(), Some(0));
}

#[test]
fn env_precision_reaches_the_documents() {
    let o = bin().args(["alpha", "--order", "30", "--format", "json"]).env("SPLITTING_LAB_BITS", "192").output().unwrap();
    let doc = SeriesDocument::from_json(&stdout(&o)).unwrap();
    assert_eq!(doc.constants.unwrap().precision_bits, 192);
}

#[test]
fn series_json_follows_schema() {
    let o = run(&["series", "--order", "12", "--format", "json"]);
    let text = stdout(&o);
    let doc = SeriesDocument::from_json(&text).unwrap();
    doc.validate().unwrap();
    assert_eq!(doc.format, SERIES_FORMAT);
    assert_eq!(doc.odd_polys().unwrap().len(), 6);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let terms = &v["odd_polys"][0]["terms"];
    assert_eq!(terms["1"], serde_json::json!(["-1", "4"]));
}

#[test]
fn splitting_artifacts_are_deterministic_and_valid() {
    let dirs = [scratch("split_a"), scratch("split_b")];
    for d in &dirs {
        let o = run(&["splitting", "--eps", "0.6", "--out", d.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    for name in ["splitting_eps0.6.json", "splitting_eps0.6.csv"] {
        let a = std::fs::read(dirs[0].join(name)).unwrap();
        let b = std::fs::read(dirs[1].join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
    let json = std::fs::read_to_string(dirs[0].join("splitting_eps0.6.json")).unwrap();
    let doc = ReportDocument::from_json(&json).unwrap();
    doc.validate().unwrap();
    assert_eq!(doc.format, REPORT_FORMAT);
    let csv = std::fs::read_to_string(dirs[0].join("splitting_eps0.6.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,delta,delta_over_cosh,fit_residual"));
    assert_eq!(lines.count(), doc.samples.t.len());
}

#[test]
fn stdout_is_byte_identical_across_runs() {
    for args in [&["series", "--order", "16", "--format", "json"][..], &["tau", "--order", "10", "--format", "csv"], &["validate", "--format", "json"]] {
        assert_eq!(run(args).stdout, run(args).stdout, "{args:?}");
    }
}

#[test]
fn precision_guard_is_reported_per_eps() {
    let o = run(&["splitting", "--eps", "0.6", "--eps", "0.25"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("eps = 0.6\n  d = "), "{text}");
    assert!(text.contains("eps = 0.25\n  failed"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("264 bits"));
}

#[test]
fn tau_lists_both_forms() {
    let text = stdout(&run(&["tau", "--order", "8"]));
    assert!(text.contains("tau_2 = -u^2 + 1\n"), "{text}");
    assert!(text.contains("tau_4 = -u^4 + 4/3 u^2 - 1/3\n"));
    assert!(text.contains("(3! tau_4) = -6 u^4 + 8 u^2 - 2\n"));
}
