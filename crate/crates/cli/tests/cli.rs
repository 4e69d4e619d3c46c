use std::path::PathBuf;
use std::process::{Command, Output};

use floc_core::localize::LocalizationReport;

fn corpus(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/corpus").join(file)
}

fn floc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_floc"))
        .args(args)
        .env_remove("FLOC_PROVER")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn localize_max_reports_lines_five_and_six() {
    let max = corpus("max.mcl");
    let o = floc(&["localize", max.to_str().unwrap(), "--function", "max"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("reports 2 potential error locations: a in line 5, r in line 6"), "{out}");
}

#[test]
fn verify_exit_codes() {
    let fixed = corpus("max_fixed.mcl");
    let o = floc(&["verify", fixed.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "max: Valid\n");

    let buggy = corpus("max.mcl");
    let o = floc(&["verify", buggy.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("max: Invalid (witness: "));
}

#[test]
fn missing_file_is_exit_two() {
    let o = floc(&["localize", "definitely-missing.mcl"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("definitely-missing.mcl"));
}

#[test]
fn syntax_and_type_errors_are_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.mcl");
    std::fs::write(&bad, "int f( { return 1; }").unwrap();
    let o = floc(&["verify", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bad.mcl:1:"));

    std::fs::write(&bad, "/*@ ensures true; @*/ int f() { return true; }").unwrap();
    let o = floc(&["verify", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_are_exit_two() {
    let max = corpus("max.mcl");
    let m = max.to_str().unwrap();
    assert_eq!(floc(&["localize", m, "--bogus"]).status.code(), Some(2));
    assert_eq!(floc(&["localize", m, "--function", "nope"]).status.code(), Some(2));
    assert_eq!(floc(&["localize", m, "--bound", "0"]).status.code(), Some(2));
    assert_eq!(floc(&["localize", m, "--solver", "external"]).status.code(), Some(2));
}

#[test]
fn json_report_round_trips_and_agrees_with_text() {
    let max = corpus("max.mcl");
    let m = max.to_str().unwrap();
    let o = floc(&["localize", m, "--format", "json", "--no-timings"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let typed: Vec<LocalizationReport> = serde_json::from_str(&s).unwrap();
    assert_eq!(format!("{}\n", serde_json::to_string_pretty(&typed).unwrap()), s);
    let v: serde_json::Value = serde_json::from_str(&s).unwrap();
    let reported: Vec<u64> = v[0]["reported"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["originalLine"].as_u64().unwrap())
        .collect();
    assert_eq!(reported, vec![5, 6]);
    assert!(v[0]["timings"]["totalSec"].is_null());

    let again = floc(&["localize", m, "--format", "json", "--no-timings"]);
    assert_eq!(stdout(&again), s);
}

#[test]
fn dumps() {
    let max = corpus("max.mcl");
    let m = max.to_str().unwrap();
    let o = floc(&["dump-vc", m]);
    assert!(stdout(&o).contains("max:post:0"));
    let o = floc(&["dump-normalized", m]);
    assert!(stdout(&o).contains("    5 |   r = a;"), "{}", stdout(&o));
    let o = floc(&["list-candidates", m]);
    let out = stdout(&o);
    assert!(out.contains("C3") && out.contains("assign"));
    let o = floc(&["localize", m, "--format", "json", "--list-candidates"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("candidates of max"));
    serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap();
}

#[test]
fn corpus_commands() {
    let o = floc(&["corpus", "list"]);
    assert!(stdout(&o).contains("tcas_v9"));
    let o = floc(&["corpus", "show", "max"]);
    assert!(stdout(&o).contains("r = a; //correct: r = b"));
    let o = floc(&["corpus", "run", "tcas_v7", "--no-timings"]);
    assert!(stdout(&o).contains("550 in line 13"), "{}", stdout(&o));
    assert_eq!(floc(&["corpus", "show", "nope"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let o = floc(&["corpus", "export", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("max.mcl").exists());
}
