use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ellsurf::cli::{Report, SCHEMA};

fn families() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../families")
}

fn ellsurf(args: &[&str], files: &[&Path]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ellsurf")).args(args).args(files).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn analyze_writes_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("legendre.json");
    let fam = families().join("legendre.fam");
    let out = ellsurf(&["analyze", "--json", json.to_str().unwrap()], &[&fam]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("I2*"));
    let report = Report::from_json(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report.schema, SCHEMA);
    assert_eq!(report.invariants[0].e, 12);
    let m = report.monodromy.unwrap();
    assert!(m.loops.iter().all(|l| l.trace_matches) && m.infinity.trace_matches);
}

#[test]
fn manin_on_rank_one_family() {
    let out = ellsurf(&["manin"], &[&families().join("rank1.fam")]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("parabolic: yes, exact: no"), "{text}");
}

#[test]
fn compare_takes_two_families() {
    let f = families();
    let out = ellsurf(&["compare"], &[&f.join("legendre.fam"), &f.join("hesse.fam")]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().contains("comparison:"));
    let out = ellsurf(&["compare"], &[&f.join("legendre.fam")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validation_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("iso.fam", "a6 = 1", "isotrivial"),
        ("sqrt.fam", "a4 = sqrt(t); a6 = 1", "non-rational"),
        ("var.fam", "a4 = s; a6 = 1", "variable"),
        ("dup.fam", "a4 = t; a4 = 1", "duplicate"),
        ("sec.fam", "a4 = t; a6 = 1\nsection = (1, 1)", "not on the curve"),
    ];
    for (name, text, needle) in cases {
        let p = write(dir.path(), name, text);
        let out = ellsurf(&["analyze"], &[&p]);
        let err = String::from_utf8_lossy(&out.stderr).to_lowercase();
        assert_eq!(out.status.code(), Some(2), "{name}: {err}");
        assert!(err.contains(needle), "{name}: {err}");
    }
    let out = ellsurf(&["frobnicate"], &[&families().join("legendre.fam")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numeric_margin_failure_exits_three() {
    let out = ellsurf(&["monodromy", "--margin", "1e-30"], &[&families().join("legendre.fam")]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn exhausted_search_exits_four() {
    let out = ellsurf(&["idr", "--search-bound", "3"], &[&families().join("k3b.fam")]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}
