use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn gal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gal")).args(args).output().expect("gal runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn construct(dir: &Path, name: &str, args: &[&str]) -> String {
    let file = dir.join(name).to_string_lossy().into_owned();
    let mut full = vec!["construct"];
    full.extend_from_slice(args);
    full.extend(["--out", &file]);
    let o = gal(&full);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    file
}

#[test]
fn sl2_summary_and_basis() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("sl2.json").to_string_lossy().into_owned();
    let o = gal(&["construct", "sl-I", "--group", "2", "--kappa", "1,1", "--out", &file]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("components (0): 1, (1): 2"));
    let b: Value = serde_json::from_str(&stdout(&gal(&["basis", &file, "--degree", "1"]))).unwrap();
    assert_eq!(b["dim"], 2);
    let o = gal(&["basis", &file, "--degree", "1,0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn artifact_on_stdout_without_out() {
    let o = gal(&["construct", "assoc", "--group", "2,2", "--t", "1,0;0,1", "--kappa", "1"]);
    assert!(o.status.success());
    let a: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(a["header"]["format"], "gal-v1");
    assert_eq!(a["n"], 2);
    let mut degrees: Vec<String> = a["basis"].as_array().unwrap().iter().map(|e| e["degree"].to_string()).collect();
    degrees.sort();
    assert_eq!(degrees, ["[0,0]", "[0,1]", "[1,0]", "[1,1]"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("components"));
}

#[test]
fn odd_symplectic_is_refused() {
    let o = gal(&["construct", "sp", "--group", "2", "--kappa", "1,2", "--g0", "0"]);
    assert_ne!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no-involution"));
}

#[test]
fn corrupted_degree_table_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let file = construct(dir.path(), "a.json", &["assoc", "--group", "2", "--kappa", "1,1"]);
    assert_eq!(gal(&["verify", &file]).status.code(), Some(0));
    let mut a: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    let entry = a["basis"].as_array_mut().unwrap().iter_mut().find(|e| e["degree"] == serde_json::json!([1])).unwrap();
    entry["degree"] = serde_json::json!([0]);
    std::fs::write(&file, serde_json::to_string(&a).unwrap()).unwrap();
    let o = gal(&["verify", &file]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("violation ("));
}

#[test]
fn parse_failure_has_its_own_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("junk.json");
    std::fs::write(&file, "{\"header\": 3").unwrap();
    assert_eq!(gal(&["verify", &file.to_string_lossy()]).status.code(), Some(2));
    assert_eq!(gal(&["construct", "so", "--group", "x", "--kappa", "1"]).status.code(), Some(2));
}

#[test]
fn type_two_associative_mode() {
    let dir = tempfile::tempdir().unwrap();
    let file = construct(
        dir.path(),
        "a2.json",
        &["sl-II", "--group", "2", "--t", "1", "--h", "1", "--kappa", "4", "--g0=", "--mu0", "1"],
    );
    assert_eq!(gal(&["verify", &file]).status.code(), Some(0));
    assert_eq!(gal(&["verify", "--associative", &file]).status.code(), Some(0));
    let other = construct(dir.path(), "so.json", &["so", "--group", "2", "--kappa", "1,1", "--g0", "0"]);
    assert_eq!(gal(&["verify", "--associative", &other]).status.code(), Some(2));
}

#[test]
fn decide_iso_reports_witness_or_refutation() {
    let dir = tempfile::tempdir().unwrap();
    let a = construct(dir.path(), "a.json", &["so", "--group", "2", "--kappa", "1,1", "--g0", "0"]);
    let b = construct(dir.path(), "b.json", &["so", "--group", "2", "--kappa", "1,1", "--g0", "1"]);
    let o = gal(&["decide-iso", &a, &b]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"inequivalent\"") && stdout(&o).contains("(0, 1) vs (1, 0)"));
    let params = dir.path().join("c.json");
    std::fs::write(&params, r#"{"kind":"sl-I","group":[3],"kappa":[2,0,1]}"#).unwrap();
    let c = construct(dir.path(), "c2.json", &["sl-I", "--group", "3", "--kappa", "2,1,0"]);
    let o = gal(&["decide-iso", &params.to_string_lossy(), &c]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("shift-with-reversal") && stdout(&o).contains("witness verified"));
}

#[test]
fn params_file_matches_inline_flags() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("p.json");
    std::fs::write(&params, r#"{"kind":"sp","group":[4],"kappa":[1,0,1,0],"g0":[2]}"#).unwrap();
    let a = construct(dir.path(), "a.json", &["--params", &params.to_string_lossy()]);
    let b = construct(dir.path(), "b.json", &["sp", "--group", "4", "--kappa", "1,0,1,0", "--g0", "2"]);
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn max_n_is_enforced() {
    let o = gal(&["--max-n", "3", "construct", "assoc", "--group", "2", "--kappa", "2,2"]);
    assert_eq!(o.status.code(), Some(2));
    let o = gal(&["--max-n", "3", "sweep", "--group", "2", "--kind", "so", "--n-bound", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_is_deterministic_and_matches_census() {
    let run = || gal(&["sweep", "--group", "2", "--kind", "so", "--n-bound", "2"]).stdout;
    let first = run();
    assert_eq!(first, run());
    let text = String::from_utf8(first).unwrap();
    assert!(text.contains("tuples 4 classes 3"));
    let k11 = text.lines().filter(|l| l.contains("\"kappa\":[1,1]")).count();
    assert_eq!(k11, 2);
    let trivial = String::from_utf8(gal(&["sweep", "--kind", "sp", "--n-bound", "6"]).stdout).unwrap();
    assert_eq!(trivial.lines().filter(|l| l.starts_with("n ")).count(), 3);
}

#[test]
fn fingerprint_is_stable_across_shift() {
    let dir = tempfile::tempdir().unwrap();
    let a = construct(dir.path(), "a.json", &["assoc", "--group", "4", "--kappa", "2,1,0,0"]);
    let b = construct(dir.path(), "b.json", &["assoc", "--group", "4", "--kappa", "0,2,1,0"]);
    let fa: Value = serde_json::from_str(&stdout(&gal(&["fingerprint", &a]))).unwrap();
    let fb: Value = serde_json::from_str(&stdout(&gal(&["fingerprint", &b]))).unwrap();
    assert_eq!(fa["identity_blocks"], fb["identity_blocks"]);
    assert_eq!(fa["dims"].as_array().unwrap().len(), fb["dims"].as_array().unwrap().len());
}
