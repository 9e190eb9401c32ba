use std::path::Path;
use std::process::{Command, Output};

use rearrange_lab::io::profile_from_value;
use rearrange_lab::search::SearchResult;
use rearrange_lab::verify::VerificationReport;
use rearrange_lab::{BigRational, StepProfile};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_rearrange-lab"));
    c.env_remove("REARRANGE_LAB_PRECISION");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn rearrange_weighted_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "f.json", r#"{"space":{"weights":["0.2","0.3","0.5"]},"functions":{"f":["3","-1","2"]}}"#);
    let o = run(&["rearrange", "--input", &input, "--function", "f"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v, serde_json::json!({"segments": [["3", "0.2"], ["2", "0.5"], ["1", "0.3"]]}));
    let p: StepProfile<f64> = profile_from_value(&v).unwrap();
    assert_eq!(p.segments().len(), 3);

    let o = run(&["rearrange", "--input", &input, "--function", "f", "--mode", "exact"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["segments"][0], serde_json::json!(["3", "1/5"]));
    let exact: StepProfile<BigRational> = profile_from_value(&v).unwrap();
    assert_eq!(exact.segments().len(), 3);
}

#[test]
fn decompose_and_precondition_exit() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "g.json",
        r#"{"space":{"weights":["1/4","1/4","1/4","1/4"]},"functions":{"g":["3","1","-2","-2"],"h":["1","0","0","0"]}}"#,
    );
    let o = run(&["decompose", "--input", &input, "--function", "g"]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["blocks"].as_array().unwrap().len(), 2);
    assert_eq!(v["blocks"][1]["a"], "2");

    let o = run(&["decompose", "--input", &input, "--function", "h"]);
    assert_eq!(o.status.code(), Some(3));
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.lines().count(), 1);
    assert!(err.starts_with("error[not_zero_mean]"));

    let o = run(&["rearrange", "--input", &input, "--function", "missing"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_thm32_example() {
    let o = run(&["verify", "--suite", "thm32", "--trials", "1000", "--atoms", "4", "--seed", "7", "--mode", "exact"]);
    assert_eq!(o.status.code(), Some(0));
    let r = VerificationReport::from_json(&stdout(&o)).unwrap();
    assert!(r.violations.is_empty());
    let gap = rearrange_lab::scalar::parse_rational(r.min_gap.as_deref().unwrap()).unwrap();
    assert!(gap >= BigRational::from_integer(0.into()));
    assert_eq!(VerificationReport::from_json(&r.to_canonical_json()).unwrap(), r);
}

#[test]
fn flag_errors_exit_two() {
    for args in [
        vec!["verify", "--suite", "thm41", "--exponents", "1,2,2,3,2"],
        vec!["verify", "--suite", "thm41", "--unknown"],
        vec!["verify", "--suite", "nope"],
        vec!["verify", "--suite", "thm32", "--norm", r#"{"kind":"lp","p":"1"}"#],
        vec!["verify", "--suite", "thm41", "--exponents", "2,inf,2,inf,2", "--mode", "exact"],
        vec!["search", "--target", "thm99"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert_eq!(String::from_utf8(o.stderr).unwrap().lines().count(), 1, "{args:?}");
    }
    let o = bin().args(["verify", "--suite", "thm32", "--trials", "5"]).env("REARRANGE_LAB_PRECISION", "12").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn precision_variable_selects_quad() {
    let o = bin()
        .args(["verify", "--suite", "thm41", "--exponents", "2,inf,2,inf,2", "--mode", "float", "--trials", "20"])
        .env("REARRANGE_LAB_PRECISION", "113")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let r = VerificationReport::from_json(&stdout(&o)).unwrap();
    assert_eq!(r.precision, Some(128));
}

#[test]
fn norm_from_file_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let norm = write(dir.path(), "x.json", r#"{"kind":"lorentz","phi":[["0","0"],["1/4","1/2"],["1","1"]]}"#);
    let out = dir.path().join("report.json");
    let o = run(&[
        "verify", "--suite", "thm43", "--norm", &format!("@{norm}"), "--trials", "50", "--atoms", "4", "--out",
        out.to_str().unwrap(), "--sidecar",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let r = VerificationReport::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(r.violations.is_empty());
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json.meta.json")).unwrap()).unwrap();
    assert!(meta["timestamp"].is_string());
}

#[test]
fn verify_all_suites() {
    let o = run(&["verify", "--suite", "all", "--trials", "30", "--atoms", "2-4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Vec<VerificationReport> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v.len(), 5);
}

#[test]
fn stdout_is_identical_across_thread_counts() {
    let args = ["verify", "--suite", "lemma31", "--trials", "300", "--seed", "4"];
    let one = run(&[&["--threads", "1"], &args[..]].concat());
    let eight = run(&[&["--threads", "8"], &args[..]].concat());
    assert_eq!(one.stdout, eight.stdout);
    let s = ["search", "--target", "thm43", "--atoms", "3", "--iters", "200", "--restarts", "4", "--seed", "2"];
    assert_eq!(run(&[&["--threads", "1"], &s[..]].concat()).stdout, run(&[&["--threads", "2"], &s[..]].concat()).stdout);
}

#[test]
fn search_finds_equality_and_round_trips() {
    let o = run(&["search", "--target", "thm41", "--atoms", "2", "--iters", "500", "--restarts", "4", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let r = SearchResult::from_json(&stdout(&o)).unwrap();
    assert_eq!(r.best_ratio, "1");
    let o = run(&["search", "--target", "thm32", "--atoms", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn landscape_csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "i.json", r#"{"space":{"weights":["1/2","1/2"]},"functions":{"f":["1","0"],"g":["1","-1"]}}"#);
    let out = dir.path().join("l.csv");
    let o = run(&[
        "landscape", "--target", "thm41", "--input", &input, "--vary", "f[1]", "--range", "-2,2", "--grid", "101", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("param1,param2,lhs,rhs,ratio"));
    let ratios: Vec<f64> = lines.map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(ratios.len(), 101);
    assert!(ratios.iter().all(|r| r.is_nan() || *r <= 1.0 + 1e-12));

    let o = run(&["landscape", "--target", "thm41", "--atoms", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().starts_with("error[too_many_free_parameters]"));
}
