use std::path::Path;
use std::process::Command;

use distnull::report::{fmt_g, QestReport, RangeReport, ReplicateReport, Report, SimulateReport, TestReport, ThumbReport};
use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("distnull").chain(args.iter().copied());
    let code = distnull::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn run_json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let (code, out, err) = run(&full);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

fn numbers(v: &Value, acc: &mut Vec<f64>) {
    match v {
        Value::Number(n) => acc.push(n.as_f64().unwrap()),
        Value::Array(a) => a.iter().for_each(|x| numbers(x, acc)),
        Value::Object(o) => o.values().for_each(|x| numbers(x, acc)),
        _ => {}
    }
}

/// Every number token in the human rendering must match a json number
/// formatted the same way.
fn assert_human_in_json(args: &[&str]) {
    let json = run_json(args);
    let mut nums = Vec::new();
    numbers(&json, &mut nums);
    let shown: Vec<String> = nums.iter().flat_map(|&x| [fmt_g(x), x.to_string()]).collect();
    let (code, human, _) = run(args);
    assert_eq!(code, 0);
    for raw in human.split(|c: char| c.is_whitespace() || ",:=()±x|".contains(c)) {
        if raw.parse::<f64>().is_ok() {
            assert!(shown.iter().any(|s| s == raw), "`{raw}` from human output of {args:?} is not in the json");
        }
    }
}

fn assert_round_trip<R: Report>(args: &[&str]) {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let (code, out, err) = run(&full);
    assert_eq!(code, 0, "{err}");
    let parsed: R = serde_json::from_str(&out).unwrap();
    assert_eq!(parsed.json(), out, "round trip of {args:?}");
}

const TEST_ARGS: &[&str] = &["test", "--design", "one-sample", "--n", "20", "--mean", "1.2", "--sd", "2.0", "--alpha", "0.05", "--q", "0.05"];
const REPLICATE_ARGS: &[&str] = &["replicate", "--t", "4", "--nu", "19", "--n", "20", "--alpha", "0.05", "--q", "0.05"];
const RANGE_ARGS: &[&str] = &["range", "--t", "7", "--nu", "19", "--n", "20", "--beta", "0.8"];
const NO_SOLUTION_ARGS: &[&str] = &["range", "--t", "-3", "--nu", "19", "--n", "20"];
const THUMB_ARGS: &[&str] = &["thumb", "--alpha", "0.05", "--nu", "10"];
const SIM_ARGS: &[&str] = &["simulate", "replication", "--t", "0,4", "--q", "0,0.05", "--n", "20", "--trials", "2000", "--seed", "5"];
const FPR_ARGS: &[&str] = &["simulate", "fpr", "--n", "10,100", "--q-true", "0.05", "--q-test", "0", "--trials", "2000"];

#[test]
fn worked_test_example() {
    let v = run_json(TEST_ARGS);
    assert!((v["t_stat"].as_f64().unwrap() - 2.6833).abs() < 1e-4);
    assert_eq!(v["nu"].as_f64().unwrap(), 19.0);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["point"]["significant"], true);
    assert!(v["distributional"]["t_crit"].as_f64().unwrap() > v["point"]["t_crit"].as_f64().unwrap());
}

#[test]
fn precomputed_t_matches_summary_input() {
    let a = run_json(TEST_ARGS);
    let t = a["t_stat"].as_f64().unwrap().to_string();
    let b = run_json(&["test", "--t", &t, "--nu", "19", "--n", "20", "--q", "0.05"]);
    assert_eq!(a["distributional"], b["distributional"]);
    assert_eq!(a["point"], b["point"]);
}

#[test]
fn two_sample_and_paired_inputs() {
    let v = run_json(&["test", "--design", "two-sample", "--n", "10", "--mean", "3", "--sd", "2", "--mean2", "1", "--sd2", "2", "--q", "0.05"]);
    assert_eq!(v["nu"].as_f64().unwrap(), 18.0);
    assert!((v["t_stat"].as_f64().unwrap() - 2.0 / (2.0 * 0.2f64.sqrt())).abs() < 1e-12);
    let (code, _, _) = run(&["test", "--design", "two-sample", "--n", "10", "--n2", "12", "--mean", "3", "--sd", "2", "--mean2", "1", "--sd2", "2", "--q", "0"]);
    assert_eq!(code, 2);
    let p = run_json(&["test", "--design", "paired", "--n", "15", "--mean", "0.7", "--sd", "1.3", "--q", "0.1"]);
    let o = run_json(&["test", "--design", "one-sample", "--n", "15", "--mean", "0.7", "--sd", "1.3", "--q", "0.1"]);
    assert_eq!(p["distributional"], o["distributional"]);
}

#[test]
fn zero_q_point_and_distributional_agree() {
    let v = run_json(&["test", "--n", "20", "--mean", "1.2", "--sd", "2.0", "--q", "0"]);
    let (p, d) = (&v["point"], &v["distributional"]);
    for key in ["p_value", "z_crit", "t_crit", "significant"] {
        assert_eq!(p[key], d[key], "{key}");
    }
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["test", "--n", "1", "--t", "2", "--q", "0"][..],
        &["test", "--n", "10", "--q", "0"],
        &["test", "--n", "10", "--t", "2", "--q", "-1"],
        &["test", "--n", "10", "--t", "2", "--mean", "1", "--q", "0"],
        &["test", "--n", "10", "--t", "2", "--q", "0", "--alpha", "0.7"],
        &["range", "--t", "5", "--n", "20", "--beta", "0.04"],
        &["thumb", "--nu", "0"],
        &["bogus"],
        &["--format", "xml", "thumb", "--nu", "3"],
    ] {
        let (code, _, err) = run(args);
        assert_eq!(code, 2, "{args:?}");
        assert!(!err.is_empty(), "{args:?}");
    }
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("replicate"));
}

#[test]
fn replicate_outputs() {
    let v = run_json(REPLICATE_ARGS);
    assert!((v["replication_probability"].as_f64().unwrap() - 0.360_071_774_963_771_85).abs() < 1e-12);
    assert!(v["power_estimate"].as_f64().is_some());
    let z = run_json(&["replicate", "--t", "2.3", "--nu", "19", "--n", "20", "--alpha", "0.05", "--q", "0"]);
    assert_eq!(z["replication_probability"].as_f64().unwrap(), 0.05);
    let (_, human, _) = run(REPLICATE_ARGS);
    assert!(human.contains("replication probability"));
    assert!(human.contains("power-based estimate"));
}

#[test]
fn range_outputs() {
    let v = run_json(RANGE_ARGS);
    assert_eq!(v["status"], "interval");
    let iv = &v["interval"];
    assert!(iv["q1"].as_f64().unwrap() < v["q_at_min"].as_f64().unwrap());
    assert_eq!(iv["gamma"], iv["q2"]);

    let (code, out, _) = run(&[NO_SOLUTION_ARGS, &["--format", "json"]].concat());
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["status"], "no-solution");
    assert!(v["interval"].is_null());
    assert!(v["r_min"].as_f64().unwrap() > 3.0);

    // tangency at the beta = 0.5 minimum
    let r_min = v["r_min"].as_f64().unwrap().to_string();
    let t = run_json(&["range", "--t", &r_min, "--nu", "19", "--n", "20"]);
    let q1 = t["interval"]["q1"].as_f64().unwrap();
    let q2 = t["interval"]["q2"].as_f64().unwrap();
    assert!((q1 - 0.1).abs() < 1e-6 && (q2 - 0.1).abs() < 1e-6, "{q1} {q2}");

    let wide = (1.05 * r_min.parse::<f64>().unwrap()).to_string();
    let w = run_json(&["range", "--t", &wide, "--nu", "19", "--n", "20"]);
    assert!(w["interval"]["q1"].as_f64().unwrap() < 0.1 && w["interval"]["q2"].as_f64().unwrap() > 0.1);

    let c = run_json(&["range", "--t", "60", "--nu", "19", "--n", "20", "--q-ceiling", "5"]);
    assert_eq!(c["interval"]["q2_censored"], true);
    assert_eq!(c["interval"]["q2"].as_f64().unwrap(), 5.0);
}

#[test]
fn thumb_outputs() {
    let v = run_json(THUMB_ARGS);
    let p = v["p_threshold"].as_f64().unwrap();
    assert!((4e-4..=6e-4).contains(&p));
    assert!((v["ratio"].as_f64().unwrap() - 3.0 * 3f64.sqrt() / 2.0).abs() < 1e-15);
    let p40 = run_json(&["thumb", "--nu", "40"])["p_threshold"].as_f64().unwrap();
    assert!((4e-5..=6e-5).contains(&p40));
}

#[test]
fn json_round_trips_byte_for_byte() {
    assert_round_trip::<TestReport>(TEST_ARGS);
    assert_round_trip::<ReplicateReport>(REPLICATE_ARGS);
    assert_round_trip::<RangeReport>(RANGE_ARGS);
    assert_round_trip::<RangeReport>(NO_SOLUTION_ARGS);
    assert_round_trip::<ThumbReport>(THUMB_ARGS);
    assert_round_trip::<SimulateReport>(SIM_ARGS);
    assert_round_trip::<SimulateReport>(FPR_ARGS);
}

#[test]
fn human_numbers_appear_in_json() {
    for args in [TEST_ARGS, REPLICATE_ARGS, RANGE_ARGS, NO_SOLUTION_ARGS, THUMB_ARGS, SIM_ARGS, FPR_ARGS] {
        assert_human_in_json(args);
    }
}

#[test]
fn simulate_is_deterministic_and_csv() {
    let a = run(&[SIM_ARGS, &["--format", "csv"]].concat());
    let b = run(&[SIM_ARGS, &["--format", "csv"]].concat());
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
    let header = a.1.lines().next().unwrap();
    for col in ["n", "q_true", "rate", "mc_se", "trials"] {
        assert!(header.split(',').any(|c| c == col), "{header}");
    }
    assert_eq!(a.1.lines().count(), 5);
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

const FIXTURE: &str = "\
# three sites, two measures
site,measure,value
us1,anchor,1
us1,anchor,2
us1,anchor,4
us2,anchor,0
us2,anchor,3
de1,anchor,5
de1,anchor,9
us1,flag,10
us1,flag,12
us2,flag,11
us2,flag,not-a-number
us2,flag,15
de1,flag,8
de1,flag,9
de1,flag,13
";

#[test]
fn qest_fixture_with_bad_row() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "data.csv", FIXTURE);
    let groups = write(
        dir.path(),
        "groups.toml",
        "[[group]]\nname = \"anchoring\"\nset = \"first\"\nmeasures = [\"anchor\"]\n\n[[group]]\nname = \"flags\"\nset = \"second\"\nmeasures = [\"flag\"]\n",
    );
    let cells = dir.path().join("cells.csv").display().to_string();
    let hist = dir.path().join("hist.csv").display().to_string();
    let args = ["qest", "--data", &data, "--groups", &groups, "--cells-out", &cells, "--histogram-out", &hist];

    let (code, out, err) = run(&[&args[..], &["--format", "json"]].concat());
    assert_eq!(code, 0, "{err}");
    assert!(err.contains("line 13"), "{err}");
    let v: QestReport = serde_json::from_str(&out).unwrap();
    assert_eq!(v.records, 14);
    assert_eq!(v.rejected_rows.len(), 1);
    assert_eq!(v.rejected_rows[0].line, 13);
    assert_eq!(v.cells, 6);
    let names: Vec<&str> = v.groups.iter().map(|g| g.group.as_str()).collect();
    assert_eq!(names, ["anchoring", "flags", "all first", "all second", "all"]);
    assert_eq!(v.groups[4].datapoints, 6);
    assert_eq!(serde_json::from_str::<QestReport>(&out).unwrap().json(), out);

    let cell_text = std::fs::read_to_string(&cells).unwrap();
    assert_eq!(cell_text.lines().next().unwrap(), "measure,site,within_var,between_var,q");
    assert_eq!(cell_text.lines().count(), 7);
    assert!(std::fs::read_to_string(&hist).unwrap().starts_with("bin_lower,bin_upper,count\n"));

    let (code, csv, _) = run(&[&args[..], &["--format", "csv"]].concat());
    assert_eq!(code, 0);
    assert_eq!(csv.lines().next().unwrap(), "group,datapoints,mean_q,q025,q975");

    let (_, human, _) = run(&args);
    assert!(human.contains("rejected line 13"));

    let us = run_json(&["qest", "--data", &data, "--site-prefix", "us"]);
    let all = us["groups"].as_array().unwrap().last().unwrap();
    assert_eq!(all["datapoints"], 4);
}

#[test]
fn qest_file_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv").display().to_string();
    assert_eq!(run(&["qest", "--data", &missing]).0, 2);
    let bad = write(dir.path(), "bad.csv", "site,value\na,1\n");
    assert_eq!(run(&["qest", "--data", &bad]).0, 2);
    let one_site = write(dir.path(), "one.csv", "site,measure,value\na,m,1\na,m,2\n");
    assert_eq!(run(&["qest", "--data", &one_site]).0, 2);
}

#[test]
fn config_defaults_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.toml", "alpha = 0.01\nformat = \"json\"\nbeta = 0.8\n");
    let (code, out, _) = run(&["--config", &cfg, "thumb", "--nu", "10"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["alpha"].as_f64().unwrap(), 0.01);
    let v = run_json(&["--config", &cfg, "thumb", "--nu", "10", "--alpha", "0.05"]);
    assert_eq!(v["alpha"].as_f64().unwrap(), 0.05);
    let v = run_json(&["--config", &cfg, "range", "--t", "9", "--nu", "19", "--n", "20"]);
    assert_eq!(v["beta"].as_f64().unwrap(), 0.8);
    let (_, out, _) = run(&["--config", &cfg, "--format", "csv", "thumb", "--nu", "10"]);
    assert!(out.starts_with("alpha,"));
    let broken = write(dir.path(), "broken.toml", "alpha = \"high\"\n");
    assert_eq!(run(&["--config", &broken, "thumb", "--nu", "10"]).0, 2);
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_distnull");
    let ok = Command::new(bin).args(["thumb", "--nu", "10"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("0.000415"));
    let bad = Command::new(bin).args(["test", "--n", "1", "--t", "2", "--q", "0"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let none = Command::new(bin).args(["range", "--t", "1", "--nu", "19", "--n", "20"]).output().unwrap();
    assert_eq!(none.status.code(), Some(0));
}
