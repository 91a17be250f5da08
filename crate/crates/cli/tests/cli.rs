use std::process::{Command, Output};

use ravenlab_core::rational::ratio;
use ravenlab_core::rules::{GuardedResult, Relation, Table1, Verdict};
use ravenlab_core::search::{Bracket, SweepRecord};

const MAHER: &str = "maher:l=2,pi=1/2,pf=1/1000,pg=1/10";

fn ravenlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ravenlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn eval_prints_exact_then_decimal() {
    let o = ravenlab(&["eval", "--n", "2", "--measure", "uniform", "--given", "FG_1", "H"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "3/4 (~0.75)\n");
}

#[test]
fn eval_csv_and_json() {
    let o = ravenlab(&["eval", "--n", "2", "--given", "FG_1", "H", "--format", "csv"]);
    assert_eq!(stdout(&o), "probability,approx\n3/4,0.75\n");
    let o = ravenlab(&["eval", "--n", "2", "--given", "FG_1", "H", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["probability"], "3/4");
}

#[test]
fn eval_permutation_maps_objects() {
    let o = ravenlab(&["eval", "--n", "3", "--permute", "1,3,2", "F_1 | G_3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("F_1 | G_2"), "{}", stdout(&o));
}

#[test]
fn eval_expands_exact() {
    let o = ravenlab(&["eval", "--n", "4", "--expand", "Exact(2)"]);
    let out = stdout(&o);
    let expanded = out.lines().find(|l| l.starts_with("expanded:")).unwrap();
    assert_eq!(expanded.matches('|').count(), 5);
    assert!(out.starts_with("3/8 "));
}

#[test]
fn carnap_predictive_from_cli() {
    let o = ravenlab(&["eval", "--n", "2", "--measure", "carnap:l=2,g=uniform", "--given", "FG_1", "FnG_2"]);
    assert!(stdout(&o).starts_with("1/6 "));
}

#[test]
fn maher_nc_does_not_confirm_and_exits_zero() {
    let o = ravenlab(&["check", "nc", "--n", "2", "--measure", MAHER]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("DISCONFIRMS"));
    let o = ravenlab(&["check", "nc", "--n", "2", "--measure", MAHER, "--format", "json"]);
    let v: Verdict = serde_json::from_str(&stdout(&o)).unwrap();
    assert_ne!(v.relation, Relation::Confirms);
    assert_eq!(v.lhs, Some(ratio(1799, 2000)));
}

#[test]
fn table1_fng_row_refutes_in_both_columns() {
    let args = ["table1", "--n", "5", "--k", "2", "--measure", "carnap:l=2,g=uniform"];
    let o = ravenlab(&args);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let block: Vec<&str> = text
        .lines()
        .skip_while(|l| !l.contains("(FnG)"))
        .skip(1)
        .take(2)
        .collect();
    assert!(block.iter().all(|l| l.contains("REFUTES")), "{block:?}");

    let mut json_args = args.to_vec();
    json_args.extend(["--format", "json"]);
    let t: Table1 = serde_json::from_str(&stdout(&ravenlab(&json_args))).unwrap();
    assert!(t.pattern_matches());
    let row = t.rows.iter().find(|r| r.observation.name() == "FnG").unwrap();
    assert_eq!(row.ravens_known.verdict.relation, Relation::Refutes);
    assert_eq!(row.non_blacks_known.verdict.relation, Relation::Refutes);
}

#[test]
fn guarded_json_round_trips() {
    let o = ravenlab(&["check", "thm1", "--n", "3", "--measure", "carnap:l=2,g=uniform", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let r: GuardedResult = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(r.premise);
    assert!(!r.is_violation());
}

#[test]
fn parse_errors_are_usage_errors_with_position() {
    let o = ravenlab(&["eval", "--n", "2", "FG_1 & (G_2"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("position 11"), "{err}");
    assert!(err.contains('^'));
}

#[test]
fn bad_flags_and_specs_exit_two() {
    assert_eq!(ravenlab(&["check", "nc", "--n", "2", "--bogus"]).status.code(), Some(2));
    assert_eq!(ravenlab(&["eval", "H"]).status.code(), Some(2));
    assert_eq!(ravenlab(&["eval", "--n", "2", "--measure", "carnap:l=0", "H"]).status.code(), Some(2));
    assert_eq!(ravenlab(&["table1", "--n", "3", "--k", "2", "--format", "csv"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_ravenlab"))
        .args(["eval", "--n", "1", "H"])
        .env("RAVENLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

const SWEEP: &str = r#"{"family":"maher","n":[2],"lambda":[1,2],"pr_i":["1/2"],"pf":["1/1000","3/10"],"pg":["1/10"],"rules":["nc","thm2"]}"#;

#[test]
fn sweep_streams_csv_and_is_deterministic() {
    let o = ravenlab(&["sweep", "--spec", SWEEP]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines[0].starts_with("family,N,k,lambda,prI,pF,pG,rule,lhs,rhs,verdict"));
    assert_eq!(lines.len(), 1 + 4 * 2);
    let single = Command::new(env!("CARGO_BIN_EXE_ravenlab"))
        .args(["sweep", "--spec", SWEEP])
        .env("RAVENLAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(single.stdout, o.stdout);
}

#[test]
fn sweep_json_round_trips() {
    let o = ravenlab(&["sweep", "--spec", SWEEP, "--format", "json"]);
    let records: Vec<SweepRecord> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(records.len(), 4);
    let reparsed = serde_json::to_string_pretty(&records).unwrap();
    assert_eq!(reparsed.trim_end(), stdout(&o).trim_end());
}

#[test]
fn sweep_reads_config_file_and_writes_out() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.json");
    let out = dir.path().join("out.csv");
    std::fs::write(&config, SWEEP).unwrap();
    let o = ravenlab(&["sweep", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(out).unwrap().lines().count(), 9);
}

#[test]
fn bisect_brackets_planted_threshold() {
    let o = ravenlab(&[
        "bisect", "--n", "2", "--measure", MAHER, "--param", "pf", "--lo", "1/1000", "--hi", "1/4", "--predicate",
        "below:1/8", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let b: Bracket = serde_json::from_value(v["bracket"].clone()).unwrap();
    assert!(b.contains(&ratio(1, 8)));
    assert!(b.width() <= ratio(1, 1 << 20));
}

#[test]
fn bisect_restriction_i_near_quarter() {
    let o = ravenlab(&[
        "bisect", "--n", "2", "--measure", MAHER, "--param", "pf", "--lo", "1/1000", "--hi", "999/1000", "--predicate",
        "thm2-i", "--claim", "0.25",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("0.25 is inside the bracket"), "{}", stdout(&o));
}

#[test]
fn bisect_without_sign_change_is_an_error() {
    let o = ravenlab(&["bisect", "--n", "2", "--measure", MAHER, "--param", "pf", "--lo", "1/10", "--hi", "2/10", "--predicate", "below:1/2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mixture_reports_total_probability() {
    let o = ravenlab(&["mixture", "--alpha", "2", "--beta", "3", "H"]);
    assert!(stdout(&o).contains("pr(H) = 63/128"), "{}", stdout(&o));
}

#[test]
fn mixture_file_and_prop1() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mix.json");
    std::fs::write(
        &path,
        r#"{"alpha":2,"beta":3,"q":{"2":"1/2","3":"1/2"},"components":{"2":"iid:q1=1/4,q2=1/4,q3=1/4,q4=1/4","3":"iid:q1=1/4,q2=1/4,q3=1/4,q4=1/4"}}"#,
    )
    .unwrap();
    let o = ravenlab(&["check", "prop1", "--mixture", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let r: GuardedResult = serde_json::from_value(v["result"].clone()).unwrap();
    assert!(r.premise);
    assert!(v["assumption"]["holds"].as_bool().unwrap());
}

#[test]
fn selftest_single_criterion() {
    let o = ravenlab(&["selftest", "--criterion", "9"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("[PASS] criterion  9"));
}

#[test]
fn planted_property_makes_selftest_fail() {
    let o = ravenlab(&["selftest", "--criterion", "9", "--trials", "10", "--plant-broken"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("violation planted"));
}

#[test]
fn xi_and_example7_checks() {
    let o = ravenlab(&["check", "xi", "--n", "3", "--measure", "carnap:l=2,g=uniform"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("agrees with"));
    let o = ravenlab(&["check", "ex7", "--n", "3"]);
    assert!(stdout(&o).contains("identity holds"));
}
