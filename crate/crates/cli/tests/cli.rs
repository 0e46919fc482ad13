//! End-to-end runs of the `bidder-select` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bidder-select"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("report is JSON")
}

fn first_row(out: &Output) -> Value {
    report(out)["rows"][0].clone()
}

fn close(v: &Value, expected: f64) -> bool {
    (v.as_f64().unwrap() - expected).abs() < 1e-6
}

#[test]
fn eval_reserve_auction_on_deterministic_pair() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", r#"{"bidders":[{"id":"a","support":[[1,1]]},{"id":"b","support":[[2,1]]}]}"#);
    let row = first_row(&run(&["eval", s(&inst), "--auction", "ar", "--price", "0"]));
    assert!(close(&row["revenue"], 1.0));
    assert_eq!(row["mechanism"], "reserve=0");
}

#[test]
fn eval_anonymous_price_on_two_coins() {
    let dir = TempDir::new().unwrap();
    let coin = r#"{"id":"ID","support":[[0,0.5],[1,0.5]]}"#;
    let body = format!(r#"{{"bidders":[{},{}]}}"#, coin.replace("ID", "a"), coin.replace("ID", "b"));
    let inst = write(&dir, "i.json", &body);
    let row = first_row(&run(&["eval", s(&inst), "--auction", "ap", "--price", "1"]));
    assert!(close(&row["revenue"], 0.75));
}

#[test]
fn eval_on_empty_subset_is_zero() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", r#"{"bidders":[{"id":"a","support":[[3,1]]}]}"#);
    for auction in ["ap", "ar", "spa", "spp", "myer"] {
        let row = first_row(&run(&["eval", s(&inst), "--auction", auction, "--subset", ""]));
        assert_eq!(row["revenue"].as_f64(), Some(0.0), "{auction}");
        assert_eq!(row["selected_ids"].as_array().unwrap().len(), 0);
    }
}

#[test]
fn select_capacity_reserve_auction_picks_top_two() {
    let dir = TempDir::new().unwrap();
    let inst = write(
        &dir,
        "i.json",
        r#"{"bidders":[{"id":"b1","support":[[1,1]]},{"id":"b2","support":[[2,1]]},{"id":"b3","support":[[3,1]]}],"capacity":2}"#,
    );
    let row = first_row(&run(&["select", s(&inst), "--model", "capacity", "--auction", "ar"]));
    assert_eq!(row["selected_ids"], serde_json::json!(["b2", "b3"]));
    assert!(close(&row["revenue"], 2.0 * 1.0 + 1.0));
    assert!(close(&row["observed_factor"], 1.0));
}

#[test]
fn select_cost_on_subset_sum_instance() {
    let dir = TempDir::new().unwrap();
    let gen = run(&["gen", "subset-sum", "--weights", "1,2", "--W", "3"]);
    assert!(gen.status.success());
    let inst = write(&dir, "ss.json", std::str::from_utf8(&gen.stdout).unwrap());
    let row = first_row(&run(&["select", s(&inst), "--model", "cost", "--auction", "ap"]));
    let w = 3.0f64;
    assert!(close(&row["profit"], 1.0 - (-w).exp() - (-w).exp() * w));
    assert_eq!(row["selected_ids"], serde_json::json!(["b1", "b2"]));
}

#[test]
fn sequential_dp_matches_fixed_order_oracle() {
    let dir = TempDir::new().unwrap();
    let gen = run(&["--seed", "11", "gen", "random", "--n", "8", "--capacity", "3"]);
    let inst = write(&dir, "r.json", std::str::from_utf8(&gen.stdout).unwrap());
    let rep = report(&run(&["select", s(&inst), "--model", "capacity", "--auction", "spp", "--order", "input"]));
    let row = &rep["rows"][0];
    assert_eq!(row["algorithm"], "spp-capacity");
    assert!((row["revenue"].as_f64().unwrap() - row["oracle_value"].as_f64().unwrap()).abs() < 1e-12);
    assert_eq!(rep["violations"], 0);
}

#[test]
fn model_mismatch_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", r#"{"bidders":[{"id":"a","support":[[1,1]]}],"capacity":1}"#);
    let out = run(&["select", s(&inst), "--model", "cost", "--auction", "ap"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn strict_oracle_over_cap_is_an_error() {
    let dir = TempDir::new().unwrap();
    let gen = run(&["gen", "random", "--n", "6", "--capacity", "2"]);
    let inst = write(&dir, "r.json", std::str::from_utf8(&gen.stdout).unwrap());
    let args = ["select", s(&inst), "--model", "capacity", "--auction", "ap", "--cap-subsets", "4"];
    assert_eq!(run(&[&args[..], &["--oracle", "strict"]].concat()).status.code(), Some(2));
    let auto = report(&run(&[&args[..], &["--oracle", "auto"]].concat()));
    assert!(auto["rows"][0]["oracle_value"].is_null());
}

#[test]
fn verify_sandwich_passes() {
    let out = run(&["verify", "sandwich", "--count", "200", "--seed", "7"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn verify_submodular_reports_the_witness() {
    let out = run(&["verify", "submodular", "--count", "20", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().next().unwrap().ends_with(",slack,pass"));
    let witness = text.lines().find(|l| l.contains("submodular/ar-witness")).expect("witness row");
    assert!(witness.ends_with(",true"));
}

#[test]
fn verify_apc2_stays_within_factor_two() {
    let rep = report(&run(&["verify", "apc2", "--count", "100"]));
    assert_eq!(rep["violations"], 0);
    for row in rep["rows"].as_array().unwrap() {
        if let Some(f) = row["observed_factor"].as_f64() {
            assert!(f <= 2.0 + 1e-9, "{row}");
        }
    }
}

#[test]
fn unknown_suite_is_a_usage_error() {
    assert_eq!(run(&["verify", "nonsense"]).status.code(), Some(2));
}

#[test]
fn gen_random_is_deterministic() {
    let a = run(&["gen", "random", "--n", "6", "--seed", "1"]);
    let b = run(&["gen", "random", "--n", "6", "--seed", "1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["gen", "random", "--n", "6", "--seed", "2"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn gen_subset_sum_structure() {
    let v: Value = serde_json::from_slice(&run(&["gen", "subset-sum", "--weights", "1,2", "--W", "3"]).stdout).unwrap();
    let bidders = v["bidders"].as_array().unwrap();
    assert_eq!(bidders.len(), 2);
    for (b, w) in bidders.iter().zip([1.0f64, 2.0]) {
        let support = b["support"].as_array().unwrap();
        assert!(close(&support[1][1], 1.0 - (-w).exp()));
        assert!(close(&b["cost"], (-3.0f64).exp() * w));
    }
}

#[test]
fn gen_gap_is_iid_with_unit_costs() {
    let v: Value = serde_json::from_slice(&run(&["gen", "gap", "--n", "16"]).stdout).unwrap();
    let bidders = v["bidders"].as_array().unwrap();
    assert_eq!(bidders.len(), 16);
    assert!(bidders.iter().all(|b| b["cost"].as_f64() == Some(1.0)));
    assert!(bidders.iter().all(|b| b["support"] == bidders[0]["support"]));
}

#[test]
fn malformed_json_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "bad.json", "{\"bidders\": [\n  {\"id\": \"a\", \"support\": [[1, 1]]\n");
    let out = run(&["eval", s(&inst), "--auction", "ap"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn unknown_format_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let inst = write(&dir, "i.json", r#"{"bidders":[{"id":"a","support":[[1,1]]}]}"#);
    assert_eq!(run(&["eval", s(&inst), "--auction", "vickrey"]).status.code(), Some(2));
    assert_eq!(run(&["eval", s(&inst), "--auction", "ap", "--format", "xml"]).status.code(), Some(2));
}

#[test]
fn reports_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let status =
            bin().args(["bench", "--count", "3", "--seed", "5", "--format", "csv", "--out", s(out)]).status().unwrap();
        assert!(status.success());
    }
    let first = std::fs::read(&a).unwrap();
    assert_eq!(first, std::fs::read(&b).unwrap());
    let header = String::from_utf8(first).unwrap().lines().next().unwrap().to_string();
    assert_eq!(
        header,
        "instance_hash,algorithm,n,m_or_deltastar,revenue,cost,profit,claimed_factor,observed_factor,millis"
    );
}

#[test]
fn thread_count_from_environment() {
    let one = bin().env("BIDDER_SELECT_THREADS", "1").args(["verify", "xos", "--count", "10"]).output().unwrap();
    let many = bin().env("BIDDER_SELECT_THREADS", "4").args(["verify", "xos", "--count", "10"]).output().unwrap();
    assert_eq!(one.stdout, many.stdout);
    assert_eq!(
        bin().env("BIDDER_SELECT_THREADS", "x").args(["verify", "xos"]).output().unwrap().status.code(),
        Some(2)
    );
}
