use std::path::Path;
use std::process::{Command, Output};

use vcg_cli::{BidFile, OutcomeDocument};
use vcg_core::Amount;

const TWO_GOOD_EXAMPLE: &str = r#"{
  "goods": ["A", "B"],
  "bidders": [1, 2, 3],
  "bids": [
    {"bidder": 1, "bundle": ["A", "B"], "price": "2"},
    {"bidder": 2, "bundle": ["A"], "price": "2"},
    {"bidder": 2, "bundle": ["B"], "price": "2"},
    {"bidder": 3, "bundle": ["A"], "price": "2"},
    {"bidder": 3, "bundle": ["B"], "price": "2"}
  ]
}"#;

fn vcg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vcg"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_two_good_example() {
    let dir = tempfile::tempdir().unwrap();
    let bids = write(dir.path(), "bids.json", TWO_GOOD_EXAMPLE);
    let out = dir.path().join("outcome.json");
    let o = vcg(&[
        "run",
        &bids,
        "--seed",
        "42",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc = OutcomeDocument::parse(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc.max_value, Amount::from(4));
    assert!(doc.payments.values().all(Amount::is_zero));
    assert_eq!(
        doc.alphas
            .values()
            .map(|a| a.to_string())
            .collect::<Vec<_>>(),
        ["4", "2", "2"]
    );
    assert!(doc.tie_break_applied);
    assert_eq!(doc.seed, 42);
    assert_eq!(doc.chosen.to_string(), "{A}->2 {B}->3");
    assert_eq!(doc.version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let bids = write(dir.path(), "bids.json", TWO_GOOD_EXAMPLE);
    for solver in ["dp", "oracle"] {
        let a = vcg(&["run", &bids, "--seed", "9", "--solver", solver]);
        let b = vcg(&["run", &bids, "--seed", "9", "--solver", solver]);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
    }
    let dp = stdout(&vcg(&["run", &bids, "--seed", "9"]));
    let oracle = stdout(&vcg(&["run", &bids, "--seed", "9", "--solver", "oracle"]));
    assert_eq!(dp.replace("\"dp\"", "\"oracle\""), oracle);
}

#[test]
fn unknown_good_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let bids = write(
        dir.path(),
        "bids.json",
        r#"{"goods":["A"],"bidders":[1],"bids":[{"bidder":1,"bundle":["Z"],"price":"1"}]}"#,
    );
    let o = vcg(&["run", &bids]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("good Z"), "{}", stderr(&o));
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let bids = write(dir.path(), "bids.json", "{\n\"goods\": [\"A\"\n");
    let o = vcg(&["run", &bids]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
    assert_eq!(
        vcg(&["run", "/nonexistent/bids.json"]).status.code(),
        Some(1)
    );
}

#[test]
fn too_many_goods_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let goods: Vec<String> = (0..25).map(|i| format!("\"G{i}\"")).collect();
    let text = format!(
        r#"{{"goods":[{}],"bidders":[1],"bids":[]}}"#,
        goods.join(",")
    );
    let bids = write(dir.path(), "bids.json", &text);
    assert_eq!(vcg(&["run", &bids]).status.code(), Some(2));
}

#[test]
fn check_defaults_pass() {
    let o = vcg(&["check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let text = stdout(&o);
    for goal in [
        "totality",
        "well_definedness",
        "uniqueness",
        "equivalence",
        "truthfulness",
    ] {
        assert!(
            text.lines()
                .any(|l| l.starts_with(goal) && l.contains("PASS")),
            "{goal} missing:\n{text}"
        );
    }
}

#[test]
fn check_smallest_shape_reports_sizes() {
    let o = vcg(&[
        "check",
        "--max-goods",
        "1",
        "--max-bidders",
        "1",
        "--instances",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(
        stdout(&o).contains("goods=1 bidders=1 partitions=1 allocations=2"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn check_json_report() {
    let o = vcg(&[
        "check",
        "--max-goods",
        "2",
        "--max-bidders",
        "2",
        "--instances",
        "20",
        "--json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let reports: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 5);
    assert_eq!(reports[0]["goal"], "totality");
    assert_eq!(reports[0]["checked"], 20);
    assert!(reports
        .iter()
        .all(|r| r["failures"].as_array().unwrap().is_empty()));
}

#[test]
fn check_oversized_equivalence_exits_two() {
    assert_eq!(vcg(&["check", "--max-goods", "5"]).status.code(), Some(2));
}

#[test]
fn injected_fault_is_caught_with_replayable_counterexample() {
    let o = vcg(&["check", "--inject-fault", "--instances", "50"]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    assert!(text.contains("well_definedness: FAIL"), "{text}");
    let start = text.find("first counterexample").unwrap();
    let json_start = start + text[start..].find('{').unwrap();
    let file: BidFile = serde_json::from_str(&text[json_start..]).unwrap();
    let instance = file.to_instance().unwrap();
    assert!(!instance.goods().is_empty());
}

#[test]
fn enumerate_counts() {
    let o = vcg(&["enumerate", "--goods", "A,B,C", "--what", "partitions"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("count: 5\n"));

    let o = vcg(&["enumerate", "--goods", "A,B", "--bidders", "1,2"]);
    let text = stdout(&o);
    assert!(text.ends_with("count: 9\n"), "{text}");
    assert!(text.lines().any(|l| l == "(nothing allocated)"));
    assert!(text.lines().any(|l| l == "{A,B}->1"));

    let o = vcg(&["enumerate", "--goods", "A", "--what", "partitions"]);
    assert_eq!(stdout(&o), "{{A}}\ncount: 1\n");
}

#[test]
fn enumerate_guards() {
    let goods: Vec<String> = (0..13).map(|i| format!("G{i}")).collect();
    let o = vcg(&[
        "enumerate",
        "--goods",
        &goods.join(","),
        "--what",
        "partitions",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = vcg(&["enumerate", "--goods", "A,A", "--what", "partitions"]);
    assert_eq!(o.status.code(), Some(1));
}
