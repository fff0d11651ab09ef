use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .display()
        .to_string()
}

fn aal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aal")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    let out = aal(&all);
    (code(&out), serde_json::from_str(&stdout(&out)).expect("JSON output"))
}

#[test]
fn check_verdicts_and_exit_codes() {
    let b2 = fixture("b2.json");
    assert_eq!(code(&aal(&["check", &b2, "p, imp(p, q) |- q"])), 0);
    let out = aal(&["check", &b2, "imp(p, q) |- q"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("p=0, q=0"));
    let out = aal(&["check", &fixture("l3.json"), "|- or(p, neg(p))"]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("p=1 (1/2)"));
    let (c, v) = json(&["check", &fixture("l3_gmatrix.json"), "p, imp(p, q) |- q"]);
    assert_eq!(c, 1);
    assert_eq!(v["holds"], false);
    assert_eq!(v["filter"], serde_json::json!([1, 2]));
    assert_eq!(v["valuation"], serde_json::json!({"p": 1, "q": 0}));
}

#[test]
fn errors_map_to_exit_codes() {
    let b2 = fixture("b2.json");
    assert_eq!(code(&aal(&["check", "/nonexistent/m.json", "|- p"])), 4);
    let out = aal(&["check", &b2, "|- xor(p, q)"]);
    assert_eq!(code(&out), 2);
    assert!(!out.stderr.is_empty());
    assert_eq!(code(&aal(&["--max-valuations", "2", "check", &b2, "|- imp(p, imp(q, p))"])), 3);
    assert_eq!(code(&aal(&["--max-cells", "3", "free", &fixture("l3.json"), "--vars", "2"])), 3);
    assert_eq!(code(&aal(&["no-such-command"])), 2);
}

#[test]
fn reduce_writes_a_loadable_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("reduced.json");
    let out_str = out_path.display().to_string();
    let out = aal(&["reduce", &fixture("b2xb2.json"), "-o", &out_str]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("reduced 4 elements to 2"));
    let reduced = aal_core::fixture::load_matrix(&out_path).unwrap();
    assert_eq!(reduced.algebra().size(), 2);
    // The written matrix defines the same system as the original.
    assert_eq!(code(&aal(&["equiv", &fixture("b2xb2.json"), &out_str])), 0);
    assert_eq!(code(&aal(&["equiv", &fixture("b2.json"), &out_str])), 0);
    let (_, v) = json(&["leibniz", &out_str]);
    assert_eq!(v["blocks"], serde_json::json!([[0], [1]]));
}

#[test]
fn json_outputs_round_trip() {
    let (c, v) = json(&["reduce", &fixture("b2xb2.json")]);
    assert_eq!(c, 0);
    let text = serde_json::to_string(&v).unwrap();
    let m = aal_core::fixture::matrix_from_str(&text).unwrap();
    assert_eq!(m.algebra().size(), 2);
    let (c, v) = json(&["independence", &fixture("classical_rules.json"), "--target", "A3"]);
    assert_eq!(c, 0);
    assert_eq!(v["result"], "independent");
    let cert = aal_core::fixture::matrix_from_str(&serde_json::to_string(&v["matrix"]).unwrap()).unwrap();
    let rules = aal_core::fixture::load_rules(fixture("classical_rules.json")).unwrap();
    let others = rules.without("A3").unwrap();
    assert_eq!(aal_core::rules::is_model(&cert, &others, &aal_core::Caps::default()).unwrap(), None);
}

#[test]
fn equivalence_reports_a_counterexample() {
    let out = aal(&["equiv", &fixture("b2.json"), &fixture("l3.json")]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("not equivalent"));
    assert!(text.contains("holds in"));
    let (c, v) = json(&["equiv", &fixture("b2.json"), &fixture("b2_gmatrix.json")]);
    assert_eq!((c, &v["equivalent"]), (0, &Value::Bool(true)));
}

#[test]
fn structural_commands() {
    let (c, v) = json(&["free", &fixture("b2_constants.json"), "--vars", "2"]);
    assert_eq!((c, v["size"].as_u64()), (0, Some(16)));
    let (c, v) = json(&["lt", &fixture("b2.json")]);
    assert_eq!(c, 0);
    assert_eq!(v["admits"], true);
    let (c, _) = json(&["congruences", &fixture("l3.json")]);
    assert_eq!(c, 0);
    let (c, v) = json(&["implicative", &fixture("b2.json"), "--arrow", "imp"]);
    assert_eq!((c, &v["holds"]), (0, &Value::Bool(true)));
    let (c, v) = json(&["implicative", &fixture("b2.json"), "--arrow", "and"]);
    assert_eq!((c, &v["holds"]), (1, &Value::Bool(false)));
    let (c, v) = json(&["rasiowa", &fixture("b2.json"), "--arrow", "imp"]);
    assert_eq!(c, 0);
    assert_eq!(v["congruence"], true);
    let (c, v) = json(&["closed-sets", &fixture("b2.json")]);
    assert_eq!(c, 0);
    assert_eq!(v["closed_sets"].as_array().unwrap().len(), 4);
    let (c, v) = json(&["theorems", &fixture("b2.json"), "--depth", "1"]);
    assert_eq!(c, 0);
    assert!(v["theorems"].as_array().unwrap().iter().any(|t| t == "imp(p1, p1)"));
}

#[test]
fn rules_commands() {
    let rules = fixture("classical_rules.json");
    let dir = tempfile::tempdir().unwrap();
    let b2 = dir.path().join("b2_imp_neg.json");
    std::fs::write(
        &b2,
        r#"{"algebra": {"signature": {"name": "implication_negation",
            "connectives": [{"sym": "imp", "arity": 2}, {"sym": "neg", "arity": 1}]},
            "size": 2, "tables": {"imp": [1, 1, 0, 1], "neg": [1, 0]}}, "filter": [1]}"#,
    )
    .unwrap();
    let b2 = b2.display().to_string();
    let (c, v) = json(&["model-check", &b2, &rules]);
    assert_eq!((c, &v["model"]), (0, &Value::Bool(true)));
    let out = aal(&["derive", &rules, "--goal", "imp(p, p)"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("in 1 line:"));
    assert_eq!(code(&aal(&["derive", &rules, "--goal", "p", "--depth", "3"])), 1);
    let (c, v) = json(&["independence", &rules, "--target", "ID"]);
    assert_eq!((c, &v["result"]), (1, &Value::from("derivable")));
}
