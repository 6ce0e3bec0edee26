use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_microchange"));
    c.env_remove("MICROCHANGE_JOBS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).to_str().unwrap().to_string()
}

const ZUUL_PRE: &str = "void register(DiscoveryResult server) {\n    if (server != null) {\n        pool.add(server);\n    }\n}\n";
const ZUUL_POST: &str = "void register(DiscoveryResult server) {\n    if (server != null && server != DiscoveryResult.EMPTY) {\n        pool.add(server);\n    }\n}\n";

#[test]
fn diff_outputs_script_and_lines() {
    let t = tempfile::tempdir().unwrap();
    let pre = write(t.path(), "pre.java", ZUUL_PRE);
    let post = write(t.path(), "post.java", ZUUL_POST);
    let same = run(&["diff", &pre, &pre]);
    assert_eq!(code(&same), 0);
    let v = json(&same);
    assert_eq!(v["actions"].as_array().unwrap().len(), 0);
    assert_eq!(v["schema_version"], 1);

    let o = run(&["diff", &pre, &post, "--json"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let and = v["actions"]
        .as_array()
        .unwrap()
        .iter()
        .any(|a| a["op"] == "INS" && a["node"]["kind"] == "InfixExpression" && a["node"]["label"] == "&&");
    assert!(and);
    assert_eq!(v["diff_text"]["pre"], serde_json::json!([2]));

    let text = run(&["diff", &pre, &post, "--text"]);
    assert!(String::from_utf8_lossy(&text.stdout).contains("INS InfixExpression [&&]"));
}

#[test]
fn parse_errors_exit_2() {
    let t = tempfile::tempdir().unwrap();
    let good = write(t.path(), "good.java", ZUUL_PRE);
    let bad = write(t.path(), "bad.java", "void f( {\n");
    for args in [vec!["diff", &bad, &good], vec!["detect", &good, &bad], vec!["parse", &bad]] {
        let o = run(&args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("parse error"));
    }
}

#[test]
fn detect_reports_instances() {
    let t = tempfile::tempdir().unwrap();
    let pre = write(t.path(), "pre.java", ZUUL_PRE);
    let post = write(t.path(), "post.java", ZUUL_POST);
    let v = json(&run(&["detect", &pre, &post]));
    assert_eq!(v["count"], 1);
    assert_eq!(v["instances"][0]["type"], "AddConjunctOrDisjunct");
    assert_eq!(v["instances"][0]["consumed_lines"]["pre"], serde_json::json!([2]));

    let a = write(t.path(), "a.java", "void f(){if(a)x();}");
    let b = write(t.path(), "b.java", "void f(){if(!a)x();}");
    let v = json(&run(&["detect", &a, &b]));
    assert_eq!(v["count"], 1);
    assert_eq!(v["instances"][0]["type"], "ReverseCondition");

    let none = json(&run(&["detect", &a, &a]));
    assert_eq!(none["count"], 0);
    assert_eq!(none["coverage"]["coverage"], Value::Null);
}

#[test]
fn detect_excludes_reported_renames() {
    let pre = data("mbassador/pre.java");
    let post = data("mbassador/post.java");
    let report = data("mbassador/report.json");
    let with = json(&run(&["detect", &pre, &post, "--refactorings", &report]));
    assert_eq!(with["rename_covered"].as_array().unwrap().len(), 1);
    assert_eq!(with["count"], 0);
    assert_eq!(with["coverage"]["coverage"], 1.0);
    let other = json(&run(&["detect", &pre, &post, "--refactorings", &report, "--commit", "0000000"]));
    assert_eq!(other["rename_covered"].as_array().unwrap().len(), 0);
    let without = json(&run(&["detect", &pre, &post]));
    assert_eq!(without["rename_covered"].as_array().unwrap().len(), 0);
    assert_eq!(without["coverage"]["coverage"], 0.0);
}

#[test]
fn malformed_reports_exit_3() {
    let t = tempfile::tempdir().unwrap();
    let pre = data("mbassador/pre.java");
    let bad = write(t.path(), "r.json", r#"{"commits":[{"sha1":"1","refactorings":[{"description":"no type"}]}]}"#);
    let o = run(&["detect", &pre, &pre, "--refactorings", &bad]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("refactorings[0].type"));
    let repo = t.path().join("repo");
    microchange_testgen::synthetic_history(&repo, 3, 1).unwrap();
    let o = run(&["mine", repo.to_str().unwrap(), "--refactorings", &bad, "--out", t.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 3);
}

fn mine(repo: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["mine", repo.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn run_files(dir: &Path) -> Vec<Vec<u8>> {
    ["report.json", "instances.jsonl", "methods.jsonl"].iter().map(|f| std::fs::read(dir.join(f)).unwrap()).collect()
}

#[test]
fn mine_is_deterministic_and_report_is_idempotent() {
    let t = tempfile::tempdir().unwrap();
    let repo = t.path().join("repo");
    microchange_testgen::synthetic_history(&repo, 60, 11).unwrap();
    let (o1, o8) = (t.path().join("one"), t.path().join("eight"));
    let r1 = mine(&repo, &o1, &["--jobs", "1", "--text"]);
    assert_eq!(code(&r1), 0);
    let summary = String::from_utf8_lossy(&r1.stdout);
    for row in ["Processed commits:", "Processed methods:", "Conditional-related commits:", "Conditional-related changes:"] {
        assert!(summary.contains(row), "{summary}");
    }
    let r8 = bin()
        .args(["mine", repo.to_str().unwrap(), "--out", o8.to_str().unwrap()])
        .env("MICROCHANGE_JOBS", "8")
        .output()
        .unwrap();
    assert_eq!(code(&r8), 0);
    assert_eq!(run_files(&o1), run_files(&o8));

    let mined: Value = serde_json::from_slice(&std::fs::read(o1.join("report.json")).unwrap()).unwrap();
    let csv = t.path().join("table.csv");
    let rep = run(&["report", o1.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
    assert_eq!(code(&rep), 0, "{}", String::from_utf8_lossy(&rep.stderr));
    let v = json(&rep);
    assert_eq!(v["runs"][0]["coverage"], mined["coverage"]);
    assert_eq!(v["runs"][0]["frequency"], mined["frequency"]);
    assert_eq!(v["combined"]["commit_weighted"], mined["coverage"]["commit_mean"]);
    let table = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(table.lines().next(), Some("micro-change,occurrences,frequency,rank"));
    assert_eq!(run(&["report", o1.to_str().unwrap()]).stdout, rep.stdout);

    let two = json(&run(&["report", o1.to_str().unwrap(), o8.to_str().unwrap()]));
    assert_eq!(two["combined"]["repo_weighted"], mined["coverage"]["commit_mean"]);
    assert_eq!(two["combined"]["frequency"]["total"], 2 * mined["frequency"]["total"].as_u64().unwrap());
}

#[test]
fn runs_without_conditional_changes_report_null_coverage() {
    let t = tempfile::tempdir().unwrap();
    let repo = t.path().join("repo");
    let mut b = microchange_testgen::RepoBuilder::init(&repo).unwrap();
    b.write("A.java", "class A {\n  void f() {\n    a(1);\n  }\n}\n");
    b.commit("one").unwrap();
    b.write("A.java", "class A {\n  void f() {\n    a(2);\n  }\n}\n");
    b.commit("two").unwrap();
    let out = t.path().join("run");
    assert_eq!(code(&mine(&repo, &out, &[])), 0);
    let o = run(&["report", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["runs"][0]["coverage"]["commit_mean"]["coverage"], Value::Null);
    assert_eq!(v["runs"][0]["stats"]["analyzed_methods"], 1);
}

#[test]
fn missing_or_corrupt_run_data_exits_5() {
    let t = tempfile::tempdir().unwrap();
    assert_eq!(code(&run(&["report", t.path().join("absent").to_str().unwrap()])), 5);
    let repo = t.path().join("repo");
    microchange_testgen::synthetic_history(&repo, 20, 3).unwrap();
    let out = t.path().join("run");
    assert_eq!(code(&mine(&repo, &out, &[])), 0);
    let methods = out.join("methods.jsonl");
    let mut text = std::fs::read_to_string(&methods).unwrap();
    text.push_str("{not json\n");
    std::fs::write(&methods, text).unwrap();
    assert_eq!(code(&run(&["report", out.to_str().unwrap()])), 5);
    std::fs::write(&methods, "").unwrap();
    let o = run(&["report", out.to_str().unwrap()]);
    assert_eq!(code(&o), 5, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn repository_failures_exit_4() {
    let t = tempfile::tempdir().unwrap();
    let missing = t.path().join("nope");
    assert_eq!(code(&mine(&missing, &t.path().join("o"), &[])), 4);
    let repo = t.path().join("repo");
    microchange_testgen::synthetic_history(&repo, 2, 1).unwrap();
    assert_eq!(code(&mine(&repo, &t.path().join("o"), &["--branch", "no-such-branch"])), 4);
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(code(&run(&[])), 64);
    assert_eq!(code(&run(&["frobnicate"])), 64);
    assert_eq!(code(&run(&["diff", "a.java", "b.java", "--json", "--text"])), 64);
    assert_eq!(code(&run(&["mine", ".", "--out", "x", "--jobs", "0"])), 64);
    assert_eq!(code(&run(&["detect", "a.java", "b.java", "--commit", "abc"])), 64);
    assert_eq!(code(&run(&["diff", "/nonexistent/a.java", "/nonexistent/b.java"])), 64);
    let help = run(&["--help"]);
    assert_eq!(code(&help), 0);
    assert!(String::from_utf8_lossy(&help.stdout).contains("catalog"));
}

#[test]
fn catalog_matches_shipped_file() {
    let o = run(&["catalog"]);
    assert_eq!(code(&o), 0);
    let shipped: PathBuf = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/catalog.json");
    assert_eq!(o.stdout, std::fs::read(shipped).unwrap());
    let v = json(&o);
    assert_eq!(v["types"].as_array().unwrap().len(), 20);
    let t = tempfile::tempdir().unwrap();
    let p = t.path().join("c.json");
    assert_eq!(code(&run(&["catalog", "--out", p.to_str().unwrap()])), 0);
    assert_eq!(std::fs::read(p).unwrap(), o.stdout);
}

#[test]
fn parse_prints_the_tree() {
    let t = tempfile::tempdir().unwrap();
    let f = write(t.path(), "m.java", "void f(){if(a&&b)x();}");
    let o = run(&["parse", &f]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(text.starts_with("MethodDeclaration"));
    assert!(text.contains("InfixExpression [&&]"));
}
