use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn grammine(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_grammine"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("runs")
}

fn corpus(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "corpora", name].iter().collect();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn mine_fuzz_and_evaluate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = grammine(&["mine", "calc", &corpus("calc.txt"), "-o", "g.json", "--count", "200"], d);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("precision: 100.0% (200/200"), "{text}");
    assert!(text.contains("corpus recall: 100.0% (18/18)"), "{text}");

    let manifest = read_json(&d.join("g.manifest.json"));
    assert_eq!(manifest["metrics"]["precision_percent"], 100.0);
    assert_eq!(manifest["metrics"]["corpus_recall"]["total"], 18);
    assert_eq!(manifest["flags"]["compat_mode"], "transitive");

    let out = grammine(&["fuzz", "g.json", "--count", "20", "--seed", "4", "-o", "s.txt"], d);
    assert_eq!(out.status.code(), Some(0));
    let samples = std::fs::read_to_string(d.join("s.txt")).unwrap();
    assert_eq!(samples.lines().count(), 20);

    let out = grammine(&["eval-recall", "g.json", "s.txt"], d);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("recall: 100.0% (20/20 recognized)"));

    let out = grammine(&["eval-precision", "calc", "g.json", "--count", "50", "--manifest", "p.json"], d);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(read_json(&d.join("p.json"))["metrics"]["precision"]["total"], 50);
}

#[test]
fn fuzz_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert!(grammine(&["golden", "calc", "-o", "calc.json"], d).status.success());
    let a = grammine(&["fuzz", "calc.json", "--count", "30", "--seed", "9"], d);
    let b = grammine(&["fuzz", "calc.json", "--count", "30", "--seed", "9"], d);
    let c = grammine(&["fuzz", "calc.json", "--count", "30", "--seed", "10"], d);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("empty.txt"), "").unwrap();
    std::fs::write(d.join("bad.txt"), "1+\n").unwrap();
    assert!(grammine(&["golden", "calc", "-o", "calc.json"], d).status.success());
    for args in [
        vec!["frobnicate"],
        vec!["mine", "nosuch", "empty.txt"],
        vec!["mine", "calc", "empty.txt"],
        vec!["mine", "calc", "bad.txt"],
        vec!["fuzz", "calc.json", "--count", "0"],
        vec!["fuzz", "missing.json"],
        vec!["eval-recall", "calc.json", "empty.txt"],
        vec!["golden", "netrc_lite"],
    ] {
        let out = grammine(&args, d);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
    assert!(!d.join("calc.grammar.json").exists());
    assert_eq!(grammine(&["--help"], d).status.code(), Some(0));
}

#[test]
fn exhausted_budget_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = grammine(
        &["mine", "calc", &corpus("calc.txt"), "-o", "g.json", "--oracle-budget", "3", "--count", "20"],
        d,
    );
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    // the grammar is still written
    assert!(d.join("g.json").exists());
    assert!(read_json(&d.join("g.manifest.json"))["metrics"]["unresolved_checks"].as_u64().unwrap() > 0);
}

#[test]
fn subjects_and_golden() {
    let dir = tempfile::tempdir().unwrap();
    let out = grammine(&["subjects"], dir.path());
    let text = stdout(&out);
    for name in ["calc", "cgidecode", "microjson", "urlparse_lite", "netrc_lite", "mathexpr_lite"] {
        assert!(text.lines().any(|l| l.starts_with(name)), "{name}");
    }
    let out = grammine(&["golden", "microjson"], dir.path());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.is_object());
}

#[test]
fn dump_trees_writes_both_versions() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = grammine(
        &["mine", "calc", &corpus("calc.txt"), "-o", "g.json", "--dump-trees", "trees.txt", "--count", "10"],
        d,
    );
    assert!(out.status.success());
    let trees = std::fs::read_to_string(d.join("trees.txt")).unwrap();
    assert_eq!(trees.split("\n\n").filter(|b| !b.trim().is_empty()).count(), 18);
    assert!(trees.contains("parse_expr"));
}
