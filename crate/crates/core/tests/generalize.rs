use grammine::generalize::CompatMode;
use grammine::grammar::build::{n, plus};
use grammine::grammar::{compact, detect_repetitions, Grammar, Symbol};
use grammine::parse::accepts;
use grammine::pipeline::{mine, MineOptions};
use grammine::subjects::subject;

fn options(mode: CompatMode) -> MineOptions {
    let mut o = MineOptions::default();
    o.generalize.mode = mode;
    o
}

fn words(names: &str) -> Vec<Symbol> {
    names.split_whitespace().map(n).collect()
}

#[test]
fn letters_split_into_classes_under_full_compatibility() {
    let s = subject("words").unwrap();
    let mined = mine(s, &s.seeds(), &options(CompatMode::Full)).unwrap();
    let letter = mined.report.buckets.iter().find(|b| b.key.starts_with("letter")).expect("letter bucket");
    assert_eq!(letter.members, 4);
    assert!(letter.classes >= 2, "{letter:?}");
    assert!(mined.report.false_merges.is_empty());
    assert!(!accepts(&mined.grammar, "bc"));
    for w in ["a", "b", "ac"] {
        assert!(accepts(&mined.grammar, w), "{w}");
    }
    assert!(!subject("words").unwrap().accepts("bc").unwrap());
}

#[test]
fn transitive_mode_merges_letters_and_the_audit_notices() {
    let s = subject("words").unwrap();
    let mined = mine(s, &s.seeds(), &options(CompatMode::Transitive)).unwrap();
    assert!(accepts(&mined.grammar, "bc"));
    assert!(mined.report.false_merges.iter().any(|f| f.key.starts_with("letter")));
}

#[test]
fn repeated_iterations_collapse() {
    let mut g = Grammar::new("<expr>");
    for alt in ["while:1", "while:1 while:2 while:1 while:2 while:1", "while:1 while:2 while:1"] {
        g.add_rule("<expr>", words(alt));
    }
    g.add_rule("while:1", words("if:1"));
    g.add_rule("if:1", words("num"));
    g.add_rule("num", vec![Symbol::Terminal('1')]);
    g.add_rule("while:2", vec![Symbol::Terminal('+')]);

    let out = detect_repetitions(&g);
    let mut expected = vec![words("while:1"), vec![plus(words("while:1 while:2")), n("while:1")]];
    expected.sort();
    assert_eq!(out.rules["<expr>"], expected);
    assert_eq!(out.rules["while:1"], g.rules["while:1"]);

    // summarized down to a single regular expression
    assert_eq!(compact(&out).to_string().trim_end(), "<expr> ::= '1'\n         | ('1' '+')+ '1'");
}

#[test]
fn mathexpr_false_merges_vanish_with_full_compatibility() {
    let s = subject("mathexpr_lite").unwrap();
    let transitive = mine(s, &s.seeds(), &options(CompatMode::Transitive)).unwrap();
    assert!(!transitive.report.false_merges.is_empty());
    let full = mine(s, &s.seeds(), &options(CompatMode::Full)).unwrap();
    assert!(full.report.false_merges.is_empty());
    assert!(full.report.oracle_executions > transitive.report.oracle_executions);
}

#[test]
fn null_loops_are_learned_from_the_oracle() {
    let s = subject("microjson").unwrap();
    let mined = mine(s, &s.seeds(), &MineOptions::default()).unwrap();
    assert!(!mined.report.nullability.nullable_loops.is_empty());
    assert!(accepts(&mined.grammar, "[]"));
    assert!(accepts(&mined.grammar, "\"\""));
}
