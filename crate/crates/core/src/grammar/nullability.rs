use super::repetition::prune_subsumed;
use super::{Grammar, Quantifier, Symbol};
use crate::generalize::NullabilityReport;

fn item_nullable(s: &Symbol, report: &NullabilityReport) -> bool {
    match s {
        Symbol::Nonterminal(n) => report.nullable_loops.contains(n),
        Symbol::Group(_, Quantifier::Star | Quantifier::Optional) => true,
        Symbol::Group(body, Quantifier::Plus) => body.iter().all(|s| item_nullable(s, report)),
        _ => false,
    }
}

fn relax(seq: &[Symbol], report: &NullabilityReport) -> Vec<Symbol> {
    seq.iter()
        .map(|s| match s {
            Symbol::Group(body, q) => {
                let body = relax(body, report);
                let q = if *q == Quantifier::Plus && body.iter().all(|s| item_nullable(s, report)) {
                    Quantifier::Star
                } else {
                    *q
                };
                Symbol::Group(body, q)
            }
            Symbol::Alternation(arms) => Symbol::Alternation(arms.iter().map(|a| relax(a, report)).collect()),
            other => other.clone(),
        })
        .collect()
}

/// Turns `+` into `*` for groups made only of nullable loops and gives
/// skippable branches an ε alternative. Alternatives that become redundant
/// are dropped.
pub fn apply_nullability(grammar: &Grammar, report: &NullabilityReport) -> Grammar {
    let mut g = grammar.clone();
    for rules in g.rules.values_mut() {
        for r in rules.iter_mut() {
            *r = relax(r, report);
        }
    }
    for nt in &report.skippable_branches {
        if g.rules.contains_key(nt) {
            g.add_rule(nt, Vec::new());
        }
    }
    let nullable = g.nullable();
    for rules in g.rules.values_mut() {
        rules.sort();
        rules.dedup();
        *rules = prune_subsumed(rules, &nullable);
    }
    g
}

#[cfg(test)]
mod tests {
    use super::super::build::*;
    use super::*;

    #[test]
    fn nullable_loop_group_becomes_star() {
        let mut g = Grammar::new("<v>");
        g.add_rule("<v>", vec![plus(vec![n("<ws>")]), n("<x>")]);
        g.add_rule("<v>", vec![n("<x>")]);
        g.add_rule("<ws>", t(" "));
        g.add_rule("<x>", t("x"));
        let mut report = NullabilityReport::default();
        report.nullable_loops.insert("<ws>".into());
        let out = apply_nullability(&g, &report);
        assert_eq!(out.rules["<v>"], vec![vec![star(vec![n("<ws>")]), n("<x>")]]);
    }

    #[test]
    fn non_nullable_stays_plus() {
        let mut g = Grammar::new("<num>");
        g.add_rule("<num>", vec![plus(vec![n("<digit>")])]);
        g.add_rule("<digit>", t("1"));
        let out = apply_nullability(&g, &NullabilityReport::default());
        assert_eq!(out, g);
    }

    #[test]
    fn skippable_branch_gains_epsilon() {
        let mut g = Grammar::new("<s>");
        g.add_rule("<s>", vec![n("<sign>"), n("<d>")]);
        g.add_rule("<s>", vec![n("<d>")]);
        g.add_rule("<sign>", t("-"));
        g.add_rule("<d>", t("1"));
        let mut report = NullabilityReport::default();
        report.skippable_branches.insert("<sign>".into());
        let out = apply_nullability(&g, &report);
        assert!(out.rules["<sign>"].contains(&vec![]));
        assert_eq!(out.rules["<s>"], vec![vec![n("<sign>"), n("<d>")]]);
    }
}
