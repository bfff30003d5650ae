//! Language-preserving size reductions.

use std::collections::BTreeMap;

use super::{Grammar, Rule, Symbol};

fn references(g: &Grammar, target: &str) -> usize {
    let mut n = 0;
    for sym in g.rules.values().flatten().flatten() {
        sym.visit_refs(&mut |r| {
            if r == target {
                n += 1
            }
        });
    }
    n
}

fn mentions(seq: &[Symbol], target: &str) -> bool {
    let mut hit = false;
    for s in seq {
        s.visit_refs(&mut |r| hit |= r == target);
    }
    hit
}

/// Keys (other than the start) defined by one rule of one token are replaced
/// by that token everywhere.
fn inline_single_token(g: &mut Grammar, keep: &dyn Fn(&str) -> bool) -> bool {
    let candidate = g.rules.iter().find_map(|(k, rules)| match rules.as_slice() {
        [r] if r.len() == 1 && *k != g.start && !keep(k) && !mentions(r, k) => Some((k.clone(), r.clone())),
        _ => None,
    });
    let Some((key, rule)) = candidate else { return false };
    g.rules.remove(&key);
    g.replace_refs(&key, &rule);
    true
}

/// Keys with identical rule sets are merged into one.
fn merge_identical(g: &mut Grammar) -> bool {
    let mut by_rules: BTreeMap<Vec<Rule>, Vec<String>> = BTreeMap::new();
    for (k, rules) in &g.rules {
        let mut rs = rules.clone();
        rs.sort();
        rs.dedup();
        by_rules.entry(rs).or_default().push(k.clone());
    }
    let mut changed = false;
    for keys in by_rules.into_values().filter(|ks| ks.len() > 1) {
        let keep = if keys.contains(&g.start) {
            g.start.clone()
        } else {
            keys[0].clone()
        };
        for k in keys.iter().filter(|k| **k != keep) {
            g.rules.remove(k);
            g.replace_refs(k, &[Symbol::Nonterminal(keep.clone())]);
            changed = true;
        }
    }
    changed
}

fn dedupe_rules(g: &mut Grammar) -> bool {
    let before = g.rule_count();
    g.normalize();
    g.rule_count() < before
}

/// Drops `<A> ::= <A>` rules when other rules remain.
fn drop_self_rules(g: &mut Grammar) -> bool {
    let mut changed = false;
    for (k, rules) in g.rules.iter_mut() {
        let is_self = |r: &Rule| matches!(r.as_slice(), [Symbol::Nonterminal(n)] if n == k);
        if rules.iter().any(is_self) && rules.iter().any(|r| !is_self(r)) {
            rules.retain(|r| !is_self(r));
            changed = true;
        }
    }
    changed
}

/// Keys with a single rule that are referenced exactly once are spliced
/// into their only use site.
fn inline_single_use(g: &mut Grammar, keep: &dyn Fn(&str) -> bool) -> bool {
    let candidate = g.rules.iter().find_map(|(k, rules)| match rules.as_slice() {
        [r] if *k != g.start && !keep(k) && !mentions(r, k) && references(g, k) == 1 => Some((k.clone(), r.clone())),
        _ => None,
    });
    let Some((key, rule)) = candidate else { return false };
    g.rules.remove(&key);
    g.replace_refs(&key, &rule);
    true
}

/// Applies the five reductions until the rule count stops decreasing.
pub fn compact(grammar: &Grammar) -> Grammar {
    compact_with_trace(grammar, &|_| false).0
}

/// Pseudo-method nonterminals, such as `<parse_expr.while_1.1>`, as named
/// by tree labels.
pub fn is_pseudo_nonterminal(nt: &str) -> bool {
    nt.contains(".while_") || nt.contains(".if_")
}

/// Compaction for mined grammars: nonterminals of true methods are never
/// inlined, so the grammar keeps the parser's vocabulary.
pub fn compact_mined(grammar: &Grammar) -> Grammar {
    compact_with_trace(grammar, &|k| !is_pseudo_nonterminal(k)).0
}

/// Like [`compact`], also returning the rule count after every round.
/// Nonterminals for which `keep` holds are not inlined.
pub fn compact_with_trace(grammar: &Grammar, keep: &dyn Fn(&str) -> bool) -> (Grammar, Vec<usize>) {
    let mut g = grammar.clone();
    g.normalize();
    let mut counts = vec![g.rule_count()];
    loop {
        while inline_single_token(&mut g, keep) {}
        merge_identical(&mut g);
        dedupe_rules(&mut g);
        drop_self_rules(&mut g);
        while inline_single_use(&mut g, keep) {}
        g.normalize();
        let now = g.rule_count();
        let last = *counts.last().expect("non-empty");
        counts.push(now);
        if now >= last {
            break;
        }
    }
    (g, counts)
}

/// Collapses the single-character alternatives of a nonterminal (two or
/// more) into one character-class alternative; other alternatives stay. With
/// `on == false` this is the identity.
pub fn generalize_charsets(grammar: &Grammar, on: bool) -> Grammar {
    let mut g = grammar.clone();
    if !on {
        return g;
    }
    for (k, rules) in g.rules.iter_mut() {
        if *k == grammar.start {
            continue;
        }
        let single = |r: &Rule| matches!(r.as_slice(), [Symbol::Terminal(_)]);
        let (mut chars, rest): (Vec<Rule>, Vec<Rule>) = rules.drain(..).partition(single);
        chars.sort();
        chars.dedup();
        *rules = rest;
        match chars.len() {
            0 => {}
            1 => rules.extend(chars),
            _ => rules.push(vec![Symbol::Alternation(chars)]),
        }
        rules.sort();
    }
    g
}

#[cfg(test)]
mod tests {
    use super::super::build::*;
    use super::*;

    #[test]
    fn single_token_keys_are_inlined() {
        let mut g = Grammar::new("<S>");
        g.add_rule("<S>", vec![n("<A>"), n("<A>")]);
        g.add_rule("<A>", vec![n("<B>")]);
        g.add_rule("<B>", t("x"));
        g.add_rule("<B>", t("y"));
        let out = compact(&g);
        assert!(!out.rules.contains_key("<A>"));
        assert_eq!(out.rules["<S>"], vec![vec![n("<B>"), n("<B>")]]);
    }

    #[test]
    fn identical_rule_sets_merge() {
        let mut g = Grammar::new("<S>");
        g.add_rule("<S>", vec![n("<A>"), n("<B>")]);
        for k in ["<A>", "<B>"] {
            g.add_rule(k, t("x"));
            g.add_rule(k, t("y"));
        }
        let out = compact(&g);
        assert_eq!(out.rules.len(), 2);
        assert_eq!(out.rules["<S>"], vec![vec![n("<A>"), n("<A>")]]);
    }

    #[test]
    fn self_rules_removed() {
        let mut g = Grammar::new("<S>");
        g.add_rule("<S>", vec![n("<S>")]);
        g.add_rule("<S>", t("a"));
        g.add_rule("<S>", t("b"));
        let out = compact(&g);
        assert_eq!(out.rules["<S>"], vec![t("a"), t("b")]);
    }

    #[test]
    fn single_use_keys_spliced() {
        let mut g = Grammar::new("<S>");
        g.add_rule("<S>", vec![Symbol::Terminal('('), n("<E>"), Symbol::Terminal(')')]);
        g.add_rule("<S>", t("z"));
        g.add_rule("<E>", t("ab"));
        let out = compact(&g);
        assert_eq!(out.rules.len(), 1);
        assert!(out.rules["<S>"].contains(&t("(ab)")));
    }

    #[test]
    fn rule_count_never_grows() {
        let mut g = Grammar::new("<S>");
        g.add_rule("<S>", vec![plus(vec![n("<A>")])]);
        g.add_rule("<A>", vec![n("<B>")]);
        g.add_rule("<B>", vec![n("<C>")]);
        g.add_rule("<C>", t("c"));
        g.add_rule("<C>", t("d"));
        let (out, counts) = compact_with_trace(&g, &|_| false);
        assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{counts:?}");
        assert!(out.validate().is_ok());
    }

    #[test]
    fn mined_compaction_keeps_methods() {
        let mut g = Grammar::new("<START>");
        g.add_rule("<START>", vec![n("<parse_num>")]);
        g.add_rule("<parse_num>", vec![plus(vec![n("<parse_num.while_1.1>")])]);
        g.add_rule("<parse_num.while_1.1>", vec![n("<digit>")]);
        g.add_rule("<digit>", vec![class("0-9")]);
        let out = compact_mined(&g);
        assert_eq!(out.rules["<parse_num>"], vec![vec![plus(vec![n("<digit>")])]]);
        assert!(out.rules.contains_key("<digit>"));
        assert_eq!(compact(&g).rules.len(), 1);
    }

    #[test]
    fn charsets() {
        let mut g = Grammar::new("<S>");
        g.add_rule("<S>", vec![n("<digit>")]);
        for c in "9876543210".chars() {
            g.add_rule("<digit>", vec![Symbol::Terminal(c)]);
        }
        assert_eq!(generalize_charsets(&g, false), g);
        let on = generalize_charsets(&g, true);
        assert_eq!(on.rules["<digit>"], vec![vec![class("0-9")]]);
        assert!(on.to_string().contains("<digit> ::= [0-9]"));
        let mut ops = Grammar::new("<S>");
        for c in "+-*/".chars() {
            ops.add_rule("<S>", vec![n("<op>")]);
            ops.add_rule("<op>", vec![Symbol::Terminal(c)]);
        }
        assert!(generalize_charsets(&ops, true).to_string().contains("[*+-/]"));
        let mut mixed = Grammar::new("<S>");
        mixed.add_rule("<S>", vec![n("<c>")]);
        mixed.add_rule("<c>", t("\\n"));
        for c in "abc".chars() {
            mixed.add_rule("<c>", vec![Symbol::Terminal(c)]);
        }
        let out = generalize_charsets(&mixed, true);
        assert_eq!(out.rules["<c>"].len(), 2);
        assert!(out.to_string().contains("[a-c]"), "{out}");
    }
}
