//! Grammars with regular right-hand sides, and the mining transforms that
//! produce them from generalized parse trees.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde_json::{json, Map, Value};
use thiserror::Error;

mod compact;
mod extract;
mod nullability;
pub mod regex;
mod repetition;

pub use compact::{compact, compact_mined, compact_with_trace, generalize_charsets, is_pseudo_nonterminal};
pub use extract::extract_grammar;
pub use nullability::apply_nullability;
pub use repetition::{detect_repetitions, find_blocks};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantifier {
    Star,
    Plus,
    Optional,
}

impl Quantifier {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantifier::Star => "*",
            Quantifier::Plus => "+",
            Quantifier::Optional => "?",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "*" => Some(Quantifier::Star),
            "+" => Some(Quantifier::Plus),
            "?" => Some(Quantifier::Optional),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Terminal(char),
    Nonterminal(String),
    Group(Vec<Symbol>, Quantifier),
    /// Alternatives; an empty arm is ε.
    Alternation(Vec<Vec<Symbol>>),
}

pub type Rule = Vec<Symbol>;

impl Symbol {
    pub fn nt(name: impl Into<String>) -> Self {
        Symbol::Nonterminal(name.into())
    }

    pub fn as_nonterminal(&self) -> Option<&str> {
        match self {
            Symbol::Nonterminal(n) => Some(n),
            _ => None,
        }
    }

    /// Calls `f` on every nonterminal reference, including nested ones.
    pub fn visit_refs<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Symbol::Terminal(_) => {}
            Symbol::Nonterminal(n) => f(n),
            Symbol::Group(body, _) => body.iter().for_each(|s| s.visit_refs(f)),
            Symbol::Alternation(arms) => arms.iter().flatten().for_each(|s| s.visit_refs(f)),
        }
    }

    /// Calls `f` on every terminal, including nested ones.
    pub fn visit_terminals(&self, f: &mut impl FnMut(char)) {
        match self {
            Symbol::Terminal(c) => f(*c),
            Symbol::Nonterminal(_) => {}
            Symbol::Group(body, _) => body.iter().for_each(|s| s.visit_terminals(f)),
            Symbol::Alternation(arms) => arms.iter().flatten().for_each(|s| s.visit_terminals(f)),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Symbol::Terminal(c) => json!({ "t": c.to_string() }),
            Symbol::Nonterminal(n) => json!({ "nt": n }),
            Symbol::Group(body, q) => json!({
                "group": body.iter().map(Symbol::to_json).collect::<Vec<_>>(),
                "q": q.as_str(),
            }),
            Symbol::Alternation(arms) => json!({
                "alt": arms
                    .iter()
                    .map(|a| a.iter().map(Symbol::to_json).collect::<Vec<_>>())
                    .collect::<Vec<_>>(),
            }),
        }
    }

    fn from_json(v: &Value) -> Result<Self, GrammarError> {
        let bad = || GrammarError::Format(format!("bad symbol {v}"));
        let obj = v.as_object().ok_or_else(bad)?;
        if let Some(t) = obj.get("t") {
            let s = t.as_str().ok_or_else(bad)?;
            let mut it = s.chars();
            match (it.next(), it.next()) {
                (Some(c), None) => Ok(Symbol::Terminal(c)),
                _ => Err(GrammarError::Format(format!("terminal {s:?} is not one character"))),
            }
        } else if let Some(n) = obj.get("nt") {
            Ok(Symbol::Nonterminal(n.as_str().ok_or_else(bad)?.to_string()))
        } else if let Some(g) = obj.get("group") {
            let q = obj
                .get("q")
                .and_then(Value::as_str)
                .and_then(Quantifier::parse)
                .ok_or_else(bad)?;
            Ok(Symbol::Group(seq_from_json(g)?, q))
        } else if let Some(a) = obj.get("alt") {
            let arms = a
                .as_array()
                .ok_or_else(bad)?
                .iter()
                .map(seq_from_json)
                .collect::<Result<_, _>>()?;
            Ok(Symbol::Alternation(arms))
        } else {
            Err(bad())
        }
    }
}

fn seq_from_json(v: &Value) -> Result<Vec<Symbol>, GrammarError> {
    v.as_array()
        .ok_or_else(|| GrammarError::Format(format!("expected a symbol list, got {v}")))?
        .iter()
        .map(Symbol::from_json)
        .collect()
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GrammarError {
    #[error("malformed grammar document: {0}")]
    Format(String),
    #[error("start symbol {0} is not defined")]
    UndefinedStart(String),
    #[error("{referrer} references undefined nonterminal {missing}")]
    Undefined { referrer: String, missing: String },
    #[error("nonterminal {0} has no rules")]
    NoRules(String),
    #[error("empty group or alternation in {0}")]
    EmptyBody(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Grammar {
    pub start: String,
    pub rules: BTreeMap<String, Vec<Rule>>,
}

impl Grammar {
    pub fn new(start: impl Into<String>) -> Self {
        Grammar {
            start: start.into(),
            rules: BTreeMap::new(),
        }
    }

    /// Adds an alternative unless it is already present.
    pub fn add_rule(&mut self, nt: &str, rule: Rule) {
        let rules = self.rules.entry(nt.to_string()).or_default();
        if !rules.contains(&rule) {
            rules.push(rule);
        }
    }

    pub fn rule_count(&self) -> usize {
        self.rules.values().map(Vec::len).sum()
    }

    /// Sorts and deduplicates every rule set.
    pub fn normalize(&mut self) {
        for rules in self.rules.values_mut() {
            rules.sort();
            rules.dedup();
        }
    }

    pub fn validate(&self) -> Result<(), GrammarError> {
        if !self.rules.contains_key(&self.start) {
            return Err(GrammarError::UndefinedStart(self.start.clone()));
        }
        fn bodies_ok(s: &Symbol) -> bool {
            match s {
                Symbol::Group(b, _) => !b.is_empty() && b.iter().all(bodies_ok),
                Symbol::Alternation(a) => !a.is_empty() && a.iter().flatten().all(bodies_ok),
                _ => true,
            }
        }
        for (nt, rules) in &self.rules {
            if rules.is_empty() {
                return Err(GrammarError::NoRules(nt.clone()));
            }
            for sym in rules.iter().flatten() {
                if !bodies_ok(sym) {
                    return Err(GrammarError::EmptyBody(nt.clone()));
                }
                let mut missing = None;
                sym.visit_refs(&mut |r| {
                    if missing.is_none() && !self.rules.contains_key(r) {
                        missing = Some(r.to_string());
                    }
                });
                if let Some(missing) = missing {
                    return Err(GrammarError::Undefined {
                        referrer: nt.clone(),
                        missing,
                    });
                }
            }
        }
        Ok(())
    }

    /// Nonterminals that derive the empty string.
    pub fn nullable(&self) -> BTreeSet<String> {
        let mut set = BTreeSet::new();
        loop {
            let before = set.len();
            for (nt, rules) in &self.rules {
                if !set.contains(nt) && rules.iter().any(|r| seq_nullable(r, &set)) {
                    set.insert(nt.clone());
                }
            }
            if set.len() == before {
                return set;
            }
        }
    }

    /// Nonterminals reachable from the start symbol.
    pub fn reachable(&self) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut todo = vec![self.start.clone()];
        while let Some(nt) = todo.pop() {
            if !seen.insert(nt.clone()) {
                continue;
            }
            for sym in self.rules.get(&nt).into_iter().flatten().flatten() {
                sym.visit_refs(&mut |r| todo.push(r.to_string()));
            }
        }
        seen
    }

    pub fn to_json(&self) -> Value {
        let mut rules = Map::new();
        for (nt, alts) in &self.rules {
            rules.insert(
                nt.clone(),
                Value::Array(
                    alts.iter()
                        .map(|r| Value::Array(r.iter().map(Symbol::to_json).collect()))
                        .collect(),
                ),
            );
        }
        json!({ "start": self.start, "rules": rules })
    }

    /// Pretty-printed grammar document with a trailing newline.
    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_json()).expect("serializable");
        s.push('\n');
        s
    }

    pub fn from_json(v: &Value) -> Result<Self, GrammarError> {
        let start = v
            .get("start")
            .and_then(Value::as_str)
            .ok_or_else(|| GrammarError::Format("missing \"start\"".into()))?;
        let rules_obj = v
            .get("rules")
            .and_then(Value::as_object)
            .ok_or_else(|| GrammarError::Format("missing \"rules\" object".into()))?;
        let mut g = Grammar::new(start);
        for (nt, alts) in rules_obj {
            let alts = alts
                .as_array()
                .ok_or_else(|| GrammarError::Format(format!("rules of {nt} are not a list")))?
                .iter()
                .map(seq_from_json)
                .collect::<Result<Vec<_>, _>>()?;
            g.rules.insert(nt.clone(), alts);
        }
        g.validate()?;
        Ok(g)
    }

    pub fn from_json_str(s: &str) -> Result<Self, GrammarError> {
        let v: Value = serde_json::from_str(s).map_err(|e| GrammarError::Format(e.to_string()))?;
        Self::from_json(&v)
    }

    /// Replaces every reference to `from` by `to` (a sequence spliced in).
    pub(crate) fn replace_refs(&mut self, from: &str, to: &[Symbol]) {
        for rules in self.rules.values_mut() {
            for rule in rules.iter_mut() {
                *rule = splice_seq(rule, from, to);
            }
        }
    }
}

pub(crate) fn seq_nullable(seq: &[Symbol], nullable: &BTreeSet<String>) -> bool {
    seq.iter().all(|s| sym_nullable(s, nullable))
}

pub(crate) fn sym_nullable(s: &Symbol, nullable: &BTreeSet<String>) -> bool {
    match s {
        Symbol::Terminal(_) => false,
        Symbol::Nonterminal(n) => nullable.contains(n),
        Symbol::Group(_, Quantifier::Star | Quantifier::Optional) => true,
        Symbol::Group(b, Quantifier::Plus) => seq_nullable(b, nullable),
        Symbol::Alternation(arms) => arms.iter().any(|a| seq_nullable(a, nullable)),
    }
}

fn splice_seq(seq: &[Symbol], from: &str, to: &[Symbol]) -> Vec<Symbol> {
    let mut out = Vec::with_capacity(seq.len());
    for s in seq {
        match s {
            Symbol::Nonterminal(n) if n == from => out.extend(to.iter().cloned()),
            Symbol::Group(b, q) => {
                let body = splice_seq(b, from, to);
                if body.is_empty() {
                    // an emptied group matches only ε
                    continue;
                }
                out.push(Symbol::Group(body, *q));
            }
            Symbol::Alternation(arms) => {
                out.push(Symbol::Alternation(arms.iter().map(|a| splice_seq(a, from, to)).collect()))
            }
            other => out.push(other.clone()),
        }
    }
    out
}

fn write_char(f: &mut impl fmt::Write, c: char) -> fmt::Result {
    match c {
        '\'' => f.write_str("'\\''"),
        '\\' => f.write_str("'\\\\'"),
        c if c.is_ascii_graphic() || c == ' ' => write!(f, "'{c}'"),
        c => write!(f, "'{}'", c.escape_default()),
    }
}

fn class_char(c: char) -> String {
    match c {
        ']' | '\\' | '^' => format!("\\{c}"),
        c if c.is_ascii_graphic() || c == ' ' => c.to_string(),
        c => c.escape_default().to_string(),
    }
}

/// Renders a sorted set of characters as a bracket class, collapsing runs of
/// three or more consecutive characters into ranges.
pub fn render_class(chars: &[char]) -> String {
    let mut s = String::from("[");
    let mut i = 0;
    while i < chars.len() {
        let mut j = i;
        while j + 1 < chars.len() && chars[j + 1] as u32 == chars[j] as u32 + 1 {
            j += 1;
        }
        if j - i >= 2 {
            let _ = write!(s, "{}-{}", class_char(chars[i]), class_char(chars[j]));
        } else {
            for &c in &chars[i..=j] {
                s.push_str(&class_char(c));
            }
        }
        i = j + 1;
    }
    s.push(']');
    s
}

/// If every arm is one terminal, the sorted characters.
pub fn single_char_arms(arms: &[Vec<Symbol>]) -> Option<Vec<char>> {
    let mut cs = arms
        .iter()
        .map(|a| match a.as_slice() {
            [Symbol::Terminal(c)] => Some(*c),
            _ => None,
        })
        .collect::<Option<Vec<_>>>()?;
    cs.sort_unstable();
    Some(cs)
}

fn write_seq(f: &mut impl fmt::Write, seq: &[Symbol]) -> fmt::Result {
    if seq.is_empty() {
        return f.write_str("ε");
    }
    for (i, s) in seq.iter().enumerate() {
        if i > 0 {
            f.write_char(' ')?;
        }
        write_sym(f, s)?;
    }
    Ok(())
}

fn write_sym(f: &mut impl fmt::Write, s: &Symbol) -> fmt::Result {
    match s {
        Symbol::Terminal(c) => write_char(f, *c),
        Symbol::Nonterminal(n) => f.write_str(n),
        Symbol::Group(body, q) => {
            f.write_char('(')?;
            write_seq(f, body)?;
            write!(f, "){}", q.as_str())
        }
        Symbol::Alternation(arms) => {
            if let Some(cs) = single_char_arms(arms).filter(|cs| cs.len() > 1) {
                return f.write_str(&render_class(&cs));
            }
            f.write_char('(')?;
            for (i, a) in arms.iter().enumerate() {
                if i > 0 {
                    f.write_str(" | ")?;
                }
                if !a.is_empty() {
                    write_seq(f, a)?;
                }
            }
            f.write_char(')')
        }
    }
}

/// Renders a symbol sequence in the textual notation used by `Display`.
pub fn render_seq(seq: &[Symbol]) -> String {
    let mut s = String::new();
    let _ = write_seq(&mut s, seq);
    s
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut order: Vec<&String> = vec![&self.start];
        order.extend(self.rules.keys().filter(|k| **k != self.start));
        for nt in order {
            let Some(rules) = self.rules.get(nt) else { continue };
            write!(f, "{nt} ::= ")?;
            for (i, r) in rules.iter().enumerate() {
                if i > 0 {
                    write!(f, "\n{:width$} | ", "", width = nt.len() + 2)?;
                }
                write_seq(f, r)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Shorthands for writing grammars by hand.
pub mod build {
    use super::{Quantifier, Symbol};

    pub fn t(s: &str) -> Vec<Symbol> {
        s.chars().map(Symbol::Terminal).collect()
    }

    pub fn n(name: &str) -> Symbol {
        Symbol::Nonterminal(name.to_string())
    }

    pub fn star(body: Vec<Symbol>) -> Symbol {
        Symbol::Group(body, Quantifier::Star)
    }

    pub fn plus(body: Vec<Symbol>) -> Symbol {
        Symbol::Group(body, Quantifier::Plus)
    }

    pub fn opt(body: Vec<Symbol>) -> Symbol {
        Symbol::Group(body, Quantifier::Optional)
    }

    pub fn alt(arms: Vec<Vec<Symbol>>) -> Symbol {
        Symbol::Alternation(arms)
    }

    /// Character class from a list of characters and `a-z` style ranges.
    pub fn class(spec: &str) -> Symbol {
        let cs: Vec<char> = spec.chars().collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < cs.len() {
            if i + 2 < cs.len() && cs[i + 1] == '-' {
                for c in cs[i]..=cs[i + 2] {
                    out.push(c);
                }
                i += 3;
            } else {
                out.push(cs[i]);
                i += 1;
            }
        }
        out.sort_unstable();
        out.dedup();
        Symbol::Alternation(out.into_iter().map(|c| vec![Symbol::Terminal(c)]).collect())
    }

    /// Class of every printable ASCII character (space included) not in
    /// `except`.
    pub fn printable_except(except: &str) -> Symbol {
        Symbol::Alternation(
            (' '..='~')
                .filter(|c| !except.contains(*c))
                .map(|c| vec![Symbol::Terminal(c)])
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::build::*;
    use super::*;

    fn sample() -> Grammar {
        let mut g = Grammar::new("<S>");
        g.add_rule("<S>", vec![plus(vec![n("<A>")]), alt(vec![t("x"), vec![]])]);
        g.add_rule("<A>", t("a"));
        g.add_rule("<A>", vec![opt(t("b")), class("0-9")]);
        g
    }

    #[test]
    fn json_round_trip() {
        let g = sample();
        let text = g.to_json_string();
        let back = Grammar::from_json_str(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_json_string(), text);
    }

    #[test]
    fn json_symbol_shapes() {
        let v = sample().to_json();
        assert_eq!(v["rules"]["<A>"][0], json!([{ "t": "a" }]));
        assert_eq!(v["rules"]["<S>"][0][0], json!({ "group": [{ "nt": "<A>" }], "q": "+" }));
        assert_eq!(v["rules"]["<S>"][0][1]["alt"][1], json!([]));
    }

    #[test]
    fn validation_catches_undefined_refs() {
        let mut g = sample();
        g.add_rule("<A>", vec![n("<Missing>")]);
        assert!(matches!(g.validate(), Err(GrammarError::Undefined { .. })));
        assert!(matches!(
            Grammar::from_json_str(r#"{"start":"<X>","rules":{}}"#),
            Err(GrammarError::UndefinedStart(_))
        ));
        assert!(Grammar::from_json_str(r#"{"start":"<X>","rules":{"<X>":[[{"t":"ab"}]]}}"#).is_err());
    }

    #[test]
    fn display_renders_classes_and_groups() {
        let text = sample().to_string();
        assert!(text.starts_with("<S> ::= (<A>)+ ('x' | )\n"), "{text}");
        assert!(text.contains("('b')? [0-9]"), "{text}");
        assert_eq!(render_class(&['*', '+', '-', '/']), "[*+-/]");
    }

    #[test]
    fn nullable_fixpoint() {
        let mut g = Grammar::new("<S>");
        g.add_rule("<S>", vec![n("<A>"), n("<B>")]);
        g.add_rule("<A>", vec![star(t("a"))]);
        g.add_rule("<B>", vec![n("<A>")]);
        g.add_rule("<B>", t("b"));
        assert_eq!(g.nullable().len(), 3);
    }
}
