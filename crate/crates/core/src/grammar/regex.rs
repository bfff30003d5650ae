//! Regular expressions over grammar symbols.
//!
//! A rule body is a regular expression whose alphabet is terminals and
//! nonterminal references. These NFAs answer membership of symbol sequences
//! and inclusion between two bodies, which the repetition miner uses to drop
//! alternatives subsumed by a quantified one.

use std::collections::{BTreeSet, HashSet, VecDeque};

use super::{Quantifier, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    T(char),
    Nt(String),
}

impl Atom {
    pub fn of(s: &Symbol) -> Option<Atom> {
        match s {
            Symbol::Terminal(c) => Some(Atom::T(*c)),
            Symbol::Nonterminal(n) => Some(Atom::Nt(n.clone())),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Nfa {
    eps: Vec<Vec<usize>>,
    edges: Vec<Vec<(Atom, usize)>>,
    start: usize,
    accept: usize,
}

impl Nfa {
    /// Compiles a symbol sequence. References to nonterminals in
    /// `skippable` may also be passed over without consuming anything.
    pub fn compile(seq: &[Symbol], skippable: &BTreeSet<String>) -> Nfa {
        let mut nfa = Nfa {
            eps: Vec::new(),
            edges: Vec::new(),
            start: 0,
            accept: 0,
        };
        let s = nfa.state();
        let e = nfa.seq(seq, s, skippable);
        nfa.start = s;
        nfa.accept = e;
        nfa
    }

    fn state(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.edges.push(Vec::new());
        self.eps.len() - 1
    }

    fn seq(&mut self, seq: &[Symbol], from: usize, skippable: &BTreeSet<String>) -> usize {
        let mut cur = from;
        for s in seq {
            cur = self.sym(s, cur, skippable);
        }
        cur
    }

    fn sym(&mut self, s: &Symbol, from: usize, skippable: &BTreeSet<String>) -> usize {
        match s {
            Symbol::Terminal(_) | Symbol::Nonterminal(_) => {
                let to = self.state();
                if let Symbol::Nonterminal(n) = s {
                    if skippable.contains(n) {
                        self.eps[from].push(to);
                    }
                }
                self.edges[from].push((Atom::of(s).expect("atom"), to));
                to
            }
            Symbol::Group(body, q) => {
                let entry = self.state();
                self.eps[from].push(entry);
                let exit = self.seq(body, entry, skippable);
                let out = self.state();
                self.eps[exit].push(out);
                if matches!(q, Quantifier::Star | Quantifier::Plus) {
                    self.eps[exit].push(entry);
                }
                if matches!(q, Quantifier::Star | Quantifier::Optional) {
                    self.eps[from].push(out);
                }
                out
            }
            Symbol::Alternation(arms) => {
                let out = self.state();
                for arm in arms {
                    let entry = self.state();
                    self.eps[from].push(entry);
                    let exit = self.seq(arm, entry, skippable);
                    self.eps[exit].push(out);
                }
                out
            }
        }
    }

    fn closure(&self, states: impl IntoIterator<Item = usize>) -> BTreeSet<usize> {
        let mut set = BTreeSet::new();
        let mut todo: Vec<usize> = states.into_iter().collect();
        while let Some(s) = todo.pop() {
            if set.insert(s) {
                todo.extend(self.eps[s].iter().copied());
            }
        }
        set
    }

    fn step(&self, set: &BTreeSet<usize>, a: &Atom) -> BTreeSet<usize> {
        self.closure(
            set.iter()
                .flat_map(|&s| self.edges[s].iter().filter(|(x, _)| x == a).map(|&(_, t)| t)),
        )
    }

    pub fn matches(&self, word: &[Atom]) -> bool {
        let mut cur = self.closure([self.start]);
        for a in word {
            cur = self.step(&cur, a);
            if cur.is_empty() {
                return false;
            }
        }
        cur.contains(&self.accept)
    }

    /// Whether every sequence accepted by `self` is accepted by `other`.
    pub fn included_in(&self, other: &Nfa) -> bool {
        let start = (self.start, other.closure([other.start]));
        let mut seen: HashSet<(usize, BTreeSet<usize>)> = HashSet::new();
        let mut todo = VecDeque::from([start]);
        while let Some((a, set)) = todo.pop_front() {
            if !seen.insert((a, set.clone())) {
                continue;
            }
            if a == self.accept && !set.contains(&other.accept) {
                return false;
            }
            for &n in &self.eps[a] {
                todo.push_back((n, set.clone()));
            }
            for (x, n) in &self.edges[a] {
                todo.push_back((*n, other.step(&set, x)));
            }
        }
        true
    }
}

/// `L(sub) ⊆ L(sup)` for two rule bodies.
pub fn subsumes(sup: &[Symbol], sub: &[Symbol], skippable: &BTreeSet<String>) -> bool {
    Nfa::compile(sub, &BTreeSet::new()).included_in(&Nfa::compile(sup, skippable))
}

/// Whether a plain symbol sequence matches a rule body.
pub fn seq_matches(body: &[Symbol], word: &[Symbol]) -> bool {
    match word.iter().map(Atom::of).collect::<Option<Vec<_>>>() {
        Some(atoms) => Nfa::compile(body, &BTreeSet::new()).matches(&atoms),
        None => subsumes(body, word, &BTreeSet::new()),
    }
}

#[cfg(test)]
mod tests {
    use super::super::build::*;
    use super::*;

    fn none() -> BTreeSet<String> {
        BTreeSet::new()
    }

    #[test]
    fn membership() {
        let body = vec![plus(vec![n("a"), n("b")]), n("a")];
        let nfa = Nfa::compile(&body, &none());
        let w = |s: &str| s.chars().map(|c| Atom::Nt(c.to_string())).collect::<Vec<_>>();
        assert!(nfa.matches(&w("aba")));
        assert!(nfa.matches(&w("ababa")));
        assert!(!nfa.matches(&w("a")));
        assert!(!nfa.matches(&w("abab")));
    }

    #[test]
    fn inclusion() {
        let plus_d = vec![plus(vec![n("d")])];
        assert!(subsumes(&plus_d, &[n("d")], &none()));
        assert!(subsumes(&plus_d, &[n("d"), n("d")], &none()));
        assert!(!subsumes(&[n("d")], &plus_d, &none()));
        let star_d = vec![star(vec![n("d")])];
        assert!(subsumes(&star_d, &plus_d, &none()));
        assert!(subsumes(&star_d, &[], &none()));
        assert!(!subsumes(&plus_d, &[], &none()));
    }

    #[test]
    fn skippable_references() {
        let mut sk = BTreeSet::new();
        sk.insert("w".to_string());
        assert!(subsumes(&[n("w"), n("x")], &[n("x")], &sk));
        assert!(!subsumes(&[n("w"), n("x")], &[n("x")], &none()));
    }

    #[test]
    fn alternation_and_optional() {
        let body = vec![alt(vec![t("a"), vec![]]), opt(t("b"))];
        let nfa = Nfa::compile(&body, &none());
        assert!(nfa.matches(&[]));
        assert!(nfa.matches(&[Atom::T('a'), Atom::T('b')]));
        assert!(!nfa.matches(&[Atom::T('b'), Atom::T('a')]));
    }
}
