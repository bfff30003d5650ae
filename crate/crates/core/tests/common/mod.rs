//! Oracles shared by the test targets.
//!
//! The enumerator builds languages bottom-up, straight from the regular
//! right-hand sides, for every string up to a length bound.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};

use grammine::grammar::{Grammar, Quantifier, Symbol};
use grammine::parse::{desugar, Earley, Recognizer};
use grammine::produce::{generate, min_heights, ProducerConfig};

/// Strings up to `MAX` characters, bucketed by length; each packs its
/// characters' alphabet codes one byte apiece.
type Lang = Vec<HashSet<u64>>;

struct Enumerator<'g> {
    grammar: &'g Grammar,
    codes: BTreeMap<char, u64>,
    max: usize,
}

impl Enumerator<'_> {
    fn empty(&self) -> Lang {
        vec![HashSet::new(); self.max + 1]
    }

    fn epsilon(&self) -> Lang {
        let mut l = self.empty();
        l[0].insert(0);
        l
    }

    fn concat(&self, a: &Lang, b: &Lang) -> Lang {
        let mut out = self.empty();
        for (la, xs) in a.iter().enumerate() {
            for (lb, ys) in b.iter().enumerate().take(self.max + 1 - la) {
                for &x in xs {
                    for &y in ys {
                        out[la + lb].insert((x << (8 * lb)) | y);
                    }
                }
            }
        }
        out
    }

    fn union(&self, into: &mut Lang, from: &Lang) {
        for (i, f) in into.iter_mut().zip(from) {
            i.extend(f);
        }
    }

    fn seq(&self, seq: &[Symbol], env: &BTreeMap<String, Lang>) -> Lang {
        seq.iter().fold(self.epsilon(), |acc, s| self.concat(&acc, &self.sym(s, env)))
    }

    fn sym(&self, s: &Symbol, env: &BTreeMap<String, Lang>) -> Lang {
        match s {
            Symbol::Terminal(c) => {
                let mut l = self.empty();
                if let Some(&code) = self.codes.get(c) {
                    l[1].insert(code);
                }
                l
            }
            Symbol::Nonterminal(n) => env[n].clone(),
            Symbol::Alternation(arms) => {
                let mut l = self.empty();
                for a in arms {
                    self.union(&mut l, &self.seq(a, env));
                }
                l
            }
            Symbol::Group(body, q) => {
                let once = self.seq(body, env);
                let mut l = self.epsilon();
                if *q == Quantifier::Optional {
                    self.union(&mut l, &once);
                    return l;
                }
                // only strings new in the last round can lead to new ones
                let mut frontier = self.epsilon();
                while size(&frontier) > 0 {
                    let mut more = self.concat(&once, &frontier);
                    for (m, have) in more.iter_mut().zip(&l) {
                        m.retain(|x| !have.contains(x));
                    }
                    self.union(&mut l, &more);
                    frontier = more;
                }
                if *q == Quantifier::Plus {
                    l = self.concat(&once, &l);
                }
                l
            }
        }
    }

    fn language(&self) -> Vec<String> {
        let mut env: BTreeMap<String, Lang> = self.grammar.rules.keys().map(|k| (k.clone(), self.empty())).collect();
        loop {
            let mut changed = false;
            for (nt, rules) in &self.grammar.rules {
                let mut l = self.empty();
                for r in rules {
                    self.union(&mut l, &self.seq(r, &env));
                }
                if size(&l) != size(&env[nt]) {
                    env.insert(nt.clone(), l);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let chars: BTreeMap<u64, char> = self.codes.iter().map(|(c, k)| (*k, *c)).collect();
        let mut out: Vec<String> = Vec::new();
        for (len, set) in env[&self.grammar.start].iter().enumerate() {
            for &packed in set {
                out.push((0..len).rev().map(|i| chars[&((packed >> (8 * i)) & 0xFF)]).collect());
            }
        }
        out.sort();
        out
    }
}

fn size(l: &Lang) -> usize {
    l.iter().map(HashSet::len).sum()
}

fn recognized(r: &mut Recognizer, alphabet: &[char], prefix: &mut String, max: usize, out: &mut Vec<String>) {
    if r.is_accepting() {
        out.push(prefix.clone());
    }
    if prefix.len() == max {
        return;
    }
    for &c in alphabet {
        if r.push(c) {
            prefix.push(c);
            recognized(r, alphabet, prefix, max, out);
            prefix.pop();
        }
        r.pop();
    }
}

/// Compares Earley recognition with enumeration over `alphabet` for all
/// strings up to `max` characters; the size of the language on success.
pub fn check(g: &Grammar, alphabet: &str, max: usize) -> Result<usize, String> {
    let codes = alphabet.chars().zip(1u64..).collect();
    let expected = Enumerator { grammar: g, codes, max }.language();
    let earley = Earley::new(&desugar(g));
    let mut found = Vec::new();
    let alphabet: Vec<char> = alphabet.chars().collect();
    recognized(&mut earley.recognizer(), &alphabet, &mut String::new(), max, &mut found);
    found.sort();
    if found != expected {
        let a: BTreeSet<&String> = found.iter().collect();
        let b: BTreeSet<&String> = expected.iter().collect();
        return Err(format!(
            "earley only: {:?}; enumeration only: {:?}",
            a.difference(&b).take(5).collect::<Vec<_>>(),
            b.difference(&a).take(5).collect::<Vec<_>>()
        ));
    }
    // the one-shot entry point agrees with the incremental one
    for s in found.iter().step_by(found.len() / 200 + 1) {
        if !earley.accepts(s) {
            return Err(format!("{s:?} found incrementally but rejected in one shot"));
        }
    }
    Ok(found.len())
}

/// Strings from `from` must all be recognized by `by`.
pub fn contained(from: &Grammar, by: &Grammar, seed: u64) -> Result<(), String> {
    // the uncompacted side nests deeper; give it room to terminate
    let depth = min_heights(from)[&from.start] + 8;
    let cfg = ProducerConfig { seed, count: 500, max_depth: depth, coverage_mode: false };
    let earley = Earley::new(&desugar(by));
    for s in generate(from, &cfg).unwrap() {
        if !earley.accepts(&s) {
            return Err(s);
        }
    }
    Ok(())
}
