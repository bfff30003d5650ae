//! Random sentence production from grammars, for fuzzing and for measuring
//! precision and recall.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grammar::{Grammar, Quantifier, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProducerConfig {
    pub seed: u64,
    /// Bound on nonterminal nesting. Exceeded only when the grammar needs
    /// more than this to terminate at all.
    pub max_depth: usize,
    pub count: usize,
    /// Prefer rules and alternatives not yet exercised in this batch.
    pub coverage_mode: bool,
}

impl Default for ProducerConfig {
    fn default() -> Self {
        ProducerConfig {
            seed: 0,
            max_depth: 12,
            count: 100,
            coverage_mode: false,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProduceError {
    #[error("invalid producer configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("nonterminal {0} is referenced but has no rules")]
    Undefined(String),
    #[error("{nonterminal} has no terminating derivation within depth {max_depth}")]
    NoTermination { nonterminal: String, max_depth: usize },
}

const INF: usize = usize::MAX;

/// Minimal derivation height of every nonterminal, by fixpoint. Unproductive
/// nonterminals stay at `usize::MAX`.
pub fn min_heights(g: &Grammar) -> BTreeMap<String, usize> {
    let mut h: BTreeMap<String, usize> = g.rules.keys().map(|k| (k.clone(), INF)).collect();
    loop {
        let mut changed = false;
        for (nt, rules) in &g.rules {
            let best = rules
                .iter()
                .map(|r| seq_cost(r, &h))
                .min()
                .unwrap_or(INF)
                .saturating_add(1);
            if best < h[nt] {
                h.insert(nt.clone(), best);
                changed = true;
            }
        }
        if !changed {
            return h;
        }
    }
}

/// Nonterminal depth a sequence needs below its own nonterminal.
fn seq_cost(seq: &[Symbol], h: &BTreeMap<String, usize>) -> usize {
    seq.iter().map(|s| sym_cost(s, h)).max().unwrap_or(0)
}

fn sym_cost(s: &Symbol, h: &BTreeMap<String, usize>) -> usize {
    match s {
        Symbol::Terminal(_) => 0,
        Symbol::Nonterminal(n) => h.get(n).copied().unwrap_or(INF),
        Symbol::Group(_, Quantifier::Star | Quantifier::Optional) => 0,
        Symbol::Group(body, Quantifier::Plus) => seq_cost(body, h),
        Symbol::Alternation(arms) => arms.iter().map(|a| seq_cost(a, h)).min().unwrap_or(INF),
    }
}

/// Coverage items: a rule of a nonterminal, an arm of an alternation, or a
/// group being entered at least once. Alternations and groups are keyed by
/// address, which is stable while the grammar is borrowed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Item {
    Rule(String, usize),
    Arm(usize, usize),
    Entered(usize),
}

/// Streams sentences; `generate` collects a batch.
#[derive(Debug)]
pub struct Producer<'g> {
    grammar: &'g Grammar,
    heights: BTreeMap<String, usize>,
    max_depth: usize,
    coverage_mode: bool,
    covered: HashSet<Item>,
    rng: ChaCha8Rng,
}

impl<'g> Producer<'g> {
    pub fn new(grammar: &'g Grammar, config: &ProducerConfig) -> Result<Self, ProduceError> {
        if config.max_depth == 0 {
            return Err(ProduceError::InvalidConfig("max_depth must be at least 1"));
        }
        let mut undefined = None;
        for rules in grammar.rules.values() {
            for r in rules {
                for s in r {
                    s.visit_refs(&mut |n| {
                        if !grammar.rules.contains_key(n) && undefined.is_none() {
                            undefined = Some(n.to_string());
                        }
                    });
                }
            }
        }
        if let Some(n) = undefined {
            return Err(ProduceError::Undefined(n));
        }
        if !grammar.rules.contains_key(&grammar.start) {
            return Err(ProduceError::Undefined(grammar.start.clone()));
        }
        let heights = min_heights(grammar);
        let start_h = heights[&grammar.start];
        if start_h > config.max_depth {
            // name an unproductive nonterminal when there is one
            let culprit = grammar
                .reachable()
                .into_iter()
                .find(|n| heights.get(n) == Some(&INF))
                .unwrap_or_else(|| grammar.start.clone());
            return Err(ProduceError::NoTermination {
                nonterminal: culprit,
                max_depth: config.max_depth,
            });
        }
        Ok(Producer {
            grammar,
            heights,
            max_depth: config.max_depth,
            coverage_mode: config.coverage_mode,
            covered: HashSet::new(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
        })
    }

    pub fn next_string(&mut self) -> String {
        let mut out = String::new();
        let start = self.grammar.start.clone();
        self.expand_nt(&start, self.max_depth, &mut out);
        out
    }

    /// Picks among `options` (index, cost): those fitting `budget`, preferring
    /// uncovered ones in coverage mode; the cheapest when none fit.
    fn pick(&mut self, options: &[(usize, usize)], budget: usize, item: impl Fn(usize) -> Item) -> usize {
        let fitting: Vec<usize> = options.iter().filter(|(_, c)| *c <= budget).map(|(i, _)| *i).collect();
        if fitting.is_empty() {
            return options.iter().min_by_key(|(_, c)| *c).expect("at least one option").0;
        }
        if self.coverage_mode {
            let fresh: Vec<usize> = fitting
                .iter()
                .copied()
                .filter(|&i| !self.covered.contains(&item(i)))
                .collect();
            if let Some(&i) = fresh.choose(&mut self.rng) {
                return i;
            }
        }
        *fitting.choose(&mut self.rng).expect("non-empty")
    }

    /// `depth` counts this nonterminal itself.
    fn expand_nt(&mut self, nt: &str, depth: usize, out: &mut String) {
        let g = self.grammar;
        let rules = &g.rules[nt];
        let options: Vec<(usize, usize)> = rules
            .iter()
            .enumerate()
            .map(|(i, r)| (i, seq_cost(r, &self.heights).saturating_add(1)))
            .collect();
        let k = self.pick(&options, depth, |i| Item::Rule(nt.to_string(), i));
        self.covered.insert(Item::Rule(nt.to_string(), k));
        self.expand_seq(&rules[k], depth.saturating_sub(1), out);
    }

    fn expand_seq(&mut self, seq: &'g [Symbol], depth: usize, out: &mut String) {
        for s in seq {
            self.expand_sym(s, depth, out);
        }
    }

    fn expand_sym(&mut self, s: &'g Symbol, depth: usize, out: &mut String) {
        match s {
            Symbol::Terminal(c) => out.push(*c),
            Symbol::Nonterminal(n) => self.expand_nt(n, depth, out),
            Symbol::Alternation(arms) => {
                let id = s as *const Symbol as usize;
                let options: Vec<(usize, usize)> = arms
                    .iter()
                    .enumerate()
                    .map(|(i, a)| (i, seq_cost(a, &self.heights)))
                    .collect();
                let k = self.pick(&options, depth, |i| Item::Arm(id, i));
                self.covered.insert(Item::Arm(id, k));
                self.expand_seq(&arms[k], depth, out);
            }
            Symbol::Group(body, q) => {
                let id = s as *const Symbol as usize;
                let fits = seq_cost(body, &self.heights) <= depth;
                let min = usize::from(*q == Quantifier::Plus);
                let times = if !fits {
                    min
                } else {
                    let force = self.coverage_mode && !self.covered.contains(&Item::Entered(id));
                    let mut n = min;
                    match q {
                        Quantifier::Optional => n = usize::from(force || self.rng.gen_bool(0.5)),
                        // geometric with p = 0.5, capped by the remaining depth
                        _ => {
                            while n < depth.max(min) && self.rng.gen_bool(0.5) {
                                n += 1;
                            }
                            if force {
                                n = n.max(1);
                            }
                        }
                    }
                    n
                };
                if times > 0 {
                    self.covered.insert(Item::Entered(id));
                }
                for _ in 0..times {
                    self.expand_seq(body, depth, out);
                }
            }
        }
    }
}

impl Iterator for Producer<'_> {
    type Item = String;

    fn next(&mut self) -> Option<String> {
        Some(self.next_string())
    }
}

pub fn generate(grammar: &Grammar, config: &ProducerConfig) -> Result<Vec<String>, ProduceError> {
    if config.count == 0 {
        return Err(ProduceError::InvalidConfig("count must be at least 1"));
    }
    Ok(Producer::new(grammar, config)?.take(config.count).collect())
}
