//! Recognition against grammars with regular right-hand sides: groups and
//! alternations are desugared into plain rules, which an Earley recognizer
//! (with the nullable-prediction fix for ε-rules) then runs on.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::grammar::{Grammar, Quantifier, Symbol};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlainSymbol {
    T(char),
    N(String),
}

/// A grammar whose rules hold only terminals and nonterminal references.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlainGrammar {
    pub start: String,
    pub rules: BTreeMap<String, Vec<Vec<PlainSymbol>>>,
}

impl fmt::Display for PlainGrammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (nt, rules) in &self.rules {
            for r in rules {
                write!(f, "{nt} ->")?;
                if r.is_empty() {
                    write!(f, " ε")?;
                }
                for s in r {
                    match s {
                        PlainSymbol::T(c) => write!(f, " {c:?}")?,
                        PlainSymbol::N(n) => write!(f, " {n}")?,
                    }
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

struct Lowering<'a> {
    out: &'a mut BTreeMap<String, Vec<Vec<PlainSymbol>>>,
    taken: &'a mut BTreeSet<String>,
}

impl Lowering<'_> {
    /// `<S>` with kind `star` gives `<S.star>`, then `<S.star.1>`, ...
    fn fresh(&mut self, base: &str, kind: &str) -> String {
        let (stem, close) = match base.strip_suffix('>') {
            Some(stem) => (stem, ">"),
            None => (base, ""),
        };
        let mut name = format!("{stem}.{kind}{close}");
        let mut k = 1;
        while self.taken.contains(&name) {
            name = format!("{stem}.{kind}.{k}{close}");
            k += 1;
        }
        self.taken.insert(name.clone());
        name
    }

    fn seq(&mut self, seq: &[Symbol], base: &str) -> Vec<PlainSymbol> {
        let mut out = Vec::new();
        for s in seq {
            match s {
                Symbol::Terminal(c) => out.push(PlainSymbol::T(*c)),
                Symbol::Nonterminal(n) => out.push(PlainSymbol::N(n.clone())),
                Symbol::Group(body, q) => {
                    let kind = if *q == Quantifier::Optional { "opt" } else { "star" };
                    let name = self.fresh(base, kind);
                    let body = self.seq(body, base);
                    let mut again = body.clone();
                    if *q != Quantifier::Optional {
                        again.push(PlainSymbol::N(name.clone()));
                    }
                    self.out.insert(name.clone(), vec![Vec::new(), again]);
                    if *q == Quantifier::Plus {
                        out.extend(body);
                    }
                    out.push(PlainSymbol::N(name));
                }
                Symbol::Alternation(arms) => {
                    let name = self.fresh(base, "alt");
                    let arms = arms.iter().map(|a| self.seq(a, base)).collect();
                    self.out.insert(name.clone(), arms);
                    out.push(PlainSymbol::N(name));
                }
            }
        }
        out
    }
}

/// Rewrites `X*` as `<S.star> → ε | X <S.star>`, `X+` as `X <S.star>`,
/// `X?` as `<S.opt> → ε | X` and alternations as fresh nonterminals, where
/// `<S>` is the nonterminal whose rule contains the construct.
pub fn desugar(grammar: &Grammar) -> PlainGrammar {
    let mut out = BTreeMap::new();
    let mut taken: BTreeSet<String> = grammar.rules.keys().cloned().collect();
    for (nt, rules) in &grammar.rules {
        let mut lowered = Vec::new();
        for r in rules {
            let mut l = Lowering {
                out: &mut out,
                taken: &mut taken,
            };
            lowered.push(l.seq(r, nt));
        }
        out.insert(nt.clone(), lowered);
    }
    PlainGrammar {
        start: grammar.start.clone(),
        rules: out,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Sym {
    T(char),
    N(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Item {
    rule: u32,
    dot: u32,
    origin: u32,
}

/// Earley recognizer over a plain grammar.
#[derive(Debug, Clone)]
pub struct Earley {
    lhs: Vec<u32>,
    rhs: Vec<Vec<Sym>>,
    by_lhs: Vec<Vec<u32>>,
    nullable: Vec<bool>,
    /// Rule `S' → start`.
    top: u32,
}

impl Earley {
    pub fn new(g: &PlainGrammar) -> Self {
        let mut ids: HashMap<&str, u32> = HashMap::new();
        let mut id = |n: &'_ str| -> u32 {
            let next = ids.len() as u32;
            *ids.entry(g.rules.get_key_value(n).map_or("", |(k, _)| k.as_str()))
                .or_insert(next)
        };
        let mut lhs = Vec::new();
        let mut rhs = Vec::new();
        let start_id = id(&g.start);
        for (nt, rules) in &g.rules {
            let l = id(nt);
            for r in rules {
                lhs.push(l);
                rhs.push(
                    r.iter()
                        .map(|s| match s {
                            PlainSymbol::T(c) => Sym::T(*c),
                            PlainSymbol::N(n) => Sym::N(id(n)),
                        })
                        .collect(),
                );
            }
        }
        let top_nt = ids.len() as u32;
        lhs.push(top_nt);
        rhs.push(vec![Sym::N(start_id)]);
        let top = rhs.len() - 1;
        let n_nts = ids.len() + 1;
        let mut by_lhs = vec![Vec::new(); n_nts];
        for (r, &l) in lhs.iter().enumerate() {
            by_lhs[l as usize].push(r as u32);
        }
        let mut nullable = vec![false; n_nts];
        loop {
            let mut changed = false;
            for (r, body) in rhs.iter().enumerate() {
                let l = lhs[r] as usize;
                if !nullable[l] && body.iter().all(|s| matches!(s, Sym::N(n) if nullable[*n as usize])) {
                    nullable[l] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        Earley {
            lhs,
            rhs,
            by_lhs,
            nullable,
            top: top as u32,
        }
    }

    pub fn accepts(&self, input: &str) -> bool {
        let mut r = self.recognizer();
        for c in input.chars() {
            if !r.push(c) {
                return false;
            }
        }
        r.is_accepting()
    }

    pub fn recognizer(&self) -> Recognizer<'_> {
        let mut r = Recognizer {
            earley: self,
            sets: Vec::new(),
        };
        let first = r.close(
            vec![Item {
                rule: self.top,
                dot: 0,
                origin: 0,
            }],
            0,
        );
        r.sets.push(first);
        r
    }
}

/// Incremental recognition: characters can be pushed and popped again,
/// which makes exhaustive enumeration with dead-prefix pruning cheap.
#[derive(Debug, Clone)]
pub struct Recognizer<'e> {
    earley: &'e Earley,
    sets: Vec<Vec<Item>>,
}

impl Recognizer<'_> {
    fn close(&self, seed: Vec<Item>, k: u32) -> Vec<Item> {
        let e = self.earley;
        let mut seen: HashSet<Item> = seed.iter().copied().collect();
        let mut items = seed;
        let mut i = 0;
        while i < items.len() {
            let it = items[i];
            i += 1;
            let body = &e.rhs[it.rule as usize];
            let mut add = |new: Item, items: &mut Vec<Item>| {
                if seen.insert(new) {
                    items.push(new);
                }
            };
            match body.get(it.dot as usize) {
                Some(Sym::N(b)) => {
                    for &r in &e.by_lhs[*b as usize] {
                        add(Item { rule: r, dot: 0, origin: k }, &mut items);
                    }
                    if e.nullable[*b as usize] {
                        add(Item { dot: it.dot + 1, ..it }, &mut items);
                    }
                }
                Some(Sym::T(_)) => {}
                None => {
                    let a = e.lhs[it.rule as usize];
                    let waiting: Vec<Item> = if it.origin == k {
                        items
                            .iter()
                            .filter(|w| e.rhs[w.rule as usize].get(w.dot as usize) == Some(&Sym::N(a)))
                            .copied()
                            .collect()
                    } else {
                        self.sets[it.origin as usize]
                            .iter()
                            .filter(|w| e.rhs[w.rule as usize].get(w.dot as usize) == Some(&Sym::N(a)))
                            .copied()
                            .collect()
                    };
                    for w in waiting {
                        add(Item { dot: w.dot + 1, ..w }, &mut items);
                    }
                }
            }
        }
        items
    }

    /// Consumes `c`; false if no string of the language starts with the
    /// characters pushed so far. A dead character is still pushed.
    pub fn push(&mut self, c: char) -> bool {
        let k = self.sets.len() as u32;
        let e = self.earley;
        let seed: Vec<Item> = self
            .sets
            .last()
            .expect("initial set")
            .iter()
            .filter(|it| e.rhs[it.rule as usize].get(it.dot as usize) == Some(&Sym::T(c)))
            .map(|it| Item { dot: it.dot + 1, ..*it })
            .collect();
        let set = if seed.is_empty() { seed } else { self.close(seed, k) };
        self.sets.push(set);
        !self.is_dead()
    }

    pub fn pop(&mut self) {
        if self.sets.len() > 1 {
            self.sets.pop();
        }
    }

    pub fn is_dead(&self) -> bool {
        self.sets.last().is_none_or(Vec::is_empty)
    }

    /// Whether the characters pushed so far form a sentence.
    pub fn is_accepting(&self) -> bool {
        let e = self.earley;
        self.sets.last().is_some_and(|set| {
            set.iter()
                .any(|it| it.rule == e.top && it.origin == 0 && it.dot as usize == e.rhs[e.top as usize].len())
        })
    }
}

/// Convenience: desugars `grammar` and recognizes `input`.
pub fn accepts(grammar: &Grammar, input: &str) -> bool {
    Earley::new(&desugar(grammar)).accepts(input)
}
