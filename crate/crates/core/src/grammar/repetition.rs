//! Repetition mining: a prefix-tree-acceptor variant over multi-symbol blocks.
//!
//! Repeated blocks of any size are first identified inside each alternative.
//! Every alternative of the nonterminal is then chunked with the identified
//! blocks, runs of a block collapse into a `(block)+` group, and alternatives
//! that become equal (or are covered by another) merge.

use std::collections::BTreeSet;

use super::regex::subsumes;
use super::{Grammar, Quantifier, Rule, Symbol};

/// Smallest unit `u` with `block == u^m`.
fn primitive_root(block: &[Symbol]) -> &[Symbol] {
    let n = block.len();
    for k in 1..n {
        if n.is_multiple_of(k) && block.chunks(k).all(|c| c == &block[..k]) {
            return &block[..k];
        }
    }
    block
}

fn is_ref_block(block: &[Symbol]) -> bool {
    block.iter().all(|s| matches!(s, Symbol::Nonterminal(_)))
}

/// Blocks of nonterminal references that occur at least twice in a row,
/// searched from the largest block size down and reduced to their primitive
/// root.
pub fn find_blocks(seq: &[Symbol]) -> Vec<Vec<Symbol>> {
    let mut work = seq.to_vec();
    let mut found: Vec<Vec<Symbol>> = Vec::new();
    'search: loop {
        for k in (1..=work.len() / 2).rev() {
            for p in 0..=work.len() - 2 * k {
                let (a, b) = (&work[p..p + k], &work[p + k..p + 2 * k]);
                if a == b && is_ref_block(a) {
                    let root = primitive_root(a).to_vec();
                    work = chunk(&work, std::slice::from_ref(&root));
                    found.push(root);
                    continue 'search;
                }
            }
        }
        break;
    }
    found
}

/// Replaces runs of consecutive block instances by `(block)+`. Blocks are
/// tried longest first.
fn chunk(seq: &[Symbol], blocks: &[Vec<Symbol>]) -> Vec<Symbol> {
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < seq.len() {
        for b in blocks {
            let k = b.len();
            if seq[i..].starts_with(b) {
                let mut count = 0;
                while seq[i + count * k..].starts_with(b) {
                    count += 1;
                }
                out.push(Symbol::Group(b.clone(), Quantifier::Plus));
                i += count * k;
                continue 'outer;
            }
        }
        out.push(seq[i].clone());
        i += 1;
    }
    out
}

/// Drops alternatives whose language another alternative already covers.
/// Among alternatives with equal languages the first is kept.
pub(crate) fn prune_subsumed(rules: &[Rule], skippable: &BTreeSet<String>) -> Vec<Rule> {
    let n = rules.len();
    let mut dropped = vec![false; n];
    for i in 0..n {
        for j in 0..n {
            if i == j || dropped[j] {
                continue;
            }
            if subsumes(&rules[j], &rules[i], skippable)
                && (j < i || !subsumes(&rules[i], &rules[j], skippable))
            {
                dropped[i] = true;
                break;
            }
        }
    }
    rules
        .iter()
        .zip(dropped)
        .filter(|(_, d)| !d)
        .map(|(r, _)| r.clone())
        .collect()
}

pub fn detect_repetitions(grammar: &Grammar) -> Grammar {
    let mut out = grammar.clone();
    for rules in out.rules.values_mut() {
        let mut blocks: Vec<Vec<Symbol>> = rules.iter().flat_map(|r| find_blocks(r)).collect();
        if blocks.is_empty() {
            continue;
        }
        blocks.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        blocks.dedup();
        let mut chunked: Vec<Rule> = rules.iter().map(|r| chunk(r, &blocks)).collect();
        chunked.sort();
        chunked.dedup();
        *rules = prune_subsumed(&chunked, &BTreeSet::new());
    }
    out
}
