use super::{Grammar, Symbol};
use crate::tree::{Child, ParseNode};

pub const START: &str = "<START>";

/// Basic grammar of a set of generalized parse trees: one nonterminal per
/// distinct label, each node's children contributing one alternative.
pub fn extract_grammar(trees: &[ParseNode]) -> Grammar {
    let mut g = Grammar::new(START);
    for t in trees {
        let root = visit(t, &mut g);
        if root != START {
            g.add_rule(START, vec![Symbol::Nonterminal(root)]);
        }
    }
    g.normalize();
    g
}

fn visit(node: &ParseNode, g: &mut Grammar) -> String {
    let name = node.label.nonterminal();
    let rule = node
        .children
        .iter()
        .map(|c| match c {
            Child::Leaf(l) => Symbol::Terminal(l.ch),
            Child::Node(n) => Symbol::Nonterminal(visit(n, g)),
        })
        .collect();
    g.add_rule(&name, rule);
    name
}
