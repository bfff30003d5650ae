//! Turning a sealed session into a parse tree.
//!
//! Every input index is owned by the event that accessed it last. The call
//! tree of events is then pruned to the consuming chains and overlaps between
//! siblings (and between a parent's own characters and its children) are
//! resolved so that each node covers one contiguous range of the input.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace::{EventId, EventKind, Session, Status};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("parse trees are built only from accepted runs (status: {0:?})")]
    NotAccepted(Status),
    #[error("session has {0} top-level events; expected exactly one")]
    Roots(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// One pseudo-method frame on the stack between a node and its nearest
/// enclosing true method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Frame {
    pub kind: EventKind,
    pub static_id: u32,
    pub alt_id: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeLabel {
    pub kind: EventKind,
    /// The method name; for pseudo-methods, the name of the enclosing method.
    pub name: String,
    pub static_id: u32,
    pub alt_id: u32,
    pub stack: Vec<Frame>,
    pub gen_suffix: Option<u32>,
    /// Branches only: the conditional chain has no `else` arm.
    #[serde(default)]
    pub can_skip: bool,
}

impl NodeLabel {
    fn write_short(&self, f: &mut impl fmt::Write, structural: bool) -> fmt::Result {
        let alt = |kind: EventKind, alt: u32| {
            if structural && kind == EventKind::LoopIter {
                0
            } else {
                alt
            }
        };
        match self.kind {
            EventKind::Method => f.write_str(&self.name)?,
            kind => {
                write!(f, "{}(", kind.keyword())?;
                for fr in &self.stack {
                    write!(f, "{}:{},", fr.static_id, alt(fr.kind, fr.alt_id))?;
                }
                write!(f, "{}:{})", self.static_id, alt(kind, self.alt_id))?;
            }
        }
        if !structural && self.kind != EventKind::LoopIter {
            if let Some(g) = self.gen_suffix.filter(|&g| g > 1) {
                write!(f, ".{g}")?;
            }
        }
        Ok(())
    }

    /// Bucket key: the rendered label, qualified by the method name for
    /// pseudo-methods so that loops of different methods never share a key.
    pub fn key(&self) -> String {
        let mut s = String::new();
        if self.kind.is_pseudo() {
            s.push_str(&self.name);
            s.push(':');
        }
        let _ = self.write_short(&mut s, false);
        s
    }

    /// Key with generalization information erased: loop alternatives reset to
    /// zero and suffixes dropped. Equal for a node before and after relabeling.
    pub fn structural_key(&self) -> String {
        let mut s = String::new();
        if self.kind.is_pseudo() {
            s.push_str(&self.name);
            s.push(':');
        }
        let _ = self.write_short(&mut s, true);
        s
    }

    /// Nonterminal name for this label, e.g. `<parse_num>` or
    /// `<parse_expr.while_1.1.if_1.1>`.
    pub fn nonterminal(&self) -> String {
        let mut s = String::from("<");
        s.push_str(&self.name);
        if self.kind.is_pseudo() {
            for fr in &self.stack {
                let _ = write!(s, ".{}_{}.{}", fr.kind.keyword(), fr.static_id, fr.alt_id);
            }
            let _ = write!(s, ".{}_{}.{}", self.kind.keyword(), self.static_id, self.alt_id);
        }
        if self.kind != EventKind::LoopIter {
            if let Some(g) = self.gen_suffix.filter(|&g| g > 1) {
                let _ = write!(s, "-{g}");
            }
        }
        s.push('>');
        s
    }
}

impl fmt::Display for NodeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_short(f, false)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Leaf {
    pub ch: char,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Child {
    Node(ParseNode),
    Leaf(Leaf),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParseNode {
    pub label: NodeLabel,
    pub span: Span,
    pub children: Vec<Child>,
}

/// Path from a root to a node: child indexes into `children` at each level.
pub type NodePath = Vec<usize>;

impl ParseNode {
    /// Concatenation of all leaves in order.
    pub fn text(&self) -> String {
        let mut s = String::new();
        self.push_text(&mut s);
        s
    }

    fn push_text(&self, out: &mut String) {
        for c in &self.children {
            match c {
                Child::Leaf(l) => out.push(l.ch),
                Child::Node(n) => n.push_text(out),
            }
        }
    }

    pub fn node_at(&self, path: &[usize]) -> Option<&ParseNode> {
        let mut cur = self;
        for &i in path {
            match cur.children.get(i)? {
                Child::Node(n) => cur = n,
                Child::Leaf(_) => return None,
            }
        }
        Some(cur)
    }

    pub fn node_at_mut(&mut self, path: &[usize]) -> Option<&mut ParseNode> {
        let mut cur = self;
        for &i in path {
            match cur.children.get_mut(i)? {
                Child::Node(n) => cur = n,
                Child::Leaf(_) => return None,
            }
        }
        Some(cur)
    }

    /// Copy of this tree with the node at `path` replaced by `with`.
    /// Spans are left stale; only labels and leaves matter downstream.
    pub fn replaced(&self, path: &[usize], with: &ParseNode) -> ParseNode {
        let mut t = self.clone();
        if let Some(n) = t.node_at_mut(path) {
            *n = with.clone();
        }
        t
    }

    /// Every node with its path, in preorder.
    pub fn preorder(&self) -> Vec<(NodePath, &ParseNode)> {
        let mut out = Vec::new();
        let mut stack = vec![(Vec::new(), self)];
        while let Some((path, n)) = stack.pop() {
            for (i, c) in n.children.iter().enumerate().rev() {
                if let Child::Node(cn) = c {
                    let mut p = path.clone();
                    p.push(i);
                    stack.push((p, cn));
                }
            }
            out.push((path, n));
        }
        out
    }

    /// Nested s-expression, e.g. `(START (word1 (letter "a")))`.
    pub fn to_sexpr(&self) -> String {
        let mut s = String::new();
        self.write_sexpr(&mut s, false);
        s
    }

    /// S-expression over structural keys: equal for two trees exactly when
    /// they have the same shape, labels (ignoring generalization) and leaves.
    pub fn structure(&self) -> String {
        let mut s = String::new();
        self.write_sexpr(&mut s, true);
        s
    }

    fn write_sexpr(&self, out: &mut String, structural: bool) {
        out.push('(');
        if structural {
            out.push_str(&self.label.structural_key());
        } else {
            let _ = write!(out, "{}", self.label);
        }
        for c in &self.children {
            out.push(' ');
            match c {
                Child::Leaf(l) => {
                    out.push_str(&serde_json::to_string(&l.ch.to_string()).expect("string"));
                }
                Child::Node(n) => n.write_sexpr(out, structural),
            }
        }
        out.push(')');
    }

    /// Removes nodes without leaves below them (the root is kept).
    pub fn prune_empty(&mut self) {
        self.children.retain_mut(|c| match c {
            Child::Leaf(_) => true,
            Child::Node(n) => {
                n.prune_empty();
                n.has_leaves()
            }
        });
    }

    pub fn has_leaves(&self) -> bool {
        self.children.iter().any(|c| match c {
            Child::Leaf(_) => true,
            Child::Node(n) => n.has_leaves(),
        })
    }
}

/// Maps each accessed input index to the event that accessed it last.
pub fn assign_consumers(session: &Session) -> BTreeMap<usize, EventId> {
    let mut m = BTreeMap::new();
    for a in session.accesses() {
        m.insert(a.index, a.event);
    }
    m
}

struct Draft {
    event: usize,
    own: BTreeSet<usize>,
    children: Vec<usize>,
}

struct Builder<'a> {
    session: &'a Session,
    nodes: Vec<Draft>,
    /// (index, seq) accesses per event.
    accesses: Vec<Vec<(usize, u64)>>,
}

impl Builder<'_> {
    fn indices(&self, n: usize, out: &mut BTreeSet<usize>) {
        out.extend(self.nodes[n].own.iter().copied());
        for &c in &self.nodes[n].children {
            self.indices(c, out);
        }
    }

    fn span(&self, n: usize) -> Option<(usize, usize)> {
        let mut s = BTreeSet::new();
        self.indices(n, &mut s);
        Some((*s.first()?, *s.last()? + 1))
    }

    fn remove_range(&mut self, n: usize, lo: usize, hi: usize, out: &mut Vec<usize>) {
        let taken: Vec<usize> = self.nodes[n].own.range(lo..hi).copied().collect();
        for i in &taken {
            self.nodes[n].own.remove(i);
        }
        out.extend(taken);
        for c in self.nodes[n].children.clone() {
            self.remove_range(c, lo, hi, out);
        }
    }

    fn last_seq(&self, n: usize, lo: usize, hi: usize) -> Option<u64> {
        let own = self.accesses[self.nodes[n].event]
            .iter()
            .filter(|(i, _)| (lo..hi).contains(i))
            .map(|&(_, s)| s)
            .max();
        self.nodes[n]
            .children
            .iter()
            .filter_map(|&c| self.last_seq(c, lo, hi))
            .chain(own)
            .max()
    }

    fn drop_empty_children(&mut self, n: usize) {
        let kids = std::mem::take(&mut self.nodes[n].children);
        let kept = kids.into_iter().filter(|&c| self.span(c).is_some()).collect();
        self.nodes[n].children = kept;
    }

    fn resolve(&mut self, n: usize) {
        loop {
            self.drop_empty_children(n);
            let mut spans: Vec<(usize, usize, usize)> = self.nodes[n]
                .children
                .iter()
                .map(|&c| {
                    let (s, e) = self.span(c).expect("non-empty");
                    (s, e, c)
                })
                .collect();
            spans.sort_unstable();
            // A parent character inside a child's range belongs to the child.
            let own: Vec<usize> = self.nodes[n].own.iter().copied().collect();
            for i in own {
                if let Some(&(_, _, c)) = spans.iter().find(|(s, e, _)| (*s..*e).contains(&i)) {
                    self.nodes[n].own.remove(&i);
                    self.nodes[c].own.insert(i);
                }
            }
            let overlap = spans.windows(2).find(|w| w[0].1 > w[1].0);
            let Some(w) = overlap else { break };
            let (a, b) = (w[0], w[1]);
            let (lo, hi) = (b.0, a.1.min(b.1));
            let sa = self.last_seq(a.2, lo, hi);
            let sb = self.last_seq(b.2, lo, hi);
            let (winner, loser) = if (sb, b.2) >= (sa, a.2) { (b, a) } else { (a, b) };
            let mut moved = Vec::new();
            self.remove_range(loser.2, lo, hi, &mut moved);
            if loser.0 < winner.0 && loser.1 > winner.1 {
                // winner sits strictly inside the loser: hand it the tail too
                self.remove_range(loser.2, winner.0, usize::MAX, &mut moved);
            }
            self.nodes[winner.2].own.extend(moved);
        }
        for c in self.nodes[n].children.clone() {
            self.resolve(c);
        }
    }

    fn label(&self, event: usize) -> NodeLabel {
        let events = self.session.events();
        let ev = &events[event];
        let mut stack = Vec::new();
        let mut name = ev.name.clone();
        if ev.kind.is_pseudo() {
            let mut cur = ev.parent;
            name.clear();
            while let Some(p) = cur {
                let pe = self.session.event(p);
                if pe.kind == EventKind::Method {
                    name = pe.name.clone();
                    break;
                }
                stack.push(Frame {
                    kind: pe.kind,
                    static_id: pe.static_id,
                    alt_id: pe.alt_id,
                });
                cur = pe.parent;
            }
            stack.reverse();
        }
        NodeLabel {
            kind: ev.kind,
            name,
            static_id: ev.static_id,
            alt_id: ev.alt_id,
            stack,
            gen_suffix: None,
            can_skip: ev.kind == EventKind::Branch && ev.can_skip,
        }
    }

    fn emit(&self, n: usize) -> ParseNode {
        let input = self.session.input();
        let mut items: Vec<(usize, Child)> = self.nodes[n]
            .own
            .iter()
            .map(|&i| (i, Child::Leaf(Leaf { ch: input[i], index: i })))
            .collect();
        for &c in &self.nodes[n].children {
            let node = self.emit(c);
            items.push((node.span.start, Child::Node(node)));
        }
        items.sort_by_key(|(i, _)| *i);
        let span = self
            .span(n)
            .map_or(Span { start: 0, end: 0 }, |(s, e)| Span { start: s, end: e });
        ParseNode {
            label: self.label(self.nodes[n].event),
            span,
            children: items.into_iter().map(|(_, c)| c).collect(),
        }
    }
}

/// Builds the non-generalized parse tree of an accepted session.
pub fn build_tree(session: &Session) -> Result<ParseNode, TreeError> {
    if session.status() != Status::Accepted {
        return Err(TreeError::NotAccepted(session.status()));
    }
    let events = session.events();
    let roots = events.iter().filter(|e| e.parent.is_none()).count();
    if roots != 1 {
        return Err(TreeError::Roots(roots));
    }
    let idx = |id: EventId| (id.0 - 1) as usize;
    let mut accesses = vec![Vec::new(); events.len()];
    for a in session.accesses() {
        accesses[idx(a.event)].push((a.index, a.seq));
    }
    let mut nodes: Vec<Draft> = (0..events.len())
        .map(|event| Draft {
            event,
            own: BTreeSet::new(),
            children: Vec::new(),
        })
        .collect();
    for e in events {
        if let Some(p) = e.parent {
            nodes[idx(p)].children.push(idx(e.id));
        }
    }
    for (i, ev) in assign_consumers(session) {
        nodes[idx(ev)].own.insert(i);
    }
    let mut b = Builder {
        session,
        nodes,
        accesses,
    };
    let root = events.iter().position(|e| e.parent.is_none()).expect("one root");

    // Characters nobody read go to the deepest node whose range covers them.
    let consumed: BTreeSet<usize> = session.accesses().iter().map(|a| a.index).collect();
    for k in (0..session.len()).filter(|k| !consumed.contains(k)) {
        let mut at = root;
        'descend: loop {
            for &c in &b.nodes[at].children {
                if b.span(c).is_some_and(|(s, e)| s <= k && k < e) {
                    at = c;
                    continue 'descend;
                }
            }
            break;
        }
        b.nodes[at].own.insert(k);
    }

    b.resolve(root);
    Ok(b.emit(root))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::Session;

    fn sealed(input: &str, body: impl FnOnce(&mut Session)) -> Session {
        let mut s = Session::begin(input);
        body(&mut s);
        s.finish(true, None);
        s
    }

    #[test]
    fn last_access_wins() {
        let s = sealed("ab", |s| {
            s.method("outer", |s| {
                s.char_at(0);
                s.method("inner", |s| {
                    s.char_at(0);
                });
                s.char_at(1);
            })
        });
        let c = assign_consumers(&s);
        assert_eq!(c[&0], EventId(2));
        assert_eq!(c[&1], EventId(1));
        let t = build_tree(&s).unwrap();
        assert_eq!(t.to_sexpr(), r#"(outer (inner "a") "b")"#);
    }

    #[test]
    fn leafless_events_are_pruned() {
        let s = sealed("a", |s| {
            s.method("m", |s| {
                s.method("nothing", |_| ());
                s.loop_iter(1, |_| ());
                s.char_at(0);
            })
        });
        assert_eq!(build_tree(&s).unwrap().to_sexpr(), r#"(m "a")"#);
    }

    #[test]
    fn disjoint_siblings_unchanged() {
        let s = sealed("ab", |s| {
            s.method("m", |s| {
                s.method("x", |s| s.char_at(0));
                s.method("y", |s| s.char_at(1));
            })
        });
        assert_eq!(build_tree(&s).unwrap().to_sexpr(), r#"(m (x "a") (y "b"))"#);
    }

    #[test]
    fn overlapping_siblings_resolved_for_later_accessor() {
        // x owns 0 and 2, y owns 1; y's span sits inside x's, and y read later.
        let s = sealed("abc", |s| {
            s.method("m", |s| {
                s.method("x", |s| {
                    s.char_at(0);
                    s.char_at(2);
                });
                s.method("y", |s| s.char_at(1));
            })
        });
        let t = build_tree(&s).unwrap();
        assert_eq!(t.text(), "abc");
        assert_eq!(t.to_sexpr(), r#"(m (x "a") (y "b" "c"))"#);
    }

    #[test]
    fn parent_character_inside_child_range_goes_to_child() {
        // child owns 0 and 2, parent re-read 1 after... but accessed 1 before
        let s = sealed("abc", |s| {
            s.method("p", |s| {
                s.char_at(1);
                s.method("c", |s| {
                    s.char_at(0);
                    s.char_at(2);
                });
            })
        });
        let t = build_tree(&s).unwrap();
        assert_eq!(t.to_sexpr(), r#"(p (c "a" "b" "c"))"#);
    }

    #[test]
    fn unread_characters_are_attached() {
        let s = sealed("abc", |s| {
            s.method("m", |s| {
                s.method("x", |s| {
                    s.char_at(0);
                    s.char_at(2);
                });
            })
        });
        let t = build_tree(&s).unwrap();
        assert_eq!(t.to_sexpr(), r#"(m (x "a" "b" "c"))"#);
    }

    #[test]
    fn rejected_session_is_an_error() {
        let mut s = Session::begin("x");
        s.finish(false, Some(0));
        assert_eq!(build_tree(&s), Err(TreeError::NotAccepted(Status::Rejected(0))));
    }

    #[test]
    fn labels_render_with_pseudo_stack() {
        let s = sealed("9", |s| {
            s.method("parse_expr", |s| {
                s.loop_iter(1, |s| s.branch(1, 1, false, |s| s.method("digit", |s| s.char_at(0))));
            })
        });
        let t = build_tree(&s).unwrap();
        assert_eq!(t.to_sexpr(), r#"(parse_expr (while(1:0) (if(1:0,1:1) (digit "9"))))"#);
        let br = t.node_at(&[0, 0]).unwrap();
        assert_eq!(br.label.key(), "parse_expr:if(1:0,1:1)");
        assert_eq!(br.label.nonterminal(), "<parse_expr.while_1.0.if_1.1>");
    }

    #[test]
    fn empty_accepted_input_gives_bare_root() {
        let s = sealed("", |s| s.method("m", |_| ()));
        let t = build_tree(&s).unwrap();
        assert_eq!(t.to_sexpr(), "(m)");
        assert_eq!(t.span, Span { start: 0, end: 0 });
    }
}
