//! Active learning over parse trees.
//!
//! Nodes with the same label are grouped into buckets. Two members of a
//! bucket are compatible when swapping them produces a string the subject
//! accepts and whose fresh parse tree has the structure of the swapped tree.
//! Compatibility classes become generalized labels. Loops are then tested
//! for nullability by deleting their iterations.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::subjects::Subject;
use crate::tree::{build_tree, Child, Frame, NodePath, ParseNode};
use crate::trace::EventKind;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Rejected,
    /// Accepted; the structure of the fresh parse tree when one could be built.
    Accepted(Option<String>),
}

/// The subject as a membership oracle, with a verdict cache and an
/// execution budget.
pub struct Oracle<'s> {
    subject: &'s Subject,
    budget: usize,
    executions: usize,
    cache_hits: usize,
    exhausted: usize,
    faults: Vec<String>,
    cache: HashMap<String, Verdict>,
}

impl<'s> Oracle<'s> {
    pub fn new(subject: &'s Subject, budget: usize) -> Self {
        Oracle {
            subject,
            budget,
            executions: 0,
            cache_hits: 0,
            exhausted: 0,
            faults: Vec::new(),
            cache: HashMap::new(),
        }
    }

    /// Verdict for `input`, or `None` once the budget is spent.
    pub fn query(&mut self, input: &str) -> Option<Verdict> {
        if let Some(v) = self.cache.get(input) {
            self.cache_hits += 1;
            return Some(v.clone());
        }
        if self.executions >= self.budget {
            self.exhausted += 1;
            return None;
        }
        self.executions += 1;
        let v = match self.subject.run(input) {
            Ok(s) if s.is_accepted() => Verdict::Accepted(build_tree(&s).ok().map(|t| t.structure())),
            Ok(_) => Verdict::Rejected,
            Err(fault) => {
                self.faults.push(fault.to_string());
                Verdict::Rejected
            }
        };
        self.cache.insert(input.to_string(), v.clone());
        Some(v)
    }

    /// Whether the text of `tree` is accepted and parses back to the same
    /// structure.
    pub fn confirms(&mut self, tree: &ParseNode) -> Option<bool> {
        let v = self.query(&tree.text())?;
        Some(matches!(v, Verdict::Accepted(Some(s)) if s == tree.structure()))
    }

    /// Cached verdict, without running anything.
    pub fn cached(&self, input: &str) -> Option<&Verdict> {
        self.cache.get(input)
    }

    pub fn executions(&self) -> usize {
        self.executions
    }

    pub fn cache_hits(&self) -> usize {
        self.cache_hits
    }

    /// Number of queries refused because the budget was spent.
    pub fn exhausted(&self) -> usize {
        self.exhausted
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Member {
    pub tree: usize,
    pub path: NodePath,
}

impl Member {
    pub fn node<'t>(&self, trees: &'t [ParseNode]) -> &'t ParseNode {
        trees[self.tree].node_at(&self.path).expect("member path is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeBucket {
    pub key: String,
    pub members: Vec<Member>,
    /// Compatibility classes as indexes into `members`; class `i` gets the
    /// generalized suffix `i + 1`.
    pub classes: Vec<Vec<usize>>,
}

/// Groups every node of every tree by label, in order of first occurrence.
pub fn bucket_nodes(trees: &[ParseNode]) -> Vec<NodeBucket> {
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut out: Vec<NodeBucket> = Vec::new();
    for (ti, t) in trees.iter().enumerate() {
        for (path, n) in t.preorder() {
            let key = n.label.key();
            let i = *index.entry(key.clone()).or_insert_with(|| {
                out.push(NodeBucket {
                    key,
                    members: Vec::new(),
                    classes: Vec::new(),
                });
                out.len() - 1
            });
            out[i].members.push(Member { tree: ti, path });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Compat {
    Compatible,
    /// The swap produced `candidate`, which the subject rejected or parsed
    /// differently.
    Incompatible { candidate: String },
    /// The oracle budget ran out before a verdict.
    Unknown,
}

impl Compat {
    pub fn is_compatible(&self) -> bool {
        matches!(self, Compat::Compatible)
    }
}

/// Checks both swap directions. Members with identical subtrees are
/// compatible without asking the oracle.
pub fn check_compatible(trees: &[ParseNode], a: &Member, b: &Member, oracle: &mut Oracle) -> Compat {
    let (na, nb) = (a.node(trees), b.node(trees));
    if na.structure() == nb.structure() {
        return Compat::Compatible;
    }
    for (src, dst) in [(na, b), (nb, a)] {
        let candidate = trees[dst.tree].replaced(&dst.path, src);
        match oracle.confirms(&candidate) {
            None => return Compat::Unknown,
            Some(false) => {
                return Compat::Incompatible {
                    candidate: candidate.text(),
                }
            }
            Some(true) => {}
        }
    }
    Compat::Compatible
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CompatMode {
    /// Each member is checked against class representatives only.
    #[default]
    Transitive,
    /// Classes are cliques of pairwise compatible members.
    Full,
}

#[derive(Debug, Clone, Default)]
struct PartitionLog {
    rejected: BTreeSet<String>,
    unknown: usize,
}

fn record(log: &mut PartitionLog, c: &Compat) {
    match c {
        Compat::Incompatible { candidate } => {
            log.rejected.insert(candidate.clone());
        }
        Compat::Unknown => log.unknown += 1,
        Compat::Compatible => {}
    }
}

fn partition(trees: &[ParseNode], bucket: &mut NodeBucket, oracle: &mut Oracle, mode: CompatMode) -> PartitionLog {
    let mut log = PartitionLog::default();
    let n = bucket.members.len();
    let members = bucket.members.clone();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    match mode {
        CompatMode::Transitive => {
            for m in 0..n {
                let mut home = None;
                for (ci, class) in classes.iter().enumerate() {
                    let c = check_compatible(trees, &members[class[0]], &members[m], oracle);
                    record(&mut log, &c);
                    if c.is_compatible() {
                        home = Some(ci);
                        break;
                    }
                }
                match home {
                    Some(ci) => classes[ci].push(m),
                    None => classes.push(vec![m]),
                }
            }
        }
        CompatMode::Full => {
            let mut memo: HashMap<(usize, usize), bool> = HashMap::new();
            let mut assigned = vec![false; n];
            for first in 0..n {
                if assigned[first] {
                    continue;
                }
                assigned[first] = true;
                let mut class = vec![first];
                for x in first + 1..n {
                    if assigned[x] {
                        continue;
                    }
                    let fits = class.iter().all(|&c| {
                        *memo.entry((c, x)).or_insert_with(|| {
                            let r = check_compatible(trees, &members[c], &members[x], oracle);
                            record(&mut log, &r);
                            r.is_compatible()
                        })
                    });
                    if fits {
                        assigned[x] = true;
                        class.push(x);
                    }
                }
                classes.push(class);
            }
        }
    }
    bucket.classes = classes;
    log
}

/// Splits a bucket into compatibility classes.
pub fn partition_bucket(trees: &[ParseNode], bucket: &NodeBucket, oracle: &mut Oracle, mode: CompatMode) -> NodeBucket {
    let mut b = bucket.clone();
    partition(trees, &mut b, oracle, mode);
    b
}

/// Writes class ids into the trees: every member gets its class as
/// generalization suffix, loop iterations also as alternative id, and the
/// pseudo-method stacks below are rebuilt from the updated ancestors.
pub fn relabel(trees: &[ParseNode], buckets: &[NodeBucket]) -> Vec<ParseNode> {
    let mut class: HashMap<(usize, &[usize]), u32> = HashMap::new();
    for b in buckets {
        for (ci, members) in b.classes.iter().enumerate() {
            for &m in members {
                let m = &b.members[m];
                class.insert((m.tree, m.path.as_slice()), ci as u32 + 1);
            }
        }
    }
    trees
        .iter()
        .enumerate()
        .map(|(ti, t)| {
            let mut t = t.clone();
            apply_classes(&mut t, ti, &mut Vec::new(), &[], &class);
            t
        })
        .collect()
}

fn apply_classes(
    node: &mut ParseNode,
    tree: usize,
    path: &mut NodePath,
    frames: &[Frame],
    class: &HashMap<(usize, &[usize]), u32>,
) {
    let label = &mut node.label;
    if label.kind.is_pseudo() {
        label.stack = frames.to_vec();
    }
    if let Some(&c) = class.get(&(tree, path.as_slice())) {
        label.gen_suffix = Some(c);
        if label.kind == EventKind::LoopIter {
            label.alt_id = c;
        }
    }
    let inner: Vec<Frame> = match label.kind {
        EventKind::Method => Vec::new(),
        kind => {
            let mut f = frames.to_vec();
            f.push(Frame {
                kind,
                static_id: label.static_id,
                alt_id: label.alt_id,
            });
            f
        }
    };
    for (i, c) in node.children.iter_mut().enumerate() {
        if let Child::Node(n) = c {
            path.push(i);
            apply_classes(n, tree, path, &inner, class);
            path.pop();
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct NullabilityReport {
    /// Loop nonterminals whose iterations may be absent altogether.
    pub nullable_loops: BTreeSet<String>,
    /// Branch nonterminals whose conditional may be skipped.
    pub skippable_branches: BTreeSet<String>,
}

/// Runs of consecutive children sharing one loop nonterminal:
/// (tree, parent path, first child, end child).
fn loop_runs(trees: &[ParseNode]) -> BTreeMap<String, Vec<(usize, NodePath, usize, usize)>> {
    let mut runs: BTreeMap<String, Vec<_>> = BTreeMap::new();
    for (ti, t) in trees.iter().enumerate() {
        for (path, n) in t.preorder() {
            let mut i = 0;
            while i < n.children.len() {
                let Child::Node(c) = &n.children[i] else {
                    i += 1;
                    continue;
                };
                if c.label.kind != EventKind::LoopIter {
                    i += 1;
                    continue;
                }
                let nt = c.label.nonterminal();
                let mut j = i + 1;
                while matches!(&n.children.get(j), Some(Child::Node(d)) if d.label.nonterminal() == nt) {
                    j += 1;
                }
                runs.entry(nt).or_default().push((ti, path.clone(), i, j));
                i = j;
            }
        }
    }
    runs
}

fn without(tree: &ParseNode, parent: &[usize], range: std::ops::Range<usize>) -> ParseNode {
    let mut t = tree.clone();
    if let Some(p) = t.node_at_mut(parent) {
        p.children.drain(range);
    }
    t.prune_empty();
    t
}

/// Nullability of loops by deleting every run of iterations, and of
/// branches from their static `can_skip` flag (optionally confirmed by
/// deleting the branch). Returns the report and the number of checks left
/// undecided by budget exhaustion.
pub fn learn_nullability(trees: &[ParseNode], oracle: &mut Oracle, verify_branches: bool) -> (NullabilityReport, usize) {
    let mut report = NullabilityReport::default();
    let mut unknown = 0;
    for (nt, runs) in loop_runs(trees) {
        let mut ok = true;
        for (ti, parent, s, e) in runs {
            match oracle.confirms(&without(&trees[ti], &parent, s..e)) {
                Some(true) => {}
                Some(false) => {
                    ok = false;
                    break;
                }
                None => {
                    unknown += 1;
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            report.nullable_loops.insert(nt);
        }
    }
    let mut branches: BTreeMap<String, Vec<(usize, NodePath)>> = BTreeMap::new();
    for (ti, t) in trees.iter().enumerate() {
        for (path, n) in t.preorder() {
            if n.label.kind == EventKind::Branch && n.label.can_skip {
                branches.entry(n.label.nonterminal()).or_default().push((ti, path));
            }
        }
    }
    for (nt, sites) in branches {
        let mut ok = true;
        if verify_branches {
            for (ti, path) in sites {
                let Some((&last, parent)) = path.split_last() else { continue };
                match oracle.confirms(&without(&trees[ti], parent, last..last + 1)) {
                    Some(true) => {}
                    other => {
                        unknown += usize::from(other.is_none());
                        ok = false;
                        break;
                    }
                }
            }
        }
        if ok {
            report.skippable_branches.insert(nt);
        }
    }
    (report, unknown)
}

#[derive(Debug, Clone)]
pub struct Config {
    pub mode: CompatMode,
    /// Subject executions allowed for labeling and nullability.
    pub budget: usize,
    pub verify_branches: bool,
    /// Extra executions spent auditing transitive classes for members that
    /// were never compared with each other. Zero disables the audit.
    pub audit_budget: usize,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            mode: CompatMode::Transitive,
            budget: 5000,
            verify_branches: false,
            audit_budget: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BucketReport {
    pub key: String,
    pub members: usize,
    pub classes: usize,
    /// Swap candidates that failed, sorted.
    pub rejected: Vec<String>,
}

/// Two members of one transitive class that turn out incompatible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FalseMerge {
    pub key: String,
    pub class: u32,
    pub left: String,
    pub right: String,
    pub candidate: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct MiningReport {
    pub mode: CompatMode,
    pub buckets: Vec<BucketReport>,
    pub oracle_executions: usize,
    pub cache_hits: usize,
    /// Checks that ended without a verdict because the budget ran out.
    pub budget_exhausted: usize,
    pub false_merges: Vec<FalseMerge>,
    /// Audit pairs skipped because the audit budget ran out.
    pub audit_unchecked: usize,
    pub faults: Vec<String>,
    pub nullability: NullabilityReport,
}

impl MiningReport {
    /// Whether budget exhaustion forced conservative answers.
    pub fn degraded(&self) -> bool {
        self.budget_exhausted > 0
    }

    pub fn bucket(&self, key: &str) -> Option<&BucketReport> {
        self.buckets.iter().find(|b| b.key == key)
    }
}

#[derive(Debug, Clone)]
pub struct Generalized {
    pub trees: Vec<ParseNode>,
    pub buckets: Vec<NodeBucket>,
    pub report: MiningReport,
}

/// Pairs of one class never compared during transitive partitioning whose
/// swap fails. Members identical to their class representative are checked
/// first, across all buckets, since they joined without any oracle query;
/// then distinct members pairwise. Pairs left unchecked when the budget runs
/// out are counted.
fn audit(trees: &[ParseNode], buckets: &[NodeBucket], oracle: &mut Oracle) -> (Vec<FalseMerge>, usize) {
    let mut out = Vec::new();
    let mut unchecked = 0;
    let mut check = |b: &NodeBucket, ci: usize, x: usize, y: usize, oracle: &mut Oracle| {
        let (mx, my) = (&b.members[x], &b.members[y]);
        match check_compatible(trees, mx, my, oracle) {
            Compat::Compatible => {}
            Compat::Unknown => unchecked += 1,
            Compat::Incompatible { candidate } => out.push(FalseMerge {
                key: b.key.clone(),
                class: ci as u32 + 1,
                left: mx.node(trees).text(),
                right: my.node(trees).text(),
                candidate,
            }),
        }
    };
    // distinct subtrees only; identical ones swap trivially
    let distinct = |b: &NodeBucket, class: &[usize]| -> Vec<usize> {
        let mut seen = BTreeSet::new();
        class
            .iter()
            .copied()
            .filter(|&m| seen.insert(b.members[m].node(trees).structure()))
            .collect()
    };
    for b in buckets {
        for (ci, class) in b.classes.iter().enumerate() {
            let rep = b.members[class[0]].node(trees).structure();
            let others = distinct(b, class);
            for &x in &class[1..] {
                if b.members[x].node(trees).structure() == rep {
                    for &y in &others[1..] {
                        check(b, ci, x, y, oracle);
                    }
                }
            }
        }
    }
    for b in buckets {
        for (ci, class) in b.classes.iter().enumerate() {
            let others = distinct(b, class);
            for (i, &x) in others.iter().enumerate().skip(1) {
                for &y in &others[i + 1..] {
                    check(b, ci, x, y, oracle);
                }
            }
        }
    }
    (out, unchecked)
}

/// Learns labels and nullability for a corpus of trees of `subject`.
pub fn generalize(trees: &[ParseNode], subject: &Subject, config: &Config) -> Generalized {
    let mut oracle = Oracle::new(subject, config.budget);
    let mut buckets = bucket_nodes(trees);
    let mut reports = Vec::new();
    let mut unknown = 0;
    for b in &mut buckets {
        let log = partition(trees, b, &mut oracle, config.mode);
        unknown += log.unknown;
        reports.push(BucketReport {
            key: b.key.clone(),
            members: b.members.len(),
            classes: b.classes.len(),
            rejected: log.rejected.into_iter().collect(),
        });
    }
    let relabeled = relabel(trees, &buckets);
    let (nullability, n_unknown) = learn_nullability(&relabeled, &mut oracle, config.verify_branches);
    unknown += n_unknown;
    let (false_merges, audit_unchecked) = if config.mode == CompatMode::Transitive && config.audit_budget > 0 {
        oracle.budget = oracle.executions + config.audit_budget;
        audit(trees, &buckets, &mut oracle)
    } else {
        (Vec::new(), 0)
    };
    let report = MiningReport {
        mode: config.mode,
        buckets: reports,
        oracle_executions: oracle.executions,
        cache_hits: oracle.cache_hits,
        budget_exhausted: unknown,
        false_merges,
        audit_unchecked,
        faults: oracle.faults.clone(),
        nullability,
    };
    Generalized {
        trees: relabeled,
        buckets,
        report,
    }
}
