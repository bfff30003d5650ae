//! Recording of character accesses and dynamic control flow for one parser run.
//!
//! A [`Session`] wraps the input string. Parsers read characters only through
//! [`Session::char_at`] and announce method calls, loop iterations and branch
//! arms through the `enter_*`/`exit_*` pairs (or the closure helpers
//! [`Session::method`], [`Session::loop_iter`] and [`Session::branch`], which
//! close the event even when the body bails out with `?`).

use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

/// Identifier of a control-flow event. Ids start at 1 and grow with every
/// event opened, so children and later calls always carry larger ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EventId(pub u32);

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Method,
    LoopIter,
    Branch,
}

impl EventKind {
    pub fn is_pseudo(self) -> bool {
        !matches!(self, EventKind::Method)
    }

    pub(crate) fn keyword(self) -> &'static str {
        match self {
            EventKind::Method => "method",
            EventKind::LoopIter => "while",
            EventKind::Branch => "if",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlowEvent {
    pub id: EventId,
    pub kind: EventKind,
    /// Method name; empty for pseudo-methods.
    pub name: String,
    /// Per-method ordinal of the control structure, 1-based. Zero for methods.
    pub static_id: u32,
    /// Branch arm taken (1-based); zero for loop iterations and methods.
    pub alt_id: u32,
    pub parent: Option<EventId>,
    /// For branches: the conditional chain has no `else` arm.
    pub can_skip: bool,
    /// Position in the session's global sequence at which the event opened.
    pub open_seq: u64,
    /// Position at which the event closed; `None` while open.
    pub close_seq: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Access {
    pub index: usize,
    pub event: EventId,
    pub seq: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status", content = "position")]
pub enum Status {
    Running,
    Accepted,
    Rejected(usize),
}

/// A parse rejection raised by a subject. Carries the input position at
/// which the parser gave up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Reject {
    pub position: usize,
}

impl Reject {
    pub fn at(position: usize) -> Self {
        Reject { position }
    }
}

pub type PResult<T> = Result<T, Reject>;

/// One parser run.
#[derive(Debug, Clone)]
pub struct Session {
    input: Vec<char>,
    accesses: Vec<Access>,
    events: Vec<FlowEvent>,
    open: Vec<usize>,
    next_id: u32,
    seq: u64,
    status: Status,
}

impl Session {
    pub fn begin(input: &str) -> Self {
        Session {
            input: input.chars().collect(),
            accesses: Vec::new(),
            events: Vec::new(),
            open: Vec::new(),
            next_id: 1,
            seq: 0,
            status: Status::Running,
        }
    }

    pub fn input(&self) -> &[char] {
        &self.input
    }

    pub fn input_string(&self) -> String {
        self.input.iter().collect()
    }

    pub fn len(&self) -> usize {
        self.input.len()
    }

    pub fn is_empty(&self) -> bool {
        self.input.is_empty()
    }

    pub fn accesses(&self) -> &[Access] {
        &self.accesses
    }

    pub fn events(&self) -> &[FlowEvent] {
        &self.events
    }

    pub fn status(&self) -> Status {
        self.status
    }

    pub fn is_sealed(&self) -> bool {
        self.status != Status::Running
    }

    pub fn is_accepted(&self) -> bool {
        self.status == Status::Accepted
    }

    /// Looks up an event by id.
    pub fn event(&self, id: EventId) -> &FlowEvent {
        &self.events[(id.0 - 1) as usize]
    }

    fn assert_running(&self) {
        assert!(
            self.status == Status::Running,
            "instrumentation fault: session is sealed"
        );
    }

    fn tick(&mut self) -> u64 {
        let s = self.seq;
        self.seq += 1;
        s
    }

    /// Reads the character at `index`, logging the access against the
    /// innermost open event. Indexes at or beyond the end return `None` and
    /// leave the log untouched.
    pub fn char_at(&mut self, index: usize) -> Option<char> {
        self.assert_running();
        let c = *self.input.get(index)?;
        let Some(&top) = self.open.last() else {
            panic!("instrumentation fault: character read outside any method");
        };
        let event = self.events[top].id;
        let seq = self.tick();
        self.accesses.push(Access { index, event, seq });
        Some(c)
    }

    /// Reads `index..end` as consecutive single-character accesses.
    pub fn slice(&mut self, start: usize, end: usize) -> Option<String> {
        if end > self.len() || start > end {
            return None;
        }
        (start..end).map(|i| self.char_at(i)).collect()
    }

    fn open_event(&mut self, kind: EventKind, name: &str, static_id: u32, alt_id: u32, can_skip: bool) -> EventId {
        self.assert_running();
        let id = EventId(self.next_id);
        self.next_id += 1;
        let parent = self.open.last().map(|&i| self.events[i].id);
        let open_seq = self.tick();
        self.events.push(FlowEvent {
            id,
            kind,
            name: name.to_string(),
            static_id,
            alt_id,
            parent,
            can_skip,
            open_seq,
            close_seq: None,
        });
        self.open.push(self.events.len() - 1);
        id
    }

    fn close_event(&mut self, id: EventId, kind: EventKind) {
        self.assert_running();
        let top = self
            .open
            .pop()
            .unwrap_or_else(|| panic!("instrumentation fault: exit of {id} with no open event"));
        let ev = &self.events[top];
        assert!(
            ev.id == id && ev.kind == kind,
            "instrumentation fault: exit of {id} ({kind:?}) but innermost open event is {} ({:?})",
            ev.id,
            ev.kind
        );
        let seq = self.tick();
        self.events[top].close_seq = Some(seq);
    }

    pub fn enter_method(&mut self, name: &str) -> EventId {
        assert!(!name.is_empty(), "instrumentation fault: method without a name");
        self.open_event(EventKind::Method, name, 0, 0, false)
    }

    pub fn exit_method(&mut self, id: EventId) {
        self.close_event(id, EventKind::Method)
    }

    pub fn enter_loop_iter(&mut self, static_id: u32) -> EventId {
        assert!(static_id >= 1, "static ids are 1-based");
        self.open_event(EventKind::LoopIter, "", static_id, 0, false)
    }

    pub fn exit_loop_iter(&mut self, id: EventId) {
        self.close_event(id, EventKind::LoopIter)
    }

    pub fn enter_branch(&mut self, static_id: u32, alt_id: u32, can_skip: bool) -> EventId {
        assert!(static_id >= 1 && alt_id >= 1, "static and alternative ids are 1-based");
        self.open_event(EventKind::Branch, "", static_id, alt_id, can_skip)
    }

    pub fn exit_branch(&mut self, id: EventId) {
        self.close_event(id, EventKind::Branch)
    }

    pub fn method<T>(&mut self, name: &str, body: impl FnOnce(&mut Self) -> T) -> T {
        let id = self.enter_method(name);
        let r = body(self);
        self.exit_method(id);
        r
    }

    pub fn loop_iter<T>(&mut self, static_id: u32, body: impl FnOnce(&mut Self) -> T) -> T {
        let id = self.enter_loop_iter(static_id);
        let r = body(self);
        self.exit_loop_iter(id);
        r
    }

    pub fn branch<T>(
        &mut self,
        static_id: u32,
        alt_id: u32,
        can_skip: bool,
        body: impl FnOnce(&mut Self) -> T,
    ) -> T {
        let id = self.enter_branch(static_id, alt_id, can_skip);
        let r = body(self);
        self.exit_branch(id);
        r
    }

    /// Seals the session. Every event must have been closed.
    pub fn finish(&mut self, accepted: bool, position: Option<usize>) {
        self.assert_running();
        assert!(
            self.open.is_empty(),
            "instrumentation fault: {} event(s) still open at finish",
            self.open.len()
        );
        self.status = if accepted {
            Status::Accepted
        } else {
            Status::Rejected(position.unwrap_or(self.len()))
        };
    }

    /// Accesses that re-read an index behind the point already reached by
    /// finished, unrelated parts of the parse. Recursive-descent parsers that
    /// only look one character ahead never produce these; out-of-order
    /// scanners and backtracking parsers do.
    pub fn rescans(&self) -> Vec<Rescan> {
        // Merge closes and accesses in sequence order.
        let mut closes: Vec<(u64, usize)> = self
            .events
            .iter()
            .enumerate()
            .filter_map(|(i, e)| e.close_seq.map(|s| (s, i)))
            .collect();
        closes.sort_unstable();
        let mut subtree_max: Vec<Option<usize>> = vec![None; self.events.len()];
        let mut frontier: Option<usize> = None;
        let mut out = Vec::new();
        let mut ci = 0;
        for acc in &self.accesses {
            while ci < closes.len() && closes[ci].0 < acc.seq {
                let ev = closes[ci].1;
                if let Some(m) = subtree_max[ev] {
                    frontier = frontier.max(Some(m));
                    if let Some(p) = self.events[ev].parent {
                        let pi = (p.0 - 1) as usize;
                        subtree_max[pi] = subtree_max[pi].max(Some(m));
                    }
                }
                ci += 1;
            }
            let ei = (acc.event.0 - 1) as usize;
            subtree_max[ei] = subtree_max[ei].max(Some(acc.index));
            if frontier.is_some_and(|f| f > acc.index) {
                out.push(Rescan {
                    index: acc.index,
                    event: acc.event,
                    method: self.enclosing_method(acc.event).to_string(),
                });
            }
        }
        out
    }

    /// Name of the nearest true method at or above `id`.
    pub fn enclosing_method(&self, id: EventId) -> &str {
        let mut cur = Some(id);
        while let Some(c) = cur {
            let ev = self.event(c);
            if ev.kind == EventKind::Method {
                return &ev.name;
            }
            cur = ev.parent;
        }
        ""
    }

    /// Debug dump: one line per event (`id kind name static:alt parent`) in
    /// opening order, then one `ACC index call_id` line per access.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            let parent = e.parent.map_or(0, |p| p.0);
            let name = if e.name.is_empty() { "-" } else { &e.name };
            let _ = writeln!(
                out,
                "{} {} {} {}:{} {}",
                e.id,
                e.kind.keyword(),
                name,
                e.static_id,
                e.alt_id,
                parent
            );
        }
        for a in &self.accesses {
            let _ = writeln!(out, "ACC {} {}", a.index, a.event);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rescan {
    pub index: usize,
    pub event: EventId,
    pub method: String,
}
