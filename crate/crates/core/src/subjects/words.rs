//! The language {a, b, ac}: one-letter words `a` and `b`, and the two-letter
//! word `ac`. Every letter is read by the same `letter` method, so letters
//! of both word shapes share one label.

use crate::trace::{PResult, Reject, Session};

fn letter(s: &mut Session, i: usize, allowed: &str) -> PResult<usize> {
    s.method("letter", |s| match s.char_at(i) {
        Some(c) if allowed.contains(c) => Ok(i + 1),
        _ => Err(Reject::at(i)),
    })
}

fn word1(s: &mut Session) -> PResult<usize> {
    s.method("word1", |s| letter(s, 0, "ab"))
}

fn word2(s: &mut Session) -> PResult<usize> {
    s.method("word2", |s| {
        let i = letter(s, 0, "a")?;
        letter(s, i, "c")
    })
}

pub(super) fn parse(s: &mut Session) -> PResult<()> {
    s.method("START", |s| {
        let end = match s.len() {
            1 => s.branch(1, 1, false, word1)?,
            2 => s.branch(1, 2, false, word2)?,
            _ => s.branch(1, 3, false, |_| Err(Reject::at(0)))?,
        };
        debug_assert_eq!(end, s.len());
        Ok(())
    })
}
