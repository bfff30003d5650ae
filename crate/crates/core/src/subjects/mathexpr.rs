//! Arithmetic over numbers, single-letter constants and the functions
//! `exp` and `sin`. Constants and function names share one identifier
//! scanner.

use crate::trace::{PResult, Reject, Session};

const FUNCTIONS: [&str; 2] = ["exp", "sin"];

fn peek(s: &mut Session, i: usize) -> Option<char> {
    s.char_at(i)
}

fn parse_number(s: &mut Session, mut i: usize) -> usize {
    s.method("parse_number", |s| {
        while peek(s, i).is_some_and(|c| c.is_ascii_digit()) {
            s.loop_iter(1, |s| {
                s.char_at(i);
                i += 1;
            });
        }
        i
    })
}

fn parse_identifier(s: &mut Session, mut i: usize) -> (String, usize) {
    s.method("parse_identifier", |s| {
        let mut name = String::new();
        while peek(s, i).is_some_and(|c| c.is_ascii_lowercase()) {
            s.loop_iter(1, |s| {
                name.extend(s.char_at(i));
                i += 1;
            });
        }
        (name, i)
    })
}

fn parse_factor(s: &mut Session, i: usize) -> PResult<usize> {
    s.method("parse_factor", |s| {
        let c = peek(s, i).ok_or(Reject::at(i))?;
        if c.is_ascii_digit() {
            s.branch(1, 1, false, |s| Ok(parse_number(s, i)))
        } else if c == '(' {
            s.branch(1, 2, false, |s| {
                let j = parse_expr(s, i + 1)?;
                if peek(s, j) != Some(')') {
                    return Err(Reject::at(j));
                }
                Ok(j + 1)
            })
        } else if c.is_ascii_lowercase() {
            s.branch(1, 3, false, |s| {
                let (name, j) = parse_identifier(s, i);
                if peek(s, j) == Some('(') {
                    s.branch(2, 1, false, |s| {
                        if !FUNCTIONS.contains(&name.as_str()) {
                            return Err(Reject::at(i));
                        }
                        let k = parse_expr(s, j + 1)?;
                        if peek(s, k) != Some(')') {
                            return Err(Reject::at(k));
                        }
                        Ok(k + 1)
                    })
                } else {
                    s.branch(2, 2, false, |_| if name.len() == 1 { Ok(j) } else { Err(Reject::at(i)) })
                }
            })
        } else {
            s.branch(1, 4, false, |_| Err(Reject::at(i)))
        }
    })
}

/// Operands of `ops` separated by those operators.
fn chain(
    s: &mut Session,
    name: &str,
    ops: &str,
    i: usize,
    operand: fn(&mut Session, usize) -> PResult<usize>,
) -> PResult<usize> {
    s.method(name, |s| {
        let mut i = operand(s, i)?;
        while peek(s, i).is_some_and(|c| ops.contains(c)) {
            i = s.loop_iter(1, |s| {
                s.char_at(i);
                operand(s, i + 1)
            })?;
        }
        Ok(i)
    })
}

fn parse_term(s: &mut Session, i: usize) -> PResult<usize> {
    chain(s, "parse_term", "*/", i, parse_factor)
}

fn parse_expr(s: &mut Session, i: usize) -> PResult<usize> {
    chain(s, "parse_expr", "+-", i, parse_term)
}

pub(super) fn parse(s: &mut Session) -> PResult<()> {
    s.method("main", |s| {
        let end = parse_expr(s, 0)?;
        if end != s.len() {
            return Err(Reject::at(end));
        }
        Ok(())
    })
}
