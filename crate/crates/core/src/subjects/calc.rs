//! Arithmetic expressions; a port of the classic index-passing recognizer.

use crate::grammar::build::{class, n, plus, star, t};
use crate::grammar::Grammar;
use crate::trace::{PResult, Reject, Session};

fn digit(s: &mut Session, i: usize) -> bool {
    s.method("digit", |s| s.char_at(i).is_some_and(|c| c.is_ascii_digit()))
}

fn parse_num(s: &mut Session, mut i: usize) -> usize {
    s.method("parse_num", |s| {
        while i != s.len() && digit(s, i) {
            s.loop_iter(1, |_| i += 1);
        }
        i
    })
}

fn parse_paren(s: &mut Session, i: usize) -> PResult<usize> {
    s.method("parse_paren", |s| {
        if s.char_at(i) != Some('(') {
            return Err(Reject::at(i));
        }
        let i = parse_expr(s, i + 1)?;
        if i == s.len() || s.char_at(i) != Some(')') {
            return Err(Reject::at(i));
        }
        Ok(i + 1)
    })
}

enum Step {
    Next(usize),
    Stop,
}

fn parse_expr(s: &mut Session, start: usize) -> PResult<usize> {
    s.method("parse_expr", |s| {
        let mut i = start;
        let mut is_op = true;
        while i < s.len() {
            let step = s.loop_iter(1, |s| {
                let c = s.char_at(i).expect("index checked");
                if c.is_ascii_digit() {
                    s.branch(1, 1, false, |s| {
                        if !is_op {
                            return Err(Reject::at(i));
                        }
                        is_op = false;
                        Ok(Step::Next(parse_num(s, i)))
                    })
                } else if matches!(c, '+' | '-' | '*' | '/') {
                    s.branch(1, 2, false, |_| {
                        if is_op {
                            return Err(Reject::at(i));
                        }
                        is_op = true;
                        Ok(Step::Next(i + 1))
                    })
                } else if c == '(' {
                    s.branch(1, 3, false, |s| {
                        if !is_op {
                            return Err(Reject::at(i));
                        }
                        is_op = false;
                        Ok(Step::Next(parse_paren(s, i)?))
                    })
                } else if c == ')' {
                    s.branch(1, 4, false, |_| Ok(Step::Stop))
                } else {
                    s.branch(1, 5, false, |_| Err(Reject::at(i)))
                }
            })?;
            match step {
                Step::Next(j) => i = j,
                Step::Stop => break,
            }
        }
        if is_op {
            return Err(Reject::at(i));
        }
        Ok(i)
    })
}

pub(super) fn parse(s: &mut Session) -> PResult<()> {
    let end = parse_expr(s, 0)?;
    // a stray closing parenthesis stops the loop early
    if end != s.len() {
        return Err(Reject::at(end));
    }
    Ok(())
}

pub(super) fn golden() -> Grammar {
    let mut g = Grammar::new("<start>");
    g.add_rule("<start>", vec![n("<expr>")]);
    g.add_rule(
        "<expr>",
        vec![n("<operand>"), star(vec![class("*+/-"), n("<operand>")])],
    );
    g.add_rule("<operand>", vec![n("<num>")]);
    g.add_rule("<operand>", [t("("), vec![n("<expr>")], t(")")].concat());
    g.add_rule("<num>", vec![plus(vec![class("0-9")])]);
    g
}
