//! netrc files without a separate lexer: `machine`/`default` entries with
//! `login`, `password` and `account` values, and `macdef` macros whose body
//! runs up to the next empty line.

use crate::trace::{PResult, Reject, Session};

fn is_space(c: char) -> bool {
    matches!(c, ' ' | '\t' | '\n' | '\r')
}

/// Skips whitespace and reads one token. `None` at the end of input.
fn get_token(s: &mut Session, mut i: usize) -> PResult<Option<(String, usize)>> {
    s.method("get_token", |s| {
        while s.char_at(i).is_some_and(is_space) {
            s.loop_iter(1, |s| {
                s.char_at(i);
                i += 1;
            });
        }
        let mut tok = String::new();
        while let Some(c) = s.char_at(i).filter(|c| !is_space(*c)) {
            s.loop_iter(2, |s| {
                if c.is_ascii_graphic() {
                    s.char_at(i);
                    tok.push(c);
                    i += 1;
                    Ok(())
                } else {
                    Err(Reject::at(i))
                }
            })?;
        }
        Ok((!tok.is_empty()).then_some((tok, i)))
    })
}

fn required_token(s: &mut Session, i: usize) -> PResult<usize> {
    match get_token(s, i)? {
        Some((_, j)) => Ok(j),
        None => Err(Reject::at(i)),
    }
}

/// Macro lines after the `macdef name` line, up to an empty line or the end.
fn macro_body(s: &mut Session, mut i: usize) -> PResult<usize> {
    s.method("macro_body", |s| {
        // rest of the definition line
        while let Some(c) = s.char_at(i).filter(|&c| c != '\n') {
            if !matches!(c, ' ' | '\t') {
                return Err(Reject::at(i));
            }
            i += 1;
        }
        if i == s.len() {
            return Ok(i);
        }
        i += 1;
        while i < s.len() && s.char_at(i) != Some('\n') {
            i = s.loop_iter(1, |s| {
                while let Some(c) = s.char_at(i).filter(|&c| c != '\n') {
                    if !(c.is_ascii_graphic() || c == ' ' || c == '\t') {
                        return Err(Reject::at(i));
                    }
                    i += 1;
                }
                Ok(i + usize::from(i < s.len()))
            })?;
        }
        Ok(i + usize::from(i < s.len()))
    })
}

pub(super) fn parse(s: &mut Session) -> PResult<()> {
    s.method("parse_netrc", |s| {
        let mut i = 0;
        let mut in_entry = false;
        while let Some((tok, j)) = get_token(s, i)? {
            i = s.loop_iter(1, |s| match tok.as_str() {
                "machine" => s.branch(1, 1, false, |s| {
                    in_entry = true;
                    required_token(s, j)
                }),
                "default" => s.branch(1, 2, false, |_| {
                    in_entry = true;
                    Ok(j)
                }),
                "login" | "password" | "account" if in_entry => s.branch(1, 3, false, |s| required_token(s, j)),
                "macdef" => s.branch(1, 4, false, |s| {
                    in_entry = false;
                    let j = required_token(s, j)?;
                    macro_body(s, j)
                }),
                _ => s.branch(1, 5, false, |_| Err(Reject::at(j - tok.len()))),
            })?;
        }
        Ok(())
    })
}
