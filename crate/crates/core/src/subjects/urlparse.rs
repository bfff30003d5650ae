//! URL splitting in the style of `urlsplit`: scheme and network location are
//! read left to right, but the fragment delimiter is then searched for from
//! the start of the whole string before the query and path are examined.

use crate::grammar::build::{class, n, opt, plus, star};
use crate::grammar::{Grammar, Symbol};
use crate::trace::{PResult, Reject, Session};

fn scheme_char(c: char) -> bool {
    c.is_ascii_lowercase() || c.is_ascii_digit() || "+-.".contains(c)
}

fn host_char(c: char) -> bool {
    c.is_ascii_lowercase() || c.is_ascii_digit() || "-.".contains(c)
}

fn path_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "/._-".contains(c)
}

fn query_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "=&._-".contains(c)
}

fn fragment_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || "_-".contains(c)
}

/// Index just past the `:` ending the scheme.
fn parse_scheme(s: &mut Session) -> PResult<usize> {
    s.method("parse_scheme", |s| {
        if !s.char_at(0).is_some_and(|c| c.is_ascii_lowercase()) {
            return Err(Reject::at(0));
        }
        let mut i = 1;
        while s.char_at(i).is_some_and(scheme_char) {
            s.loop_iter(1, |_| i += 1);
        }
        if s.char_at(i) != Some(':') {
            return Err(Reject::at(i));
        }
        Ok(i + 1)
    })
}

/// Reads `//host` and returns the index of the first `/`, `?` or `#` after
/// it (or the end).
fn parse_netloc(s: &mut Session, i: usize) -> PResult<usize> {
    s.method("parse_netloc", |s| {
        if s.slice(i, i + 2).as_deref() != Some("//") {
            return Err(Reject::at(i));
        }
        let mut j = i + 2;
        while let Some(c) = s.char_at(j).filter(|c| !"/?#".contains(*c)) {
            s.loop_iter(1, |_| if host_char(c) { Ok(()) } else { Err(Reject::at(j)) })?;
            j += 1;
        }
        if j == i + 2 {
            return Err(Reject::at(j));
        }
        Ok(j)
    })
}

fn find_fragment(s: &mut Session) -> Option<usize> {
    s.method("find_fragment", |s| {
        let mut i = 0;
        while i < s.len() {
            if s.loop_iter(1, |s| s.char_at(i) == Some('#')) {
                return Some(i);
            }
            i += 1;
        }
        None
    })
}

fn find_query(s: &mut Session, from: usize, end: usize) -> Option<usize> {
    s.method("find_query", |s| {
        let mut i = from;
        while i < end {
            if s.loop_iter(1, |s| s.char_at(i) == Some('?')) {
                return Some(i);
            }
            i += 1;
        }
        None
    })
}

/// Checks `from..end` (starting at the delimiter, if any) character by
/// character.
fn check_part(s: &mut Session, name: &str, delim: Option<char>, from: usize, end: usize, ok: fn(char) -> bool) -> PResult<()> {
    s.method(name, |s| {
        let mut i = from;
        if let Some(d) = delim {
            if s.char_at(i) != Some(d) {
                return Err(Reject::at(i));
            }
            i += 1;
        }
        while i < end {
            s.loop_iter(1, |s| {
                if s.char_at(i).is_some_and(ok) {
                    Ok(())
                } else {
                    Err(Reject::at(i))
                }
            })?;
            i += 1;
        }
        Ok(())
    })
}

pub(super) fn parse(s: &mut Session) -> PResult<()> {
    s.method("urlsplit", |s| {
        let i = parse_scheme(s)?;
        let netloc_end = parse_netloc(s, i)?;
        let fragment = find_fragment(s);
        let end = fragment.unwrap_or(s.len());
        if end < netloc_end {
            return Err(Reject::at(end));
        }
        let query = find_query(s, netloc_end, end);
        let path_end = query.unwrap_or(end);
        if path_end > netloc_end && s.char_at(netloc_end) != Some('/') {
            return Err(Reject::at(netloc_end));
        }
        check_part(s, "parse_path", None, netloc_end, path_end, path_char)?;
        if let Some(q) = query {
            check_part(s, "parse_query", Some('?'), q, end, query_char)?;
        }
        if let Some(f) = fragment {
            check_part(s, "parse_fragment", Some('#'), f, s.len(), fragment_char)?;
        }
        Ok(())
    })
}

pub(super) fn golden() -> Grammar {
    let mut g = Grammar::new("<start>");
    g.add_rule(
        "<start>",
        vec![
            n("<scheme>"),
            Symbol::Terminal(':'),
            Symbol::Terminal('/'),
            Symbol::Terminal('/'),
            n("<host>"),
            star(vec![Symbol::Terminal('/'), n("<segment>")]),
            opt(vec![Symbol::Terminal('?'), n("<query>")]),
            opt(vec![Symbol::Terminal('#'), star(vec![class("a-zA-Z0-9_-")])]),
        ],
    );
    g.add_rule("<scheme>", vec![class("a-z"), star(vec![class("a-z0-9")])]);
    g.add_rule(
        "<host>",
        vec![n("<label>"), star(vec![Symbol::Terminal('.'), n("<label>")])],
    );
    g.add_rule("<label>", vec![plus(vec![class("a-z0-9")])]);
    g.add_rule("<segment>", vec![star(vec![class("a-zA-Z0-9._-")])]);
    g.add_rule("<query>", vec![n("<param>"), star(vec![Symbol::Terminal('&'), n("<param>")])]);
    g.add_rule("<param>", vec![plus(vec![class("a-z")]), Symbol::Terminal('='), star(vec![class("a-zA-Z0-9")])]);
    g
}
