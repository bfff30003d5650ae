//! Line codec for corpora and produced strings.
//!
//! Printable ASCII passes through, a backslash becomes `\\`, other bytes
//! below 0x100 become `\xNN` and anything wider `\u{...}`. Encoded strings
//! never contain a newline, so a batch is one string per line.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("line {line}: bad escape sequence {text:?}")]
pub struct EscapeError {
    pub line: usize,
    pub text: String,
}

pub fn encode(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            ' '..='~' => out.push(c),
            c if (c as u32) < 0x100 => {
                let _ = write!(out, "\\x{:02x}", c as u32);
            }
            c => {
                let _ = write!(out, "\\u{{{:x}}}", c as u32);
            }
        }
    }
    out
}

pub fn decode(line: &str) -> Result<String, EscapeError> {
    let bad = || EscapeError {
        line: 0,
        text: line.to_string(),
    };
    let mut out = String::with_capacity(line.len());
    let mut chars = line.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('\\') => out.push('\\'),
            Some('x') => {
                let hex: String = chars.by_ref().take(2).collect();
                let v = u32::from_str_radix(&hex, 16).ok().filter(|_| hex.len() == 2).ok_or_else(bad)?;
                out.push(char::from_u32(v).ok_or_else(bad)?);
            }
            Some('u') => {
                if chars.next() != Some('{') {
                    return Err(bad());
                }
                let hex: String = chars.by_ref().take_while(|&c| c != '}').collect();
                let v = u32::from_str_radix(&hex, 16).map_err(|_| bad())?;
                out.push(char::from_u32(v).ok_or_else(bad)?);
            }
            _ => return Err(bad()),
        }
    }
    Ok(out)
}

pub fn decode_lines(text: &str) -> Result<Vec<String>, EscapeError> {
    text.lines()
        .enumerate()
        .map(|(i, l)| decode(l).map_err(|e| EscapeError { line: i + 1, ..e }))
        .collect()
}

/// One encoded string per line, each terminated by a newline.
pub fn encode_lines<S: AsRef<str>>(items: &[S]) -> String {
    let mut out = String::new();
    for s in items {
        out.push_str(&encode(s.as_ref()));
        out.push('\n');
    }
    out
}
