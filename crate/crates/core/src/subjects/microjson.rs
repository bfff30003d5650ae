//! A small JSON recognizer: objects, arrays, strings with the escapes
//! `" / b f n r t`, numbers, `true`, `false` and `null`.

use crate::grammar::build::{alt, class, n, opt, plus, printable_except, star, t};
use crate::grammar::{Grammar, Symbol};
use crate::trace::{PResult, Reject, Session};

const WS: &str = " \t\n\r";
const NUMCHARS: &str = "+-.0123456789eE";
const ESCAPES: &str = "\"/bfnrt";

fn peek(s: &mut Session, i: usize) -> PResult<char> {
    s.char_at(i).ok_or(Reject::at(i))
}

fn expect(s: &mut Session, i: usize, want: char) -> PResult<usize> {
    if peek(s, i)? == want {
        Ok(i + 1)
    } else {
        Err(Reject::at(i))
    }
}

fn skip_ws(s: &mut Session, mut i: usize) -> usize {
    s.method("skip_ws", |s| {
        while s.char_at(i).is_some_and(|c| WS.contains(c)) {
            s.loop_iter(1, |s| {
                s.char_at(i);
                i += 1;
            });
        }
        i
    })
}

fn decode_escape(s: &mut Session, i: usize) -> PResult<usize> {
    s.method("decode_escape", |s| {
        let c = peek(s, i)?;
        if ESCAPES.contains(c) {
            Ok(i + 1)
        } else {
            Err(Reject::at(i))
        }
    })
}

/// Characters after the opening quote, up to and including the closing one.
fn json_string(s: &mut Session, mut i: usize) -> PResult<usize> {
    s.method("json_string", |s| {
        while peek(s, i)? != '"' {
            i = s.loop_iter(1, |s| {
                let c = peek(s, i)?;
                if c == '\\' {
                    s.branch(1, 1, false, |s| decode_escape(s, i + 1))
                } else if c.is_ascii_graphic() || c == ' ' {
                    s.branch(1, 2, false, |_| Ok(i + 1))
                } else {
                    s.branch(1, 3, false, |_| Err(Reject::at(i)))
                }
            })?;
        }
        Ok(i + 1)
    })
}

fn json_number(s: &mut Session, start: usize) -> PResult<usize> {
    s.method("json_number", |s| {
        let mut i = start;
        let mut text = String::new();
        while s.char_at(i).is_some_and(|c| NUMCHARS.contains(c)) {
            s.loop_iter(1, |s| {
                text.extend(s.char_at(i));
                i += 1;
            });
        }
        // the inf/nan spellings cannot occur: their letters are not NUMCHARS
        match text.parse::<f64>() {
            Ok(_) => Ok(i),
            Err(_) => Err(Reject::at(start)),
        }
    })
}

/// After `[`: `]`, or values separated by commas up to `]`.
fn json_list(s: &mut Session, i: usize) -> PResult<usize> {
    s.method("json_list", |s| {
        let mut i = skip_ws(s, i);
        if peek(s, i)? == ']' {
            s.branch(1, 1, false, |_| Ok(i + 1))
        } else {
            s.branch(1, 2, false, |s| {
                loop {
                    let (next, done) = s.loop_iter(1, |s| {
                        let j = json_raw(s, i)?;
                        let j = skip_ws(s, j);
                        match peek(s, j)? {
                            ',' => Ok((j + 1, false)),
                            ']' => Ok((j + 1, true)),
                            _ => Err(Reject::at(j)),
                        }
                    })?;
                    i = next;
                    if done {
                        return Ok(i);
                    }
                }
            })
        }
    })
}

/// After `{`: `}`, or `"key": value` members separated by commas up to `}`.
fn json_dict(s: &mut Session, i: usize) -> PResult<usize> {
    s.method("json_dict", |s| {
        let mut i = skip_ws(s, i);
        if peek(s, i)? == '}' {
            s.branch(1, 1, false, |_| Ok(i + 1))
        } else {
            s.branch(1, 2, false, |s| {
                loop {
                    let (next, done) = s.loop_iter(1, |s| {
                        let j = skip_ws(s, i);
                        let j = expect(s, j, '"')?;
                        let j = json_string(s, j)?;
                        let j = skip_ws(s, j);
                        let j = expect(s, j, ':')?;
                        let j = json_raw(s, j)?;
                        let j = skip_ws(s, j);
                        match peek(s, j)? {
                            ',' => Ok((j + 1, false)),
                            '}' => Ok((j + 1, true)),
                            _ => Err(Reject::at(j)),
                        }
                    })?;
                    i = next;
                    if done {
                        return Ok(i);
                    }
                }
            })
        }
    })
}

fn literal(s: &mut Session, i: usize, word: &str) -> PResult<usize> {
    for (k, w) in word.chars().enumerate() {
        if s.char_at(i + k) != Some(w) {
            return Err(Reject::at(i + k));
        }
    }
    Ok(i + word.len())
}

fn json_raw(s: &mut Session, i: usize) -> PResult<usize> {
    s.method("json_raw", |s| {
        let i = skip_ws(s, i);
        let c = peek(s, i)?;
        match c {
            '"' => s.branch(1, 1, false, |s| json_string(s, i + 1)),
            '[' => s.branch(1, 2, false, |s| json_list(s, i + 1)),
            '{' => s.branch(1, 3, false, |s| json_dict(s, i + 1)),
            't' => s.branch(1, 4, false, |s| literal(s, i, "true")),
            'f' => s.branch(1, 5, false, |s| literal(s, i, "false")),
            'n' => s.branch(1, 6, false, |s| literal(s, i, "null")),
            c if "+-.0123456789".contains(c) => s.branch(1, 7, false, |s| json_number(s, i)),
            _ => s.branch(1, 8, false, |_| Err(Reject::at(i))),
        }
    })
}

pub(super) fn parse(s: &mut Session) -> PResult<()> {
    s.method("from_json", |s| {
        let i = json_raw(s, 0)?;
        let i = skip_ws(s, i);
        if i != s.len() {
            return Err(Reject::at(i));
        }
        Ok(())
    })
}

pub(super) fn golden() -> Grammar {
    let ws = || n("<ws>");
    let digits = || n("<digits>");
    let mut g = Grammar::new("<start>");
    g.add_rule("<start>", vec![n("<value>"), ws()]);
    g.add_rule("<value>", vec![ws(), n("<raw>")]);
    g.add_rule("<ws>", vec![star(vec![class(WS)])]);
    g.add_rule("<raw>", vec![n("<string>")]);
    g.add_rule("<raw>", vec![n("<number>")]);
    g.add_rule("<raw>", vec![n("<list>")]);
    g.add_rule("<raw>", vec![n("<dict>")]);
    for w in ["true", "false", "null"] {
        g.add_rule("<raw>", t(w));
    }
    g.add_rule("<string>", [t("\""), vec![star(vec![n("<char>")])], t("\"")].concat());
    g.add_rule("<char>", vec![printable_except("\"\\")]);
    g.add_rule("<char>", vec![Symbol::Terminal('\\'), class(ESCAPES)]);
    g.add_rule(
        "<number>",
        vec![
            opt(vec![class("+-")]),
            alt(vec![
                vec![digits(), opt(vec![Symbol::Terminal('.'), star(vec![class("0-9")])])],
                vec![Symbol::Terminal('.'), digits()],
            ]),
            opt(vec![class("eE"), opt(vec![class("+-")]), digits()]),
        ],
    );
    g.add_rule("<digits>", vec![plus(vec![class("0-9")])]);
    g.add_rule("<list>", [t("["), vec![ws()], t("]")].concat());
    g.add_rule(
        "<list>",
        vec![
            Symbol::Terminal('['),
            n("<value>"),
            ws(),
            star(vec![Symbol::Terminal(','), n("<value>"), ws()]),
            Symbol::Terminal(']'),
        ],
    );
    g.add_rule("<dict>", [t("{"), vec![ws()], t("}")].concat());
    g.add_rule(
        "<dict>",
        vec![
            Symbol::Terminal('{'),
            n("<member>"),
            star(vec![Symbol::Terminal(','), n("<member>")]),
            Symbol::Terminal('}'),
        ],
    );
    g.add_rule(
        "<member>",
        vec![ws(), n("<string>"), ws(), Symbol::Terminal(':'), n("<value>"), ws()],
    );
    g
}
