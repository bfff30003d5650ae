//! JSON built from a tiny parser-combinator core.
//!
//! Combinators are plain values. `Label` turns into a method event named by
//! its label, `Choice` and `Opt` into branch events and `Many` into loop
//! iterations; their static ids are given explicitly, numbered per label in
//! source order. Choice backtracks: a failed arm's reads stay in the trace
//! and are overridden by whichever arm reads the characters last.

use std::collections::HashMap;
use std::sync::OnceLock;

use crate::grammar::build::{alt, class, n, opt, plus, printable_except, star, t};
use crate::grammar::{Grammar, Symbol};
use crate::trace::{PResult, Reject, Session};

enum P {
    Char(fn(char) -> bool),
    Lit(&'static str),
    Seq(Vec<P>),
    Choice(u32, Vec<P>),
    /// Loop with a minimum iteration count.
    Many(u32, usize, Box<P>),
    Opt(u32, Box<P>),
    Label(&'static str, Box<P>),
    Rule(&'static str),
    End,
}

use P::*;

fn seq<const N: usize>(ps: [P; N]) -> P {
    Seq(ps.into())
}

fn label(name: &'static str, p: P) -> P {
    Label(name, Box::new(p))
}

fn many(id: u32, min: usize, p: P) -> P {
    Many(id, min, Box::new(p))
}

fn maybe(id: u32, p: P) -> P {
    Opt(id, Box::new(p))
}

const ESCAPES: &str = "\"\\/bfnrt";

fn rules() -> &'static HashMap<&'static str, P> {
    static RULES: OnceLock<HashMap<&'static str, P>> = OnceLock::new();
    RULES.get_or_init(|| {
        let mut m = HashMap::new();
        m.insert("json", label("json", seq([Rule("value"), Rule("ws"), End])));
        m.insert("ws", label("ws", many(1, 0, Char(|c| " \t\n\r".contains(c)))));
        m.insert(
            "value",
            label(
                "value",
                seq([
                    Rule("ws"),
                    Choice(
                        1,
                        vec![
                            Rule("string"),
                            Rule("number"),
                            Rule("object"),
                            Rule("array"),
                            Lit("true"),
                            Lit("false"),
                            Lit("null"),
                        ],
                    ),
                ]),
            ),
        );
        m.insert(
            "string",
            label(
                "string",
                seq([
                    Lit("\""),
                    many(
                        1,
                        0,
                        Choice(
                            1,
                            vec![
                                seq([Lit("\\"), Rule("escape")]),
                                Char(|c| (c.is_ascii_graphic() || c == ' ') && c != '"' && c != '\\'),
                            ],
                        ),
                    ),
                    Lit("\""),
                ]),
            ),
        );
        m.insert("escape", label("escape", Char(|c| ESCAPES.contains(c))));
        m.insert(
            "number",
            label(
                "number",
                seq([
                    maybe(1, Lit("-")),
                    Rule("digits"),
                    maybe(2, seq([Lit("."), Rule("digits")])),
                    maybe(
                        3,
                        seq([Char(|c| c == 'e' || c == 'E'), maybe(4, Char(|c| c == '+' || c == '-')), Rule("digits")]),
                    ),
                ]),
            ),
        );
        m.insert("digits", label("digits", many(1, 1, Char(|c| c.is_ascii_digit()))));
        m.insert(
            "array",
            label(
                "array",
                seq([
                    Lit("["),
                    Rule("ws"),
                    maybe(
                        1,
                        seq([Rule("value"), Rule("ws"), many(1, 0, seq([Lit(","), Rule("value"), Rule("ws")]))]),
                    ),
                    Lit("]"),
                ]),
            ),
        );
        m.insert(
            "object",
            label(
                "object",
                seq([
                    Lit("{"),
                    Rule("ws"),
                    maybe(1, seq([Rule("member"), many(1, 0, seq([Lit(","), Rule("member")]))])),
                    Lit("}"),
                ]),
            ),
        );
        m.insert(
            "member",
            label(
                "member",
                seq([Rule("ws"), Rule("string"), Rule("ws"), Lit(":"), Rule("value"), Rule("ws")]),
            ),
        );
        m
    })
}

/// Applies `p` at `i`; the index after the match, or `None`.
fn apply(p: &P, s: &mut Session, i: usize) -> Option<usize> {
    match p {
        Char(ok) => s.char_at(i).filter(|&c| ok(c)).map(|_| i + 1),
        Lit(w) => {
            for (k, c) in w.chars().enumerate() {
                if s.char_at(i + k) != Some(c) {
                    return None;
                }
            }
            Some(i + w.len())
        }
        Seq(ps) => ps.iter().try_fold(i, |j, p| apply(p, s, j)),
        Choice(id, arms) => arms
            .iter()
            .enumerate()
            .find_map(|(k, arm)| s.branch(*id, k as u32 + 1, false, |s| apply(arm, s, i))),
        Many(id, min, p) => {
            let mut j = i;
            let mut count = 0;
            while let Some(next) = s.loop_iter(*id, |s| apply(p, s, j)).filter(|&next| next > j) {
                j = next;
                count += 1;
            }
            (count >= *min).then_some(j)
        }
        Opt(id, p) => Some(s.branch(*id, 1, true, |s| apply(p, s, i)).unwrap_or(i)),
        Label(name, p) => s.method(name, |s| apply(p, s, i)),
        Rule(name) => apply(&rules()[name], s, i),
        End => (i == s.len()).then_some(i),
    }
}

pub(super) fn parse(s: &mut Session) -> PResult<()> {
    match apply(&rules()["json"], s, 0) {
        Some(_) => Ok(()),
        None => Err(Reject::at(s.accesses().iter().map(|a| a.index).max().unwrap_or(0))),
    }
}

pub(super) fn golden() -> Grammar {
    let ws = || n("<ws>");
    let digits = || n("<digits>");
    let mut g = Grammar::new("<start>");
    g.add_rule("<start>", vec![n("<value>"), ws()]);
    g.add_rule(
        "<value>",
        vec![
            ws(),
            alt(vec![
                vec![n("<string>")],
                vec![n("<number>")],
                vec![n("<object>")],
                vec![n("<array>")],
                t("true"),
                t("false"),
                t("null"),
            ]),
        ],
    );
    g.add_rule("<ws>", vec![star(vec![class(" \t\n\r")])]);
    g.add_rule(
        "<string>",
        vec![
            Symbol::Terminal('"'),
            star(vec![alt(vec![
                vec![Symbol::Terminal('\\'), class(ESCAPES)],
                vec![printable_except("\"\\")],
            ])]),
            Symbol::Terminal('"'),
        ],
    );
    g.add_rule(
        "<number>",
        vec![
            opt(t("-")),
            digits(),
            opt(vec![Symbol::Terminal('.'), digits()]),
            opt(vec![class("eE"), opt(vec![class("+-")]), digits()]),
        ],
    );
    g.add_rule("<digits>", vec![plus(vec![class("0-9")])]);
    g.add_rule(
        "<array>",
        vec![
            Symbol::Terminal('['),
            ws(),
            opt(vec![n("<value>"), ws(), star(vec![Symbol::Terminal(','), n("<value>"), ws()])]),
            Symbol::Terminal(']'),
        ],
    );
    g.add_rule(
        "<object>",
        vec![
            Symbol::Terminal('{'),
            ws(),
            opt(vec![n("<member>"), star(vec![Symbol::Terminal(','), n("<member>")])]),
            Symbol::Terminal('}'),
        ],
    );
    g.add_rule(
        "<member>",
        vec![ws(), n("<string>"), ws(), Symbol::Terminal(':'), n("<value>"), ws()],
    );
    g
}
