//! CGI decoding: `+` is a space, `%xx` a hex-encoded byte, anything else
//! printable (except space) stands for itself.

use crate::grammar::build::{class, n, printable_except, star, t};
use crate::grammar::Grammar;
use crate::trace::{PResult, Reject, Session};

fn is_plain(c: char) -> bool {
    c.is_ascii_graphic() && c != '%'
}

pub(super) fn parse(s: &mut Session) -> PResult<()> {
    s.method("cgi_decode", |s| {
        let mut i = 0;
        while i < s.len() {
            i = s.loop_iter(1, |s| {
                let c = s.char_at(i).expect("index checked");
                if c == '+' {
                    s.branch(1, 1, false, |_| Ok(i + 1))
                } else if c == '%' {
                    s.branch(1, 2, false, |s| {
                        let hi = s.char_at(i + 1).ok_or(Reject::at(i + 1))?;
                        let lo = s.char_at(i + 2).ok_or(Reject::at(i + 2))?;
                        if !hi.is_ascii_hexdigit() {
                            return Err(Reject::at(i + 1));
                        }
                        if !lo.is_ascii_hexdigit() {
                            return Err(Reject::at(i + 2));
                        }
                        Ok(i + 3)
                    })
                } else {
                    s.branch(1, 3, false, |_| if is_plain(c) { Ok(i + 1) } else { Err(Reject::at(i)) })
                }
            })?;
        }
        Ok(())
    })
}

pub(super) fn golden() -> Grammar {
    let mut g = Grammar::new("<start>");
    g.add_rule("<start>", vec![star(vec![n("<item>")])]);
    g.add_rule("<item>", vec![printable_except(" %+")]);
    g.add_rule("<item>", t("+"));
    g.add_rule("<item>", [t("%"), vec![n("<hex>"), n("<hex>")]].concat());
    g.add_rule("<hex>", vec![class("0-9a-fA-F")]);
    g
}
