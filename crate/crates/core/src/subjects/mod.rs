//! Bundled recursive-descent recognizers written against the tracing API.
//!
//! Every subject reads its input only through [`Session::char_at`] and
//! reports methods, loop iterations and branch arms with the session's
//! closure helpers. Subjects build no result; they accept or reject.

use std::panic::{self, AssertUnwindSafe};

use thiserror::Error;

use crate::escape;
use crate::grammar::Grammar;
use crate::trace::{PResult, Reject, Session};

mod calc;
mod cgidecode;
mod combinator_json;
mod mathexpr;
mod microjson;
mod netrc;
mod urlparse;
mod words;

pub type Entry = fn(&mut Session) -> PResult<()>;

pub struct Subject {
    pub name: &'static str,
    pub summary: &'static str,
    pub entry: Entry,
    /// Newline-delimited, escaped seed inputs.
    corpus: &'static str,
    golden: Option<fn() -> Grammar>,
}

impl Subject {
    pub fn seeds(&self) -> Vec<String> {
        escape::decode_lines(self.corpus).expect("bundled corpus is well formed")
    }

    pub fn golden(&self) -> Option<Grammar> {
        self.golden.map(|g| g())
    }

    pub fn has_golden(&self) -> bool {
        self.golden.is_some()
    }

    /// Runs the subject on `input`; see [`run`].
    pub fn run(&self, input: &str) -> Result<Session, SubjectFault> {
        run(self, input)
    }

    pub fn accepts(&self, input: &str) -> Result<bool, SubjectFault> {
        Ok(self.run(input)?.is_accepted())
    }
}

impl std::fmt::Debug for Subject {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Subject").field("name", &self.name).finish_non_exhaustive()
    }
}

/// A subject failed for a reason other than rejecting its input.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("subject {subject} faulted on {input:?}: {message}")]
pub struct SubjectFault {
    pub subject: String,
    pub input: String,
    pub message: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("unknown subject {0:?}")]
pub struct UnknownSubject(pub String);

/// Executes a subject on one input and seals the session.
pub fn run(subject: &Subject, input: &str) -> Result<Session, SubjectFault> {
    let mut session = Session::begin(input);
    let outcome = panic::catch_unwind(AssertUnwindSafe(|| {
        let result = (subject.entry)(&mut session);
        match result {
            Ok(()) => session.finish(true, None),
            Err(Reject { position }) => session.finish(false, Some(position)),
        }
    }));
    outcome.map(|()| session).map_err(|payload| {
        let message = payload
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".to_string());
        SubjectFault {
            subject: subject.name.to_string(),
            input: input.to_string(),
            message,
        }
    })
}

macro_rules! corpus {
    ($file:literal) => {
        include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpora/", $file))
    };
}

static SUBJECTS: &[Subject] = &[
    Subject {
        name: "calc",
        summary: "arithmetic expressions over digits, + - * / and parentheses",
        entry: calc::parse,
        corpus: corpus!("calc.txt"),
        golden: Some(calc::golden),
    },
    Subject {
        name: "cgidecode",
        summary: "CGI percent-decoding state machine",
        entry: cgidecode::parse,
        corpus: corpus!("cgidecode.txt"),
        golden: Some(cgidecode::golden),
    },
    Subject {
        name: "microjson",
        summary: "JSON subset: objects, arrays, strings, numbers, literals",
        entry: microjson::parse,
        corpus: corpus!("microjson.txt"),
        golden: Some(microjson::golden),
    },
    Subject {
        name: "urlparse_lite",
        summary: "URL splitter that searches for delimiters out of order",
        entry: urlparse::parse,
        corpus: corpus!("urlparse_lite.txt"),
        golden: Some(urlparse::golden),
    },
    Subject {
        name: "netrc_lite",
        summary: "netrc files: machine/default entries with login, password, macdef",
        entry: netrc::parse,
        corpus: corpus!("netrc_lite.txt"),
        golden: None,
    },
    Subject {
        name: "mathexpr_lite",
        summary: "expressions with single-letter constants and exp/sin calls",
        entry: mathexpr::parse,
        corpus: corpus!("mathexpr_lite.txt"),
        golden: None,
    },
    Subject {
        name: "combinator_json",
        summary: "JSON subset built from a small parser-combinator core",
        entry: combinator_json::parse,
        corpus: corpus!("combinator_json.txt"),
        golden: Some(combinator_json::golden),
    },
    Subject {
        name: "words",
        summary: "the three-word language {a, b, ac}",
        entry: words::parse,
        corpus: corpus!("words.txt"),
        golden: None,
    },
];

pub fn list_subjects() -> &'static [Subject] {
    SUBJECTS
}

pub fn subject(name: &str) -> Result<&'static Subject, UnknownSubject> {
    SUBJECTS
        .iter()
        .find(|s| s.name == name)
        .ok_or_else(|| UnknownSubject(name.to_string()))
}
