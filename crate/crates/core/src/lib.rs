//! Grammar mining from recursive-descent parsers.
//!
//! The pipeline runs a traced parser ([`subjects`]) over sample inputs
//! ([`trace`]), turns each run into a parse tree ([`tree`]), generalizes node
//! labels by querying the parser as a membership oracle ([`generalize`]),
//! and extracts a compact grammar with regular right-hand sides ([`grammar`]).
//! Mined grammars can then produce inputs ([`produce`]) and recognize them
//! ([`parse`]).

pub mod trace;
pub mod tree;
pub mod escape;
pub mod generalize;
pub mod grammar;
pub mod parse;
pub mod produce;
pub mod subjects;
pub mod pipeline;
