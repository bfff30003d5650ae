//! End-to-end mining and the precision/recall measurements built on it.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::generalize::{self, Config, MiningReport};
use crate::grammar::{self, Grammar};
use crate::parse::{desugar, Earley};
use crate::produce::{ProduceError, Producer, ProducerConfig};
use crate::subjects::{Subject, SubjectFault};
use crate::tree::{build_tree, ParseNode, TreeError};

#[derive(Debug, Clone)]
pub struct MineOptions {
    pub generalize: Config,
    pub charsets: bool,
}

impl Default for MineOptions {
    fn default() -> Self {
        MineOptions {
            generalize: Config::default(),
            charsets: true,
        }
    }
}

#[derive(Debug, Error)]
pub enum MineError {
    #[error("the corpus is empty")]
    EmptyCorpus,
    #[error("{subject} rejects corpus input {input:?}")]
    Rejected { subject: String, input: String },
    #[error(transparent)]
    Fault(#[from] SubjectFault),
    #[error("cannot build a tree for {input:?}: {source}")]
    Tree { input: String, source: TreeError },
}

/// One intermediate grammar of the pipeline.
#[derive(Debug, Clone)]
pub struct Stage {
    pub name: &'static str,
    pub grammar: Grammar,
}

/// Accesses behind the already-parsed frontier, per method, over the corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RescanSummary {
    pub by_method: BTreeMap<String, usize>,
    pub inputs_affected: usize,
}

#[derive(Debug, Clone)]
pub struct Mined {
    pub grammar: Grammar,
    pub stages: Vec<Stage>,
    pub trees: Vec<ParseNode>,
    pub generalized: Vec<ParseNode>,
    pub report: MiningReport,
    pub rescans: RescanSummary,
}

impl Mined {
    pub fn stage_rule_counts(&self) -> Vec<(&'static str, usize)> {
        self.stages.iter().map(|s| (s.name, s.grammar.rule_count())).collect()
    }
}

pub fn mine(subject: &Subject, inputs: &[String], options: &MineOptions) -> Result<Mined, MineError> {
    if inputs.is_empty() {
        return Err(MineError::EmptyCorpus);
    }
    let mut trees = Vec::new();
    let mut rescans = RescanSummary::default();
    for input in inputs {
        let session = subject.run(input)?;
        if !session.is_accepted() {
            return Err(MineError::Rejected {
                subject: subject.name.to_string(),
                input: input.clone(),
            });
        }
        let found = session.rescans();
        if !found.is_empty() {
            rescans.inputs_affected += 1;
        }
        for r in found {
            *rescans.by_method.entry(r.method).or_default() += 1;
        }
        let tree = build_tree(&session).map_err(|source| MineError::Tree {
            input: input.clone(),
            source,
        })?;
        trees.push(tree);
    }
    let gen = generalize::generalize(&trees, subject, &options.generalize);
    let mut stages = Vec::new();
    let mut push = |name, g: &Grammar| stages.push(Stage { name, grammar: g.clone() });
    let basic = grammar::extract_grammar(&gen.trees);
    push("basic", &basic);
    let repeated = grammar::detect_repetitions(&basic);
    push("repetition", &repeated);
    let nullable = grammar::apply_nullability(&repeated, &gen.report.nullability);
    push("nullability", &nullable);
    let charsets = grammar::generalize_charsets(&nullable, options.charsets);
    push("charsets", &charsets);
    let compacted = grammar::compact_mined(&charsets);
    push("compacted", &compacted);
    Ok(Mined {
        grammar: compacted,
        stages,
        trees,
        generalized: gen.trees,
        report: gen.report,
        rescans,
    })
}

/// Outcome of running a batch of strings through an acceptor.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Score {
    pub total: usize,
    pub accepted: usize,
    /// Rejected strings, in batch order.
    pub failures: Vec<String>,
    /// Strings on which the subject faulted (counted as rejected).
    pub faults: Vec<String>,
}

impl Score {
    pub fn percent(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.accepted as f64 / self.total as f64
        }
    }

    fn record(&mut self, input: &str, ok: bool) {
        self.total += 1;
        if ok {
            self.accepted += 1;
        } else {
            self.failures.push(input.to_string());
        }
    }
}

/// Share of strings produced from `grammar` that `subject` accepts.
pub fn eval_precision(subject: &Subject, grammar: &Grammar, config: &ProducerConfig) -> Result<Score, ProduceError> {
    let mut score = Score::default();
    let producer = Producer::new(grammar, config)?;
    for s in producer.take(config.count) {
        match subject.accepts(&s) {
            Ok(ok) => score.record(&s, ok),
            Err(f) => {
                score.record(&s, false);
                score.faults.push(f.to_string());
            }
        }
    }
    Ok(score)
}

/// Share of `inputs` that `grammar` recognizes.
pub fn eval_recall(grammar: &Grammar, inputs: &[String]) -> Score {
    let earley = Earley::new(&desugar(grammar));
    let mut score = Score::default();
    for s in inputs {
        score.record(s, earley.accepts(s));
    }
    score
}

/// Strings produced from a subject's golden grammar: the inputs for recall.
pub fn golden_samples(subject: &Subject, config: &ProducerConfig) -> Option<Result<Vec<String>, ProduceError>> {
    let g = subject.golden()?;
    Some(crate::produce::generate(&g, config))
}
