use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use grammine::escape;
use grammine::generalize::{CompatMode, Config};
use grammine::grammar::Grammar;
use grammine::pipeline::{self, MineError, MineOptions};
use grammine::produce::{self, ProduceError, ProducerConfig};
use grammine::subjects::{self, Subject};

mod output;

use output::{percent, write_atomic};

#[derive(Parser)]
#[command(name = "grammine", version, about = "Mine context-free grammars from traced recursive-descent parsers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mine a grammar for a bundled subject from a corpus of accepted inputs.
    Mine(MineArgs),
    /// Produce strings from a grammar file.
    Fuzz(FuzzArgs),
    /// Share of strings produced from a grammar that a subject accepts.
    EvalPrecision(PrecisionArgs),
    /// Share of inputs that a grammar recognizes.
    EvalRecall(RecallArgs),
    /// List the bundled subjects.
    Subjects,
    /// Write a subject's golden grammar.
    Golden {
        subject: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Sampling {
    /// Seed for string production.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bound on nonterminal nesting during production.
    #[arg(long, default_value_t = ProducerConfig::default().max_depth)]
    max_depth: usize,
    /// Number of strings to produce.
    #[arg(long, default_value_t = 1000)]
    count: usize,
}

impl Sampling {
    fn config(&self) -> ProducerConfig {
        ProducerConfig {
            seed: self.seed,
            max_depth: self.max_depth,
            count: self.count,
            coverage_mode: false,
        }
    }

    fn to_json(&self) -> Value {
        json!({"seed": self.seed, "max_depth": self.max_depth, "count": self.count})
    }
}

#[derive(Args)]
struct MineArgs {
    subject: String,
    /// Newline-delimited inputs, escaped as in `fuzz` output.
    corpus: PathBuf,
    /// Grammar file to write; defaults to `<subject>.grammar.json`.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Manifest to write; defaults to the grammar path with `.manifest.json`.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Compare every pair of same-named nodes instead of assuming transitivity.
    #[arg(long)]
    full_compat: bool,
    /// Keep single-character alternatives as they are.
    #[arg(long)]
    no_charset_generalization: bool,
    /// Subject executions allowed for active learning.
    #[arg(long, default_value_t = Config::default().budget)]
    oracle_budget: usize,
    /// Also check, with the oracle, that conditionals without `else` can be skipped.
    #[arg(long)]
    verify_branches: bool,
    /// Write the parse trees, before and after generalization, to this file.
    #[arg(long)]
    dump_trees: Option<PathBuf>,
    #[command(flatten)]
    sampling: Sampling,
}

#[derive(Args)]
struct FuzzArgs {
    grammar: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Prefer rules and alternatives not produced yet.
    #[arg(long)]
    coverage: bool,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[command(flatten)]
    sampling: Sampling,
}

#[derive(Args)]
struct PrecisionArgs {
    subject: String,
    grammar: PathBuf,
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[command(flatten)]
    sampling: Sampling,
}

#[derive(Args)]
struct RecallArgs {
    grammar: PathBuf,
    inputs: PathBuf,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

/// Exit statuses: 0 ok, 1 usage, 2 subject fault, 3 result degraded by the
/// oracle budget.
enum Failure {
    Usage(anyhow::Error),
    Subject(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Usage(e.into())
    }
}

type CmdResult = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Mine(a) => mine(a),
        Command::Fuzz(a) => fuzz(a),
        Command::EvalPrecision(a) => eval_precision(a),
        Command::EvalRecall(a) => eval_recall(a),
        Command::Subjects => list(),
        Command::Golden { subject, output } => golden(&subject, output),
    };
    match result {
        Ok(code) => code,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Subject(e)) => {
            eprintln!("subject fault: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn find_subject(name: &str) -> Result<&'static Subject, Failure> {
    subjects::subject(name).map_err(|e| Failure::Usage(anyhow::anyhow!("{e}; see `grammine subjects`")))
}

fn read_lines(path: &Path) -> anyhow::Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    escape::decode_lines(&text).with_context(|| format!("decoding {}", path.display()))
}

fn read_grammar(path: &Path) -> anyhow::Result<Grammar> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let g = Grammar::from_json_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    g.validate().with_context(|| format!("checking {}", path.display()))?;
    Ok(g)
}

fn write_manifest(path: &Path, manifest: &Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(manifest)? + "\n";
    write_atomic(path, text.as_bytes())
}

fn mine(a: MineArgs) -> CmdResult {
    let subject = find_subject(&a.subject)?;
    let corpus = read_lines(&a.corpus)?;
    let options = MineOptions {
        generalize: Config {
            mode: if a.full_compat { CompatMode::Full } else { CompatMode::Transitive },
            budget: a.oracle_budget,
            verify_branches: a.verify_branches,
            ..Config::default()
        },
        charsets: !a.no_charset_generalization,
    };
    let mined = match pipeline::mine(subject, &corpus, &options) {
        Ok(m) => m,
        Err(e @ MineError::Fault(_)) => return Err(Failure::Subject(e.into())),
        Err(e) => return Err(Failure::Usage(e.into())),
    };
    let output = a.output.clone().unwrap_or_else(|| PathBuf::from(format!("{}.grammar.json", subject.name)));
    let manifest_path = a.manifest.clone().unwrap_or_else(|| output.with_extension("manifest.json"));
    write_atomic(&output, (mined.grammar.to_json_string() + "\n").as_bytes())?;
    if let Some(path) = &a.dump_trees {
        let mut text = String::new();
        for (raw, generalized) in mined.trees.iter().zip(&mined.generalized) {
            text.push_str(&raw.to_sexpr());
            text.push('\n');
            text.push_str(&generalized.to_sexpr());
            text.push_str("\n\n");
        }
        write_atomic(path, text.as_bytes())?;
    }

    let config = a.sampling.config();
    let precision = pipeline::eval_precision(subject, &mined.grammar, &config)?;
    let recall = pipeline::eval_recall(&mined.grammar, &corpus);
    let report = &mined.report;

    print!("{}", mined.grammar);
    println!();
    let stages: Vec<String> = mined
        .stage_rule_counts()
        .iter()
        .map(|(name, n)| format!("{name} {n}"))
        .collect();
    println!("rules: {}", stages.join(", "));
    println!(
        "oracle: {} executions, {} cache hits, {} unresolved checks",
        report.oracle_executions, report.cache_hits, report.budget_exhausted
    );
    println!(
        "precision: {} ({}/{} accepted, seed {}, max depth {})",
        percent(precision.percent()),
        precision.accepted,
        precision.total,
        config.seed,
        config.max_depth
    );
    println!(
        "corpus recall: {} ({}/{})",
        percent(recall.percent()),
        recall.accepted,
        recall.total
    );
    if !report.false_merges.is_empty() {
        println!("transitivity: {} false merges found by the audit", report.false_merges.len());
        for f in report.false_merges.iter().take(5) {
            println!("  {}: {:?} ~ {:?} yet {:?} is rejected", f.key, f.left, f.right, f.candidate);
        }
    }
    if !mined.rescans.by_method.is_empty() {
        let by: Vec<String> = mined.rescans.by_method.iter().map(|(m, n)| format!("{m} {n}")).collect();
        println!(
            "out-of-order scanning in {} inputs: {}",
            mined.rescans.inputs_affected,
            by.join(", ")
        );
    }
    println!("wrote {} and {}", output.display(), manifest_path.display());

    let manifest = json!({
        "command": "mine",
        "subject": subject.name,
        "corpus": a.corpus.display().to_string(),
        "corpus_inputs": corpus.len(),
        "flags": {
            "compat_mode": options.generalize.mode,
            "charset_generalization": options.charsets,
            "oracle_budget": options.generalize.budget,
            "audit_budget": options.generalize.audit_budget,
            "verify_branches": options.generalize.verify_branches,
            "sampling": a.sampling.to_json(),
        },
        "outputs": {
            "grammar": output.display().to_string(),
            "trees": a.dump_trees.as_ref().map(|p| p.display().to_string()),
        },
        "rule_counts": mined.stage_rule_counts().into_iter().map(|(n, c)| json!({"stage": n, "rules": c})).collect::<Vec<_>>(),
        "metrics": {
            "precision_percent": round1(precision.percent()),
            "precision": precision,
            "corpus_recall_percent": round1(recall.percent()),
            "corpus_recall": recall,
            "oracle_executions": report.oracle_executions,
            "oracle_cache_hits": report.cache_hits,
            "unresolved_checks": report.budget_exhausted,
        },
        "report": report,
        "rescans": mined.rescans,
    });
    write_manifest(&manifest_path, &manifest)?;
    if report.degraded() {
        eprintln!(
            "warning: the oracle budget of {} ran out; {} checks were answered conservatively",
            options.generalize.budget, report.budget_exhausted
        );
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn round1(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

fn producer_error(e: ProduceError) -> Failure {
    Failure::Usage(e.into())
}

fn fuzz(a: FuzzArgs) -> CmdResult {
    let grammar = read_grammar(&a.grammar)?;
    let config = ProducerConfig {
        coverage_mode: a.coverage,
        ..a.sampling.config()
    };
    let strings = produce::generate(&grammar, &config).map_err(producer_error)?;
    let text = escape::encode_lines(&strings);
    match &a.output {
        Some(path) => write_atomic(path, text.as_bytes())?,
        None => print!("{text}"),
    }
    if let Some(path) = &a.manifest {
        let manifest = json!({
            "command": "fuzz",
            "grammar": a.grammar.display().to_string(),
            "flags": {"sampling": a.sampling.to_json(), "coverage": a.coverage},
            "outputs": {"strings": a.output.as_ref().map(|p| p.display().to_string())},
            "metrics": {"strings": strings.len()},
        });
        write_manifest(path, &manifest)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn eval_precision(a: PrecisionArgs) -> CmdResult {
    let subject = find_subject(&a.subject)?;
    let grammar = read_grammar(&a.grammar)?;
    let config = a.sampling.config();
    let score = pipeline::eval_precision(subject, &grammar, &config).map_err(producer_error)?;
    println!(
        "precision: {} ({}/{} accepted by {}, seed {}, max depth {})",
        percent(score.percent()),
        score.accepted,
        score.total,
        subject.name,
        config.seed,
        config.max_depth
    );
    if let Some(path) = &a.manifest {
        let manifest = json!({
            "command": "eval-precision",
            "subject": subject.name,
            "grammar": a.grammar.display().to_string(),
            "flags": {"sampling": a.sampling.to_json()},
            "metrics": {"precision_percent": round1(score.percent()), "precision": score},
        });
        write_manifest(path, &manifest)?;
    }
    if !score.faults.is_empty() {
        return Err(Failure::Subject(anyhow::anyhow!(
            "{} faulted on {} inputs, first: {}",
            subject.name,
            score.faults.len(),
            score.faults[0]
        )));
    }
    Ok(ExitCode::SUCCESS)
}

fn eval_recall(a: RecallArgs) -> CmdResult {
    let grammar = read_grammar(&a.grammar)?;
    let inputs = read_lines(&a.inputs)?;
    if inputs.is_empty() {
        return Err(Failure::Usage(anyhow::anyhow!("{} holds no inputs", a.inputs.display())));
    }
    let score = pipeline::eval_recall(&grammar, &inputs);
    println!(
        "recall: {} ({}/{} recognized)",
        percent(score.percent()),
        score.accepted,
        score.total
    );
    if let Some(path) = &a.manifest {
        let manifest = json!({
            "command": "eval-recall",
            "grammar": a.grammar.display().to_string(),
            "inputs": a.inputs.display().to_string(),
            "metrics": {"recall_percent": round1(score.percent()), "recall": score},
        });
        write_manifest(path, &manifest)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn list() -> CmdResult {
    for s in subjects::list_subjects() {
        let golden = if s.has_golden() { "golden" } else { "-" };
        println!("{:<16} {:<7} {}", s.name, golden, s.summary);
    }
    Ok(ExitCode::SUCCESS)
}

fn golden(name: &str, output: Option<PathBuf>) -> CmdResult {
    let subject = find_subject(name)?;
    let Some(g) = subject.golden() else {
        return Err(Failure::Usage(anyhow::anyhow!("{name} has no golden grammar")));
    };
    let text = g.to_json_string() + "\n";
    match output {
        Some(path) => write_atomic(&path, text.as_bytes())?,
        None => print!("{text}"),
    }
    Ok(ExitCode::SUCCESS)
}
