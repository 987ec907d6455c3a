use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use piecerew::compare::{compare, rules_for, CompareReport};
use piecerew::dlgp::{parse_document, result_to_json, write_cover, Document, ResultJson};
use piecerew::engine::{rewrite, Limits, OperatorKind, RewriteConfig, RewritingResult};
use piecerew::verify::{chase_answers, cover_answers, verify_rewriting_set, VerifyConfig};
use piecerew::{Atom, ConjunctiveQuery, ExistentialRule, Term};

const BUNDLED_ONTOLOGY: &str = include_str!("../../../data/synthetic/ontology.dlgp");
const BUNDLED_QUERIES: &str = include_str!("../../../data/synthetic/queries.dlgp");

const EXIT_INPUT: u8 = 1;
const EXIT_GUARD: u8 = 2;
const EXIT_CHECK: u8 = 3;

#[derive(Parser)]
#[command(name = "piecerew", version, about = "Rewrite conjunctive queries under existential rules into a union of conjunctive queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a minimal cover of the rewritings of a query.
    Rewrite(RewriteArgs),
    /// Check a rewriting set against the chase.
    Verify(VerifyArgs),
    /// Run several operators on the same input and tabulate statistics.
    Compare(CompareArgs),
    /// Compare operators on every query of an ontology (default: the bundled synthetic one).
    Bench(BenchArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Rules file; may also hold facts and the query.
    #[arg(long)]
    rules: PathBuf,
    /// Query file; when absent the query is read from the rules file.
    #[arg(long)]
    query: Option<PathBuf>,
    /// Fact base used to list answers (rewrite) or cross-check them (verify).
    #[arg(long)]
    facts: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct EngineArgs {
    #[arg(long, default_value = "aggregated")]
    operator: OperatorKind,
    #[arg(long)]
    no_core_reduce: bool,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    max_generated: usize,
    /// Seconds.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    debug_invariants: bool,
    /// Reject rules with several head atoms instead of splitting them.
    #[arg(long)]
    no_decompose: bool,
    /// Allow the single-piece operator with cover pruning (its output may be incomplete).
    #[arg(long)]
    no_prune_regression_check: bool,
}

impl EngineArgs {
    fn config(&self) -> RewriteConfig {
        RewriteConfig {
            operator: self.operator,
            core_reduce: !self.no_core_reduce,
            limits: Limits {
                max_depth: self.max_depth,
                max_generated: Some(self.max_generated),
                timeout: Some(Duration::from_secs_f64(self.timeout.max(0.0))),
            },
            threads: self.threads,
            debug_invariants: self.debug_invariants,
        }
    }
}

#[derive(Args)]
struct RewriteArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    engine: EngineArgs,
    /// Cover to check instead of rewriting again.
    #[arg(long)]
    cover: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Chase bound for soundness checks.
    #[arg(long)]
    chase_rank: Option<usize>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    engine: EngineArgs,
    /// Comma-separated operator list.
    #[arg(long, value_delimiter = ',', default_values_t = OperatorKind::ALL)]
    operators: Vec<OperatorKind>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    rules: Option<PathBuf>,
    #[arg(long)]
    queries: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineArgs,
    #[arg(long, value_delimiter = ',', default_values_t = OperatorKind::ALL)]
    operators: Vec<OperatorKind>,
    /// Baseline JSON to compare counts against.
    #[arg(long)]
    baseline: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: EXIT_INPUT, message: message.into() }
    }
}

impl From<piecerew::Error> for Failure {
    fn from(e: piecerew::Error) -> Self {
        Failure::input(e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Rewrite(a) => cmd_rewrite(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn parse_file(path: &Path, text: &str) -> Result<Document, Failure> {
    parse_document(text).map_err(|e| {
        let mut msg = format!("{}:{}", path.display(), e);
        if let Some(line) = text.lines().nth(e.at.line.saturating_sub(1)) {
            let gutter = e.at.line.to_string();
            msg.push_str(&format!(
                "\n {gutter} | {line}\n {} | {}^",
                " ".repeat(gutter.len()),
                " ".repeat(e.at.column.saturating_sub(1))
            ));
        }
        Failure::input(msg)
    })
}

struct Loaded {
    rules: Vec<ExistentialRule>,
    query: ConjunctiveQuery,
    facts: Option<Vec<Atom>>,
}

fn load(input: &InputArgs) -> Result<Loaded, Failure> {
    let rules_doc = parse_file(&input.rules, &read(&input.rules)?)?;
    let query_doc = match &input.query {
        Some(p) => Some(parse_file(p, &read(p)?)?),
        None => None,
    };
    let facts_doc = match &input.facts {
        Some(p) => Some(parse_file(p, &read(p)?)?),
        None => None,
    };
    let docs: Vec<&Document> = [Some(&rules_doc), query_doc.as_ref(), facts_doc.as_ref()].into_iter().flatten().collect();
    if let Some((p, a, b)) = Document::arity_conflicts(&docs).first() {
        return Err(Failure::input(format!("predicate `{p}` is used with arities {a} and {b}")));
    }
    let queries = query_doc.as_ref().unwrap_or(&rules_doc).queries.clone();
    let query = match queries.as_slice() {
        [q] => q.clone(),
        [] => return Err(Failure::input("no query found (expected a statement like `?(X) :- p(X,Y).`)")),
        _ => return Err(Failure::input(format!("expected one query, found {}", queries.len()))),
    };
    let mut all_facts = Document { facts: rules_doc.facts.clone(), ..Document::default() };
    if let Some(d) = &facts_doc {
        all_facts.facts.extend(d.facts.iter().cloned());
    }
    let has_facts = facts_doc.is_some() || !all_facts.facts.is_empty();
    Ok(Loaded { rules: rules_doc.rules, query, facts: has_facts.then(|| all_facts.fact_base()) })
}

fn check_operator(engine: &EngineArgs) -> Result<(), Failure> {
    if engine.operator == OperatorKind::SinglePiece && !engine.no_prune_regression_check {
        return Err(Failure::input(
            "the single-piece operator is not prunable, so its cover may miss rewritings; \
             pass --no-prune-regression-check to run it anyway",
        ));
    }
    Ok(())
}

fn run_engine(loaded: &Loaded, engine: &EngineArgs) -> Result<(RewritingResult, Vec<ExistentialRule>), Failure> {
    check_operator(engine)?;
    let rules = rules_for(engine.operator, &loaded.rules, !engine.no_decompose)?;
    let res = rewrite(&loaded.query, &rules, &engine.config())?;
    if let Some(reason) = res.stop_reason {
        eprintln!("warning: {reason}; output is partial");
    }
    Ok((res, rules))
}

fn tuple_string(t: &[Term]) -> String {
    let items: Vec<String> = t.iter().map(Term::to_string).collect();
    format!("({})", items.join(","))
}

fn cmd_rewrite(a: RewriteArgs) -> Outcome {
    let loaded = load(&a.input)?;
    let (res, _) = run_engine(&loaded, &a.engine)?;
    let answers = loaded.facts.as_ref().map(|f| cover_answers(&res.cover, f));
    if a.json {
        match &answers {
            None => println!("{}", result_to_json(&res)),
            Some(ans) => {
                let mut value = serde_json::to_value(ResultJson::from(&res)).expect("plain data serializes");
                value["answers"] = json!(ans.iter().map(|t| tuple_string(t)).collect::<Vec<_>>());
                println!("{}", serde_json::to_string_pretty(&value).expect("plain data serializes"));
            }
        }
    } else {
        print!("{}", write_cover(&res.cover));
        if let Some(ans) = &answers {
            for t in ans {
                println!("% answer {}", tuple_string(t));
            }
        }
        eprintln!(
            "% generated={} output={} depth={} terminated={}",
            res.generated_count,
            res.cover.len(),
            res.depth_reached,
            res.terminated
        );
    }
    Ok(if res.terminated { 0 } else { EXIT_GUARD })
}

fn supplied_cover(path: &Path, query: &ConjunctiveQuery) -> Result<RewritingResult, Failure> {
    let doc = parse_file(path, &read(path)?)?;
    if let Some(q) = doc.queries.iter().find(|q| q.answer().len() != query.answer().len()) {
        return Err(Failure::input(format!("cover element {q} has a different answer arity than the query")));
    }
    let n = doc.queries.len();
    // a supplied cover is taken as complete; depth 3 sets the chase bounds
    Ok(RewritingResult {
        cover: doc.queries,
        depths: vec![3; n],
        generated_count: n,
        explored_count: n,
        depth_reached: 3,
        terminated: true,
        stop_reason: None,
        auxiliary_dropped: 0,
    })
}

fn cmd_verify(a: VerifyArgs) -> Outcome {
    let loaded = load(&a.input)?;
    let (res, rules) = match &a.cover {
        Some(p) => {
            check_operator(&a.engine)?;
            (supplied_cover(p, &loaded.query)?, rules_for(a.engine.operator, &loaded.rules, !a.engine.no_decompose)?)
        }
        None => run_engine(&loaded, &a.engine)?,
    };
    let config = VerifyConfig { samples: a.samples, seed: a.seed, max_rank: a.chase_rank, ..VerifyConfig::default() };
    let report = verify_rewriting_set(&loaded.query, &rules, &res, &config)?;

    let mut facts_ok = true;
    let mut facts_json = serde_json::Value::Null;
    if let Some(facts) = &loaded.facts {
        let rank = a.chase_rank.unwrap_or(2 * res.depth_reached + 2).max(8);
        let from_cover = cover_answers(&res.cover, facts);
        let (from_chase, saturated) = chase_answers(&loaded.query, &rules, facts, rank);
        let missing: Vec<String> = from_chase.difference(&from_cover).map(|t| tuple_string(t)).collect();
        let unconfirmed: Vec<String> = from_cover.difference(&from_chase).map(|t| tuple_string(t)).collect();
        facts_ok = (missing.is_empty() || !res.terminated) && (unconfirmed.is_empty() || !saturated);
        facts_json = json!({"missing": missing, "unconfirmed": unconfirmed, "chase_saturated": saturated});
        if !a.json {
            for t in &missing {
                println!("answer {t} follows from the chase but not from the cover");
            }
            for t in &unconfirmed {
                println!("answer {t} from the cover not reached by the chase within rank {rank}");
            }
        }
    }

    let passed = report.passed() && facts_ok;
    if a.json {
        let mut value = serde_json::to_value(&report).expect("plain data serializes");
        value["passed"] = json!(passed);
        if !facts_json.is_null() {
            value["facts"] = facts_json;
        }
        println!("{}", serde_json::to_string_pretty(&value).expect("plain data serializes"));
    } else {
        for c in &report.soundness {
            let status = if c.sound { "sound" } else { "UNSOUND" };
            println!("{status:<8} depth {} rank {}  {}", c.depth, c.rank_bound, c.query);
        }
        if report.completeness_checked {
            println!(
                "completeness: {} sampled fact bases, {} entail the query",
                report.samples_checked, report.samples_entailed
            );
        } else {
            println!("completeness: skipped (rewriting did not terminate)");
        }
        if let Some(cx) = &report.counterexample {
            println!("counterexample (entailed at chase rank {}, no cover element maps):", cx.chase_rank);
            println!("{}.", cx.facts.join(", "));
        }
        for (x, y) in &report.comparable_pairs {
            println!("not minimal: {x} and {y} are comparable");
        }
        println!("{}", if passed { "PASS" } else { "FAIL" });
    }
    Ok(if !passed {
        EXIT_CHECK
    } else if !res.terminated {
        EXIT_GUARD
    } else {
        0
    })
}

fn cmd_compare(a: CompareArgs) -> Outcome {
    let loaded = load(&a.input)?;
    let report = compare(&loaded.query, &loaded.rules, &a.operators, &a.engine.config(), !a.engine.no_decompose);
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("plain data serializes"));
    } else {
        print!("{report}");
    }
    if !report.consistent {
        eprintln!("error: terminated prunable operators disagree on the cover size");
        return Ok(EXIT_CHECK);
    }
    Ok(0)
}

fn bench_rows(queries: &[ConjunctiveQuery], rules: &[ExistentialRule], a: &BenchArgs) -> Vec<(String, CompareReport)> {
    let config = a.engine.config();
    queries
        .iter()
        .map(|q| (q.to_string(), compare(q, rules, &a.operators, &config, !a.engine.no_decompose)))
        .collect()
}

fn bench_json(rows: &[(String, CompareReport)]) -> serde_json::Value {
    json!(rows
        .iter()
        .map(|(q, rep)| {
            let ops: serde_json::Map<String, serde_json::Value> = rep
                .rows
                .iter()
                .map(|r| (r.operator.clone(), json!({"output": r.output, "generated": r.generated, "terminated": r.terminated})))
                .collect();
            json!({"query": q, "operators": ops})
        })
        .collect::<Vec<_>>())
}

fn cmd_bench(a: BenchArgs) -> Outcome {
    let (rules_text, rules_name) = match &a.rules {
        Some(p) => (read(p)?, p.clone()),
        None => (BUNDLED_ONTOLOGY.to_owned(), PathBuf::from("<bundled ontology>")),
    };
    let (queries_text, queries_name) = match &a.queries {
        Some(p) => (read(p)?, p.clone()),
        None => (BUNDLED_QUERIES.to_owned(), PathBuf::from("<bundled queries>")),
    };
    let rules = parse_file(&rules_name, &rules_text)?.rules;
    let queries = parse_file(&queries_name, &queries_text)?.queries;
    let rows = bench_rows(&queries, &rules, &a);

    let mut code = 0;
    for (q, rep) in &rows {
        if rep.rows.iter().any(|r| r.error.is_none() && r.generated < r.output) {
            eprintln!("note: #generated < #output on {q} (the input query is not counted as generated)");
        }
        if rep.rows.iter().any(|r| !r.terminated) {
            code = code.max(EXIT_GUARD);
        }
    }
    let value = bench_json(&rows);
    if let Some(p) = &a.baseline {
        let baseline: serde_json::Value =
            serde_json::from_str(&read(p)?).map_err(|e| Failure::input(format!("{}: {e}", p.display())))?;
        if baseline != value {
            eprintln!("error: counts differ from baseline {}", p.display());
            code = EXIT_CHECK;
        }
    }
    if a.json {
        println!("{}", serde_json::to_string_pretty(&value).expect("plain data serializes"));
    } else {
        for (q, rep) in &rows {
            println!("{q}");
            print!("{rep}");
            println!();
        }
    }
    Ok(code)
}
