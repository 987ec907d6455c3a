//! Runs several operators on the same input and tabulates their statistics.

use std::fmt;
use std::time::{Duration, Instant};

use serde::Serialize;

use crate::engine::{rewrite, OperatorKind, RewriteConfig, RewritingResult};
use crate::error::{Error, Result};
use crate::query::ConjunctiveQuery;
use crate::rule::{decompose_all, ExistentialRule};

/// Rules as a given operator sees them. Single-piece and aggregated
/// operators need atomic heads; with `decompose` set, other rules are split
/// through auxiliary predicates, otherwise they are rejected.
pub fn rules_for(kind: OperatorKind, rules: &[ExistentialRule], decompose: bool) -> Result<Vec<ExistentialRule>> {
    if kind == OperatorKind::FullPiece || rules.iter().all(ExistentialRule::has_atomic_head) {
        return Ok(rules.to_vec());
    }
    if decompose {
        return Ok(decompose_all(rules));
    }
    let r = rules.iter().find(|r| !r.has_atomic_head()).expect("some head is not atomic");
    Err(Error::NonAtomicHead(r.label().to_owned()))
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareRow {
    pub operator: String,
    pub output: usize,
    pub generated: usize,
    pub depth: usize,
    pub time_ms: f64,
    pub terminated: bool,
    /// Set when the operator refused the input.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub rows: Vec<CompareRow>,
    /// Whether all terminated runs of prunable operators agree on the
    /// cover size.
    pub consistent: bool,
}

impl CompareReport {
    pub fn row(&self, kind: OperatorKind) -> Option<&CompareRow> {
        self.rows.iter().find(|r| r.operator == kind.name())
    }
}

fn row_of(kind: OperatorKind, res: &RewritingResult, elapsed: Duration) -> CompareRow {
    CompareRow {
        operator: kind.name().to_owned(),
        output: res.cover.len(),
        generated: res.generated_count,
        depth: res.depth_reached,
        time_ms: elapsed.as_secs_f64() * 1000.0,
        terminated: res.terminated,
        error: None,
    }
}

/// Runs each of `kinds` with `base` (operator overridden). Operator errors
/// such as size-cap refusals are recorded in the row, not returned.
pub fn compare(
    query: &ConjunctiveQuery,
    rules: &[ExistentialRule],
    kinds: &[OperatorKind],
    base: &RewriteConfig,
    decompose: bool,
) -> CompareReport {
    let mut rows = Vec::with_capacity(kinds.len());
    let mut sizes = Vec::new();
    for &kind in kinds {
        let config = RewriteConfig { operator: kind, ..base.clone() };
        let started = Instant::now();
        let outcome = rules_for(kind, rules, decompose).and_then(|rs| rewrite(query, &rs, &config));
        match outcome {
            Ok(res) => {
                if res.terminated && kind.is_prunable() {
                    sizes.push(res.cover.len());
                }
                rows.push(row_of(kind, &res, started.elapsed()));
            }
            Err(e) => rows.push(CompareRow {
                operator: kind.name().to_owned(),
                output: 0,
                generated: 0,
                depth: 0,
                time_ms: started.elapsed().as_secs_f64() * 1000.0,
                terminated: false,
                error: Some(e.to_string()),
            }),
        }
    }
    let consistent = sizes.windows(2).all(|w| w[0] == w[1]);
    CompareReport { rows, consistent }
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<14} {:>8} {:>10} {:>6} {:>10}  status", "operator", "#output", "#generated", "depth", "time(ms)")?;
        for r in &self.rows {
            let status = match (&r.error, r.terminated) {
                (Some(e), _) => format!("error: {e}"),
                (None, true) => "terminated".to_owned(),
                (None, false) => "partial".to_owned(),
            };
            writeln!(
                f,
                "{:<14} {:>8} {:>10} {:>6} {:>10.2}  {status}",
                r.operator, r.output, r.generated, r.depth, r.time_ms
            )?;
        }
        Ok(())
    }
}
