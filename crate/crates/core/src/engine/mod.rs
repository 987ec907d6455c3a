//! Breadth-first rewriting with cover maintenance.
//!
//! Each iteration rewrites the queries of the exploration frontier, then
//! recomputes a cover of everything known so far, preferring queries that
//! were already explored. Newly kept queries form the next frontier. The
//! loop stops when the frontier empties or a guard fires.

mod operator;

pub use operator::{make_operator, OperatorKind, RewritingOperator};

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::cover::select;
use crate::error::{Error, Result};
use crate::homomorphism::{core, has_homomorphism, more_general};
use crate::query::ConjunctiveQuery;
use crate::rule::ExistentialRule;
use crate::term::AUX_PREFIX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_depth: Option<usize>,
    pub max_generated: Option<usize>,
    pub timeout: Option<Duration>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { max_depth: None, max_generated: Some(100_000), timeout: Some(Duration::from_secs(60)) }
    }
}

impl Limits {
    pub fn unbounded() -> Self {
        Limits { max_depth: None, max_generated: None, timeout: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxDepth,
    MaxGenerated,
    Timeout,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::MaxDepth => "depth limit reached",
            StopReason::MaxGenerated => "generated-query limit reached",
            StopReason::Timeout => "timeout",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteConfig {
    pub operator: OperatorKind,
    pub core_reduce: bool,
    pub limits: Limits,
    /// Worker threads for generation; `None` uses the global pool.
    pub threads: Option<usize>,
    /// Re-check loop invariants 1, 2 and 4 after every iteration.
    pub debug_invariants: bool,
}

impl Default for RewriteConfig {
    fn default() -> Self {
        RewriteConfig {
            operator: OperatorKind::Aggregated,
            core_reduce: true,
            limits: Limits::default(),
            threads: None,
            debug_invariants: false,
        }
    }
}

impl RewriteConfig {
    pub fn with_operator(operator: OperatorKind) -> Self {
        RewriteConfig { operator, ..Default::default() }
    }

    pub fn rewriting_operator(&self) -> RewritingOperator {
        make_operator(self.operator).with_core_reduce(self.core_reduce)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewritingResult {
    /// Final cover, answer variables restored, sorted. Queries over
    /// auxiliary predicates are left out since no fact base can match them.
    pub cover: Vec<ConjunctiveQuery>,
    /// Iteration at which each cover element was produced (0 = input).
    pub depths: Vec<usize>,
    /// Total one-step rewritings built, duplicates included.
    pub generated_count: usize,
    pub explored_count: usize,
    /// Number of iterations that kept at least one new query.
    pub depth_reached: usize,
    pub terminated: bool,
    pub stop_reason: Option<StopReason>,
    /// Cover elements dropped because they mention auxiliary predicates.
    pub auxiliary_dropped: usize,
}

/// Runs the breadth-first loop on `query`.
pub fn rewrite(
    query: &ConjunctiveQuery,
    rules: &[ExistentialRule],
    config: &RewriteConfig,
) -> Result<RewritingResult> {
    match config.threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::Invariant(format!("thread pool: {e}")))?;
            pool.install(|| Run::new(query, rules, config).run())
        }
        None => Run::new(query, rules, config).run(),
    }
}

struct Run<'a> {
    query: &'a ConjunctiveQuery,
    rules: &'a [ExistentialRule],
    config: &'a RewriteConfig,
    op: RewritingOperator,
    started: Instant,
}

enum Generation {
    Done(Vec<Vec<ConjunctiveQuery>>),
    Stopped(StopReason),
}

impl<'a> Run<'a> {
    fn new(query: &'a ConjunctiveQuery, rules: &'a [ExistentialRule], config: &'a RewriteConfig) -> Self {
        Run { query, rules, config, op: config.rewriting_operator(), started: Instant::now() }
    }

    fn timed_out(&self) -> bool {
        self.config.limits.timeout.is_some_and(|t| self.started.elapsed() > t)
    }

    fn run(&self) -> Result<RewritingResult> {
        let start = self.op.finish(self.query.attach_answer_atom()?);
        let mut depth_of: BTreeMap<ConjunctiveQuery, usize> = BTreeMap::new();
        depth_of.insert(start.clone(), 0);
        let mut explored_set: Vec<ConjunctiveQuery> = vec![start.clone()];
        let mut frontier: Vec<ConjunctiveQuery> = vec![start];
        let mut generated = 0usize;
        let mut explored = 0usize;
        let mut iteration = 0usize;
        let mut depth_reached = 0usize;
        let mut stop = None;

        while !frontier.is_empty() {
            if self.config.limits.max_depth.is_some_and(|d| iteration >= d) {
                stop = Some(StopReason::MaxDepth);
                break;
            }
            if self.timed_out() {
                stop = Some(StopReason::Timeout);
                break;
            }
            let batches = match self.generate(&frontier, generated)? {
                Generation::Done(b) => b,
                Generation::Stopped(reason) => {
                    stop = Some(reason);
                    break;
                }
            };
            explored += frontier.len();
            generated += batches.iter().map(Vec::len).sum::<usize>();
            iteration += 1;

            let mut fresh: Vec<ConjunctiveQuery> = batches.into_iter().flatten().collect();
            fresh.sort();
            fresh.dedup();
            let parallel = rayon::current_num_threads() > 1;
            let sel = select(&explored_set, &fresh, true, parallel);
            for q in &sel.fresh {
                depth_of.entry(q.clone()).or_insert(iteration);
            }
            if !sel.fresh.is_empty() {
                depth_reached = iteration;
            }
            explored_set = sel.explored.into_iter().chain(sel.fresh.iter().cloned()).collect();
            frontier = sel.fresh;

            if self.config.debug_invariants {
                self.check_invariants(&explored_set, &frontier)?;
            }
        }

        let mut rows: Vec<(ConjunctiveQuery, usize)> = Vec::new();
        let mut auxiliary_dropped = 0;
        for q in &explored_set {
            if q.atoms().iter().any(|a| a.predicate().starts_with(AUX_PREFIX)) {
                auxiliary_dropped += 1;
                continue;
            }
            rows.push((q.strip_answer_atom()?, depth_of[q]));
        }
        rows.sort();
        let (cover, depths) = rows.into_iter().unzip();
        Ok(RewritingResult {
            cover,
            depths,
            generated_count: generated,
            explored_count: explored,
            depth_reached,
            terminated: stop.is_none(),
            stop_reason: stop,
            auxiliary_dropped,
        })
    }

    /// One batch per frontier query, in frontier order.
    fn generate(&self, frontier: &[ConjunctiveQuery], already: usize) -> Result<Generation> {
        let total = AtomicUsize::new(already);
        let abort = AtomicBool::new(false);
        let reason: parking::Slot = parking::Slot::default();
        let work = |q: &ConjunctiveQuery| -> Result<Vec<ConjunctiveQuery>> {
            if abort.load(Ordering::Relaxed) {
                return Ok(Vec::new());
            }
            if self.timed_out() {
                reason.set(StopReason::Timeout);
                abort.store(true, Ordering::Relaxed);
                return Ok(Vec::new());
            }
            let out = self.op.apply(q, self.rules)?;
            let now = total.fetch_add(out.len(), Ordering::Relaxed) + out.len();
            if self.config.limits.max_generated.is_some_and(|m| now > m) {
                reason.set(StopReason::MaxGenerated);
                abort.store(true, Ordering::Relaxed);
            }
            Ok(out)
        };
        let batches: Vec<Vec<ConjunctiveQuery>> = if rayon::current_num_threads() > 1 && frontier.len() > 1 {
            frontier.par_iter().map(work).collect::<Result<_>>()?
        } else {
            frontier.iter().map(work).collect::<Result<_>>()?
        };
        match reason.get() {
            Some(r) => Ok(Generation::Stopped(r)),
            None => Ok(Generation::Done(batches)),
        }
    }

    fn check_invariants(&self, kept: &[ConjunctiveQuery], frontier: &[ConjunctiveQuery]) -> Result<()> {
        let kept_set: HashSet<&ConjunctiveQuery> = kept.iter().collect();
        if let Some(q) = frontier.iter().find(|q| !kept_set.contains(q)) {
            return Err(Error::Invariant(format!("frontier query {q} is not kept")));
        }
        let frontier_set: HashSet<&ConjunctiveQuery> = frontier.iter().collect();
        for q in kept.iter().filter(|q| !frontier_set.contains(q)) {
            for r in self.op.apply(q, self.rules)? {
                if !kept.iter().any(|k| more_general(k, &r)) {
                    return Err(Error::Invariant(format!("rewriting {r} of explored {q} is not covered")));
                }
            }
        }
        for (i, a) in kept.iter().enumerate() {
            for b in &kept[i + 1..] {
                if has_homomorphism(a.atoms(), b.atoms()) || has_homomorphism(b.atoms(), a.atoms()) {
                    return Err(Error::Invariant(format!("kept queries {a} and {b} are comparable")));
                }
            }
        }
        Ok(())
    }
}

mod parking {
    use std::sync::Mutex;

    use super::StopReason;

    /// First stop reason recorded by any worker.
    #[derive(Default)]
    pub struct Slot(Mutex<Option<StopReason>>);

    impl Slot {
        pub fn set(&self, r: StopReason) {
            let mut g = self.0.lock().unwrap_or_else(|e| e.into_inner());
            g.get_or_insert(r);
        }

        pub fn get(&self) -> Option<StopReason> {
            *self.0.lock().unwrap_or_else(|e| e.into_inner())
        }
    }
}

/// Every distinct rewriting reachable in at most `depth` steps, without
/// cover pruning, paired with the step at which it first appeared. The
/// input itself is included at step 0. Queries are Boolean (answer atom
/// attached) and processed by `op` as in [`rewrite`].
pub fn closure(
    query: &ConjunctiveQuery,
    rules: &[ExistentialRule],
    op: &RewritingOperator,
    depth: usize,
) -> Result<Vec<(ConjunctiveQuery, usize)>> {
    let start = op.finish(query.attach_answer_atom()?);
    let mut seen: BTreeMap<ConjunctiveQuery, usize> = BTreeMap::new();
    seen.insert(start.clone(), 0);
    let mut layer = vec![start];
    for step in 1..=depth {
        let mut next = Vec::new();
        for q in &layer {
            for r in op.apply(q, rules)? {
                if !seen.contains_key(&r) {
                    seen.insert(r.clone(), step);
                    next.push(r);
                }
            }
        }
        layer = next;
    }
    let mut out: Vec<(ConjunctiveQuery, usize)> = seen.into_iter().collect();
    out.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    Ok(out)
}

/// Core-reduced form of the input as the engine sees it (answer atom
/// attached, canonical names).
pub fn prepared_query(query: &ConjunctiveQuery) -> Result<ConjunctiveQuery> {
    Ok(core(&query.attach_answer_atom()?).canonicalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::homomorphism::equivalent;
    use crate::test_util::*;

    fn mutual_recursion() -> (ConjunctiveQuery, Vec<ExistentialRule>) {
        (
            cq(&[("t", &["U"])]),
            vec![
                rule("R1", &[("t", &["X"]), ("p", &["X", "Y"])], &[("r", &["Y"])]),
                rule("R2", &[("r", &["X"]), ("p", &["X", "Y"])], &[("t", &["Y"])]),
            ],
        )
    }

    fn debug_config(op: OperatorKind) -> RewriteConfig {
        RewriteConfig { debug_invariants: true, ..RewriteConfig::with_operator(op) }
    }

    #[test]
    fn mutual_recursion_cover_has_two_queries() {
        let (q, rules) = mutual_recursion();
        let res = rewrite(&q, &rules, &debug_config(OperatorKind::Aggregated)).unwrap();
        assert!(res.terminated);
        assert_eq!(res.cover.len(), 2);
        assert!(res.cover.iter().any(|c| equivalent(c, &q)));
        let q1 = cq(&[("r", &["X"]), ("p", &["X", "Y"])]);
        assert!(res.cover.iter().any(|c| equivalent(c, &q1)));
        assert_eq!(res.depth_reached, 1);
        assert!(res.generated_count + 1 >= res.cover.len());
    }

    #[test]
    fn no_rules_gives_core() {
        let q = cq(&[("p", &["X", "Y"]), ("p", &["X", "Z"])]);
        let res = rewrite(&q, &[], &RewriteConfig::default()).unwrap();
        assert_eq!(res.cover, vec![cq(&[("p", &["X", "Y"])]).canonicalize()]);
        assert_eq!(res.depth_reached, 0);
        assert_eq!(res.generated_count, 0);
    }

    #[test]
    fn diagonal_rule_reaches_r_x_x() {
        let q = cq(&[("p", &["Y", "Z"]), ("p", &["Z", "Y"])]);
        let r = rule("R", &[("r", &["X", "X"])], &[("p", &["X", "X"])]);
        let res = rewrite(&q, &[r], &debug_config(OperatorKind::Aggregated)).unwrap();
        let target = cq(&[("r", &["X", "X"])]);
        assert!(res.cover.iter().any(|c| equivalent(c, &target)));
    }

    #[test]
    fn guard_on_generated() {
        let (q, rules) = mutual_recursion();
        let mut cfg = RewriteConfig::default();
        cfg.limits.max_generated = Some(1);
        let res = rewrite(&q, &rules, &cfg).unwrap();
        assert!(!res.terminated);
        assert_eq!(res.stop_reason, Some(StopReason::MaxGenerated));
    }

    #[test]
    fn guard_on_depth() {
        // transitivity over an answer-bound path never reaches a finite cover
        let q = ConjunctiveQuery::new(atoms(&[("e", &["a", "X"])]), vec![var("X")]).unwrap();
        let r = rule("R", &[("e", &["X", "Y"]), ("e", &["Y", "Z"])], &[("e", &["X", "Z"])]);
        let mut cfg = RewriteConfig::default();
        cfg.limits.max_depth = Some(3);
        let res = rewrite(&q, &[r], &cfg).unwrap();
        assert!(!res.terminated);
        assert_eq!(res.stop_reason, Some(StopReason::MaxDepth));
        assert_eq!(res.depth_reached, 3);
    }

    #[test]
    fn answer_variables_restored() {
        let q = ConjunctiveQuery::new(atoms(&[("p", &["X", "Y"])]), vec![var("X")]).unwrap();
        let r = rule("R", &[("q", &["X"])], &[("p", &["X", "Y"])]);
        let res = rewrite(&q, &[r], &debug_config(OperatorKind::Aggregated)).unwrap();
        assert_eq!(res.cover.len(), 2);
        assert!(res.cover.iter().all(|c| c.answer().len() == 1));
    }

    #[test]
    fn thread_count_does_not_change_output() {
        let (q, rules) = mutual_recursion();
        let one = rewrite(&q, &rules, &RewriteConfig { threads: Some(1), ..Default::default() }).unwrap();
        let four = rewrite(&q, &rules, &RewriteConfig { threads: Some(4), ..Default::default() }).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn closure_keeps_everything() {
        let (q, rules) = mutual_recursion();
        let op = make_operator(OperatorKind::SinglePiece);
        let c = closure(&q, &rules, &op, 2).unwrap();
        assert_eq!(c[0].1, 0);
        assert!(c.len() >= 3);
    }
}
