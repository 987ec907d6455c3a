//! A DLGP-style text format for rules, facts and queries, and JSON output
//! of rewriting results.
//!
//! Rules are written head first: `[label] p(X,Y) :- q(X).` Head-only
//! variables are existential. Identifiers starting with an uppercase letter
//! are variables; predicates and constants start with a lowercase letter.
//! Names beginning with `__` are reserved.

mod parser;

pub use parser::{parse_document, ParseError, ParseErrorKind, Position};

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use serde::Serialize;

use crate::engine::RewritingResult;
use crate::query::ConjunctiveQuery;
use crate::rule::{write_conjunction, ExistentialRule, FreshCounter};
use crate::term::{Atom, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: Position,
    pub end: Position,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StatementKind {
    Rule(usize),
    Fact(usize),
    Query(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Statement {
    pub kind: StatementKind,
    pub span: Span,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Document {
    pub rules: Vec<ExistentialRule>,
    /// One entry per fact statement; variables are scoped to the statement.
    pub facts: Vec<Vec<Atom>>,
    pub queries: Vec<ConjunctiveQuery>,
    pub statements: Vec<Statement>,
}

impl Document {
    /// All facts as one atom set, renaming variables apart per statement.
    pub fn fact_base(&self) -> Vec<Atom> {
        let counter = FreshCounter::new();
        let mut out = Vec::new();
        for stmt in &self.facts {
            let index = counter.next();
            let mut map: HashMap<Term, Term> = HashMap::new();
            for a in stmt {
                out.push(a.map_terms(|t| {
                    if t.is_variable() {
                        map.entry(t.clone()).or_insert_with(|| Term::fresh_variable(t.name(), index)).clone()
                    } else {
                        t.clone()
                    }
                }));
            }
        }
        out
    }

    pub fn span_of(&self, kind: StatementKind) -> Option<Span> {
        self.statements.iter().find(|s| s.kind == kind).map(|s| s.span)
    }

    /// Predicates used with two different arities across `docs`.
    pub fn arity_conflicts(docs: &[&Document]) -> Vec<(String, usize, usize)> {
        let mut seen: HashMap<String, usize> = HashMap::new();
        let mut out = Vec::new();
        for d in docs {
            let atoms = d
                .rules
                .iter()
                .flat_map(|r| r.body().iter().chain(r.head()))
                .chain(d.facts.iter().flatten())
                .chain(d.queries.iter().flat_map(|q| q.atoms()));
            for a in atoms {
                match seen.get(a.predicate()) {
                    Some(&n) if n != a.arity() => out.push((a.predicate().to_owned(), n, a.arity())),
                    Some(_) => {}
                    None => {
                        seen.insert(a.predicate().to_owned(), a.arity());
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for Document {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.statements {
            match s.kind {
                StatementKind::Rule(i) => writeln!(f, "{}", self.rules[i])?,
                StatementKind::Fact(i) => {
                    write_conjunction(f, &self.facts[i])?;
                    writeln!(f, ".")?;
                }
                StatementKind::Query(i) => writeln!(f, "{}", self.queries[i])?,
            }
        }
        Ok(())
    }
}

/// Statements for a cover, one per line, in the given order.
pub fn write_cover(cover: &[ConjunctiveQuery]) -> String {
    let mut s = String::new();
    for q in cover {
        let _ = writeln!(s, "{}", q.canonicalize());
    }
    s
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub generated: usize,
    pub output: usize,
    pub depth: usize,
    pub terminated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResultJson {
    pub cover: Vec<String>,
    pub stats: Stats,
}

impl From<&RewritingResult> for ResultJson {
    fn from(r: &RewritingResult) -> Self {
        ResultJson {
            cover: r.cover.iter().map(|q| q.canonicalize().to_string()).collect(),
            stats: Stats {
                generated: r.generated_count,
                output: r.cover.len(),
                depth: r.depth_reached,
                terminated: r.terminated,
            },
        }
    }
}

pub fn result_to_json(r: &RewritingResult) -> String {
    serde_json::to_string_pretty(&ResultJson::from(r)).expect("plain data serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::*;

    #[test]
    fn document_round_trip() {
        let text = "[r1] p(X,Y) :- q(X).\nq(a), p(a,B).\n?(U) :- p(U,V).\n? :- q(c).\n";
        let d = parse_document(text).unwrap();
        assert_eq!(d.to_string(), text);
        let again = parse_document(&d.to_string()).unwrap();
        assert_eq!(again.rules, d.rules);
        assert_eq!(again.facts, d.facts);
        assert_eq!(again.queries, d.queries);
    }

    #[test]
    fn cover_lines_parse_back() {
        let cover = vec![cq(&[("t", &["U"])]), cq(&[("r", &["X"]), ("p", &["X", "Y"])])];
        let text = write_cover(&cover);
        assert_eq!(text.lines().count(), 2);
        let d = parse_document(&text).unwrap();
        for (a, b) in d.queries.iter().zip(&cover) {
            assert_eq!(a.canonicalize(), b.canonicalize());
        }
    }

    #[test]
    fn fact_statements_keep_variables_apart() {
        let d = parse_document("p(a,B).\nq(B).").unwrap();
        let base = d.fact_base();
        assert_ne!(base[0].args()[1], base[1].args()[0]);
    }

    #[test]
    fn json_shape() {
        let r = RewritingResult {
            cover: vec![cq(&[("t", &["U"])])],
            depths: vec![0],
            generated_count: 2,
            explored_count: 2,
            depth_reached: 1,
            terminated: true,
            stop_reason: None,
            auxiliary_dropped: 0,
        };
        let j = serde_json::to_string(&ResultJson::from(&r)).unwrap();
        assert_eq!(
            j,
            r#"{"cover":["? :- t(V0)."],"stats":{"generated":2,"output":1,"depth":1,"terminated":true}}"#
        );
    }
}
