use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::homomorphism::core;
use crate::query::ConjunctiveQuery;
use crate::rule::{ExistentialRule, FreshCounter};
use crate::unification::{
    beta_unchecked, enumerate_aggregated, general_piece_unifiers, single_piece_unifiers, GeneralCap,
    PieceUnifier,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OperatorKind {
    FullPiece,
    SinglePiece,
    Aggregated,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 3] =
        [OperatorKind::FullPiece, OperatorKind::SinglePiece, OperatorKind::Aggregated];

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::FullPiece => "full-piece",
            OperatorKind::SinglePiece => "single-piece",
            OperatorKind::Aggregated => "aggregated",
        }
    }

    /// Whether dropping covered queries before exploring them is safe.
    pub fn is_prunable(self) -> bool {
        !matches!(self, OperatorKind::SinglePiece)
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        OperatorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown operator `{s}` (expected full-piece, single-piece or aggregated)"))
    }
}

/// Maps a Boolean query and a rule set to its one-step rewritings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RewritingOperator {
    pub kind: OperatorKind,
    pub core_reduce: bool,
    pub cap: GeneralCap,
}

pub fn make_operator(kind: OperatorKind) -> RewritingOperator {
    RewritingOperator { kind, core_reduce: true, cap: GeneralCap::default() }
}

impl RewritingOperator {
    pub fn with_core_reduce(mut self, on: bool) -> Self {
        self.core_reduce = on;
        self
    }

    /// Unifiers used for one rule. Each call works on fresh rule copies.
    pub fn unifiers(
        &self,
        query: &ConjunctiveQuery,
        rule: &ExistentialRule,
        counter: &FreshCounter,
    ) -> Result<Vec<PieceUnifier>> {
        match self.kind {
            OperatorKind::FullPiece => general_piece_unifiers(query, &rule.freshen(counter), self.cap),
            OperatorKind::SinglePiece => {
                require_atomic(rule)?;
                Ok(single_piece_unifiers(query, &rule.freshen(counter)))
            }
            OperatorKind::Aggregated => {
                require_atomic(rule)?;
                Ok(enumerate_aggregated(query, rule, counter).into_iter().map(|a| a.merged).collect())
            }
        }
    }

    /// One-step rewritings of a Boolean query, canonicalized and (when
    /// enabled) core-reduced. Duplicates are kept; they count as generated.
    pub fn apply(&self, query: &ConjunctiveQuery, rules: &[ExistentialRule]) -> Result<Vec<ConjunctiveQuery>> {
        // a local counter keeps fresh names, hence outputs, independent of scheduling
        let counter = FreshCounter::new();
        let mut out = Vec::new();
        for rule in rules {
            for mu in self.unifiers(query, rule, &counter)? {
                out.push(self.finish(beta_unchecked(query.atoms(), &mu)?));
            }
        }
        Ok(out)
    }

    pub(crate) fn finish(&self, q: ConjunctiveQuery) -> ConjunctiveQuery {
        if self.core_reduce {
            core(&q).canonicalize()
        } else {
            q.canonicalize()
        }
    }
}

fn require_atomic(rule: &ExistentialRule) -> Result<()> {
    if rule.has_atomic_head() {
        Ok(())
    } else {
        Err(Error::NonAtomicHead(rule.label().to_owned()))
    }
}
