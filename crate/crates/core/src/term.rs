//! Terms and atoms.
//!
//! Terms are totally ordered: every constant precedes every variable, and
//! within a kind the order is lexicographic on `(name, fresh_index)`. The
//! derived `Ord` implementations below encode exactly that order, which the
//! rest of the crate relies on (partition representatives, canonical forms).

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// Reserved predicate carrying the answer variables of a non-Boolean query.
pub const ANSWER_PREDICATE: &str = "__ans";
/// Prefix of auxiliary predicates introduced by head decomposition.
pub const AUX_PREFIX: &str = "__aux_";
/// Name of chase nulls (`__n0`, `__n1`, ...).
pub const NULL_NAME: &str = "__n";
/// Name of canonical variables produced by [`crate::ConjunctiveQuery::canonicalize`].
pub(crate) const CANONICAL_VAR: &str = "_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermKind {
    Constant,
    Variable,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    kind: TermKind,
    name: Arc<str>,
    fresh_index: Option<u32>,
}

impl Term {
    pub fn constant(name: impl Into<Arc<str>>) -> Self {
        Term { kind: TermKind::Constant, name: name.into(), fresh_index: None }
    }

    pub fn variable(name: impl Into<Arc<str>>) -> Self {
        Term { kind: TermKind::Variable, name: name.into(), fresh_index: None }
    }

    /// A machine-generated variable `name` carrying a fresh index.
    pub fn fresh_variable(name: impl Into<Arc<str>>, index: u32) -> Self {
        Term { kind: TermKind::Variable, name: name.into(), fresh_index: Some(index) }
    }

    /// The `index`-th labelled null of a chase run.
    pub fn null(index: u32) -> Self {
        Term { kind: TermKind::Constant, name: NULL_NAME.into(), fresh_index: Some(index) }
    }

    pub(crate) fn canonical_variable(index: u32) -> Self {
        Self::fresh_variable(CANONICAL_VAR, index)
    }

    pub fn kind(&self) -> TermKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn fresh_index(&self) -> Option<u32> {
        self.fresh_index
    }

    pub fn is_variable(&self) -> bool {
        self.kind == TermKind::Variable
    }

    pub fn is_constant(&self) -> bool {
        self.kind == TermKind::Constant
    }

    pub fn is_null(&self) -> bool {
        self.is_constant() && &*self.name == NULL_NAME && self.fresh_index.is_some()
    }

    /// Same name and kind, different fresh index.
    pub(crate) fn with_index(&self, index: u32) -> Self {
        Term { kind: self.kind, name: self.name.clone(), fresh_index: Some(index) }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.fresh_index) {
            (_, None) => f.write_str(&self.name),
            (TermKind::Variable, Some(i)) if &*self.name == CANONICAL_VAR => write!(f, "V{i}"),
            (TermKind::Variable, Some(i)) => write!(f, "{}_{}", self.name, i),
            (TermKind::Constant, Some(i)) => write!(f, "{}{}", self.name, i),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    predicate: Arc<str>,
    args: Vec<Term>,
}

impl Atom {
    /// Builds an atom. Arity is the length of `args` and must be positive.
    pub fn new(predicate: impl Into<Arc<str>>, args: Vec<Term>) -> Self {
        assert!(!args.is_empty(), "atoms have positive arity");
        Atom { predicate: predicate.into(), args }
    }

    pub fn predicate(&self) -> &str {
        &self.predicate
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn args(&self) -> &[Term] {
        &self.args
    }

    pub fn same_predicate(&self, other: &Atom) -> bool {
        self.predicate == other.predicate && self.args.len() == other.args.len()
    }

    pub fn variables(&self) -> impl Iterator<Item = &Term> {
        self.args.iter().filter(|t| t.is_variable())
    }

    /// Rebuilds the atom with every argument passed through `f`.
    pub fn map_terms(&self, mut f: impl FnMut(&Term) -> Term) -> Atom {
        Atom { predicate: self.predicate.clone(), args: self.args.iter().map(&mut f).collect() }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.predicate)?;
        for (i, t) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{t}")?;
        }
        f.write_str(")")
    }
}

pub fn vars_of<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> BTreeSet<Term> {
    atoms.into_iter().flat_map(|a| a.variables().cloned()).collect()
}

pub fn terms_of<'a>(atoms: impl IntoIterator<Item = &'a Atom>) -> BTreeSet<Term> {
    atoms.into_iter().flat_map(|a| a.args().iter().cloned()).collect()
}

/// Sorts and deduplicates, turning a list into the set representation used
/// throughout the crate.
pub fn normalize_atoms(mut atoms: Vec<Atom>) -> Vec<Atom> {
    atoms.sort();
    atoms.dedup();
    atoms
}
