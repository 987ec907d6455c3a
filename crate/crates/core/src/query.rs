//! Conjunctive queries and their answer-atom encoding.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use crate::canonical::canonical_form;
use crate::error::{Error, Result};
use crate::term::{normalize_atoms, vars_of, Atom, Term, ANSWER_PREDICATE};

/// A conjunctive query: a set of atoms plus an ordered tuple of answer terms.
///
/// Atoms are kept sorted and deduplicated, so two queries with the same atom
/// set compare equal regardless of construction order. A query with an empty
/// answer tuple is Boolean.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConjunctiveQuery {
    atoms: Vec<Atom>,
    answer: Vec<Term>,
}

impl ConjunctiveQuery {
    pub fn boolean(atoms: Vec<Atom>) -> Self {
        ConjunctiveQuery { atoms: normalize_atoms(atoms), answer: Vec::new() }
    }

    /// Builds a query with answer terms; every answer variable must occur in
    /// the atoms.
    pub fn new(atoms: Vec<Atom>, answer: Vec<Term>) -> Result<Self> {
        let atoms = normalize_atoms(atoms);
        let vars = vars_of(&atoms);
        if let Some(t) = answer.iter().find(|t| t.is_variable() && !vars.contains(*t)) {
            return Err(Error::AnswerVariableUnbound(t.to_string()));
        }
        Ok(ConjunctiveQuery { atoms, answer })
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn answer(&self) -> &[Term] {
        &self.answer
    }

    pub fn is_boolean(&self) -> bool {
        self.answer.is_empty()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn variables(&self) -> BTreeSet<Term> {
        vars_of(&self.atoms)
    }

    pub fn contains_predicate(&self, predicate: &str) -> bool {
        self.atoms.iter().any(|a| a.predicate() == predicate)
    }

    /// Applies `f` to every term of the atoms and of the answer tuple.
    pub fn map_terms(&self, mut f: impl FnMut(&Term) -> Term) -> Self {
        ConjunctiveQuery {
            atoms: normalize_atoms(self.atoms.iter().map(|a| a.map_terms(&mut f)).collect()),
            answer: self.answer.iter().map(&mut f).collect(),
        }
    }

    /// Encodes the answer tuple as an `__ans` atom, producing a Boolean query.
    pub fn attach_answer_atom(&self) -> Result<Self> {
        if self.contains_predicate(ANSWER_PREDICATE) {
            return Err(Error::AnswerAtomPresent);
        }
        if self.answer.is_empty() {
            return Ok(self.clone());
        }
        let mut atoms = self.atoms.clone();
        atoms.push(Atom::new(ANSWER_PREDICATE, self.answer.clone()));
        Ok(ConjunctiveQuery::boolean(atoms))
    }

    /// Inverse of [`attach_answer_atom`](Self::attach_answer_atom). Constants
    /// that unification placed in the answer atom stay in the answer tuple.
    pub fn strip_answer_atom(&self) -> Result<Self> {
        let answers: Vec<&Atom> =
            self.atoms.iter().filter(|a| a.predicate() == ANSWER_PREDICATE).collect();
        match answers.len() {
            0 => Ok(self.clone()),
            1 => {
                let answer = answers[0].args().to_vec();
                let atoms = self
                    .atoms
                    .iter()
                    .filter(|a| a.predicate() != ANSWER_PREDICATE)
                    .cloned()
                    .collect();
                Ok(ConjunctiveQuery { atoms: normalize_atoms(atoms), answer })
            }
            n => Err(Error::MultipleAnswerAtoms(n)),
        }
    }

    /// Canonical representative of the isomorphism class: two queries are
    /// isomorphic (answer tuples included) iff their canonical forms are
    /// equal. Variables are renamed `V0, V1, …`.
    pub fn canonicalize(&self) -> Self {
        canonical_form(self)
    }

    /// Predicate names used by the query (with arities).
    pub fn signature(&self) -> HashSet<(&str, usize)> {
        self.atoms.iter().map(|a| (a.predicate(), a.arity())).collect()
    }
}

impl fmt::Display for ConjunctiveQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("?")?;
        if !self.answer.is_empty() {
            f.write_str("(")?;
            for (i, t) in self.answer.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{t}")?;
            }
            f.write_str(")")?;
        }
        f.write_str(" :- ")?;
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(".")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::*;

    #[test]
    fn attach_and_strip() {
        let q = ConjunctiveQuery::new(vec![atom("p", &["X", "Y"])], vec![var("X")]).unwrap();
        let b = q.attach_answer_atom().unwrap();
        assert!(b.is_boolean());
        assert_eq!(b.atoms(), &[atom("__ans", &["X"]), atom("p", &["X", "Y"])]);
        assert_eq!(b.strip_answer_atom().unwrap(), q);
        assert_eq!(b.attach_answer_atom(), Err(Error::AnswerAtomPresent));
    }

    #[test]
    fn boolean_attach_is_identity() {
        let q = cq(&[("p", &["X", "Y"])]);
        assert_eq!(q.attach_answer_atom().unwrap(), q);
        assert_eq!(q.strip_answer_atom().unwrap(), q);
    }

    #[test]
    fn strip_rejects_two_answer_atoms() {
        let q = cq(&[("__ans", &["X"]), ("__ans", &["Y"]), ("p", &["X", "Y"])]);
        assert_eq!(q.strip_answer_atom(), Err(Error::MultipleAnswerAtoms(2)));
    }

    #[test]
    fn answer_constants_survive_strip() {
        let q = cq(&[("__ans", &["a", "X"]), ("p", &["X"])]);
        let s = q.strip_answer_atom().unwrap();
        assert_eq!(s.answer(), &[Term::constant("a"), var("X")]);
    }

    #[test]
    fn unbound_answer_variable_rejected() {
        assert!(ConjunctiveQuery::new(vec![atom("p", &["X"])], vec![var("Z")]).is_err());
    }

    #[test]
    fn canonical_forms() {
        let q = cq(&[("p", &["U", "V"])]);
        assert_eq!(q.canonicalize().to_string(), "? :- p(V0,V1).");
        assert_eq!(
            cq(&[("p", &["a", "X"])]).canonicalize(),
            cq(&[("p", &["a", "Z"])]).canonicalize()
        );
    }
}
