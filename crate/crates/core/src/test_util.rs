//! Terse constructors for unit tests: names starting with an uppercase
//! letter are variables, anything else is a constant.

use crate::query::ConjunctiveQuery;
use crate::rule::ExistentialRule;
use crate::term::{Atom, Term};

pub fn var(name: &str) -> Term {
    Term::variable(name)
}

pub fn term(name: &str) -> Term {
    if name.starts_with(|c: char| c.is_ascii_uppercase()) {
        Term::variable(name)
    } else {
        Term::constant(name)
    }
}

pub fn atom(pred: &str, args: &[&str]) -> Atom {
    Atom::new(pred, args.iter().map(|a| term(a)).collect())
}

pub fn atoms(spec: &[(&str, &[&str])]) -> Vec<Atom> {
    spec.iter().map(|(p, args)| atom(p, args)).collect()
}

pub fn cq(spec: &[(&str, &[&str])]) -> ConjunctiveQuery {
    ConjunctiveQuery::boolean(atoms(spec))
}

pub fn rule(label: &str, body: &[(&str, &[&str])], head: &[(&str, &[&str])]) -> ExistentialRule {
    ExistentialRule::new(label, atoms(body), atoms(head))
}
