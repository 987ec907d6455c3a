use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::partition::TermPartition;
use crate::rule::ExistentialRule;
use crate::term::{Atom, Term};

use super::separating_vars;

/// Groups terms that share an argument position, merging transitively.
pub fn partition_by_position(atoms: &[Atom]) -> Result<TermPartition> {
    let mut p = TermPartition::new();
    let Some(first) = atoms.first() else {
        return Ok(p);
    };
    for a in atoms {
        if !a.same_predicate(first) {
            return Err(Error::MixedPredicates(first.predicate().to_owned(), a.predicate().to_owned()));
        }
        for (t, anchor) in a.args().iter().zip(first.args()) {
            p.union(anchor, t);
        }
    }
    Ok(p)
}

fn head_atom(rule: &ExistentialRule) -> Result<&Atom> {
    match rule.head() {
        [h] => Ok(h),
        _ => Err(Error::NonAtomicHead(rule.label().to_owned())),
    }
}

/// `P_p(q_atoms ∪ head)` with the rule's roles marked.
pub(crate) fn head_partition(q_atoms: &[Atom], rule: &ExistentialRule) -> Result<TermPartition> {
    let head = head_atom(rule)?;
    let mut all = Vec::with_capacity(q_atoms.len() + 1);
    all.push(head.clone());
    all.extend(q_atoms.iter().cloned());
    let mut p = partition_by_position(&all)?;
    p.mark_rule(rule);
    Ok(p)
}

pub(crate) fn partition_unifiable(p: &TermPartition) -> bool {
    p.classes_with_flags().iter().all(|(_, f)| {
        f.constants <= 1
            && f.existentials <= 1
            && !(f.existentials > 0 && (f.constants > 0 || f.frontier > 0))
    })
}

/// No class of the position partition with the head holds two constants,
/// two existentials, or an existential together with a constant or a
/// frontier variable.
pub fn unifiable(q_atoms: &[Atom], rule: &ExistentialRule) -> bool {
    head_partition(q_atoms, rule).is_ok_and(|p| partition_unifiable(&p))
}

pub(crate) fn sticky_in(
    query: &[Atom],
    q_atoms: &[Atom],
    p: &TermPartition,
) -> BTreeSet<Term> {
    separating_vars(query, q_atoms)
        .into_iter()
        .filter(|x| p.flags_of(x).is_some_and(|f| f.existentials > 0))
        .collect()
}

/// Separating variables of `q_atoms` sitting in a class with an existential.
pub fn sticky_variables(query: &[Atom], q_atoms: &[Atom], rule: &ExistentialRule) -> BTreeSet<Term> {
    match head_partition(q_atoms, rule) {
        Ok(p) => sticky_in(query, q_atoms, &p),
        Err(_) => BTreeSet::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::*;

    fn r() -> ExistentialRule {
        rule("R", &[("q", &["X"])], &[("p", &["X", "Y"])])
    }

    #[test]
    fn by_position() {
        let p = partition_by_position(&atoms(&[("p", &["U", "V"]), ("p", &["W", "V"]), ("p", &["X", "Y"])])).unwrap();
        assert_eq!(p.classes(), vec![vec![var("U"), var("W"), var("X")], vec![var("V"), var("Y")]]);
        let ground = partition_by_position(&atoms(&[("p", &["a", "b"])])).unwrap();
        assert_eq!(ground.classes().len(), 2);
        let bridged = partition_by_position(&atoms(&[("p", &["U", "V"]), ("p", &["V", "T"]), ("p", &["X", "Y"])])).unwrap();
        assert_eq!(bridged.classes().len(), 1);
        assert!(partition_by_position(&atoms(&[("p", &["U", "V"]), ("q", &["U", "V"])])).is_err());
    }

    #[test]
    fn unifiability() {
        assert!(unifiable(&atoms(&[("p", &["U", "V"])]), &r()));
        assert!(!unifiable(&atoms(&[("p", &["U", "V"]), ("p", &["V", "T"])]), &r()));
        let diag = rule("R", &[("r", &["X", "X"])], &[("p", &["X", "X"])]);
        assert!(unifiable(&atoms(&[("p", &["Y", "Z"])]), &diag));
        assert!(!unifiable(&atoms(&[("p", &["U", "a"])]), &r()));
    }

    #[test]
    fn sticky() {
        let q = normalize(&[("p", &["U", "V"]), ("p", &["V", "T"])]);
        assert_eq!(sticky_variables(&q, &atoms(&[("p", &["U", "V"])]), &r()), [var("V")].into());
        assert!(sticky_variables(&q, &atoms(&[("p", &["V", "T"])]), &r()).is_empty());
        let plain = rule("R", &[("q", &["X", "Y"])], &[("p", &["X", "Y"])]);
        assert!(sticky_variables(&q, &atoms(&[("p", &["U", "V"])]), &plain).is_empty());
    }

    fn normalize(spec: &[(&str, &[&str])]) -> Vec<Atom> {
        crate::term::normalize_atoms(atoms(spec))
    }
}
