//! Test oracles written independently of the library's search code, plus
//! small parsing helpers.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use piecerew::dlgp::parse_document;
use piecerew::{Atom, ConjunctiveQuery, ExistentialRule, Term};

pub fn rules(text: &str) -> Vec<ExistentialRule> {
    parse_document(text).expect("rules parse").rules
}

pub fn query(text: &str) -> ConjunctiveQuery {
    parse_document(text).expect("query parses").queries.remove(0)
}

pub fn facts(text: &str) -> Vec<Atom> {
    parse_document(text).expect("facts parse").fact_base()
}

/// Naive backtracking over source atoms in input order. With `injective`
/// set, distinct variables must map to distinct terms.
fn extend(
    source: &[Atom],
    target: &[Atom],
    map: &mut BTreeMap<Term, Term>,
    injective: bool,
) -> bool {
    let Some((first, rest)) = source.split_first() else {
        return true;
    };
    for t in target {
        if t.predicate() != first.predicate() || t.arity() != first.arity() {
            continue;
        }
        let mut added = Vec::new();
        let mut ok = true;
        for (s, d) in first.args().iter().zip(t.args()) {
            if !s.is_variable() {
                if s != d {
                    ok = false;
                    break;
                }
                continue;
            }
            match map.get(s) {
                Some(img) if img != d => {
                    ok = false;
                    break;
                }
                Some(_) => {}
                None => {
                    if injective && map.values().any(|v| v == d) {
                        ok = false;
                        break;
                    }
                    map.insert(s.clone(), d.clone());
                    added.push(s.clone());
                }
            }
        }
        if ok && extend(rest, target, map, injective) {
            return true;
        }
        for s in added {
            map.remove(&s);
        }
    }
    false
}

/// Boolean view: answer terms become arguments of a dedicated atom.
fn closed(q: &ConjunctiveQuery) -> Vec<Atom> {
    let mut atoms = q.atoms().to_vec();
    if !q.is_boolean() {
        atoms.push(Atom::new("answer_tuple_oracle", q.answer().to_vec()));
    }
    atoms
}

pub fn maps_into(source: &[Atom], target: &[Atom]) -> bool {
    extend(source, target, &mut BTreeMap::new(), false)
}

/// `q1 ≥ q2`: q1 maps into q2.
pub fn generalizes(q1: &ConjunctiveQuery, q2: &ConjunctiveQuery) -> bool {
    maps_into(&closed(q1), &closed(q2))
}

pub fn equivalent(q1: &ConjunctiveQuery, q2: &ConjunctiveQuery) -> bool {
    generalizes(q1, q2) && generalizes(q2, q1)
}

pub fn isomorphic(q1: &ConjunctiveQuery, q2: &ConjunctiveQuery) -> bool {
    let (a, b) = (closed(q1), closed(q2));
    let set = |v: &[Atom]| v.iter().cloned().collect::<BTreeSet<_>>();
    let (sa, sb) = (set(&a), set(&b));
    let va: BTreeSet<&Term> = sa.iter().flat_map(|x| x.args()).filter(|t| t.is_variable()).collect();
    let vb: BTreeSet<&Term> = sb.iter().flat_map(|x| x.args()).filter(|t| t.is_variable()).collect();
    if sa.len() != sb.len() || va.len() != vb.len() {
        return false;
    }
    let sa: Vec<Atom> = sa.into_iter().collect();
    let sb: Vec<Atom> = sb.into_iter().collect();
    extend(&sa, &sb, &mut BTreeMap::new(), true)
}

/// Every element of `a` has an isomorphic element in `b` and vice versa,
/// with equal sizes.
pub fn same_up_to_isomorphism(a: &[ConjunctiveQuery], b: &[ConjunctiveQuery]) -> bool {
    a.len() == b.len()
        && a.iter().all(|x| b.iter().any(|y| isomorphic(x, y)))
        && b.iter().all(|y| a.iter().any(|x| isomorphic(x, y)))
}

/// Both sets have the same size and every element has an equivalent
/// partner on the other side.
pub fn same_up_to_equivalence(a: &[ConjunctiveQuery], b: &[ConjunctiveQuery]) -> bool {
    a.len() == b.len()
        && a.iter().all(|x| b.iter().any(|y| equivalent(x, y)))
        && b.iter().all(|y| a.iter().any(|x| equivalent(x, y)))
}

/// Renames every variable of `q` through `f`, keeping the answer tuple aligned.
pub fn rename(q: &ConjunctiveQuery, f: impl Fn(&Term) -> Term) -> ConjunctiveQuery {
    q.map_terms(|t| if t.is_variable() { f(t) } else { t.clone() })
}

/// Partition classes written with base names only, so rule copies with
/// fresh indices compare equal to the hand-written classes.
pub fn class_names(classes: &[Vec<Term>]) -> BTreeSet<BTreeSet<String>> {
    classes.iter().map(|c| c.iter().map(|t| t.name().to_lowercase()).collect()).collect()
}

pub fn expected_classes(spec: &[&[&str]]) -> BTreeSet<BTreeSet<String>> {
    spec.iter().map(|c| c.iter().map(|s| s.to_lowercase()).collect()).collect()
}
