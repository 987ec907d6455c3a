//! Homomorphisms between atom sets, the generality preorder and cores.
//!
//! The search is a plain backtracking CSP: each source atom gets a list of
//! compatible target atoms up front (predicate, constants, repeated
//! variables), then the search repeatedly picks the unplaced source atom with
//! the fewest candidates consistent with the current assignment.

use std::borrow::Cow;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::ops::ControlFlow;

use crate::query::ConjunctiveQuery;
use crate::term::{Atom, Term};

/// A mapping from variables to terms. Unmapped terms are left unchanged.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Substitution {
    map: BTreeMap<Term, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds `var` to `value`. Panics if `var` is not a variable.
    pub fn insert(&mut self, var: Term, value: Term) -> Option<Term> {
        assert!(var.is_variable(), "substitutions only bind variables");
        self.map.insert(var, value)
    }

    pub fn get(&self, t: &Term) -> Option<&Term> {
        self.map.get(t)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, &Term)> {
        self.map.iter()
    }

    pub fn apply(&self, t: &Term) -> Term {
        self.map.get(t).cloned().unwrap_or_else(|| t.clone())
    }

    pub fn apply_atom(&self, a: &Atom) -> Atom {
        a.map_terms(|t| self.apply(t))
    }

    pub fn apply_atoms<'a>(&self, atoms: impl IntoIterator<Item = &'a Atom>) -> Vec<Atom> {
        atoms.into_iter().map(|a| self.apply_atom(a)).collect()
    }

    /// `self ∘ inner`: apply `inner` first, then `self`.
    pub fn compose(&self, inner: &Substitution) -> Substitution {
        let mut map: BTreeMap<Term, Term> =
            inner.map.iter().map(|(k, v)| (k.clone(), self.apply(v))).collect();
        for (k, v) in &self.map {
            map.entry(k.clone()).or_insert_with(|| v.clone());
        }
        map.retain(|k, v| k != v);
        Substitution { map }
    }
}

impl FromIterator<(Term, Term)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Term, Term)>>(iter: I) -> Self {
        let mut s = Substitution::new();
        for (k, v) in iter {
            s.insert(k, v);
        }
        s
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (k, v)) in self.map.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}->{v}")?;
        }
        f.write_str("}")
    }
}

/// Read access to a target atom set, grouped by predicate.
pub trait AtomStore {
    fn atom(&self, index: usize) -> &Atom;
    fn with_predicate(&self, predicate: &str) -> &[usize];
}

/// A predicate index over a borrowed slice of atoms.
pub struct AtomIndex<'a> {
    atoms: &'a [Atom],
    by_predicate: HashMap<&'a str, Vec<usize>>,
}

impl<'a> AtomIndex<'a> {
    pub fn new(atoms: &'a [Atom]) -> Self {
        let mut by_predicate: HashMap<&'a str, Vec<usize>> = HashMap::new();
        for (i, a) in atoms.iter().enumerate() {
            by_predicate.entry(a.predicate()).or_default().push(i);
        }
        AtomIndex { atoms, by_predicate }
    }
}

impl AtomStore for AtomIndex<'_> {
    fn atom(&self, index: usize) -> &Atom {
        &self.atoms[index]
    }

    fn with_predicate(&self, predicate: &str) -> &[usize] {
        self.by_predicate.get(predicate).map(Vec::as_slice).unwrap_or(&[])
    }
}

struct Search<'a, S: AtomStore> {
    source: &'a [Atom],
    store: &'a S,
    slot_of: HashMap<&'a Term, usize>,
    slots: Vec<&'a Term>,
    assign: Vec<Option<&'a Term>>,
    candidates: Vec<Vec<usize>>,
    placed: Vec<bool>,
}

impl<'a, S: AtomStore> Search<'a, S> {
    fn new(source: &'a [Atom], store: &'a S, initial: &'a Substitution) -> Option<Self> {
        let mut slot_of = HashMap::new();
        let mut slots = Vec::new();
        for t in source.iter().flat_map(|a| a.args()) {
            if t.is_variable() && !slot_of.contains_key(t) {
                slot_of.insert(t, slots.len());
                slots.push(t);
            }
        }
        let assign: Vec<Option<&'a Term>> = slots.iter().map(|v| initial.get(v)).collect();
        let mut search = Search {
            source,
            store,
            slot_of,
            slots,
            assign,
            candidates: Vec::with_capacity(source.len()),
            placed: vec![false; source.len()],
        };
        for i in 0..source.len() {
            let cands: Vec<usize> = store
                .with_predicate(source[i].predicate())
                .iter()
                .copied()
                .filter(|&j| search.static_match(&source[i], store.atom(j)))
                .collect();
            if cands.is_empty() {
                return None;
            }
            search.candidates.push(cands);
        }
        Some(search)
    }

    /// Compatibility ignoring bindings made during the search.
    fn static_match(&self, s: &Atom, t: &Atom) -> bool {
        if s.arity() != t.arity() {
            return false;
        }
        let mut local: Vec<(usize, &Term)> = Vec::new();
        for (st, tt) in s.args().iter().zip(t.args()) {
            if st.is_variable() {
                let slot = self.slot_of[st];
                if let Some(bound) = self.assign[slot] {
                    if bound != tt {
                        return false;
                    }
                } else if let Some((_, prev)) = local.iter().find(|(s, _)| *s == slot) {
                    if *prev != tt {
                        return false;
                    }
                } else {
                    local.push((slot, tt));
                }
            } else if st != tt {
                return false;
            }
        }
        true
    }

    fn consistent(&self, s: &Atom, t: &Atom) -> bool {
        // constants and arity were checked statically
        let mut local: Vec<(usize, &Term)> = Vec::new();
        for (st, tt) in s.args().iter().zip(t.args()) {
            if !st.is_variable() {
                continue;
            }
            let slot = self.slot_of[st];
            match self.assign[slot] {
                Some(bound) if bound != tt => return false,
                Some(_) => {}
                None => {
                    if let Some((_, prev)) = local.iter().find(|(s, _)| *s == slot) {
                        if *prev != tt {
                            return false;
                        }
                    } else {
                        local.push((slot, tt));
                    }
                }
            }
        }
        true
    }

    fn pick_next(&self) -> Option<(usize, Vec<usize>)> {
        let mut best: Option<(usize, Vec<usize>)> = None;
        for i in 0..self.source.len() {
            if self.placed[i] {
                continue;
            }
            let live: Vec<usize> = self.candidates[i]
                .iter()
                .copied()
                .filter(|&j| self.consistent(&self.source[i], self.store.atom(j)))
                .collect();
            let better = best.as_ref().map_or(true, |(_, b)| live.len() < b.len());
            if better {
                let empty = live.is_empty();
                best = Some((i, live));
                if empty {
                    break;
                }
            }
        }
        best
    }

    fn run(&mut self, visit: &mut dyn FnMut(&Self) -> ControlFlow<()>) -> ControlFlow<()> {
        let Some((i, live)) = self.pick_next() else {
            return visit(self);
        };
        self.placed[i] = true;
        for j in live {
            let target: &'a Atom = self.store_atom(j);
            let mut trail = Vec::new();
            for (st, tt) in self.source[i].args().iter().zip(target.args()) {
                if st.is_variable() {
                    let slot = self.slot_of[st];
                    if self.assign[slot].is_none() {
                        self.assign[slot] = Some(tt);
                        trail.push(slot);
                    }
                }
            }
            let flow = self.run(visit);
            for slot in trail {
                self.assign[slot] = None;
            }
            if flow.is_break() {
                self.placed[i] = false;
                return flow;
            }
        }
        self.placed[i] = false;
        ControlFlow::Continue(())
    }

    fn store_atom(&self, j: usize) -> &'a Atom {
        self.store.atom(j)
    }

    fn substitution(&self, initial: &Substitution) -> Substitution {
        let mut s = initial.clone();
        for (slot, v) in self.slots.iter().enumerate() {
            if let Some(t) = self.assign[slot] {
                s.insert((*v).clone(), t.clone());
            }
        }
        s
    }
}

/// Calls `visit` with every homomorphism from `source` into the store that
/// extends `initial`, until `visit` breaks.
pub fn for_each_homomorphism<S: AtomStore>(
    source: &[Atom],
    store: &S,
    initial: &Substitution,
    mut visit: impl FnMut(&Substitution) -> ControlFlow<()>,
) {
    let Some(mut search) = Search::new(source, store, initial) else {
        return;
    };
    let _ = search.run(&mut |s| visit(&s.substitution(initial)));
}

/// Some homomorphism from `source` into the store extending `initial`.
pub fn find_homomorphism_in<S: AtomStore>(
    source: &[Atom],
    store: &S,
    initial: &Substitution,
) -> Option<Substitution> {
    let mut search = Search::new(source, store, initial)?;
    let mut found = None;
    let _ = search.run(&mut |s| {
        found = Some(s.substitution(initial));
        ControlFlow::Break(())
    });
    found
}

/// Some `h` with `h(source) ⊆ target`; constants map to themselves.
pub fn find_homomorphism(source: &[Atom], target: &[Atom]) -> Option<Substitution> {
    find_homomorphism_in(source, &AtomIndex::new(target), &Substitution::new())
}

pub fn find_homomorphism_extending(
    source: &[Atom],
    target: &[Atom],
    initial: &Substitution,
) -> Option<Substitution> {
    find_homomorphism_in(source, &AtomIndex::new(target), initial)
}

pub fn has_homomorphism(source: &[Atom], target: &[Atom]) -> bool {
    find_homomorphism(source, target).is_some()
}

fn boolean_form(q: &ConjunctiveQuery) -> Cow<'_, ConjunctiveQuery> {
    if q.is_boolean() {
        Cow::Borrowed(q)
    } else {
        // an answer atom can only be missing its encoding, never doubled
        Cow::Owned(q.attach_answer_atom().unwrap_or_else(|_| q.clone()))
    }
}

/// `q1 ≥ q2`: `q1` maps homomorphically into `q2`. Non-Boolean queries are
/// compared through their answer-atom encoding.
pub fn more_general(q1: &ConjunctiveQuery, q2: &ConjunctiveQuery) -> bool {
    let a = boolean_form(q1);
    let b = boolean_form(q2);
    has_homomorphism(a.atoms(), b.atoms())
}

pub fn equivalent(q1: &ConjunctiveQuery, q2: &ConjunctiveQuery) -> bool {
    more_general(q1, q2) && more_general(q2, q1)
}

/// Removes redundant atoms until none can be dropped. Atoms are tried in
/// canonical order, so the result is deterministic.
pub fn core(q: &ConjunctiveQuery) -> ConjunctiveQuery {
    if !q.is_boolean() {
        if let Ok(b) = q.attach_answer_atom() {
            return core(&b).strip_answer_atom().expect("single answer atom");
        }
    }
    let mut atoms = q.atoms().to_vec();
    loop {
        let mut changed = false;
        let mut i = 0;
        while i < atoms.len() {
            let mut rest = atoms.clone();
            rest.remove(i);
            if has_homomorphism(&atoms, &rest) {
                atoms = rest;
                changed = true;
            } else {
                i += 1;
            }
        }
        if !changed {
            break;
        }
    }
    ConjunctiveQuery::boolean(atoms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::*;

    #[test]
    fn maps_into_constants() {
        let h = find_homomorphism(&atoms(&[("p", &["X", "Y"])]), &atoms(&[("p", &["a", "a"])]))
            .unwrap();
        assert_eq!(h.apply(&var("X")), term("a"));
        assert_eq!(h.apply(&var("Y")), term("a"));
    }

    #[test]
    fn repeated_variable_blocks() {
        assert!(find_homomorphism(&atoms(&[("p", &["X", "X"])]), &atoms(&[("p", &["a", "b"])]))
            .is_none());
    }

    #[test]
    fn example_fact_does_not_entail_query() {
        let q = atoms(&[("p", &["U", "V"]), ("p", &["W", "V"]), ("r", &["U", "W"])]);
        let f = atoms(&[("q", &["a"]), ("p", &["b", "c"]), ("r", &["a", "b"])]);
        assert!(find_homomorphism(&q, &f).is_none());
    }

    #[test]
    fn empty_source_maps_anywhere() {
        assert_eq!(find_homomorphism(&[], &[]), Some(Substitution::new()));
    }

    #[test]
    fn generality() {
        assert!(more_general(&cq(&[("p", &["X", "Y"])]), &cq(&[("p", &["a", "Y"])])));
        assert!(!more_general(&cq(&[("p", &["a", "Y"])]), &cq(&[("p", &["X", "Y"])])));
        let q0 = cq(&[("t", &["U"])]);
        let q2 = cq(&[("t", &["X0"]), ("p", &["X0", "Y0"]), ("p", &["Y0", "Y"])]);
        assert!(more_general(&q0, &q2));
        assert!(!more_general(&q2, &q0));
    }

    #[test]
    fn answer_variables_are_respected() {
        let q1 = ConjunctiveQuery::new(atoms(&[("p", &["X", "Y"])]), vec![var("X")]).unwrap();
        let q2 = ConjunctiveQuery::new(atoms(&[("p", &["X", "Y"])]), vec![var("Y")]).unwrap();
        assert!(!more_general(&q1, &q2));
        assert!(more_general(&q1, &q1));
    }

    #[test]
    fn cores() {
        assert_eq!(core(&cq(&[("p", &["X", "Y"]), ("p", &["X", "Z"])])).len(), 1);
        assert_eq!(
            core(&cq(&[("p", &["X", "X"]), ("p", &["X", "Y"])])),
            cq(&[("p", &["X", "X"])])
        );
        let answered =
            ConjunctiveQuery::new(atoms(&[("p", &["X", "Y"]), ("p", &["X", "Z"])]), vec![var("Z")])
                .unwrap();
        let c = core(&answered.attach_answer_atom().unwrap());
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn enumerates_all() {
        let mut n = 0;
        for_each_homomorphism(
            &atoms(&[("p", &["X", "Y"])]),
            &AtomIndex::new(&atoms(&[("p", &["a", "b"]), ("p", &["b", "c"]), ("q", &["a", "a"])])),
            &Substitution::new(),
            |_| {
                n += 1;
                ControlFlow::Continue(())
            },
        );
        assert_eq!(n, 2);
    }

    #[test]
    fn extending_respects_initial() {
        let init: Substitution = [(var("X"), term("b"))].into_iter().collect();
        let h = find_homomorphism_extending(
            &atoms(&[("p", &["X", "Y"])]),
            &atoms(&[("p", &["a", "b"]), ("p", &["b", "c"])]),
            &init,
        )
        .unwrap();
        assert_eq!(h.apply(&var("Y")), term("c"));
    }

    #[test]
    fn compose_applies_inner_first() {
        let inner: Substitution = [(var("X"), var("Y"))].into_iter().collect();
        let outer: Substitution = [(var("Y"), term("a"))].into_iter().collect();
        let c = outer.compose(&inner);
        assert_eq!(c.apply(&var("X")), term("a"));
        assert_eq!(c.apply(&var("Y")), term("a"));
    }
}
