//! Covers of query sets under the generality preorder.
//!
//! A candidate is dropped when another candidate is strictly more general,
//! or equivalent and ahead of it in priority order. Priority puts explored
//! queries before fresh ones and breaks remaining ties on the canonical
//! form, so every maximal equivalence class keeps exactly one member.

use std::collections::{BTreeSet, HashSet};

use rayon::prelude::*;

use crate::homomorphism::has_homomorphism;
use crate::query::ConjunctiveQuery;

#[derive(Debug, Clone, Default)]
pub struct CoverInput {
    pub explored: Vec<ConjunctiveQuery>,
    pub fresh: Vec<ConjunctiveQuery>,
}

struct Candidate {
    query: ConjunctiveQuery,
    boolean: ConjunctiveQuery,
    predicates: BTreeSet<(String, usize)>,
    explored: bool,
}

impl Candidate {
    fn new(query: ConjunctiveQuery, explored: bool) -> Self {
        let boolean = if query.is_boolean() {
            query.clone()
        } else {
            query.attach_answer_atom().unwrap_or_else(|_| query.clone())
        };
        let predicates =
            boolean.atoms().iter().map(|a| (a.predicate().to_owned(), a.arity())).collect();
        Candidate { query, boolean, predicates, explored }
    }

    fn maps_to(&self, other: &Candidate) -> bool {
        self.predicates.is_subset(&other.predicates)
            && has_homomorphism(self.boolean.atoms(), other.boolean.atoms())
    }
}

/// Which candidates survive; indices refer to the inputs after
/// canonicalization and deduplication.
pub(crate) struct CoverSelection {
    pub explored: Vec<ConjunctiveQuery>,
    pub fresh: Vec<ConjunctiveQuery>,
}

/// Computes a cover of `explored ∪ fresh`, preferring explored queries.
/// Output queries are canonicalized, explored survivors first.
pub fn cover(input: &CoverInput) -> Vec<ConjunctiveQuery> {
    let sel = select(&input.explored, &input.fresh, false, false);
    sel.explored.into_iter().chain(sel.fresh).collect()
}

/// `explored_antichain` skips comparisons between two explored queries,
/// which is valid when they are already pairwise incomparable.
pub(crate) fn select(
    explored: &[ConjunctiveQuery],
    fresh: &[ConjunctiveQuery],
    explored_antichain: bool,
    parallel: bool,
) -> CoverSelection {
    let mut seen: HashSet<ConjunctiveQuery> = HashSet::new();
    let mut explored_c: Vec<ConjunctiveQuery> = explored
        .iter()
        .map(ConjunctiveQuery::canonicalize)
        .filter(|q| seen.insert(q.clone()))
        .collect();
    explored_c.sort();
    let mut fresh_c: Vec<ConjunctiveQuery> = fresh
        .iter()
        .map(ConjunctiveQuery::canonicalize)
        .filter(|q| seen.insert(q.clone()))
        .collect();
    fresh_c.sort();

    let candidates: Vec<Candidate> = explored_c
        .into_iter()
        .map(|q| Candidate::new(q, true))
        .chain(fresh_c.into_iter().map(|q| Candidate::new(q, false)))
        .collect();

    let dominated = |i: usize| -> bool {
        let c = &candidates[i];
        candidates.iter().enumerate().any(|(j, d)| {
            if j == i || (explored_antichain && c.explored && d.explored) {
                return false;
            }
            if !d.maps_to(c) {
                return false;
            }
            // an earlier equivalent wins; a later one must be strictly above
            j < i || !c.maps_to(d)
        })
    };
    let keep: Vec<bool> = if parallel {
        (0..candidates.len()).into_par_iter().map(|i| !dominated(i)).collect()
    } else {
        (0..candidates.len()).map(|i| !dominated(i)).collect()
    };

    let mut sel = CoverSelection { explored: Vec::new(), fresh: Vec::new() };
    for (c, k) in candidates.into_iter().zip(keep) {
        if k {
            if c.explored {
                sel.explored.push(c.query);
            } else {
                sel.fresh.push(c.query);
            }
        }
    }
    sel
}
