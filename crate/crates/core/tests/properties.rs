mod common;

use proptest::prelude::*;

use piecerew::cover::{cover, CoverInput};
use piecerew::dlgp::{parse_document, write_cover};
use piecerew::homomorphism::{core, equivalent as lib_equivalent, has_homomorphism, more_general};
use piecerew::partition::TermPartition;
use piecerew::{Atom, ConjunctiveQuery, Term};

use common::*;

const PREDICATES: &[(&str, usize)] = &[("p", 2), ("q", 1), ("r", 2), ("s", 3)];
const VARS: &[&str] = &["A", "B", "C", "D", "E"];

fn term() -> impl Strategy<Value = Term> {
    prop_oneof![
        8 => prop::sample::select(VARS).prop_map(Term::variable),
        1 => prop::sample::select(&["a", "b"][..]).prop_map(Term::constant),
    ]
}

fn atom() -> impl Strategy<Value = Atom> {
    prop::sample::select(PREDICATES).prop_flat_map(|(p, n)| {
        prop::collection::vec(term(), n).prop_map(move |args| Atom::new(p, args))
    })
}

fn atoms(max: usize) -> impl Strategy<Value = Vec<Atom>> {
    prop::collection::vec(atom(), 1..=max)
}

fn boolean_query(max: usize) -> impl Strategy<Value = ConjunctiveQuery> {
    atoms(max).prop_map(ConjunctiveQuery::boolean)
}

/// Queries with an answer tuple drawn from their own variables.
fn query_with_answer(max: usize) -> impl Strategy<Value = ConjunctiveQuery> {
    (atoms(max), any::<prop::sample::Index>()).prop_map(|(atoms, idx)| {
        let vars: Vec<Term> = atoms.iter().flat_map(|a| a.args()).filter(|t| t.is_variable()).cloned().collect();
        let answer = if vars.is_empty() { Vec::new() } else { vec![vars[idx.index(vars.len())].clone()] };
        ConjunctiveQuery::new(atoms, answer).expect("answer variables occur in the body")
    })
}

/// A bijective renaming of the query variables given by a permutation seed.
fn permuted(q: &ConjunctiveQuery, shift: usize) -> ConjunctiveQuery {
    rename(q, |t| {
        let i = VARS.iter().position(|v| *v == t.name()).unwrap_or(0);
        Term::variable(format!("Z{}", (i + shift) % VARS.len()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn canonical_form_is_idempotent(q in query_with_answer(5)) {
        let c = q.canonicalize();
        prop_assert_eq!(c.canonicalize(), c.clone());
        prop_assert!(isomorphic(&q, &c));
    }

    #[test]
    fn canonical_form_ignores_variable_names(q in query_with_answer(5), shift in 0usize..5) {
        prop_assert_eq!(q.canonicalize(), permuted(&q, shift).canonicalize());
    }

    #[test]
    fn canonical_form_ignores_atom_order(mut atoms in atoms(5), seed in any::<u64>()) {
        let q = ConjunctiveQuery::boolean(atoms.clone());
        let n = atoms.len();
        atoms.rotate_left(seed as usize % n);
        prop_assert_eq!(q.canonicalize(), ConjunctiveQuery::boolean(atoms).canonicalize());
    }

    #[test]
    fn homomorphism_agrees_with_brute_force(a in atoms(4), b in atoms(5)) {
        prop_assert_eq!(has_homomorphism(&a, &b), maps_into(&a, &b));
    }

    #[test]
    fn generality_agrees_with_oracle(a in query_with_answer(4), b in query_with_answer(4)) {
        prop_assert_eq!(more_general(&a, &b), generalizes(&a, &b));
    }

    #[test]
    fn generality_is_reflexive_and_transitive(
        a in boolean_query(3), b in boolean_query(4), c in boolean_query(4)
    ) {
        prop_assert!(more_general(&a, &a));
        if more_general(&a, &b) && more_general(&b, &c) {
            prop_assert!(more_general(&a, &c));
        }
    }

    #[test]
    fn core_is_equivalent_and_minimal(q in query_with_answer(5)) {
        let c = core(&q);
        prop_assert!(equivalent(&q, &c));
        prop_assert!(c.len() <= q.len());
        for i in 0..c.len() {
            let mut smaller = c.atoms().to_vec();
            smaller.remove(i);
            if smaller.is_empty() {
                continue;
            }
            if let Ok(s) = ConjunctiveQuery::new(smaller, c.answer().to_vec()) {
                prop_assert!(!lib_equivalent(&s, &c));
            }
        }
    }

    #[test]
    fn cover_is_a_covering_antichain(qs in prop::collection::vec(boolean_query(3), 1..6)) {
        let out = cover(&CoverInput { explored: Vec::new(), fresh: qs.clone() });
        for q in &qs {
            prop_assert!(out.iter().any(|c| generalizes(c, q)));
        }
        for (i, x) in out.iter().enumerate() {
            prop_assert!(qs.iter().any(|q| isomorphic(q, x)));
            for (j, y) in out.iter().enumerate() {
                if i != j {
                    prop_assert!(!generalizes(x, y));
                }
            }
        }
    }

    #[test]
    fn partition_join_laws(
        xs in prop::collection::vec((0usize..5, 0usize..5), 0..5),
        ys in prop::collection::vec((0usize..5, 0usize..5), 0..5),
    ) {
        let terms: Vec<Term> = VARS.iter().map(|v| Term::variable(*v)).collect();
        let build = |pairs: &[(usize, usize)]| {
            let mut p = TermPartition::discrete(&terms);
            for &(i, j) in pairs {
                p.union(&terms[i], &terms[j]);
            }
            p
        };
        let (a, b) = (build(&xs), build(&ys));
        let ab = a.join(&b);
        prop_assert_eq!(&ab, &b.join(&a));
        prop_assert_eq!(&a.join(&a), &a);
        prop_assert!(a.finer_than(&ab).unwrap());
        prop_assert!(b.finer_than(&ab).unwrap());
        let together: Vec<(usize, usize)> = xs.iter().chain(&ys).copied().collect();
        prop_assert_eq!(&ab, &build(&together));
    }

    #[test]
    fn cover_text_parses_back(qs in prop::collection::vec(query_with_answer(4), 1..4)) {
        let text = write_cover(&qs);
        let doc = parse_document(&text).expect("written cover parses");
        prop_assert_eq!(doc.queries.len(), qs.len());
        for (q, back) in qs.iter().zip(&doc.queries) {
            prop_assert!(isomorphic(q, back));
        }
    }

    #[test]
    fn document_display_round_trips(q in query_with_answer(4), facts in atoms(3)) {
        let ground: Vec<String> = facts
            .iter()
            .map(|a| a.map_terms(|t| if t.is_variable() { Term::constant(t.name().to_lowercase()) } else { t.clone() }).to_string())
            .collect();
        let text = format!("[r1] p(X,Y) :- q(X).\n{}.\n{q}\n", ground.join(", "));
        let doc = parse_document(&text).expect("generated document parses");
        let again = parse_document(&doc.to_string()).expect("display parses");
        prop_assert_eq!(doc.to_string(), again.to_string());
        prop_assert!(isomorphic(&doc.queries[0], &q));
    }
}
