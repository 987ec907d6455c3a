//! Canonical labelling of query variables by colour refinement and
//! individualization.
//!
//! Colours are computed from the structure of the query only, never from
//! variable names, so isomorphic queries explore the same search tree and
//! pick the same smallest leaf.

use std::collections::BTreeMap;

use crate::query::ConjunctiveQuery;
use crate::term::Term;

/// Leaves explored before the search settles for the best one found.
const LEAF_BUDGET: usize = 20_000;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Key<'a> {
    Const(&'a Term),
    Var(usize),
    Own,
}

struct Shape<'a> {
    /// Atoms plus the answer tuple as a pseudo-atom with predicate `None`.
    rows: Vec<(Option<&'a str>, Vec<Slot<'a>>)>,
    vars: Vec<&'a Term>,
}

#[derive(Clone, Copy)]
enum Slot<'a> {
    Const(&'a Term),
    Var(usize),
}

impl<'a> Shape<'a> {
    fn new(q: &'a ConjunctiveQuery) -> Self {
        let mut index: BTreeMap<&'a Term, usize> = BTreeMap::new();
        let mut vars = Vec::new();
        let mut slot = |t: &'a Term| {
            if t.is_variable() {
                let next = index.len();
                let i = *index.entry(t).or_insert(next);
                if i == vars.len() {
                    vars.push(t);
                }
                Slot::Var(i)
            } else {
                Slot::Const(t)
            }
        };
        let mut rows: Vec<(Option<&'a str>, Vec<Slot<'a>>)> =
            q.atoms().iter().map(|a| (Some(a.predicate()), a.args().iter().map(&mut slot).collect())).collect();
        if !q.answer().is_empty() {
            rows.push((None, q.answer().iter().map(&mut slot).collect()));
        }
        Shape { rows, vars }
    }

    /// Refines `colors` until the number of classes is stable. Colours are
    /// dense ranks, ordered by the old colour first.
    fn refine(&self, mut colors: Vec<usize>) -> Vec<usize> {
        let mut classes = count(&colors);
        loop {
            let mut occurrences: Vec<Vec<(Option<&str>, usize, Vec<Key>)>> = vec![Vec::new(); self.vars.len()];
            for (pred, args) in &self.rows {
                for (pos, s) in args.iter().enumerate() {
                    if let Slot::Var(v) = *s {
                        let keys = args
                            .iter()
                            .map(|o| match *o {
                                Slot::Const(t) => Key::Const(t),
                                Slot::Var(w) if w == v => Key::Own,
                                Slot::Var(w) => Key::Var(colors[w]),
                            })
                            .collect();
                        occurrences[v].push((*pred, pos, keys));
                    }
                }
            }
            let sigs: Vec<(usize, Vec<(Option<&str>, usize, Vec<Key>)>)> = colors
                .iter()
                .zip(occurrences)
                .map(|(&c, mut occ)| {
                    occ.sort();
                    (c, occ)
                })
                .collect();
            let mut ranked: Vec<&(usize, Vec<(Option<&str>, usize, Vec<Key>)>)> = sigs.iter().collect();
            ranked.sort();
            ranked.dedup();
            let next: Vec<usize> = sigs
                .iter()
                .map(|s| ranked.binary_search(&s).expect("signature is ranked"))
                .collect();
            let n = count(&next);
            colors = next;
            if n == classes {
                return colors;
            }
            classes = n;
        }
    }

    fn leaf(&self, q: &ConjunctiveQuery, colors: &[usize]) -> ConjunctiveQuery {
        let rename: BTreeMap<&Term, Term> =
            self.vars.iter().zip(colors).map(|(v, &c)| (*v, Term::canonical_variable(c as u32))).collect();
        q.map_terms(|t| rename.get(t).cloned().unwrap_or_else(|| t.clone()))
    }
}

fn count(colors: &[usize]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

/// Puts `v` first within its colour class, shifting everything else.
fn individualize(colors: &[usize], v: usize) -> Vec<usize> {
    colors.iter().enumerate().map(|(i, &c)| if c > colors[v] || (c == colors[v] && i != v) { c + 1 } else { c }).collect()
}

struct Search<'a, 'q> {
    shape: &'a Shape<'q>,
    query: &'q ConjunctiveQuery,
    best: Option<ConjunctiveQuery>,
    leaves: usize,
}

impl Search<'_, '_> {
    fn run(&mut self, colors: Vec<usize>) {
        if self.leaves >= LEAF_BUDGET {
            return;
        }
        let colors = self.shape.refine(colors);
        let n = colors.len();
        if count(&colors) == n {
            self.leaves += 1;
            let cand = self.shape.leaf(self.query, &colors);
            if self.best.as_ref().is_none_or(|b| cand < *b) {
                self.best = Some(cand);
            }
            return;
        }
        let mut sizes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (v, &c) in colors.iter().enumerate() {
            sizes.entry(c).or_default().push(v);
        }
        let cell = sizes.into_values().find(|m| m.len() > 1).expect("some class is not a singleton");
        for v in cell {
            self.run(individualize(&colors, v));
        }
    }
}

pub(crate) fn canonical_form(q: &ConjunctiveQuery) -> ConjunctiveQuery {
    let shape = Shape::new(q);
    if shape.vars.is_empty() {
        return q.clone();
    }
    let mut search = Search { shape: &shape, query: q, best: None, leaves: 0 };
    search.run(vec![0; shape.vars.len()]);
    search.best.expect("at least one leaf")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::*;

    #[test]
    fn swapped_symmetric_atoms() {
        let a = cq(&[("p", &["A", "B"]), ("p", &["C", "D"]), ("r", &["B", "D"])]);
        let b = cq(&[("p", &["A", "B"]), ("p", &["C", "D"]), ("r", &["D", "B"])]);
        assert_eq!(canonical_form(&a), canonical_form(&b));
    }

    #[test]
    fn cycles_of_different_length_differ() {
        let c3 = cq(&[("e", &["A", "B"]), ("e", &["B", "C"]), ("e", &["C", "A"])]);
        let c3b = cq(&[("e", &["Z", "X"]), ("e", &["X", "Y"]), ("e", &["Y", "Z"])]);
        let path = cq(&[("e", &["A", "B"]), ("e", &["B", "C"]), ("e", &["C", "D"])]);
        assert_eq!(canonical_form(&c3), canonical_form(&c3b));
        assert_ne!(canonical_form(&c3), canonical_form(&path));
    }

    #[test]
    fn answer_positions_matter() {
        let x = ConjunctiveQuery::new(atoms(&[("p", &["A", "B"])]), vec![var("A")]).unwrap();
        let y = ConjunctiveQuery::new(atoms(&[("p", &["A", "B"])]), vec![var("B")]).unwrap();
        assert_ne!(canonical_form(&x), canonical_form(&y));
    }

    #[test]
    fn individualization_shifts_classes() {
        assert_eq!(individualize(&[0, 0, 1], 1), vec![1, 0, 2]);
    }
}
