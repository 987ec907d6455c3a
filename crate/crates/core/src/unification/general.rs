use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::partition::TermPartition;
use crate::query::ConjunctiveQuery;
use crate::rule::ExistentialRule;
use crate::term::Atom;

use super::PieceUnifier;

/// Input bounds for the exhaustive enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneralCap {
    pub max_query: usize,
    pub max_head: usize,
}

impl Default for GeneralCap {
    fn default() -> Self {
        GeneralCap { max_query: 10, max_head: 4 }
    }
}

/// Every most general piece-unifier of `query` with `rule` (any head size).
///
/// For each `H′ ⊆ head` the search assigns every query atom either to no
/// head atom or to one of `H′`, then covers the head atoms left unmatched
/// with some atom of `Q′`. Each such relation generates the finest partition
/// making related atoms equal; valid partitions are kept per `(Q′, H′)` and
/// only the finest among them are returned. Refinement preserves validity,
/// so every most general unifier arises from one of these relations.
pub fn general_piece_unifiers(
    query: &ConjunctiveQuery,
    rule: &ExistentialRule,
    cap: GeneralCap,
) -> Result<Vec<PieceUnifier>> {
    let q = query.atoms();
    let head = rule.head();
    if q.len() > cap.max_query || head.len() > cap.max_head {
        return Err(Error::SizeCap {
            query: q.len(),
            head: head.len(),
            max_query: cap.max_query,
            max_head: cap.max_head,
        });
    }
    let mut found: BTreeMap<(u64, u64), Vec<TermPartition>> = BTreeMap::new();
    for h_mask in 1u64..(1 << head.len()) {
        let h_part: Vec<usize> = (0..head.len()).filter(|i| h_mask >> i & 1 == 1).collect();
        let mut search = Search { q, head, h_part: &h_part, rule, choice: vec![None; q.len()], found: Vec::new() };
        search.assign(0, TermPartition::new());
        for (q_mask, p) in search.found {
            let slot = found.entry((h_mask, q_mask)).or_default();
            if !slot.contains(&p) {
                slot.push(p);
            }
        }
    }

    let mut out = Vec::new();
    for ((h_mask, q_mask), parts) in found {
        let h_atoms = pick(head, h_mask);
        let q_atoms = pick(q, q_mask);
        for (i, p) in parts.iter().enumerate() {
            let strictly_coarser = parts
                .iter()
                .enumerate()
                .any(|(j, other)| j != i && other.finer_than(p).unwrap_or(false));
            if !strictly_coarser {
                out.push(PieceUnifier::new(q_atoms.clone(), h_atoms.clone(), p.clone(), rule.clone()));
            }
        }
    }
    Ok(out)
}

fn pick(atoms: &[Atom], mask: u64) -> Vec<Atom> {
    atoms.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, a)| a.clone()).collect()
}

fn unify_atoms(p: &mut TermPartition, a: &Atom, b: &Atom) {
    for (s, t) in a.args().iter().zip(b.args()) {
        p.union(s, t);
    }
}

struct Search<'a> {
    q: &'a [Atom],
    head: &'a [Atom],
    h_part: &'a [usize],
    rule: &'a ExistentialRule,
    choice: Vec<Option<usize>>,
    found: Vec<(u64, TermPartition)>,
}

impl Search<'_> {
    fn assign(&mut self, i: usize, p: TermPartition) {
        if i == self.q.len() {
            self.cover_rest(p);
            return;
        }
        self.choice[i] = None;
        self.assign(i + 1, p.clone());
        for &h in self.h_part {
            if !self.q[i].same_predicate(&self.head[h]) {
                continue;
            }
            let mut next = p.clone();
            unify_atoms(&mut next, &self.q[i], &self.head[h]);
            if next.is_admissible() {
                self.choice[i] = Some(h);
                self.assign(i + 1, next);
            }
        }
        self.choice[i] = None;
    }

    fn cover_rest(&mut self, p: TermPartition) {
        let q_idx: Vec<usize> = (0..self.q.len()).filter(|&i| self.choice[i].is_some()).collect();
        if q_idx.is_empty() {
            return;
        }
        let uncovered: Vec<usize> =
            self.h_part.iter().copied().filter(|h| !self.choice.contains(&Some(*h))).collect();
        let q_mask = q_idx.iter().fold(0u64, |m, &i| m | 1 << i);
        self.extend_cover(&uncovered, &q_idx, q_mask, p);
    }

    fn extend_cover(&mut self, uncovered: &[usize], q_idx: &[usize], q_mask: u64, p: TermPartition) {
        let Some((&h, rest)) = uncovered.split_first() else {
            self.accept(q_mask, p);
            return;
        };
        for &i in q_idx {
            if !self.q[i].same_predicate(&self.head[h]) {
                continue;
            }
            let mut next = p.clone();
            unify_atoms(&mut next, &self.q[i], &self.head[h]);
            if next.is_admissible() {
                self.extend_cover(rest, q_idx, q_mask, next);
            }
        }
    }

    fn accept(&mut self, q_mask: u64, p: TermPartition) {
        let h_atoms: Vec<Atom> = self.h_part.iter().map(|&h| self.head[h].clone()).collect();
        let mu = PieceUnifier::new(pick(self.q, q_mask), h_atoms, p, self.rule.clone());
        if mu.validate(self.q).is_ok() {
            self.found.push((q_mask, mu.partition().clone()));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_util::*;

    #[test]
    fn worked_example_has_three() {
        let q = cq(&[("p", &["U", "V"]), ("p", &["W", "V"]), ("p", &["W", "T"]), ("r", &["U", "W"])]);
        let r = rule("R", &[("q", &["X"])], &[("p", &["X", "Y"])]);
        let us = general_piece_unifiers(&q, &r, GeneralCap::default()).unwrap();
        assert_eq!(us.len(), 3);
        let sizes: Vec<usize> = us.iter().map(|u| u.q_part().len()).collect();
        assert!(sizes.contains(&1) && sizes.contains(&2) && sizes.contains(&3));
    }

    #[test]
    fn multi_atom_head() {
        let q = cq(&[("p", &["U", "V"]), ("p", &["V", "W"]), ("r", &["U"])]);
        let r = rule(
            "R",
            &[("q", &["X"])],
            &[("p", &["X", "Y"]), ("p", &["Y", "Z"]), ("p", &["Z", "T"]), ("r", &["Y"])],
        );
        let us = general_piece_unifiers(&q, &r, GeneralCap::default()).unwrap();
        let mu1 = TermPartition::from_classes([
            vec![var("X"), var("U")],
            vec![var("V"), var("Y")],
            vec![var("W"), var("Z")],
        ]);
        assert!(us.iter().any(|u| u.q_part().len() == 2 && u.h_part().len() == 2 && *u.partition() == mu1));
        let mu2 = TermPartition::from_classes([
            vec![var("U"), var("Y")],
            vec![var("V"), var("Z")],
            vec![var("W"), var("T")],
        ]);
        assert!(us.iter().any(|u| u.q_part().len() == 3 && *u.partition() == mu2));
        assert!(!us.iter().any(|u| u.q_part() == &atoms(&[("p", &["U", "V"])])[..]));
        for u in &us {
            u.validate(q.atoms()).unwrap();
        }
    }

    #[test]
    fn unrelated_predicates() {
        let q = cq(&[("s", &["U"])]);
        let r = rule("R", &[("q", &["X"])], &[("p", &["X", "Y"])]);
        assert!(general_piece_unifiers(&q, &r, GeneralCap::default()).unwrap().is_empty());
    }

    #[test]
    fn size_cap() {
        let q = cq(&[("p", &["U"]), ("p", &["V"])]);
        let r = rule("R", &[("q", &["X"])], &[("p", &["X"])]);
        let cap = GeneralCap { max_query: 1, max_head: 4 };
        assert!(matches!(general_piece_unifiers(&q, &r, cap), Err(Error::SizeCap { .. })));
    }
}
