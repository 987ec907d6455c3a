use crate::query::ConjunctiveQuery;
use crate::rule::ExistentialRule;
use crate::term::{Atom, Term};

use super::position::{head_partition, partition_unifiable, sticky_in};
use super::PieceUnifier;

/// Most general single-piece unifiers of `query` with an atomic-head rule
/// whose variables are disjoint from the query's.
///
/// Seeds are taken in atom order. Each seed grows by pulling in every query
/// atom that holds a sticky variable; a seed that runs outside the candidate
/// pool or stops being unifiable is discarded on its own, while a success
/// removes its whole piece from the pool.
pub fn single_piece_unifiers(query: &ConjunctiveQuery, rule: &ExistentialRule) -> Vec<PieceUnifier> {
    let [head] = rule.head() else {
        return Vec::new();
    };
    let q = query.atoms();
    let mut pool: Vec<&Atom> = q.iter().filter(|a| a.same_predicate(head)).collect();
    let mut out = Vec::new();

    while let Some(&seed) = pool.first() {
        let mut part: Vec<Atom> = vec![seed.clone()];
        let accepted = loop {
            if !part.iter().all(|a| pool.contains(&a)) {
                break None;
            }
            let Ok(p) = head_partition(&part, rule) else { break None };
            if !partition_unifiable(&p) {
                break None;
            }
            let sticky = sticky_in(q, &part, &p);
            if sticky.is_empty() {
                break Some(p);
            }
            let holds_sticky = |a: &Atom| a.args().iter().any(|t: &Term| sticky.contains(t));
            for a in q.iter().filter(|a| holds_sticky(a)) {
                if !part.contains(a) {
                    part.push(a.clone());
                }
            }
            part.sort();
        };
        match accepted {
            Some(p) => {
                pool.retain(|a| !part.contains(a));
                out.push(PieceUnifier::new(part, vec![head.clone()], p, rule.clone()));
            }
            None => {
                pool.remove(0);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::TermPartition;
    use crate::test_util::*;

    #[test]
    fn worked_example_yields_two_pieces() {
        let q = cq(&[("p", &["U", "V"]), ("p", &["W", "V"]), ("p", &["W", "T"]), ("r", &["U", "W"])]);
        let r = rule("R", &[("q", &["X"])], &[("p", &["X", "Y"])]);
        let us = single_piece_unifiers(&q, &r);
        assert_eq!(us.len(), 2);
        assert_eq!(us[0].q_part(), &atoms(&[("p", &["U", "V"]), ("p", &["W", "V"])])[..]);
        assert_eq!(
            us[0].partition(),
            &TermPartition::from_classes([vec![var("X"), var("U"), var("W")], vec![var("Y"), var("V")]])
        );
        assert_eq!(us[1].q_part(), &atoms(&[("p", &["W", "T"])])[..]);
        for u in &us {
            u.validate(q.atoms()).unwrap();
        }
    }

    #[test]
    fn failed_seed_is_dropped_alone() {
        let q = cq(&[("p", &["U", "V"]), ("p", &["V", "T"])]);
        let r = rule("R", &[("q", &["X"])], &[("p", &["X", "Y"])]);
        let us = single_piece_unifiers(&q, &r);
        assert_eq!(us.len(), 1);
        assert_eq!(us[0].q_part(), &atoms(&[("p", &["V", "T"])])[..]);
        assert_eq!(
            us[0].partition(),
            &TermPartition::from_classes([vec![var("V"), var("X")], vec![var("T"), var("Y")]])
        );
    }

    #[test]
    fn no_matching_predicate() {
        let q = cq(&[("s", &["U"])]);
        let r = rule("R", &[("q", &["X"])], &[("p", &["X", "Y"])]);
        assert!(single_piece_unifiers(&q, &r).is_empty());
    }
}
