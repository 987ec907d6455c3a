use crate::partition::TermPartition;
use crate::query::ConjunctiveQuery;
use crate::rule::{ExistentialRule, FreshCounter};
use crate::term::Atom;

use super::single_piece::single_piece_unifiers;
use super::PieceUnifier;

/// Compatible single-piece unifiers over disjoint rule copies, and the
/// piece-unifier they induce on the aggregated rule.
#[derive(Debug, Clone)]
pub struct AggregatedUnifier {
    pub members: Vec<PieceUnifier>,
    pub merged: PieceUnifier,
}

/// Aggregates `members` when their query parts are pairwise disjoint and
/// the join of their partitions is admissible.
///
/// # Panics
/// If two members share a rule variable.
pub fn aggregate(members: &[PieceUnifier]) -> Option<AggregatedUnifier> {
    let first = members.first()?;
    for (i, a) in members.iter().enumerate() {
        for b in &members[i + 1..] {
            assert!(
                a.rule().variables().is_disjoint(&b.rule().variables()),
                "aggregated rule copies must not share variables"
            );
            if a.q_part().iter().any(|x| b.q_part().contains(x)) {
                return None;
            }
        }
    }
    let mut joined = first.partition().clone();
    for m in &members[1..] {
        joined = joined.join(m.partition());
    }
    joined.is_admissible().then(|| merge(members.to_vec(), joined))
}

fn merge(members: Vec<PieceUnifier>, joined: TermPartition) -> AggregatedUnifier {
    if members.len() == 1 {
        let merged = members[0].clone();
        return AggregatedUnifier { members, merged };
    }
    let rules: Vec<ExistentialRule> = members.iter().map(|m| m.rule().clone()).collect();
    let q_part: Vec<Atom> = members.iter().flat_map(|m| m.q_part().iter().cloned()).collect();
    let h_part: Vec<Atom> = members.iter().flat_map(|m| m.h_part().iter().cloned()).collect();
    let merged = PieceUnifier::new(q_part, h_part, joined, ExistentialRule::aggregate(&rules));
    AggregatedUnifier { members, merged }
}

/// All non-empty compatible subsets of the single-piece unifiers of
/// `query` with `rule`, built level by level. Each single-piece unifier is
/// moved onto its own fresh copy of the rule first.
///
/// Subsets are extended only with higher-indexed unifiers, so each one is
/// produced once; since joins only coarsen, an inadmissible subset has no
/// admissible superset and the levelwise search loses nothing.
pub fn enumerate_aggregated(
    query: &ConjunctiveQuery,
    rule: &ExistentialRule,
    counter: &FreshCounter,
) -> Vec<AggregatedUnifier> {
    let base = rule.freshen(counter);
    let singles: Vec<PieceUnifier> = single_piece_unifiers(query, &base)
        .into_iter()
        .map(|mu| {
            let (copy, map) = base.freshen_with_map(counter);
            mu.rename_rule(copy, |t| map[t].clone())
        })
        .collect();

    let mut out = Vec::new();
    let mut level: Vec<(Vec<usize>, TermPartition)> =
        singles.iter().enumerate().map(|(i, s)| (vec![i], s.partition().clone())).collect();
    while !level.is_empty() {
        let mut next = Vec::new();
        for (idx, joined) in &level {
            let last = *idx.last().expect("subsets are non-empty");
            for (j, s) in singles.iter().enumerate().skip(last + 1) {
                let wider = joined.join(s.partition());
                if wider.is_admissible() {
                    let mut members = idx.clone();
                    members.push(j);
                    next.push((members, wider));
                }
            }
        }
        for (idx, joined) in level {
            let members = idx.iter().map(|&i| singles[i].clone()).collect();
            out.push(merge(members, joined));
        }
        level = next;
    }
    out
}
