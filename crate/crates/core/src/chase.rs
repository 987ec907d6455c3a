//! Bounded restricted chase and entailment checking.
//!
//! Rounds are rank-synchronous: the triggers of round `k` are computed on
//! the atoms present when the round starts and must use at least one atom
//! derived in round `k - 1`. A trigger fires only if its head is not already
//! satisfied, counting atoms added earlier in the same round.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::ops::ControlFlow;
use std::sync::Arc;

use serde::Serialize;

use crate::homomorphism::{find_homomorphism_in, for_each_homomorphism, AtomStore, Substitution};
use crate::rule::ExistentialRule;
use crate::term::{Atom, Term};

#[derive(Debug, Clone, Default)]
pub struct ChaseState {
    atoms: Vec<Atom>,
    ranks: Vec<usize>,
    present: HashMap<Atom, usize>,
    by_predicate: HashMap<Arc<str>, Vec<usize>>,
    next_null: u32,
    rank: usize,
    saturated: bool,
}

impl AtomStore for ChaseState {
    fn atom(&self, index: usize) -> &Atom {
        &self.atoms[index]
    }

    fn with_predicate(&self, predicate: &str) -> &[usize] {
        self.by_predicate.get(predicate).map(Vec::as_slice).unwrap_or(&[])
    }
}

impl ChaseState {
    /// Starts from `facts` at rank 0. Variables of the facts are frozen into
    /// nulls, one per distinct variable.
    pub fn new(facts: &[Atom]) -> Self {
        let mut state = ChaseState::default();
        state.next_null = facts
            .iter()
            .flat_map(|a| a.args())
            .filter(|t| t.is_null())
            .filter_map(Term::fresh_index)
            .max()
            .map_or(0, |m| m + 1);
        let mut frozen: HashMap<Term, Term> = HashMap::new();
        for a in facts {
            let ground = a.map_terms(|t| {
                if t.is_variable() {
                    frozen.entry(t.clone()).or_insert_with(|| state.fresh_null()).clone()
                } else {
                    t.clone()
                }
            });
            state.insert(ground, 0);
        }
        state
    }

    fn fresh_null(&mut self) -> Term {
        let t = Term::null(self.next_null);
        self.next_null += 1;
        t
    }

    fn insert(&mut self, atom: Atom, rank: usize) -> bool {
        if self.present.contains_key(&atom) {
            return false;
        }
        let i = self.atoms.len();
        self.by_predicate.entry(atom.predicate().into()).or_default().push(i);
        self.present.insert(atom.clone(), i);
        self.atoms.push(atom);
        self.ranks.push(rank);
        true
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.present.contains_key(atom)
    }

    pub fn rank_of(&self, atom: &Atom) -> Option<usize> {
        self.present.get(atom).map(|&i| self.ranks[i])
    }

    /// Number of completed rounds.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// True once a round added nothing.
    pub fn is_saturated(&self) -> bool {
        self.saturated
    }

    /// Atoms with rank at most `rank`.
    pub fn prefix(&self, rank: usize) -> Vec<Atom> {
        self.atoms.iter().zip(&self.ranks).filter(|(_, &r)| r <= rank).map(|(a, _)| a.clone()).collect()
    }

    /// Runs one round; returns whether anything was added.
    pub fn step(&mut self, rules: &[ExistentialRule]) -> bool {
        if self.saturated {
            return false;
        }
        let previous = self.rank;
        let round = previous + 1;
        let mut triggers: Vec<(usize, Substitution)> = Vec::new();
        for (ri, rule) in rules.iter().enumerate() {
            let mut seen: HashSet<Vec<Term>> = HashSet::new();
            for_each_homomorphism(rule.body(), &*self, &Substitution::new(), |h| {
                let fresh = rule.body().iter().any(|b| self.rank_of(&h.apply_atom(b)) == Some(previous));
                if fresh || previous == 0 {
                    let key: Vec<Term> = rule.frontier().iter().map(|v| h.apply(v)).collect();
                    if seen.insert(key) {
                        let restricted: Substitution =
                            rule.frontier().iter().map(|v| (v.clone(), h.apply(v))).collect();
                        triggers.push((ri, restricted));
                    }
                }
                ControlFlow::Continue(())
            });
        }
        let mut added = false;
        for (ri, h) in triggers {
            let rule = &rules[ri];
            let partial = h.apply_atoms(rule.head());
            if find_homomorphism_in(&partial, &*self, &Substitution::new()).is_some() {
                continue;
            }
            let mut ext = h;
            for e in rule.existentials() {
                let n = self.fresh_null();
                ext.insert(e.clone(), n);
            }
            for a in ext.apply_atoms(rule.head()) {
                added |= self.insert(a, round);
            }
        }
        self.rank = round;
        if !added {
            self.saturated = true;
        }
        added
    }
}

/// Chases `facts` for at most `max_rank` rounds, stopping early at a fixpoint.
pub fn chase(facts: &[Atom], rules: &[ExistentialRule], max_rank: usize) -> ChaseState {
    let mut state = ChaseState::new(facts);
    while state.rank() < max_rank && state.step(rules) {}
    state
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Yes,
    UnknownAtBound,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntailmentVerdict {
    pub value: Verdict,
    pub witness: Option<Substitution>,
    /// Rounds run before the answer was known.
    pub ranks_used: usize,
}

impl EntailmentVerdict {
    pub fn is_yes(&self) -> bool {
        self.value == Verdict::Yes
    }
}

/// Checks whether `query` maps into the chase of `facts` after each round
/// up to `max_rank`. `Yes` is definitive; `UnknownAtBound` is not a no
/// unless the chase saturated.
pub fn entails(facts: &[Atom], rules: &[ExistentialRule], query: &[Atom], max_rank: usize) -> EntailmentVerdict {
    let mut state = ChaseState::new(facts);
    loop {
        if let Some(w) = find_homomorphism_in(query, &state, &Substitution::new()) {
            return EntailmentVerdict { value: Verdict::Yes, witness: Some(w), ranks_used: state.rank() };
        }
        if state.rank() >= max_rank || !state.step(rules) {
            return EntailmentVerdict { value: Verdict::UnknownAtBound, witness: None, ranks_used: state.rank() };
        }
    }
}

/// Replaces every variable by a distinct null, numbered from `first`.
pub fn freeze(atoms: &[Atom], first: u32) -> Vec<Atom> {
    let mut map: BTreeMap<Term, Term> = BTreeMap::new();
    for v in atoms.iter().flat_map(|a| a.variables()) {
        let n = first + map.len() as u32;
        map.entry(v.clone()).or_insert_with(|| Term::null(n));
    }
    atoms.iter().map(|a| a.map_terms(|t| map.get(t).cloned().unwrap_or_else(|| t.clone()))).collect()
}
