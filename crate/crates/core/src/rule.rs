//! Existential rules, fresh-name generation and head decomposition.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering};

use crate::term::{normalize_atoms, vars_of, Atom, Term, AUX_PREFIX};

/// Shared source of fresh indices. Safe to use from several threads.
#[derive(Debug, Default)]
pub struct FreshCounter(AtomicU32);

impl FreshCounter {
    pub fn new() -> Self {
        Self::starting_at(0)
    }

    pub fn starting_at(start: u32) -> Self {
        FreshCounter(AtomicU32::new(start))
    }

    pub fn next(&self) -> u32 {
        self.0.fetch_add(1, Ordering::Relaxed)
    }

    pub fn peek(&self) -> u32 {
        self.0.load(Ordering::Relaxed)
    }
}

/// `body -> head`, with head-only variables existentially quantified.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExistentialRule {
    label: String,
    body: Vec<Atom>,
    head: Vec<Atom>,
    frontier: BTreeSet<Term>,
    existentials: BTreeSet<Term>,
}

impl ExistentialRule {
    pub fn new(label: impl Into<String>, body: Vec<Atom>, head: Vec<Atom>) -> Self {
        let body = normalize_atoms(body);
        let head = normalize_atoms(head);
        let body_vars = vars_of(&body);
        let head_vars = vars_of(&head);
        let frontier = body_vars.intersection(&head_vars).cloned().collect();
        let existentials = head_vars.difference(&body_vars).cloned().collect();
        ExistentialRule { label: label.into(), body, head, frontier, existentials }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn body(&self) -> &[Atom] {
        &self.body
    }

    pub fn head(&self) -> &[Atom] {
        &self.head
    }

    pub fn frontier(&self) -> &BTreeSet<Term> {
        &self.frontier
    }

    pub fn existentials(&self) -> &BTreeSet<Term> {
        &self.existentials
    }

    pub fn is_frontier(&self, t: &Term) -> bool {
        self.frontier.contains(t)
    }

    pub fn is_existential(&self, t: &Term) -> bool {
        self.existentials.contains(t)
    }

    pub fn has_atomic_head(&self) -> bool {
        self.head.len() == 1
    }

    pub fn variables(&self) -> BTreeSet<Term> {
        vars_of(self.body.iter().chain(&self.head))
    }

    /// Renames every variable through `f`, which must be injective on the
    /// rule's variables.
    pub fn rename(&self, mut f: impl FnMut(&Term) -> Term) -> Self {
        let mut g = |t: &Term| if t.is_variable() { f(t) } else { t.clone() };
        ExistentialRule {
            label: self.label.clone(),
            body: normalize_atoms(self.body.iter().map(|a| a.map_terms(&mut g)).collect()),
            head: normalize_atoms(self.head.iter().map(|a| a.map_terms(&mut g)).collect()),
            frontier: self.frontier.iter().map(&mut g).collect(),
            existentials: self.existentials.iter().map(&mut g).collect(),
        }
    }

    /// An isomorphic copy whose variables carry one freshly drawn index.
    pub fn freshen(&self, counter: &FreshCounter) -> Self {
        self.freshen_with_map(counter).0
    }

    /// Like [`freshen`](Self::freshen), also returning the renaming.
    pub fn freshen_with_map(&self, counter: &FreshCounter) -> (Self, HashMap<Term, Term>) {
        let index = counter.next();
        let mut map: HashMap<Term, Term> = HashMap::new();
        let mut used: BTreeSet<Term> = BTreeSet::new();
        for v in self.variables() {
            let mut candidate = v.with_index(index);
            // two source variables differing only by index would collide
            while used.contains(&candidate) {
                candidate = v.with_index(counter.next());
            }
            used.insert(candidate.clone());
            map.insert(v, candidate);
        }
        let renamed = self.rename(|t| map[t].clone());
        (renamed, map)
    }

    /// Splits a rule with a non-atomic head into atomic-head rules linked by
    /// an auxiliary predicate over all head variables (in term order).
    pub fn decompose_atomic_head(&self) -> Vec<ExistentialRule> {
        if self.head.len() <= 1 {
            return vec![self.clone()];
        }
        let aux_pred = format!("{AUX_PREFIX}{}", self.label);
        let head_vars: Vec<Term> = vars_of(&self.head).into_iter().collect();
        let aux = Atom::new(aux_pred, head_vars);
        let mut out = Vec::with_capacity(self.head.len() + 1);
        out.push(ExistentialRule::new(self.label.clone(), self.body.clone(), vec![aux.clone()]));
        for (i, h) in self.head.iter().enumerate() {
            out.push(ExistentialRule::new(
                format!("{}_{}", self.label, i + 1),
                vec![aux.clone()],
                vec![h.clone()],
            ));
        }
        out
    }

    /// Aggregation `R1 ◇ … ◇ Rk` of copies with pairwise disjoint variables.
    pub fn aggregate(copies: &[ExistentialRule]) -> Self {
        let label = copies.iter().map(|r| r.label.as_str()).collect::<Vec<_>>().join("+");
        let body = copies.iter().flat_map(|r| r.body.iter().cloned()).collect();
        let head = copies.iter().flat_map(|r| r.head.iter().cloned()).collect();
        ExistentialRule::new(label, body, head)
    }
}

impl fmt::Display for ExistentialRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] ", self.label)?;
        write_conjunction(f, &self.head)?;
        f.write_str(" :- ")?;
        write_conjunction(f, &self.body)?;
        f.write_str(".")
    }
}

pub(crate) fn write_conjunction(f: &mut fmt::Formatter<'_>, atoms: &[Atom]) -> fmt::Result {
    for (i, a) in atoms.iter().enumerate() {
        if i > 0 {
            f.write_str(", ")?;
        }
        write!(f, "{a}")?;
    }
    Ok(())
}

/// Decomposes every rule of the set into atomic-head rules.
pub fn decompose_all(rules: &[ExistentialRule]) -> Vec<ExistentialRule> {
    rules.iter().flat_map(|r| r.decompose_atomic_head()).collect()
}

/// Rules plus an existentially closed fact base.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeBase {
    pub rules: Vec<ExistentialRule>,
    pub facts: Vec<Atom>,
}
