//! Partitions over finite term sets: the state carried by piece-unifiers.
//!
//! Backed by union-find with path compression and union by size. Each root
//! also tracks how many constants, existential variables and frontier
//! variables its class holds; the last two are relative to whatever rule was
//! registered through [`TermPartition::mark_rule`].

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::homomorphism::Substitution;
use crate::rule::ExistentialRule;
use crate::term::Term;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClassFlags {
    pub constants: usize,
    pub existentials: usize,
    pub frontier: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Role {
    existential: bool,
    frontier: bool,
}

#[derive(Clone, Default)]
pub struct TermPartition {
    terms: Vec<Term>,
    index: HashMap<Term, usize>,
    parent: Vec<Cell<usize>>,
    size: Vec<usize>,
    roles: Vec<Role>,
    flags: Vec<ClassFlags>,
}

impl TermPartition {
    pub fn new() -> Self {
        Self::default()
    }

    /// Discrete partition: every term alone in its class.
    pub fn discrete<'a>(terms: impl IntoIterator<Item = &'a Term>) -> Self {
        let mut p = Self::new();
        for t in terms {
            p.add(t);
        }
        p
    }

    pub fn from_classes<I, C>(classes: I) -> Self
    where
        I: IntoIterator<Item = C>,
        C: IntoIterator<Item = Term>,
    {
        let mut p = Self::new();
        for class in classes {
            let mut first: Option<Term> = None;
            for t in class {
                p.add(&t);
                match &first {
                    Some(f) => p.union(f, &t),
                    None => first = Some(t),
                }
            }
        }
        p
    }

    /// Adds `t` as a singleton class if absent; returns its slot.
    pub fn add(&mut self, t: &Term) -> usize {
        if let Some(&i) = self.index.get(t) {
            return i;
        }
        let i = self.terms.len();
        self.terms.push(t.clone());
        self.index.insert(t.clone(), i);
        self.parent.push(Cell::new(i));
        self.size.push(1);
        self.roles.push(Role::default());
        self.flags.push(ClassFlags { constants: usize::from(t.is_constant()), ..Default::default() });
        i
    }

    fn root(&self, mut i: usize) -> usize {
        let start = i;
        while self.parent[i].get() != i {
            i = self.parent[i].get();
        }
        // path compression through interior mutability
        let mut j = start;
        while self.parent[j].get() != i {
            let next = self.parent[j].get();
            self.parent[j].set(i);
            j = next;
        }
        i
    }

    /// Merges the classes of `a` and `b`, adding either term if needed.
    pub fn union(&mut self, a: &Term, b: &Term) {
        let ia = self.add(a);
        let ib = self.add(b);
        self.union_slots(ia, ib);
    }

    fn union_slots(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.root(a), self.root(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb].set(ra);
        self.size[ra] += self.size[rb];
        let fb = self.flags[rb];
        let fa = &mut self.flags[ra];
        fa.constants += fb.constants;
        fa.existentials += fb.existentials;
        fa.frontier += fb.frontier;
    }

    fn set_role(&mut self, t: &Term, existential: bool, frontier: bool) {
        let Some(&i) = self.index.get(t) else { return };
        let r = self.root(i);
        let role = &mut self.roles[i];
        if existential && !role.existential {
            role.existential = true;
            self.flags[r].existentials += 1;
        }
        if frontier && !role.frontier {
            role.frontier = true;
            self.flags[r].frontier += 1;
        }
    }

    /// Records which carrier terms are existential or frontier variables of
    /// `rule`. Marks accumulate across calls and survive joins.
    pub fn mark_rule(&mut self, rule: &ExistentialRule) {
        for v in rule.existentials() {
            self.set_role(v, true, false);
        }
        for v in rule.frontier() {
            self.set_role(v, false, true);
        }
    }

    pub fn contains(&self, t: &Term) -> bool {
        self.index.contains_key(t)
    }

    pub fn carrier(&self) -> BTreeSet<Term> {
        self.terms.iter().cloned().collect()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn same_class(&self, a: &Term, b: &Term) -> bool {
        match (self.index.get(a), self.index.get(b)) {
            (Some(&i), Some(&j)) => self.root(i) == self.root(j),
            _ => a == b,
        }
    }

    pub fn is_existential(&self, t: &Term) -> bool {
        self.index.get(t).is_some_and(|&i| self.roles[i].existential)
    }

    pub fn is_frontier(&self, t: &Term) -> bool {
        self.index.get(t).is_some_and(|&i| self.roles[i].frontier)
    }

    /// Flags of the class containing `t`.
    pub fn flags_of(&self, t: &Term) -> Option<ClassFlags> {
        self.index.get(t).map(|&i| self.flags[self.root(i)])
    }

    /// Classes with their members sorted; classes ordered by minimum member.
    pub fn classes(&self) -> Vec<Vec<Term>> {
        self.classes_with_flags().into_iter().map(|(c, _)| c).collect()
    }

    pub fn classes_with_flags(&self) -> Vec<(Vec<Term>, ClassFlags)> {
        let mut by_root: BTreeMap<usize, Vec<Term>> = BTreeMap::new();
        for (i, t) in self.terms.iter().enumerate() {
            by_root.entry(self.root(i)).or_default().push(t.clone());
        }
        let mut out: Vec<(Vec<Term>, ClassFlags)> = by_root
            .into_iter()
            .map(|(r, mut c)| {
                c.sort();
                (c, self.flags[r])
            })
            .collect();
        out.sort_by(|a, b| a.0[0].cmp(&b.0[0]));
        out
    }

    pub fn class_of(&self, t: &Term) -> Vec<Term> {
        let Some(&i) = self.index.get(t) else {
            return vec![t.clone()];
        };
        let r = self.root(i);
        let mut c: Vec<Term> = (0..self.terms.len())
            .filter(|&j| self.root(j) == r)
            .map(|j| self.terms[j].clone())
            .collect();
        c.sort();
        c
    }

    /// Join: union of the carriers, merging overlapping classes until
    /// stable. Role marks of both sides are kept.
    pub fn join(&self, other: &TermPartition) -> TermPartition {
        let mut out = self.clone();
        for (i, t) in other.terms.iter().enumerate() {
            let slot = out.add(t);
            let role = other.roles[i];
            out.set_role(t, role.existential, role.frontier);
            let rep = &other.terms[other.root(i)];
            let rep_slot = out.add(rep);
            out.union_slots(slot, rep_slot);
        }
        out
    }

    /// No class holds two constants.
    pub fn is_admissible(&self) -> bool {
        (0..self.terms.len()).all(|i| self.root(i) != i || self.flags[i].constants <= 1)
    }

    /// Every class of `self` lies inside a class of `other`.
    pub fn finer_than(&self, other: &TermPartition) -> Result<bool> {
        if self.carrier() != other.carrier() {
            return Err(Error::CarrierMismatch);
        }
        let mut image: HashMap<usize, usize> = HashMap::new();
        for (i, t) in self.terms.iter().enumerate() {
            let mine = self.root(i);
            let theirs = other.root(other.index[t]);
            match image.get(&mine) {
                Some(&o) if o != theirs => return Ok(false),
                Some(_) => {}
                None => {
                    image.insert(mine, theirs);
                }
            }
        }
        Ok(true)
    }

    /// Maps every term to the minimum of its class under the term order
    /// (constants first). Fails on inadmissible partitions.
    pub fn associated_substitution(&self) -> Result<Substitution> {
        let mut s = Substitution::new();
        for (class, flags) in self.classes_with_flags() {
            if flags.constants > 1 {
                return Err(Error::Inadmissible(format_class(&class)));
            }
            let rep = &class[0];
            for t in &class[1..] {
                s.insert(t.clone(), rep.clone());
            }
        }
        Ok(s)
    }

    /// Renames carrier terms through `f` (injective on the carrier).
    pub fn rename(&self, f: impl Fn(&Term) -> Term) -> TermPartition {
        let mut out = TermPartition::new();
        for (i, t) in self.terms.iter().enumerate() {
            let nt = f(t);
            out.add(&nt);
            let role = self.roles[i];
            out.set_role(&nt, role.existential, role.frontier);
        }
        for (i, t) in self.terms.iter().enumerate() {
            let rep = &self.terms[self.root(i)];
            out.union(&f(t), &f(rep));
        }
        out
    }
}

fn format_class(class: &[Term]) -> String {
    let items: Vec<String> = class.iter().map(Term::to_string).collect();
    format!("{{{}}}", items.join(","))
}

impl PartialEq for TermPartition {
    fn eq(&self, other: &Self) -> bool {
        self.classes() == other.classes()
    }
}

impl Eq for TermPartition {}

impl fmt::Debug for TermPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for TermPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let classes: Vec<String> = self.classes().iter().map(|c| format_class(c)).collect();
        write!(f, "{{{}}}", classes.join(", "))
    }
}
