//! Piece-unifiers: validity, pieces, and the three ways of enumerating them.

mod aggregation;
mod general;
mod position;
mod single_piece;

pub use aggregation::{aggregate, enumerate_aggregated, AggregatedUnifier};
pub use general::{general_piece_unifiers, GeneralCap};
pub use position::{partition_by_position, sticky_variables, unifiable};
pub use single_piece::single_piece_unifiers;

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::homomorphism::Substitution;
use crate::partition::TermPartition;
use crate::query::ConjunctiveQuery;
use crate::rule::{write_conjunction, ExistentialRule};
use crate::term::{normalize_atoms, terms_of, vars_of, Atom, Term};

/// `(Q′, H′, P)`: query atoms, rule-head atoms and a partition over their
/// terms, together with the (freshened) rule the head belongs to.
#[derive(Clone, PartialEq, Eq)]
pub struct PieceUnifier {
    q_part: Vec<Atom>,
    h_part: Vec<Atom>,
    partition: TermPartition,
    rule: ExistentialRule,
}

impl PieceUnifier {
    /// Assembles a unifier; role marks for `rule` are (re)applied to the
    /// partition. No validity check is made here, see [`validate`](Self::validate).
    pub fn new(
        q_part: Vec<Atom>,
        h_part: Vec<Atom>,
        mut partition: TermPartition,
        rule: ExistentialRule,
    ) -> Self {
        partition.mark_rule(&rule);
        PieceUnifier {
            q_part: normalize_atoms(q_part),
            h_part: normalize_atoms(h_part),
            partition,
            rule,
        }
    }

    pub fn q_part(&self) -> &[Atom] {
        &self.q_part
    }

    pub fn h_part(&self) -> &[Atom] {
        &self.h_part
    }

    pub fn partition(&self) -> &TermPartition {
        &self.partition
    }

    pub fn rule(&self) -> &ExistentialRule {
        &self.rule
    }

    pub fn substitution(&self) -> Result<Substitution> {
        self.partition.associated_substitution()
    }

    /// Checks the unifier against `query`: structural preconditions, then
    /// admissibility, the existential-class condition and `u(H′) = u(Q′)`.
    pub fn validate(&self, query: &[Atom]) -> Result<()> {
        let invalid = |msg: String| Err(Error::InvalidUnifier(msg));
        if self.q_part.is_empty() {
            return invalid("empty query part".into());
        }
        if let Some(a) = self.q_part.iter().find(|a| query.binary_search(a).is_err()) {
            return invalid(format!("{a} is not a query atom"));
        }
        if let Some(h) = self.h_part.iter().find(|h| !self.rule.head().contains(h)) {
            return invalid(format!("{h} is not a head atom"));
        }
        let shared = vars_of(query).intersection(&self.rule.variables()).count();
        if shared > 0 {
            return invalid("query and rule share variables".into());
        }
        let carrier = terms_of(self.q_part.iter().chain(&self.h_part));
        if carrier != self.partition.carrier() {
            return invalid(format!("partition carrier differs from terms of Q′ ∪ H′: {}", self.partition));
        }
        if !self.partition.is_admissible() {
            return invalid(format!("inadmissible partition {}", self.partition));
        }
        let sep = separating_vars(query, &self.q_part);
        let q_vars = vars_of(&self.q_part);
        for class in self.partition.classes() {
            let existentials: Vec<&Term> =
                class.iter().filter(|t| self.rule.is_existential(t)).collect();
            if existentials.is_empty() {
                continue;
            }
            let others_ok = class.iter().all(|t| {
                existentials.len() == 1 && (*t == *existentials[0] || (q_vars.contains(t) && !sep.contains(t)))
            });
            if !others_ok {
                return invalid(format!("class {class:?} joins an existential variable with a separating variable, constant or rule term"));
            }
        }
        let u = self.substitution()?;
        let uh = normalize_atoms(u.apply_atoms(&self.h_part));
        let uq = normalize_atoms(u.apply_atoms(&self.q_part));
        if uh != uq {
            return invalid("u(H′) differs from u(Q′)".into());
        }
        Ok(())
    }

    /// Query variables unified with a frontier variable or a constant.
    pub fn cutpoints(&self) -> BTreeSet<Term> {
        vars_of(&self.q_part)
            .into_iter()
            .filter(|x| {
                self.partition
                    .class_of(x)
                    .iter()
                    .any(|t| t.is_constant() || self.rule.is_frontier(t))
            })
            .collect()
    }

    /// Pieces of `Q′` with respect to the cutpoints.
    pub fn pieces(&self) -> Vec<Vec<Atom>> {
        pieces(&self.q_part, &self.cutpoints())
    }

    pub fn is_single_piece(&self) -> bool {
        self.pieces().len() == 1
    }

    /// Applies `f` to every variable of the rule side (head atoms, rule and
    /// partition), leaving query terms alone.
    pub(crate) fn rename_rule(&self, rule: ExistentialRule, f: impl Fn(&Term) -> Term) -> Self {
        let rule_vars = self.rule.variables();
        let g = |t: &Term| if rule_vars.contains(t) { f(t) } else { t.clone() };
        PieceUnifier::new(
            self.q_part.clone(),
            self.h_part.iter().map(|a| a.map_terms(g)).collect(),
            self.partition.rename(g),
            rule,
        )
    }
}

impl fmt::Debug for PieceUnifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PieceUnifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("({")?;
        write_conjunction(f, &self.q_part)?;
        f.write_str("}, {")?;
        write_conjunction(f, &self.h_part)?;
        write!(f, "}}, {})", self.partition)
    }
}

/// `vars(Q′) ∩ vars(Q \ Q′)`.
pub fn separating_vars(query: &[Atom], q_part: &[Atom]) -> BTreeSet<Term> {
    let inside = vars_of(q_part);
    let outside = vars_of(query.iter().filter(|a| !q_part.contains(a)));
    inside.intersection(&outside).cloned().collect()
}

/// Connected components of `atoms` where two atoms are linked when they
/// share a variable outside `cutpoints`. Components keep input order.
pub fn pieces(atoms: &[Atom], cutpoints: &BTreeSet<Term>) -> Vec<Vec<Atom>> {
    let n = atoms.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    let mut owner: std::collections::HashMap<&Term, usize> = std::collections::HashMap::new();
    for (i, a) in atoms.iter().enumerate() {
        for v in a.variables().filter(|v| !cutpoints.contains(*v)) {
            match owner.get(v) {
                Some(&j) => {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri] = rj;
                }
                None => {
                    owner.insert(v, i);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<Atom>)> = Vec::new();
    for (i, a) in atoms.iter().enumerate() {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, g)) => g.push(a.clone()),
            None => groups.push((r, vec![a.clone()])),
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

/// One-step rewriting `u(body(R)) ∪ u(Q \ Q′)`, canonicalized.
///
/// A query with answer variables is rewritten through its `__ans` form and
/// returned with answer variables again.
pub fn beta(query: &ConjunctiveQuery, mu: &PieceUnifier) -> Result<ConjunctiveQuery> {
    if !query.is_boolean() {
        let attached = query.attach_answer_atom()?;
        return beta(&attached, mu)?.strip_answer_atom();
    }
    mu.validate(query.atoms())?;
    Ok(beta_unchecked(query.atoms(), mu)?.canonicalize())
}

pub(crate) fn beta_unchecked(query: &[Atom], mu: &PieceUnifier) -> Result<ConjunctiveQuery> {
    let u = mu.substitution()?;
    let mut atoms = u.apply_atoms(mu.rule.body());
    atoms.extend(query.iter().filter(|a| mu.q_part.binary_search(a).is_err()).map(|a| u.apply_atom(a)));
    Ok(ConjunctiveQuery::boolean(atoms))
}
