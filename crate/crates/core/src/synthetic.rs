//! Seeded random instances: rule sets, queries and fact bases, plus a
//! DL-Lite-shaped ontology of linear rules used for benchmarking.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::query::ConjunctiveQuery;
use crate::rule::ExistentialRule;
use crate::term::{Atom, Term};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A fixed set of predicates with arities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Signature {
    pub predicates: Vec<(String, usize)>,
}

impl Signature {
    /// `count` predicates `p0, p1, …` with arities drawn from `1..=max_arity`.
    pub fn random(rng: &mut ChaCha8Rng, count: usize, max_arity: usize) -> Self {
        let predicates = (0..count).map(|i| (format!("p{i}"), rng.gen_range(1..=max_arity.max(1)))).collect();
        Signature { predicates }
    }

    fn pick(&self, rng: &mut ChaCha8Rng) -> (String, usize) {
        self.predicates.choose(rng).expect("signature is non-empty").clone()
    }
}

fn var(prefix: &str, i: usize) -> Term {
    Term::variable(format!("{prefix}{i}"))
}

fn random_atom(rng: &mut ChaCha8Rng, sig: &Signature, pool: &[Term]) -> Atom {
    let (p, arity) = sig.pick(rng);
    Atom::new(p, (0..arity).map(|_| pool.choose(rng).expect("pool is non-empty").clone()).collect())
}

/// A rule with a single body atom and a single head atom. Head positions
/// reuse body variables or introduce existentials.
pub fn random_linear_rule(rng: &mut ChaCha8Rng, sig: &Signature, label: String) -> ExistentialRule {
    let (bp, ba) = sig.pick(rng);
    let body_vars: Vec<Term> = (0..ba).map(|i| var("X", i)).collect();
    let body_args: Vec<Term> = (0..ba).map(|_| body_vars.choose(rng).expect("arity > 0").clone()).collect();
    let used: Vec<Term> = {
        let mut u = body_args.clone();
        u.sort();
        u.dedup();
        u
    };
    let (hp, ha) = sig.pick(rng);
    let mut existentials = 0;
    let head_args = (0..ha)
        .map(|_| {
            if rng.gen_bool(0.3) {
                existentials += 1;
                var("Y", rng.gen_range(0..existentials))
            } else {
                used.choose(rng).expect("non-empty").clone()
            }
        })
        .collect();
    ExistentialRule::new(label, vec![Atom::new(bp, body_args)], vec![Atom::new(hp, head_args)])
}

/// A rule with one to `max_body` body atoms and a single head atom.
pub fn random_atomic_head_rule(
    rng: &mut ChaCha8Rng,
    sig: &Signature,
    max_body: usize,
    label: String,
) -> ExistentialRule {
    let n = rng.gen_range(1..=max_body.max(1));
    let pool: Vec<Term> = (0..3).map(|i| var("X", i)).collect();
    let body: Vec<Atom> = (0..n).map(|_| random_atom(rng, sig, &pool)).collect();
    let mut used: Vec<Term> = body.iter().flat_map(|a| a.args().iter().cloned()).collect();
    used.sort();
    used.dedup();
    let (hp, ha) = sig.pick(rng);
    let head_args = (0..ha)
        .map(|_| if rng.gen_bool(0.3) { var("Y", 0) } else { used.choose(rng).expect("non-empty").clone() })
        .collect();
    ExistentialRule::new(label, body, vec![Atom::new(hp, head_args)])
}

pub fn random_linear_rules(rng: &mut ChaCha8Rng, sig: &Signature, count: usize) -> Vec<ExistentialRule> {
    (0..count).map(|i| random_linear_rule(rng, sig, format!("r{}", i + 1))).collect()
}

pub fn random_atomic_head_rules(
    rng: &mut ChaCha8Rng,
    sig: &Signature,
    count: usize,
    max_body: usize,
) -> Vec<ExistentialRule> {
    (0..count).map(|i| random_atomic_head_rule(rng, sig, max_body, format!("r{}", i + 1))).collect()
}

/// A Boolean query of one to `max_atoms` atoms over at most `max_vars`
/// variables and, with low probability, a constant.
pub fn random_query(rng: &mut ChaCha8Rng, sig: &Signature, max_atoms: usize, max_vars: usize) -> ConjunctiveQuery {
    let n = rng.gen_range(1..=max_atoms.max(1));
    let mut pool: Vec<Term> = (0..max_vars.max(1)).map(|i| var("U", i)).collect();
    pool.push(Term::constant("a"));
    let atoms = (0..n)
        .map(|_| {
            let (p, arity) = sig.pick(rng);
            let args = (0..arity)
                .map(|_| {
                    if rng.gen_bool(0.1) {
                        Term::constant("a")
                    } else {
                        pool[..pool.len() - 1].choose(rng).expect("non-empty").clone()
                    }
                })
                .collect();
            Atom::new(p, args)
        })
        .collect();
    ConjunctiveQuery::boolean(atoms)
}

/// A ground fact base of one to `max_atoms` atoms over `constants`
/// constants (plus `a`, which random queries may mention).
pub fn random_facts(rng: &mut ChaCha8Rng, sig: &Signature, max_atoms: usize, constants: usize) -> Vec<Atom> {
    let mut pool: Vec<Term> = (0..constants).map(|i| Term::constant(format!("c{i}"))).collect();
    pool.push(Term::constant("a"));
    let n = rng.gen_range(1..=max_atoms.max(1));
    let mut facts: Vec<Atom> = (0..n).map(|_| random_atom(rng, sig, &pool)).collect();
    facts.sort();
    facts.dedup();
    facts
}

/// Concept (unary) and role (binary) names of the benchmark ontology.
pub const CONCEPTS: usize = 15;
pub const ROLES: usize = 10;

fn concept(i: usize) -> String {
    format!("c{i}")
}

fn role(i: usize) -> String {
    format!("role{i}")
}

/// A DL-Lite-shaped ontology of `size` linear rules, of which
/// `hierarchy` are concept or role inclusions. The others are existential
/// restrictions, domain and range axioms, and inverse-role inclusions.
pub fn synthetic_ontology(seed: u64, size: usize, hierarchy: usize) -> Vec<ExistentialRule> {
    let mut rng = rng(seed);
    let (x, y) = (Term::variable("X"), Term::variable("Y"));
    let unary = |p: String, t: &Term| Atom::new(p, vec![t.clone()]);
    let binary = |p: String, s: &Term, t: &Term| Atom::new(p, vec![s.clone(), t.clone()]);
    let mut rules: Vec<(Vec<Atom>, Vec<Atom>)> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    while rules.len() < hierarchy.min(size) {
        // inclusions only go from higher to lower indices, so they form a DAG
        let r = if rng.gen_bool(0.6) {
            let sub = rng.gen_range(1..CONCEPTS);
            let sup = rng.gen_range(0..sub);
            (vec![unary(concept(sub), &x)], vec![unary(concept(sup), &x)])
        } else {
            let sub = rng.gen_range(1..ROLES);
            let sup = rng.gen_range(0..sub);
            (vec![binary(role(sub), &x, &y)], vec![binary(role(sup), &x, &y)])
        };
        if seen.insert(r.clone()) {
            rules.push(r);
        }
    }
    while rules.len() < size {
        let c = concept(rng.gen_range(0..CONCEPTS));
        let r1 = role(rng.gen_range(0..ROLES));
        let r = match rng.gen_range(0..4) {
            0 => (vec![unary(c, &x)], vec![binary(r1, &x, &y)]),
            1 => (vec![binary(r1, &x, &y)], vec![unary(c, &x)]),
            2 => (vec![binary(r1, &x, &y)], vec![unary(c, &y)]),
            _ => {
                let r2 = role(rng.gen_range(0..ROLES));
                if r1 == r2 {
                    continue;
                }
                (vec![binary(r1, &x, &y)], vec![binary(r2, &y, &x)])
            }
        };
        if seen.insert(r.clone()) {
            rules.push(r);
        }
    }
    rules
        .into_iter()
        .enumerate()
        .map(|(i, (body, head))| ExistentialRule::new(format!("s{}", i + 1), body, head))
        .collect()
}

/// Whether a rule is a concept or role inclusion.
pub fn is_hierarchy_rule(rule: &ExistentialRule) -> bool {
    match (rule.body(), rule.head()) {
        ([b], [h]) => b.arity() == h.arity() && b.args() == h.args(),
        _ => false,
    }
}

/// Connected queries over the benchmark signature with answer variables.
pub fn synthetic_queries(seed: u64, count: usize) -> Vec<ConjunctiveQuery> {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.gen_range(1..=4);
        let mut vars = vec![Term::variable("A")];
        let mut atoms = Vec::new();
        for _ in 0..n {
            let from = vars.choose(&mut rng).expect("non-empty").clone();
            if rng.gen_bool(0.5) {
                atoms.push(Atom::new(concept(rng.gen_range(0..CONCEPTS)), vec![from]));
            } else {
                let to = Term::variable(format!("{}", (b'A' + vars.len() as u8) as char));
                vars.push(to.clone());
                atoms.push(Atom::new(role(rng.gen_range(0..ROLES)), vec![from, to]));
            }
        }
        let q = ConjunctiveQuery::new(atoms, vec![Term::variable("A")]).expect("A occurs in the first atom");
        if !out.contains(&q) {
            out.push(q);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        let sig = Signature::random(&mut rng(7), 4, 3);
        let a = random_linear_rules(&mut rng(1), &sig, 6);
        let b = random_linear_rules(&mut rng(1), &sig, 6);
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.body().len() == 1 && r.head().len() == 1));
        assert_eq!(synthetic_queries(3, 5), synthetic_queries(3, 5));
    }

    #[test]
    fn ontology_shape() {
        let rules = synthetic_ontology(2024, 50, 30);
        assert_eq!(rules.len(), 50);
        assert_eq!(rules.iter().filter(|r| is_hierarchy_rule(r)).count(), 30);
        assert!(rules.iter().all(|r| r.body().len() == 1 && r.head().len() == 1));
    }

    #[test]
    fn facts_are_ground() {
        let sig = Signature::random(&mut rng(0), 3, 2);
        let f = random_facts(&mut rng(5), &sig, 12, 3);
        assert!(!f.is_empty() && f.len() <= 12);
        assert!(f.iter().all(|a| a.variables().next().is_none()));
    }
}
