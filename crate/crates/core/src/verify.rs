//! Checks a rewriting set against the chase: per-query soundness, sampled
//! completeness, and pairwise incomparability.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chase::{chase, entails, freeze};
use crate::engine::{closure, make_operator, OperatorKind, RewritingResult};
use crate::error::Result;
use crate::homomorphism::{for_each_homomorphism, has_homomorphism, more_general, AtomIndex, Substitution};
use crate::query::ConjunctiveQuery;
use crate::rule::ExistentialRule;
use crate::term::{Atom, Term, ANSWER_PREDICATE, AUX_PREFIX};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyConfig {
    /// Number of sampled fact bases for the completeness check.
    pub samples: usize,
    pub seed: u64,
    /// Chase bound for soundness; `None` means `2 * depth + 2` per query.
    pub max_rank: Option<usize>,
    /// Chase bound used to decide entailment of sampled fact bases.
    pub sample_rank: Option<usize>,
    /// Upper bound on atoms per random fact base.
    pub max_facts: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { samples: 200, seed: 0, max_rank: None, sample_rank: None, max_facts: 12 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SoundnessCheck {
    pub query: String,
    pub depth: usize,
    pub rank_bound: usize,
    pub sound: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub facts: Vec<String>,
    pub chase_rank: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub soundness: Vec<SoundnessCheck>,
    pub samples_checked: usize,
    pub samples_entailed: usize,
    /// False when the run did not terminate and completeness was skipped.
    pub completeness_checked: bool,
    pub counterexample: Option<Counterexample>,
    pub comparable_pairs: Vec<(String, String)>,
}

impl VerificationReport {
    pub fn sound(&self) -> bool {
        self.soundness.iter().all(|c| c.sound)
    }

    pub fn minimal(&self) -> bool {
        self.comparable_pairs.is_empty()
    }

    pub fn passed(&self) -> bool {
        self.sound() && self.counterexample.is_none() && self.minimal()
    }
}

/// Freezes `rewriting` into a fact base and checks the chase re-entails
/// `query` within `rank`, retrying once with twice the bound.
pub fn freeze_and_chase(
    query: &ConjunctiveQuery,
    rewriting: &ConjunctiveQuery,
    rules: &[ExistentialRule],
    rank: usize,
) -> Result<bool> {
    let goal = query.attach_answer_atom()?;
    let facts = freeze(rewriting.attach_answer_atom()?.atoms(), 0);
    if entails(&facts, rules, goal.atoms(), rank).is_yes() {
        return Ok(true);
    }
    Ok(entails(&facts, rules, goal.atoms(), rank * 2).is_yes())
}

pub fn verify_rewriting_set(
    query: &ConjunctiveQuery,
    rules: &[ExistentialRule],
    result: &RewritingResult,
    config: &VerifyConfig,
) -> Result<VerificationReport> {
    let mut soundness = Vec::with_capacity(result.cover.len());
    for (q, &depth) in result.cover.iter().zip(&result.depths) {
        let rank = config.max_rank.unwrap_or(2 * depth + 2);
        soundness.push(SoundnessCheck {
            query: q.to_string(),
            depth,
            rank_bound: rank,
            sound: freeze_and_chase(query, q, rules, rank)?,
        });
    }

    let mut comparable_pairs = Vec::new();
    for (i, a) in result.cover.iter().enumerate() {
        for b in &result.cover[i + 1..] {
            if more_general(a, b) || more_general(b, a) {
                comparable_pairs.push((a.to_string(), b.to_string()));
            }
        }
    }

    let mut report = VerificationReport {
        soundness,
        samples_checked: 0,
        samples_entailed: 0,
        completeness_checked: result.terminated,
        counterexample: None,
        comparable_pairs,
    };
    if result.terminated {
        let rank = config.sample_rank.unwrap_or(2 * result.depth_reached + 2);
        let sampler = Sampler::new(query, rules, result.depth_reached, config)?;
        let goal = query.attach_answer_atom()?;
        let cover: Vec<ConjunctiveQuery> =
            result.cover.iter().map(|c| c.attach_answer_atom()).collect::<Result<_>>()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        for _ in 0..config.samples {
            let facts = sampler.draw(&mut rng);
            report.samples_checked += 1;
            let truth = entails(&facts, rules, goal.atoms(), rank);
            if !truth.is_yes() {
                continue;
            }
            report.samples_entailed += 1;
            if !cover.iter().any(|c| has_homomorphism(c.atoms(), &facts)) {
                report.counterexample = Some(Counterexample {
                    facts: facts.iter().map(Atom::to_string).collect(),
                    chase_rank: truth.ranks_used,
                });
                break;
            }
        }
    }
    Ok(report)
}

/// Draws fact bases of two kinds: random ground atoms over the signature,
/// and frozen rewritings taken from an unpruned closure of the query (with
/// a little noise). The closure is built with an operator other than the
/// engine default so that the check does not rely on the cover itself.
struct Sampler {
    signature: Vec<(String, usize)>,
    answer_arity: usize,
    constants: Vec<Term>,
    seeds: Vec<Vec<Atom>>,
    max_facts: usize,
}

impl Sampler {
    fn new(
        query: &ConjunctiveQuery,
        rules: &[ExistentialRule],
        depth: usize,
        config: &VerifyConfig,
    ) -> Result<Self> {
        let mut signature: BTreeSet<(String, usize)> = BTreeSet::new();
        let mut constants: BTreeSet<Term> = BTreeSet::new();
        let all_atoms = query.atoms().iter().chain(rules.iter().flat_map(|r| r.body().iter().chain(r.head())));
        for a in all_atoms {
            if !a.predicate().starts_with(AUX_PREFIX) {
                signature.insert((a.predicate().to_owned(), a.arity()));
            }
            constants.extend(a.args().iter().filter(|t| t.is_constant()).cloned());
        }
        for name in ["c0", "c1", "c2"] {
            constants.insert(Term::constant(name));
        }

        let kind = if rules.iter().all(ExistentialRule::has_atomic_head) {
            OperatorKind::SinglePiece
        } else {
            OperatorKind::FullPiece
        };
        let op = make_operator(kind);
        // closures blow up quickly; a bounded prefix is enough for sampling
        let mut seeds = Vec::new();
        for d in 0..=depth.min(4) {
            let Ok(layer) = closure(query, rules, &op, d) else { break };
            let big = layer.len() > 400;
            seeds = layer
                .into_iter()
                .filter(|(q, _)| !q.atoms().iter().any(|a| a.predicate().starts_with(AUX_PREFIX)))
                .map(|(q, _)| freeze(q.atoms(), 0))
                .collect();
            if big {
                break;
            }
        }
        Ok(Sampler {
            signature: signature.into_iter().collect(),
            answer_arity: query.answer().len(),
            constants: constants.into_iter().collect(),
            seeds,
            max_facts: config.max_facts.max(1),
        })
    }

    fn random_atom(&self, rng: &mut ChaCha8Rng, extra: &[Term]) -> Option<Atom> {
        let (p, arity) = self.signature.choose(rng)?;
        let pool: Vec<&Term> = self.constants.iter().chain(extra).collect();
        let args = (0..*arity).map(|_| (*pool.choose(rng).expect("pool is non-empty")).clone()).collect();
        Some(Atom::new(p.as_str(), args))
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Vec<Atom> {
        let mut facts: Vec<Atom> = Vec::new();
        if !self.seeds.is_empty() && rng.gen_bool(0.5) {
            let seed = self.seeds.choose(rng).expect("seeds are non-empty");
            facts.extend(seed.iter().cloned());
            let extra: Vec<Term> = facts.iter().flat_map(|a| a.args()).filter(|t| t.is_null()).cloned().collect();
            // binding a frozen term to a constant keeps the base entailed
            if extra.len() > 1 && rng.gen_bool(0.3) {
                let a = extra.choose(rng).expect("non-empty").clone();
                let b = self.constants.choose(rng).expect("non-empty").clone();
                facts = facts.iter().map(|x| x.map_terms(|t| if *t == a { b.clone() } else { t.clone() })).collect();
            }
            let noise = rng.gen_range(0..=2);
            for _ in 0..noise {
                facts.extend(self.random_atom(rng, &extra));
            }
        } else {
            let n = rng.gen_range(1..=self.max_facts);
            for _ in 0..n {
                facts.extend(self.random_atom(rng, &[]));
            }
            if self.answer_arity > 0 {
                let args = (0..self.answer_arity)
                    .map(|_| self.constants.choose(rng).expect("non-empty").clone())
                    .collect();
                facts.push(Atom::new(ANSWER_PREDICATE, args));
            }
        }
        facts.sort();
        facts.dedup();
        facts
    }
}

/// Answer tuples of `query` over `atoms`. Tuples that contain a null are
/// left out; a Boolean query yields the empty tuple when it matches.
pub fn answers(query: &ConjunctiveQuery, atoms: &[Atom]) -> BTreeSet<Vec<Term>> {
    let index = AtomIndex::new(atoms);
    let mut out = BTreeSet::new();
    for_each_homomorphism(query.atoms(), &index, &Substitution::new(), |h| {
        let tuple: Vec<Term> = query.answer().iter().map(|t| h.apply(t)).collect();
        if tuple.iter().all(|t| !t.is_null()) {
            out.insert(tuple);
        }
        ControlFlow::Continue(())
    });
    out
}

/// Union of the answers of every cover element over `facts`, whose
/// variables are read as unknown individuals.
pub fn cover_answers(cover: &[ConjunctiveQuery], facts: &[Atom]) -> BTreeSet<Vec<Term>> {
    let frozen = freeze(facts, 0);
    cover.iter().flat_map(|q| answers(q, &frozen)).collect()
}

/// Answers of `query` over the chase of `facts` bounded by `max_rank`, and
/// whether the chase saturated within the bound.
pub fn chase_answers(
    query: &ConjunctiveQuery,
    rules: &[ExistentialRule],
    facts: &[Atom],
    max_rank: usize,
) -> (BTreeSet<Vec<Term>>, bool) {
    let state = chase(&freeze(facts, 0), rules, max_rank);
    (answers(query, state.atoms()), state.is_saturated())
}
