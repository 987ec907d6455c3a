//! Rewriting of conjunctive queries under existential rules.
//!
//! A query and a rule set are compiled into a union of conjunctive queries
//! that is sound, complete and minimal whenever the breadth-first loop
//! terminates. One-step rewritings come from piece-unifiers; a bounded chase
//! is provided to check results against forward chaining.

mod canonical;
pub mod chase;
pub mod compare;
pub mod cover;
pub mod dlgp;
pub mod engine;
pub mod error;
pub mod homomorphism;
pub mod partition;
pub mod query;
pub mod rule;
pub mod synthetic;
pub mod term;
pub mod unification;
pub mod verify;

#[cfg(test)]
mod test_util;

pub use error::{Error, Result};
pub use query::ConjunctiveQuery;
pub use rule::{ExistentialRule, FreshCounter, KnowledgeBase};
pub use term::{Atom, Term};
