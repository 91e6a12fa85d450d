//! Schemas, dependencies, instances, clauses and conjunctive evaluation.

mod clause;
mod eval;
mod instance;
mod parse;
mod schema;
mod symbol;

pub use clause::{Atom, HornDefinition, OrderedClause, Term, VarGen};
pub use eval::{
    clause_covers, count_covered, covered_indices, covers, covers_at_most, evaluate_clause,
    evaluate_definition, for_each_binding, match_head, satisfiable, vars_of, Hypothesis, Search,
};
pub use instance::{Db, Instance, Table, Tuple};
pub use parse::{
    example_constants, examples_to_string, fact_string, facts_to_string, parse_clause,
    parse_definition, parse_examples, parse_facts, parse_schema, schema_to_string,
};
pub(crate) use parse::{lex, Cursor};
pub use schema::{
    attr_closure, class_index, fd_closure, fd_signature, inclusion_classes, Fd, Ind, IndSide,
    RelationDecl, Schema,
};
pub use symbol::{cmp_tuple, Sym};

use std::collections::HashSet;

use crate::{Error, Result};

/// Labeled ground atoms of one target predicate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExampleSet {
    pub target: Sym,
    pub arity: usize,
    pub positives: Vec<Atom>,
    pub negatives: Vec<Atom>,
}

impl ExampleSet {
    pub fn new(positives: Vec<Atom>, negatives: Vec<Atom>) -> Result<ExampleSet> {
        let first = positives
            .first()
            .or(negatives.first())
            .ok_or_else(|| Error::Data("example set is empty".into()))?;
        let (target, arity) = (first.pred, first.arity());
        Self::with_target(target, arity, positives, negatives)
    }

    pub fn with_target(
        target: Sym,
        arity: usize,
        positives: Vec<Atom>,
        negatives: Vec<Atom>,
    ) -> Result<ExampleSet> {
        for a in positives.iter().chain(&negatives) {
            if a.pred != target || a.arity() != arity {
                return Err(Error::Data(format!(
                    "example {} does not match target {}/{}",
                    a, target, arity
                )));
            }
            if !a.is_ground() {
                return Err(Error::Data(format!("example {} is not ground", a)));
            }
        }
        let pos: HashSet<&Atom> = positives.iter().collect();
        if let Some(a) = negatives.iter().find(|a| pos.contains(a)) {
            return Err(Error::Data(format!("{} is both positive and negative", a)));
        }
        let mut seen = HashSet::new();
        let positives: Vec<Atom> = positives.into_iter().filter(|a| seen.insert(a.clone())).collect();
        let negatives: Vec<Atom> = negatives.into_iter().filter(|a| seen.insert(a.clone())).collect();
        Ok(ExampleSet {
            target,
            arity,
            positives,
            negatives,
        })
    }

    pub fn len(&self) -> usize {
        self.positives.len() + self.negatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
