use std::collections::BTreeSet;

use serde::Serialize;

use crate::chase::{clause_equivalent, Verdict};
use crate::learners::{learn, LearnerConfig};
use crate::relmodel::{covers, Atom, ExampleSet, Instance, OrderedClause};
use crate::transform::{Direction, Transformation};
use crate::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Overall {
    Independent,
    Dependent,
    Unknown,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClauseVerdict {
    pub index: usize,
    /// Clause learned over the source instance.
    pub source: Option<String>,
    /// Clause learned over the transformed instance, in its own schema.
    pub target: Option<String>,
    /// Source clause against the target clause mapped back.
    pub in_source: Verdict,
    /// Source clause mapped forward against the target clause.
    pub in_target: Verdict,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndependenceReport {
    pub learner: LearnerConfig,
    pub transformation: String,
    pub source_definition: Vec<String>,
    pub target_definition: Vec<String>,
    pub clauses: Vec<ClauseVerdict>,
    pub covers_equal: bool,
    pub covered_source: usize,
    pub covered_target: usize,
    pub overall: Overall,
    /// First clause pair that is not equivalent.
    pub witness: Option<(Option<String>, Option<String>)>,
}

fn both_ways(c: &OrderedClause, d: &OrderedClause, tau: &Transformation) -> Result<(Verdict, Verdict)> {
    let back = tau.map_clause(d, Direction::Inverse)?;
    let in_source = clause_equivalent(c, &back, tau.source(), tau.source(), None)?.verdict;
    let in_target = clause_equivalent(c, d, tau.source(), tau.target(), Some(tau))?.verdict;
    Ok((in_source, in_target))
}

/// Runs the learner over `instance` and over its image under `tau` and
/// compares the results clause by clause, in both schemas, together with
/// the sets of examples each result covers.
pub fn check_schema_independence(
    config: &LearnerConfig,
    instance: &Instance,
    tau: &Transformation,
    examples: &ExampleSet,
) -> Result<IndependenceReport> {
    let j = tau.apply(instance, Direction::Forward)?;
    let (hi, hj) = rayon::join(|| learn(instance, examples, config), || learn(&j, examples, config));
    let (hi, hj) = (hi?.definition, hj?.definition);
    let mut clauses = Vec::new();
    for k in 0..hi.len().max(hj.len()) {
        let (c, d) = (hi.clauses.get(k), hj.clauses.get(k));
        let (in_source, in_target) = match (c, d) {
            (Some(c), Some(d)) => both_ways(c, d, tau)?,
            _ => (Verdict::Different, Verdict::Different),
        };
        let verdict = match (in_source, in_target) {
            (Verdict::Equivalent, Verdict::Equivalent) => Verdict::Equivalent,
            (Verdict::Different, _) | (_, Verdict::Different) => Verdict::Different,
            _ => Verdict::Unknown,
        };
        clauses.push(ClauseVerdict {
            index: k,
            source: c.map(|c| c.to_string()),
            target: d.map(|d| d.to_string()),
            in_source,
            in_target,
            verdict,
        });
    }
    let all: Vec<Atom> = examples.positives.iter().chain(&examples.negatives).cloned().collect();
    let ci: BTreeSet<Atom> = covers(instance, &hi, &all);
    let cj: BTreeSet<Atom> = covers(&j, &hj, &all);
    let covers_equal = ci == cj;
    let overall = if !covers_equal || clauses.iter().any(|c| c.verdict == Verdict::Different) {
        Overall::Dependent
    } else if clauses.iter().any(|c| c.verdict == Verdict::Unknown) {
        Overall::Unknown
    } else {
        Overall::Independent
    };
    let witness = clauses
        .iter()
        .find(|c| c.verdict != Verdict::Equivalent)
        .map(|c| (c.source.clone(), c.target.clone()));
    Ok(IndependenceReport {
        learner: config.clone(),
        transformation: tau.to_spec_string(),
        source_definition: hi.clauses.iter().map(|c| c.to_string()).collect(),
        target_definition: hj.clauses.iter().map(|c| c.to_string()).collect(),
        clauses,
        covers_equal,
        covered_source: ci.len(),
        covered_target: cj.len(),
        overall,
        witness,
    })
}
