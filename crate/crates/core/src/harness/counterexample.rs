//! Two keyed relations and their decomposition, with data on which the
//! two-literal clause `t(X,Y) :- r1(X,Z,W), r2(Y,Z,W)` is the exact
//! concept. Over the decomposed schema the same concept needs four
//! literals, so a learner bounded by clause length sees different
//! hypothesis spaces on the two sides.

use std::sync::Arc;

use crate::relmodel::{parse_clause, parse_schema, Atom, ExampleSet, Instance, OrderedClause, Sym};
use crate::transform::Transformation;
use crate::Result;

pub const SCHEMA: &str = "
relation r1(a, b, c)
relation r2(d, b, e)
fd r1: b -> a, c
fd r2: b -> d, e
";

pub const DECOMPOSITION: &str = "
decompose r1 into s1(a, b); s2(b, c)
decompose r2 into s3(d, b); s4(b, e)
";

pub const TARGET_CLAUSE: &str = "t(X,Y) :- r1(X,Z,W), r2(Y,Z,W).";

pub struct Counterexample {
    pub instance: Instance,
    pub examples: ExampleSet,
    pub tau: Transformation,
    pub target: OrderedClause,
}

/// Twelve keys: eight where both relations agree on the third column
/// (positives), four where they do not. Negatives also pair rows of
/// different keys and use first arguments that appear nowhere in r1.
pub fn counterexample() -> Result<Counterexample> {
    let schema = Arc::new(parse_schema(SCHEMA)?);
    let tau = Transformation::parse(schema.clone(), DECOMPOSITION)?;
    let mut facts = Vec::new();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    let s = |x: String| Sym::new(&x);
    for i in 0..12 {
        let (a, b, c, d) = (format!("a{}", i), format!("b{}", i), format!("c{}", i), format!("d{}", i));
        let e = if i < 8 { c.clone() } else { format!("e{}", i) };
        facts.push(("r1".to_string(), vec![s(a.clone()), s(b.clone()), s(c)]));
        facts.push(("r2".to_string(), vec![s(d.clone()), s(b), s(e)]));
        let ex = Atom::ground("t", &[&a, &d]);
        if i < 8 {
            pos.push(ex);
        } else {
            neg.push(ex);
        }
    }
    for (i, j) in [(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (6, 7)] {
        neg.push(Atom::ground("t", &[&format!("a{}", i), &format!("d{}", j)]));
    }
    for k in 0..4 {
        neg.push(Atom::ground("t", &[&format!("z{}", k), &format!("d{}", k)]));
    }
    let instance = Instance::new(schema, facts)?;
    Ok(Counterexample {
        instance,
        examples: ExampleSet::new(pos, neg)?,
        tau,
        target: parse_clause(TARGET_CLAUSE)?,
    })
}
