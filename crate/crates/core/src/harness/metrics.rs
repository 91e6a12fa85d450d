use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::relmodel::{Atom, ExampleSet, Instance, Sym};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Metrics {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// `None` when nothing was predicted.
    pub precision: Option<f64>,
    /// `None` when there are no positives.
    pub recall: Option<f64>,
}

/// Scores `predicted` against the labeled examples. Predicted atoms that
/// are not examples are ignored.
pub fn metrics(predicted: &BTreeSet<Atom>, examples: &ExampleSet) -> Metrics {
    let tp = examples.positives.iter().filter(|a| predicted.contains(*a)).count();
    let fp = examples.negatives.iter().filter(|a| predicted.contains(*a)).count();
    let fn_ = examples.positives.len() - tp;
    let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
    Metrics {
        tp,
        fp,
        fn_,
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fn_),
    }
}

#[derive(Clone, Debug)]
pub struct SampledNegatives {
    pub negatives: Vec<Atom>,
    /// The candidate pool was smaller than requested and was taken whole.
    pub exhausted: bool,
}

/// Closed-world negatives: every atom over the constants seen at each
/// position of the positives that is not itself a positive, sampled down
/// to `ratio` times the number of positives. Sample order is canonical.
pub fn sample_negatives(_instance: &Instance, positives: &[Atom], ratio: f64, seed: u64) -> Result<SampledNegatives> {
    if !(ratio > 0.0) {
        return Err(Error::Invalid("negative ratio must be positive".into()));
    }
    let Some(first) = positives.first() else {
        return Ok(SampledNegatives {
            negatives: Vec::new(),
            exhausted: true,
        });
    };
    let (pred, arity) = (first.pred, first.arity());
    let mut domains: Vec<BTreeSet<Sym>> = vec![BTreeSet::new(); arity];
    for a in positives {
        let Some(cs) = a.consts() else {
            return Err(Error::Data(format!("positive example {} is not ground", a)));
        };
        if a.pred != pred || cs.len() != arity {
            return Err(Error::Data(format!("example {} does not match {}/{}", a, pred, arity)));
        }
        for (d, c) in domains.iter_mut().zip(cs) {
            d.insert(c);
        }
    }
    let domains: Vec<Vec<Sym>> = domains
        .into_iter()
        .map(|d| {
            let mut v: Vec<Sym> = d.into_iter().collect();
            v.sort_by(|a, b| a.cmp_str(*b));
            v
        })
        .collect();
    let pos: HashSet<&Atom> = positives.iter().collect();
    let mut pool: Vec<Atom> = Vec::new();
    let mut idx = vec![0usize; arity];
    'outer: loop {
        let atom = Atom::new(
            pred,
            idx.iter()
                .zip(&domains)
                .map(|(&i, d)| crate::relmodel::Term::Const(d[i]))
                .collect(),
        );
        if !pos.contains(&atom) {
            pool.push(atom);
        }
        for k in (0..arity).rev() {
            idx[k] += 1;
            if idx[k] < domains[k].len() {
                continue 'outer;
            }
            idx[k] = 0;
        }
        break;
    }
    let want = (ratio * positives.len() as f64).round() as usize;
    let exhausted = pool.len() <= want;
    if !exhausted {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        pool.shuffle(&mut rng);
        pool.truncate(want);
        pool.sort_by_key(|a| a.to_string());
    }
    Ok(SampledNegatives { negatives: pool, exhausted })
}
