//! Synthetic UW-CSE-style data and the four-schema family used throughout
//! the tests: Original, 4NF, Denorm1 and Denorm2, each obtained from the
//! previous one by composition.
//!
//! The real data has many-to-many publication and teaching relations; the
//! bundled schemas use keyed analogues (one professor and one student per
//! title, one teacher and one TA per offering) so that every composition
//! step is lossless.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::relmodel::{parse_schema, Atom, ExampleSet, Instance, Schema, Sym, Tuple};
use crate::transform::Transformation;
use crate::Result;

pub const ORIGINAL: &str = "
relation student(stud)
relation inPhase(stud, phase)
relation yearsInProgram(stud, years)
relation professor(prof)
relation hasPosition(prof, position)
relation courseLevel(crs, level)
relation taughtBy(crs, prof, term)
relation ta(crs, stud, term)
relation publicationProfessor(title, prof)
relation publicationStudent(title, stud)
fd inPhase: stud -> phase
fd yearsInProgram: stud -> years
fd hasPosition: prof -> position
fd courseLevel: crs -> level
fd taughtBy: crs, term -> prof
fd ta: crs, term -> stud
fd publicationProfessor: title -> prof
fd publicationStudent: title -> stud
ind student[stud] = inPhase[stud]
ind student[stud] = yearsInProgram[stud]
ind professor[prof] = hasPosition[prof]
ind taughtBy[crs, term] = ta[crs, term]
ind publicationProfessor[title] = publicationStudent[title]
ind ta[stud] <= student[stud]
ind taughtBy[prof] <= professor[prof]
ind taughtBy[crs] <= courseLevel[crs]
ind publicationStudent[stud] <= student[stud]
ind publicationProfessor[prof] <= professor[prof]
";

/// Original to 4NF: entity attributes folded into the entity relations.
pub const TO_4NF: &str = "
compose student, inPhase, yearsInProgram into student
compose professor, hasPosition into professor
";

/// 4NF to Denorm1: one relation per course offering.
pub const TO_DENORM1: &str = "compose taughtBy, ta into course\n";

/// Denorm1 to Denorm2: one relation per publication.
pub const TO_DENORM2: &str = "compose publicationProfessor, publicationStudent into coauthor\n";

pub const TARGET: &str = "advisedBy";

/// The four schemas and the transformations from Original to each of them.
pub struct Family {
    pub names: [&'static str; 4],
    pub schemas: Vec<Arc<Schema>>,
    /// `from_original[k]` maps Original to schema `k`; index 0 is the identity.
    pub from_original: Vec<Transformation>,
}

impl Family {
    pub fn new() -> Result<Family> {
        let original = Arc::new(parse_schema(ORIGINAL)?);
        let mut from_original = vec![Transformation::identity(original.clone())];
        for step in [TO_4NF, TO_DENORM1, TO_DENORM2] {
            let prev = from_original.last().unwrap();
            let next = Transformation::parse(prev.target().clone(), step)?;
            from_original.push(prev.then(&next)?);
        }
        Ok(Family {
            names: ["original", "4nf", "denorm1", "denorm2"],
            schemas: from_original.iter().map(|t| t.target().clone()).collect(),
            from_original,
        })
    }

    /// The transformation from schema `a` to schema `b`.
    pub fn between(&self, a: usize, b: usize) -> Result<Transformation> {
        self.from_original[a].inverse().then(&self.from_original[b])
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| *n == name)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UwcseConfig {
    pub students: usize,
    pub professors: usize,
    pub courses: usize,
    pub terms: usize,
    /// Probability that a student has an advisor.
    pub advised: f64,
    /// Probability that an advised student co-authors with the advisor.
    pub publish: f64,
    /// Extra publications between non-advising pairs.
    pub noise_publications: usize,
    pub seed: u64,
}

impl Default for UwcseConfig {
    fn default() -> UwcseConfig {
        UwcseConfig {
            students: 24,
            professors: 8,
            courses: 10,
            terms: 3,
            advised: 0.75,
            publish: 0.7,
            noise_publications: 6,
            seed: 7,
        }
    }
}

pub struct UwcseData {
    pub instance: Instance,
    pub positives: Vec<Atom>,
}

const PHASES: [&str; 3] = ["pre_quals", "post_quals", "post_generals"];
const POSITIONS: [&str; 3] = ["faculty", "faculty_adjunct", "faculty_emeritus"];
const LEVELS: [&str; 3] = ["level_300", "level_400", "level_500"];

/// An Original-schema instance with advisedBy(stud, prof) positives.
/// Advised students co-author with their advisor and tend to TA the
/// advisor's courses; a few publications pair unrelated people.
pub fn generate(cfg: &UwcseConfig) -> Result<UwcseData> {
    let schema = Arc::new(parse_schema(ORIGINAL)?);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut facts: Vec<(String, Tuple)> = Vec::new();
    let mut fact = |rel: &str, args: &[&str]| {
        facts.push((rel.to_string(), args.iter().map(|a| Sym::new(a)).collect()));
    };
    let studs: Vec<String> = (1..=cfg.students).map(|i| format!("student{}", i)).collect();
    let profs: Vec<String> = (1..=cfg.professors).map(|i| format!("person{}", i)).collect();
    for s in &studs {
        fact("student", &[s]);
        fact("inPhase", &[s, PHASES.choose(&mut rng).unwrap()]);
        fact("yearsInProgram", &[s, &format!("year_{}", rng.gen_range(1..=6))]);
    }
    for p in &profs {
        fact("professor", &[p]);
        fact("hasPosition", &[p, POSITIONS.choose(&mut rng).unwrap()]);
    }
    let mut advisor: Vec<Option<usize>> = Vec::new();
    let mut positives = Vec::new();
    for s in &studs {
        let a = (!profs.is_empty() && rng.gen_bool(cfg.advised)).then(|| rng.gen_range(0..profs.len()));
        if let Some(p) = a {
            positives.push(Atom::ground(TARGET, &[s, &profs[p]]));
        }
        advisor.push(a);
    }
    let crs: Vec<String> = (1..=cfg.courses).map(|i| format!("course{}", i)).collect();
    for c in &crs {
        fact("courseLevel", &[c, LEVELS.choose(&mut rng).unwrap()]);
    }
    if !studs.is_empty() && !profs.is_empty() {
        for c in &crs {
            for t in 1..=cfg.terms {
                if !rng.gen_bool(0.6) {
                    continue;
                }
                let term = format!("term{}", t);
                let p = rng.gen_range(0..profs.len());
                let advisees: Vec<usize> = (0..studs.len()).filter(|&i| advisor[i] == Some(p)).collect();
                let s = if !advisees.is_empty() && rng.gen_bool(0.6) {
                    *advisees.choose(&mut rng).unwrap()
                } else {
                    rng.gen_range(0..studs.len())
                };
                fact("taughtBy", &[c, &profs[p], &term]);
                fact("ta", &[c, &studs[s], &term]);
            }
        }
    }
    let mut title = 0;
    let mut publish = |s: &str, p: &str, fact: &mut dyn FnMut(&str, &[&str])| {
        title += 1;
        let t = format!("title{}", title);
        fact("publicationProfessor", &[&t, p]);
        fact("publicationStudent", &[&t, s]);
    };
    for (i, a) in advisor.iter().enumerate() {
        if let Some(p) = a {
            let titles = if rng.gen_bool(cfg.publish) { rng.gen_range(1..=2) } else { 0 };
            for _ in 0..titles {
                publish(&studs[i], &profs[*p], &mut fact);
            }
        }
    }
    if !studs.is_empty() && !profs.is_empty() {
        for _ in 0..cfg.noise_publications {
            let s = rng.gen_range(0..studs.len());
            let p = rng.gen_range(0..profs.len());
            if advisor[s] != Some(p) {
                publish(&studs[s], &profs[p], &mut fact);
            }
        }
    }
    let instance = Instance::new(schema, facts)?;
    Ok(UwcseData { instance, positives })
}

/// Generated data plus seeded closed-world negatives at the given ratio.
pub fn dataset(cfg: &UwcseConfig, ratio: f64) -> Result<(Instance, ExampleSet)> {
    let data = generate(cfg)?;
    let sampled = super::sample_negatives(&data.instance, &data.positives, ratio, cfg.seed)?;
    let examples = ExampleSet::with_target(Sym::new(TARGET), 2, data.positives, sampled.negatives)?;
    Ok((data.instance, examples))
}
