use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::metrics::{metrics, Metrics};
use crate::learners::{learn, LearnerConfig};
use crate::relmodel::{covers, parse_examples, parse_facts, parse_schema, Atom, ExampleSet, Instance};
use crate::transform::{Direction, Transformation};
use crate::{Error, Result};

/// Paths and parameters of one cross-validation run.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub schema: PathBuf,
    pub facts: PathBuf,
    pub examples: PathBuf,
    /// When set, learning runs over the transformed instance.
    pub transformation: Option<PathBuf>,
    pub learner: LearnerConfig,
    /// 1 means train and test on every example.
    pub folds: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

fn read(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).map_err(|e| Error::Invalid(format!("cannot read {}: {}", p.display(), e)))
}

/// Loaded inputs of an experiment.
pub struct Loaded {
    pub instance: Instance,
    pub examples: ExampleSet,
    pub tau: Option<Transformation>,
}

impl ExperimentConfig {
    /// Reads every input. All paths are read before anything is parsed, so
    /// a missing file is reported before any data error.
    pub fn load(&self) -> Result<Loaded> {
        if self.folds < 1 {
            return Err(Error::Invalid("folds must be at least 1".into()));
        }
        self.learner.validate()?;
        let schema_text = read(&self.schema)?;
        let facts_text = read(&self.facts)?;
        let examples_text = read(&self.examples)?;
        let tau_text = self.transformation.as_deref().map(read).transpose()?;
        let schema = Arc::new(parse_schema(&schema_text)?);
        let instance = parse_facts(&facts_text, schema.clone())?;
        let examples = parse_examples(&examples_text)?;
        let tau = tau_text.map(|t| Transformation::parse(schema, &t)).transpose()?;
        Ok(Loaded { instance, examples, tau })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FoldReport {
    pub fold: usize,
    pub train_positives: usize,
    pub train_negatives: usize,
    pub test_positives: usize,
    pub test_negatives: usize,
    /// No test positives: not scored.
    pub skipped: bool,
    pub metrics: Option<Metrics>,
    pub definition: Vec<String>,
    /// The covering loop stopped with positives left.
    pub partial: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Meta {
    pub started_unix: u64,
    pub runtime_seconds: f64,
    pub fold_runtime_seconds: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub learner: LearnerConfig,
    pub schema: String,
    pub folds: Vec<FoldReport>,
    /// Means over scored folds with a defined value.
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub clauses_learned: usize,
    pub skipped_folds: Vec<usize>,
    /// Run-dependent values, excluded from comparisons.
    pub meta: Meta,
}

impl ExperimentReport {
    /// The report without `meta`, as JSON; equal for equal inputs.
    pub fn stable_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().unwrap().remove("meta");
        serde_json::to_string_pretty(&v).unwrap()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per fold and a final row with the means.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let opt = |x: Option<f64>| x.map(|v| format!("{:.4}", v)).unwrap_or_else(|| "undefined".into());
        w.write_record(["fold", "tp", "fp", "fn", "precision", "recall", "clauses", "skipped"]).unwrap();
        for f in &self.folds {
            let m = f.metrics.as_ref();
            w.write_record([
                f.fold.to_string(),
                m.map_or(String::new(), |m| m.tp.to_string()),
                m.map_or(String::new(), |m| m.fp.to_string()),
                m.map_or(String::new(), |m| m.fn_.to_string()),
                opt(m.and_then(|m| m.precision)),
                opt(m.and_then(|m| m.recall)),
                f.definition.len().to_string(),
                f.skipped.to_string(),
            ])
            .unwrap();
        }
        w.write_record([
            "mean".to_string(),
            String::new(),
            String::new(),
            String::new(),
            opt(self.precision),
            opt(self.recall),
            self.clauses_learned.to_string(),
            String::new(),
        ])
        .unwrap();
        String::from_utf8(w.into_inner().unwrap()).unwrap()
    }

    /// Writes `report.json`, `report.csv` and `definitions.txt` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Invalid(format!("{}: {}", dir.display(), e)))?;
        let mut defs = String::new();
        for f in &self.folds {
            defs.push_str(&format!("% fold {}\n", f.fold));
            for c in &f.definition {
                defs.push_str(c);
                defs.push('\n');
            }
        }
        for (name, body) in [
            ("report.json", self.to_json()),
            ("report.csv", self.to_csv()),
            ("definitions.txt", defs),
        ] {
            std::fs::write(dir.join(name), body).map_err(|e| Error::Invalid(format!("{}: {}", name, e)))?;
        }
        Ok(())
    }
}

/// Stratified fold assignment: positives and negatives are shuffled
/// separately and dealt round-robin.
pub fn assign_folds(examples: &ExampleSet, folds: usize, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut deal = |n: usize| {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut out = vec![0; n];
        for (k, &i) in order.iter().enumerate() {
            out[i] = k % folds;
        }
        out
    };
    let p = deal(examples.positives.len());
    let n = deal(examples.negatives.len());
    (p, n)
}

fn split(atoms: &[Atom], fold_of: &[usize], fold: usize, test: bool) -> Vec<Atom> {
    atoms
        .iter()
        .zip(fold_of)
        .filter(|(_, &f)| (f == fold) == test)
        .map(|(a, _)| a.clone())
        .collect()
}

/// Cross-validates `config` on one instance. With `folds == 1` the single
/// fold trains and tests on all examples.
pub fn cross_validate(
    instance: &Instance,
    examples: &ExampleSet,
    config: &LearnerConfig,
    folds: usize,
    seed: u64,
    schema_label: &str,
) -> Result<ExperimentReport> {
    config.validate()?;
    if folds < 1 {
        return Err(Error::Invalid("folds must be at least 1".into()));
    }
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let t0 = Instant::now();
    let (pf, nf) = assign_folds(examples, folds, seed);
    let results: Vec<Result<(FoldReport, f64)>> = (0..folds)
        .into_par_iter()
        .map(|k| {
            let t = Instant::now();
            let (train, test) = if folds == 1 {
                (examples.clone(), examples.clone())
            } else {
                let mk = |test: bool| {
                    ExampleSet::with_target(
                        examples.target,
                        examples.arity,
                        split(&examples.positives, &pf, k, test),
                        split(&examples.negatives, &nf, k, test),
                    )
                };
                (mk(false)?, mk(true)?)
            };
            let mut report = FoldReport {
                fold: k,
                train_positives: train.positives.len(),
                train_negatives: train.negatives.len(),
                test_positives: test.positives.len(),
                test_negatives: test.negatives.len(),
                skipped: test.positives.is_empty(),
                metrics: None,
                definition: Vec::new(),
                partial: false,
            };
            if !report.skipped {
                let learned = learn(instance, &train, config)?;
                let all: Vec<Atom> = test.positives.iter().chain(&test.negatives).cloned().collect();
                let predicted = covers(instance, &learned.definition, &all);
                report.metrics = Some(metrics(&predicted, &test));
                report.definition = learned.definition.clauses.iter().map(|c| c.to_string()).collect();
                report.partial = learned.partial;
            }
            Ok((report, t.elapsed().as_secs_f64()))
        })
        .collect();
    let mut fold_reports = Vec::new();
    let mut fold_runtime_seconds = Vec::new();
    for r in results {
        let (f, s) = r?;
        fold_reports.push(f);
        fold_runtime_seconds.push(s);
    }
    let mean = |get: fn(&Metrics) -> Option<f64>| {
        let v: Vec<f64> = fold_reports.iter().filter_map(|f| f.metrics.as_ref().and_then(get)).collect();
        (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
    };
    Ok(ExperimentReport {
        learner: config.clone(),
        schema: schema_label.to_string(),
        precision: mean(|m| m.precision),
        recall: mean(|m| m.recall),
        clauses_learned: fold_reports.iter().map(|f| f.definition.len()).sum(),
        skipped_folds: fold_reports.iter().filter(|f| f.skipped).map(|f| f.fold).collect(),
        folds: fold_reports,
        meta: Meta {
            started_unix,
            runtime_seconds: t0.elapsed().as_secs_f64(),
            fold_runtime_seconds,
        },
    })
}

/// Loads the inputs, learns over the (optionally transformed) instance and
/// writes the report when an output directory is configured.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let loaded = config.load()?;
    let (instance, label) = match &loaded.tau {
        Some(t) => (t.apply(&loaded.instance, Direction::Forward)?, "transformed"),
        None => (loaded.instance, "source"),
    };
    let report = cross_validate(&instance, &loaded.examples, &config.learner, config.folds, config.seed, label)?;
    if let Some(dir) = &config.output {
        report.write(dir)?;
    }
    Ok(report)
}

/// The same cross-validation over every schema of a transformation family,
/// as `(schema name, report)` rows.
pub fn across_schemas(
    names: &[&str],
    transformations: &[Transformation],
    instance: &Instance,
    examples: &ExampleSet,
    config: &LearnerConfig,
    folds: usize,
    seed: u64,
) -> Result<Vec<(String, ExperimentReport)>> {
    names
        .iter()
        .zip(transformations)
        .map(|(n, t)| {
            let j = t.apply(instance, Direction::Forward)?;
            Ok((n.to_string(), cross_validate(&j, examples, config, folds, seed, n)?))
        })
        .collect()
}

/// Precision and recall per schema in one row, like a results table.
pub fn table_csv(learner: &str, rows: &[(String, ExperimentReport)]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["learner".to_string()];
    let mut rec = vec![learner.to_string()];
    let opt = |x: Option<f64>| x.map(|v| format!("{:.2}", v)).unwrap_or_else(|| "undefined".into());
    for (name, r) in rows {
        header.push(format!("{} precision", name));
        header.push(format!("{} recall", name));
        rec.push(opt(r.precision));
        rec.push(opt(r.recall));
    }
    w.write_record(&header).unwrap();
    w.write_record(&rec).unwrap();
    String::from_utf8(w.into_inner().unwrap()).unwrap()
}
