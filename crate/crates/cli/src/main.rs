use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use relearn::harness::{counterexample, uwcse};
use relearn::harness::{
    check_schema_independence, cross_schema_definition_suite, run_experiment, ExperimentConfig, Overall, SuiteParams,
};
use relearn::learners::{BottomKind, LearnerConfig, LearnerKind};
use relearn::relmodel::{examples_to_string, parse_examples, parse_facts, parse_schema, schema_to_string, Instance, Schema};
use relearn::saturation::{bottom_clause_depth, bottom_clause_maxvars, order_inclusion_classes};
use relearn::transform::{verify_bijection, Direction, Transformation};

const EXIT_CONFIG: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_DEPENDENT: u8 = 4;

#[derive(Parser)]
#[command(name = "relearn", version, about = "Relational learning over information-equivalent schemas")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cross-validate a learner and write report.json, report.csv and definitions.txt.
    Learn(LearnArgs),
    /// Map an instance through a transformation.
    Transform(TransformArgs),
    /// Round-trip random instances through a transformation.
    Verify(VerifyArgs),
    /// Learn over a schema and its image and compare the results.
    Independence(IndependenceArgs),
    /// Random definitions, mapped, minimized and compared.
    Randdefs(RanddefsArgs),
    /// Print the bottom clause of one example.
    Saturate(SaturateArgs),
    /// Write a bundled dataset as schema, facts, examples and transformation files.
    Dataset(DatasetArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum LearnerArg {
    Foil,
    Mfoil,
    Golem,
    Progolem,
}

impl From<LearnerArg> for LearnerKind {
    fn from(l: LearnerArg) -> LearnerKind {
        match l {
            LearnerArg::Foil => LearnerKind::Foil,
            LearnerArg::Mfoil => LearnerKind::ModifiedFoil,
            LearnerArg::Golem => LearnerKind::Golem,
            LearnerArg::Progolem => LearnerKind::Progolem,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BottomArg {
    Depth,
    Maxvars,
}

impl From<BottomArg> for BottomKind {
    fn from(b: BottomArg) -> BottomKind {
        match b {
            BottomArg::Depth => BottomKind::Depth,
            BottomArg::Maxvars => BottomKind::Maxvars,
        }
    }
}

#[derive(Args)]
struct LearnerFlags {
    #[arg(long, value_enum)]
    learner: LearnerArg,
    #[arg(long)]
    clause_length: Option<usize>,
    #[arg(long)]
    max_inclusion_classes: Option<usize>,
    #[arg(long)]
    beam: Option<usize>,
    #[arg(long)]
    maxvars: Option<usize>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    sample_size: Option<usize>,
    /// Bottom clauses for ProGolem.
    #[arg(long, value_enum)]
    bottom: Option<BottomArg>,
    #[arg(long)]
    max_pairs: Option<usize>,
}

impl LearnerFlags {
    fn config(&self, seed: u64) -> LearnerConfig {
        let mut c = LearnerConfig::new(self.learner.into());
        c.seed = seed;
        if let Some(v) = self.clause_length {
            c.clause_length = v;
        }
        if let Some(v) = self.max_inclusion_classes {
            c.max_inclusion_classes = v;
        }
        if let Some(v) = self.beam {
            c.beam_width = v;
        }
        if let Some(v) = self.maxvars {
            c.maxvars = v;
        }
        if let Some(v) = self.depth {
            c.max_depth = v;
        }
        if let Some(v) = self.noise {
            c.noise = v;
        }
        if let Some(v) = self.sample_size {
            c.sample_size = v;
        }
        if let Some(v) = self.bottom {
            c.bottom = v.into();
        }
        if let Some(v) = self.max_pairs {
            c.max_pairs = v;
        }
        c
    }
}

#[derive(Args)]
struct LearnArgs {
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    facts: PathBuf,
    #[arg(long)]
    examples: PathBuf,
    /// Learn over the image of the facts under this transformation.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[command(flatten)]
    learner: LearnerFlags,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// 1 trains and tests on every example.
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Fwd,
    Inv,
}

#[derive(Args)]
struct TransformArgs {
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    spec: PathBuf,
    /// Facts over the source schema for fwd, over the target schema for inv.
    #[arg(long)]
    facts: PathBuf,
    #[arg(long, value_enum, default_value = "fwd")]
    direction: DirectionArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    spec: PathBuf,
    /// Also round-trip these facts.
    #[arg(long)]
    facts: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Expect {
    Independent,
}

#[derive(Args)]
struct IndependenceArgs {
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    facts: PathBuf,
    #[arg(long)]
    examples: PathBuf,
    #[command(flatten)]
    learner: LearnerFlags,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 4 unless the verdict is independent.
    #[arg(long, value_enum)]
    expect: Option<Expect>,
}

#[derive(Args)]
struct RanddefsArgs {
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    spec: PathBuf,
    /// Clause counts, `A..B` inclusive.
    #[arg(long, default_value = "1..5", value_parser = parse_range)]
    clauses: (usize, usize),
    /// Variable counts, `C..D` inclusive.
    #[arg(long, default_value = "4..8", value_parser = parse_range)]
    vars: (usize, usize),
    /// Definitions per (clauses, vars) setting.
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random instances on which each definition and its image are also evaluated.
    #[arg(long, default_value_t = 0)]
    eval_instances: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Depth,
    Maxvars,
}

#[derive(Args)]
struct SaturateArgs {
    #[arg(long)]
    schema: PathBuf,
    #[arg(long)]
    facts: PathBuf,
    /// A ground atom such as `t(a,b)`.
    #[arg(long)]
    example: String,
    #[arg(long, value_enum, default_value = "maxvars")]
    mode: ModeArg,
    #[arg(long)]
    bound: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Bundle {
    /// Synthetic UW-CSE data with advisedBy examples and three transformations.
    Uwcse,
    /// The two-relation dataset on which FOIL depends on the schema.
    Counterexample,
}

#[derive(Args)]
struct DatasetArgs {
    #[arg(value_enum)]
    bundle: Bundle,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Sampled negatives per positive.
    #[arg(long, default_value_t = 2.0)]
    ratio: f64,
    #[arg(long)]
    out: PathBuf,
}

fn parse_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected A..B, got {}", s))?;
    let a: usize = a.trim().parse().map_err(|e| format!("{}: {}", a, e))?;
    let b: usize = b.trim().parse().map_err(|e| format!("{}: {}", b, e))?;
    if a > b {
        return Err(format!("empty range {}", s));
    }
    Ok((a, b))
}

/// Reads a file; unreadable paths are configuration errors.
fn read(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).map_err(|e| relearn::Error::Invalid(format!("cannot read {}: {}", p.display(), e)).into())
}

fn load_schema(p: &Path) -> Result<Arc<Schema>> {
    Ok(Arc::new(parse_schema(&read(p)?).with_context(|| format!("in {}", p.display()))?))
}

fn load_tau(schema: Arc<Schema>, p: &Path) -> Result<Transformation> {
    Ok(Transformation::parse(schema, &read(p)?).with_context(|| format!("in {}", p.display()))?)
}

fn load_facts(schema: Arc<Schema>, p: &Path) -> Result<Instance> {
    Ok(parse_facts(&read(p)?, schema).with_context(|| format!("in {}", p.display()))?)
}

fn write(dir: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let p = dir.join(name);
    std::fs::write(&p, text).with_context(|| format!("cannot write {}", p.display()))
}

fn learn(a: &LearnArgs) -> Result<u8> {
    let cfg = ExperimentConfig {
        schema: a.schema.clone(),
        facts: a.facts.clone(),
        examples: a.examples.clone(),
        transformation: a.spec.clone(),
        learner: a.learner.config(a.seed),
        folds: a.folds,
        seed: a.seed,
        output: Some(a.out.clone()),
    };
    let r = run_experiment(&cfg)?;
    let show = |x: Option<f64>| x.map(|v| format!("{:.3}", v)).unwrap_or_else(|| "undefined".into());
    println!(
        "{} folds, precision {}, recall {}, {} clauses, {} skipped",
        r.folds.len(),
        show(r.precision),
        show(r.recall),
        r.clauses_learned,
        r.skipped_folds.len()
    );
    Ok(0)
}

fn transform(a: &TransformArgs) -> Result<u8> {
    let tau = load_tau(load_schema(&a.schema)?, &a.spec)?;
    let (dir, from, to) = match a.direction {
        DirectionArg::Fwd => (Direction::Forward, tau.source().clone(), tau.target().clone()),
        DirectionArg::Inv => (Direction::Inverse, tau.target().clone(), tau.source().clone()),
    };
    let inst = load_facts(from, &a.facts)?;
    let out = tau.apply(&inst, dir)?;
    write(&a.out, "schema.txt", &schema_to_string(&to))?;
    write(&a.out, "facts.txt", &out.to_string())?;
    println!("{} tuples in, {} tuples out", inst.len(), out.len());
    Ok(0)
}

fn verify(a: &VerifyArgs) -> Result<u8> {
    let schema = load_schema(&a.schema)?;
    let tau = load_tau(schema.clone(), &a.spec)?;
    let given = match &a.facts {
        Some(p) => vec![load_facts(schema, p)?],
        None => Vec::new(),
    };
    let r = verify_bijection(&tau, &given, a.trials, a.seed);
    println!("{}", serde_json::to_string_pretty(&r)?);
    if r.no_evidence {
        eprintln!("warning: nothing was checked");
    }
    Ok(if r.passed() { 0 } else { EXIT_DATA })
}

fn independence(a: &IndependenceArgs) -> Result<u8> {
    let schema = load_schema(&a.schema)?;
    let tau = load_tau(schema.clone(), &a.spec)?;
    let inst = load_facts(schema, &a.facts)?;
    let examples = parse_examples(&read(&a.examples)?)?;
    let r = check_schema_independence(&a.learner.config(a.seed), &inst, &tau, &examples)?;
    let json = serde_json::to_string_pretty(&r)?;
    if let Some(dir) = &a.out {
        write(dir, "independence.json", &json)?;
    }
    let verdict = match r.overall {
        Overall::Independent => "independent",
        Overall::Dependent => "dependent",
        Overall::Unknown => "unknown",
    };
    println!("{}", verdict);
    if let Some((s, t)) = &r.witness {
        println!("witness: {} vs {}", s.as_deref().unwrap_or("(none)"), t.as_deref().unwrap_or("(none)"));
    }
    if a.expect == Some(Expect::Independent) && r.overall != Overall::Independent {
        return Ok(EXIT_DEPENDENT);
    }
    Ok(0)
}

fn randdefs(a: &RanddefsArgs) -> Result<u8> {
    let tau = load_tau(load_schema(&a.schema)?, &a.spec)?;
    let params = SuiteParams {
        clauses: a.clauses,
        vars: a.vars,
        per_setting: a.count,
        seed: a.seed,
        eval_instances: a.eval_instances,
        ..SuiteParams::default()
    };
    if params.clauses.0 < 1 || params.vars.0 < 1 {
        return Err(relearn::Error::Invalid("clause and variable counts start at 1".into()).into());
    }
    let r = cross_schema_definition_suite(&tau, &params);
    write(&a.out, "randdefs.json", &serde_json::to_string_pretty(&r)?)?;
    println!(
        "{} passed, {} failed; mean body length {:.2} -> {:.2} (source), {:.2} -> {:.2} (target)",
        r.passed, r.failed, r.mean_source_length, r.mean_source_minimized, r.mean_target_length, r.mean_target_minimized
    );
    Ok(0)
}

fn saturate(a: &SaturateArgs) -> Result<u8> {
    let schema = load_schema(&a.schema)?;
    let inst = load_facts(schema, &a.facts)?;
    let text = a.example.trim().trim_end_matches('.');
    let e = parse_examples(&format!("+ {}.", text))?
        .positives
        .pop()
        .ok_or_else(|| anyhow!("no example given"))?;
    let order = order_inclusion_classes(inst.schema(), &inst);
    let b = match a.mode {
        ModeArg::Depth => bottom_clause_depth(&e, &inst, a.bound, &order),
        ModeArg::Maxvars => bottom_clause_maxvars(&e, &inst, a.bound, &order),
    };
    println!("{}", b.clause);
    Ok(0)
}

fn dataset(a: &DatasetArgs) -> Result<u8> {
    match a.bundle {
        Bundle::Uwcse => {
            let cfg = uwcse::UwcseConfig { seed: a.seed, ..uwcse::UwcseConfig::default() };
            let (inst, ex) = uwcse::dataset(&cfg, a.ratio)?;
            write(&a.out, "schema.txt", uwcse::ORIGINAL.trim_start())?;
            write(&a.out, "facts.txt", &inst.to_string())?;
            write(&a.out, "examples.txt", &examples_to_string(&ex))?;
            write(&a.out, "to_4nf.txt", uwcse::TO_4NF.trim_start())?;
            write(&a.out, "to_denorm1.txt", uwcse::TO_DENORM1)?;
            write(&a.out, "to_denorm2.txt", uwcse::TO_DENORM2)?;
            println!("{} tuples, {} positives, {} negatives", inst.len(), ex.positives.len(), ex.negatives.len());
        }
        Bundle::Counterexample => {
            let c = counterexample::counterexample()?;
            write(&a.out, "schema.txt", counterexample::SCHEMA.trim_start())?;
            write(&a.out, "facts.txt", &c.instance.to_string())?;
            write(&a.out, "examples.txt", &examples_to_string(&c.examples))?;
            write(&a.out, "decompose.txt", counterexample::DECOMPOSITION.trim_start())?;
            println!("{} tuples, {} positives, {} negatives", c.instance.len(), c.examples.positives.len(), c.examples.negatives.len());
        }
    }
    Ok(0)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<relearn::Error>() {
        Some(err) if err.is_data() => EXIT_DATA,
        _ => EXIT_CONFIG,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Learn(a) => learn(a),
        Command::Transform(a) => transform(a),
        Command::Verify(a) => verify(a),
        Command::Independence(a) => independence(a),
        Command::Randdefs(a) => randdefs(a),
        Command::Saturate(a) => saturate(a),
        Command::Dataset(a) => dataset(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::from(exit_code(&e))
        }
    }
}
