use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::chase::{definition_equivalent, minimize_definition, Verdict};
use crate::relmodel::{evaluate_definition, Atom, HornDefinition, OrderedClause, Schema, Sym, Term};
use crate::transform::{random_instance, Direction, Transformation};
use crate::{Error, Result};

/// A head name not used by the schema.
fn target_name(schema: &Schema) -> String {
    let mut name = "target".to_string();
    let mut k = 0;
    while schema.contains(&name) {
        k += 1;
        name = format!("target_{}", k);
    }
    name
}

struct Vars {
    used: Vec<Sym>,
    n: usize,
}

impl Vars {
    fn pick(&mut self, rng: &mut ChaCha8Rng) -> Term {
        let fresh = self.used.len() < self.n && (self.used.is_empty() || rng.gen_bool(0.5));
        if fresh {
            let v = Sym::new(&format!("V{}", self.used.len() + 1));
            self.used.push(v);
            Term::Var(v)
        } else {
            Term::Var(self.used[rng.gen_range(0..self.used.len())])
        }
    }
}

/// A random function-free definition with `n_clauses` clauses, each using
/// exactly `n_vars` distinct variables, every head variable also in the
/// body. Body literals range over the schema relations and the head
/// relation itself.
pub fn generate_random_definition(schema: &Schema, n_clauses: usize, n_vars: usize, seed: u64) -> Result<HornDefinition> {
    if n_vars < 1 {
        return Err(Error::Invalid("n_vars must be at least 1".into()));
    }
    if n_clauses < 1 {
        return Err(Error::Invalid("n_clauses must be at least 1".into()));
    }
    if schema.relations().is_empty() {
        return Err(Error::Invalid("schema has no relations".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_arity = schema.max_arity().max(1);
    let mut arity = 0;
    for _ in 0..16 {
        let a = rng.gen_range(1..=max_arity);
        if a <= n_vars {
            arity = a;
            break;
        }
    }
    if arity == 0 {
        return Err(Error::Invalid(format!("no head arity in 1..={} fits {} variables", max_arity, n_vars)));
    }
    let head = Sym::new(&target_name(schema));
    let mut rels: Vec<(Sym, usize)> = schema.relations().iter().map(|r| (Sym::new(&r.name), r.arity())).collect();
    rels.push((head, arity));
    let mut clauses = Vec::with_capacity(n_clauses);
    for _ in 0..n_clauses {
        let mut vars = Vars { used: Vec::new(), n: n_vars };
        let head_atom = Atom::new(head, (0..arity).map(|_| vars.pick(&mut rng)).collect());
        let head_vars: Vec<Sym> = head_atom.vars().collect();
        let mut body: Vec<Atom> = Vec::new();
        let mut seen: HashSet<Sym> = HashSet::new();
        loop {
            let missing: Vec<Sym> = head_vars.iter().copied().filter(|v| !seen.contains(v)).collect();
            if vars.used.len() == n_vars && missing.is_empty() {
                break;
            }
            let (rel, ar) = rels[rng.gen_range(0..rels.len())];
            // decided before drawing, so a variable created here is never overwritten
            let full = vars.used.len() == n_vars;
            let mut args: Vec<Term> = (0..ar).map(|_| vars.pick(&mut rng)).collect();
            // once every variable exists, steer towards uncovered head variables
            if full {
                for (slot, v) in args.iter_mut().zip(&missing) {
                    *slot = Term::Var(*v);
                }
            }
            let lit = Atom::new(rel, args);
            if body.contains(&lit) {
                continue;
            }
            seen.extend(lit.vars());
            body.push(lit);
        }
        clauses.push(OrderedClause::new(head_atom, body));
    }
    HornDefinition::new(clauses)
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteParams {
    pub clauses: (usize, usize),
    pub vars: (usize, usize),
    /// Definitions per (clauses, vars) setting.
    pub per_setting: usize,
    pub seed: u64,
    /// Random source instances on which each definition is also evaluated
    /// against its image; 0 disables the check.
    pub eval_instances: usize,
    pub eval_rows: usize,
}

impl Default for SuiteParams {
    fn default() -> SuiteParams {
        SuiteParams {
            clauses: (1, 5),
            vars: (4, 8),
            per_setting: 10,
            seed: 0,
            eval_instances: 0,
            eval_rows: 8,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteRow {
    pub clauses: usize,
    pub vars: usize,
    pub seed: u64,
    pub definition: Vec<String>,
    pub mapped: Vec<String>,
    pub source_length: usize,
    pub source_minimized: usize,
    pub target_length: usize,
    pub target_minimized: usize,
    pub verdict: Verdict,
    /// `None` when evaluation was not checked.
    pub evaluation_equal: Option<bool>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub transformation: String,
    pub params: SuiteParams,
    pub rows: Vec<SuiteRow>,
    pub passed: usize,
    pub failed: usize,
    pub mean_source_length: f64,
    pub mean_source_minimized: f64,
    pub mean_target_length: f64,
    pub mean_target_minimized: f64,
}

fn body_len(d: &HornDefinition) -> usize {
    d.clauses.iter().map(|c| c.body.len()).sum()
}

/// Evaluates `def` over random source instances and its image over their
/// transforms. Returns false on the first mismatch.
pub fn preserves_evaluation(tau: &Transformation, def: &HornDefinition, instances: usize, rows: usize, seed: u64) -> Result<bool> {
    let mapped = tau.map_definition(def, Direction::Forward)?;
    for k in 0..instances {
        let i = random_instance(tau.source(), rows, seed.wrapping_mul(1_000_003).wrapping_add(k as u64));
        let j = tau.apply(&i, Direction::Forward)?;
        if evaluate_definition(def, &i)? != evaluate_definition(&mapped, &j)? {
            return Ok(false);
        }
    }
    Ok(true)
}

fn suite_row(tau: &Transformation, params: &SuiteParams, nc: usize, nv: usize, seed: u64) -> Result<SuiteRow> {
    let def = generate_random_definition(tau.source(), nc, nv, seed)?;
    let mapped = tau.map_definition(&def, Direction::Forward)?;
    let ms = minimize_definition(&def, tau.source())?;
    let mt = minimize_definition(&mapped, tau.target())?;
    let verdict = definition_equivalent(&ms.definition, &mt.definition, tau.source(), tau.target(), Some(tau))?;
    let evaluation_equal = if params.eval_instances > 0 {
        Some(preserves_evaluation(tau, &def, params.eval_instances, params.eval_rows, seed)?)
    } else {
        None
    };
    Ok(SuiteRow {
        clauses: nc,
        vars: nv,
        seed,
        definition: def.clauses.iter().map(|c| c.to_string()).collect(),
        mapped: mapped.clauses.iter().map(|c| c.to_string()).collect(),
        source_length: body_len(&def),
        source_minimized: body_len(&ms.definition),
        target_length: body_len(&mapped),
        target_minimized: body_len(&mt.definition),
        verdict,
        evaluation_equal,
        error: None,
    })
}

/// Generates definitions over the source schema of `tau`, maps each one,
/// minimizes both sides and checks equivalence. Failures are rows, not
/// errors.
pub fn cross_schema_definition_suite(tau: &Transformation, params: &SuiteParams) -> SuiteReport {
    use rayon::prelude::*;
    let mut jobs = Vec::new();
    for nc in params.clauses.0..=params.clauses.1 {
        for nv in params.vars.0..=params.vars.1 {
            for k in 0..params.per_setting {
                let seed = params.seed ^ ((nc as u64) << 40) ^ ((nv as u64) << 32) ^ k as u64;
                jobs.push((nc, nv, seed));
            }
        }
    }
    let rows: Vec<SuiteRow> = jobs
        .par_iter()
        .map(|&(nc, nv, seed)| {
            suite_row(tau, params, nc, nv, seed).unwrap_or_else(|e| SuiteRow {
                clauses: nc,
                vars: nv,
                seed,
                definition: Vec::new(),
                mapped: Vec::new(),
                source_length: 0,
                source_minimized: 0,
                target_length: 0,
                target_minimized: 0,
                verdict: Verdict::Unknown,
                evaluation_equal: None,
                error: Some(e.to_string()),
            })
        })
        .collect();
    let ok = |r: &SuiteRow| r.error.is_none() && r.verdict == Verdict::Equivalent && r.evaluation_equal != Some(false);
    let passed = rows.iter().filter(|r| ok(r)).count();
    let mean = |f: fn(&SuiteRow) -> usize| {
        if rows.is_empty() {
            0.0
        } else {
            rows.iter().map(f).sum::<usize>() as f64 / rows.len() as f64
        }
    };
    SuiteReport {
        transformation: tau.to_spec_string(),
        params: params.clone(),
        passed,
        failed: rows.len() - passed,
        mean_source_length: mean(|r| r.source_length),
        mean_source_minimized: mean(|r| r.source_minimized),
        mean_target_length: mean(|r| r.target_length),
        mean_target_minimized: mean(|r| r.target_minimized),
        rows,
    }
}
