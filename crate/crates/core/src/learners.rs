//! Clause learners and the covering loop that drives them.
//!
//! FOIL and modified FOIL search top-down from the empty body. Golem
//! generalizes ground saturations with lgg; ProGolem shrinks a bottom clause
//! with ARMG. M-ProGolem is ProGolem over maxvars bottom clauses with
//! blocking atoms removed together with their chase group.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chase::reduce_negative;
use crate::relmodel::{
    clause_covers, covered_indices, covers_at_most, inclusion_classes, satisfiable, Atom, Db,
    ExampleSet, HornDefinition, Instance, OrderedClause, Schema, Sym, Term, VarGen,
};
use crate::saturation::{
    bottom_clause_depth, bottom_clause_maxvars, ground_saturation, order_inclusion_classes,
    removal_groups, ClassOrder,
};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Foil,
    ModifiedFoil,
    Golem,
    Progolem,
}

impl std::str::FromStr for LearnerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<LearnerKind> {
        match s {
            "foil" => Ok(LearnerKind::Foil),
            "mfoil" | "modified_foil" => Ok(LearnerKind::ModifiedFoil),
            "golem" => Ok(LearnerKind::Golem),
            "progolem" => Ok(LearnerKind::Progolem),
            _ => Err(Error::Invalid(format!("unknown learner {}", s))),
        }
    }
}

/// Bottom clauses used by ProGolem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BottomKind {
    /// Classic depth-bounded bottom clauses, literal-level removal.
    Depth,
    /// Maxvars bottom clauses with the chase, group-level removal.
    Maxvars,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub learner: LearnerKind,
    pub clause_length: usize,
    pub max_inclusion_classes: usize,
    pub beam_width: usize,
    pub maxvars: usize,
    pub max_depth: usize,
    /// Fraction of the negatives a clause may cover.
    pub noise: f64,
    pub sample_size: usize,
    pub bottom: BottomKind,
    /// Golem seeds with every pair of positives up to this many pairs, and a
    /// seeded sample of this many otherwise.
    pub max_pairs: usize,
    pub seed: u64,
}

impl Default for LearnerConfig {
    fn default() -> LearnerConfig {
        LearnerConfig {
            learner: LearnerKind::Progolem,
            clause_length: 3,
            max_inclusion_classes: 2,
            beam_width: 2,
            maxvars: 20,
            max_depth: 2,
            noise: 0.0,
            sample_size: 4,
            bottom: BottomKind::Maxvars,
            max_pairs: 64,
            seed: 0,
        }
    }
}

impl LearnerConfig {
    pub fn new(learner: LearnerKind) -> LearnerConfig {
        LearnerConfig {
            learner,
            ..LearnerConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bounds = [
            ("clause_length", self.clause_length),
            ("max_inclusion_classes", self.max_inclusion_classes),
            ("beam_width", self.beam_width),
            ("maxvars", self.maxvars),
            ("max_depth", self.max_depth),
            ("sample_size", self.sample_size),
            ("max_pairs", self.max_pairs),
        ];
        for (name, v) in bounds {
            if v < 1 {
                return Err(Error::Invalid(format!("{} must be at least 1", name)));
            }
        }
        if !(0.0..=1.0).contains(&self.noise) {
            return Err(Error::Invalid("noise must lie in [0, 1]".into()));
        }
        Ok(())
    }

    pub fn max_negatives(&self, negatives: usize) -> usize {
        (self.noise * negatives as f64).floor() as usize
    }
}

/// What every clause learner sees.
pub struct Context<'a> {
    pub instance: &'a Instance,
    pub config: &'a LearnerConfig,
    pub target: Sym,
    pub arity: usize,
    pub negatives: &'a [Atom],
    pub order: ClassOrder,
    pub max_neg: usize,
}

impl<'a> Context<'a> {
    pub fn new(instance: &'a Instance, examples: &'a ExampleSet, config: &'a LearnerConfig) -> Context<'a> {
        Context {
            instance,
            config,
            target: examples.target,
            arity: examples.arity,
            negatives: &examples.negatives,
            order: order_inclusion_classes(instance.schema(), instance),
            max_neg: config.max_negatives(examples.negatives.len()),
        }
    }

    fn db(&self) -> &Db {
        self.instance.db()
    }

    fn schema(&self) -> &Schema {
        self.instance.schema()
    }

    fn consistent(&self, c: &OrderedClause) -> bool {
        covers_at_most(self.db(), c, self.negatives, self.max_neg)
    }

    /// Coverage score: positives minus negatives covered.
    fn score(&self, c: &OrderedClause, pos: &[Atom]) -> Scored {
        let p = covered_indices(self.db(), c, pos).len();
        let n = covered_indices(self.db(), c, self.negatives).len();
        Scored {
            p,
            n,
            score: p as i64 - n as i64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Scored {
    p: usize,
    n: usize,
    score: i64,
}

/// One strategy of the covering loop: find a clause covering some of the
/// uncovered positives, or `None`.
pub trait LearnClause {
    fn learn_clause(&self, ctx: &Context, uncovered: &[Atom]) -> Option<OrderedClause>;
}

pub struct Foil;
pub struct ModifiedFoil;
pub struct Golem;
pub struct ProGolem;

#[derive(Clone, Debug, Serialize)]
pub struct Learned {
    pub definition: HornDefinition,
    /// Positives still uncovered when the loop stopped.
    pub uncovered: usize,
    /// True when a clause search failed before every positive was covered.
    pub partial: bool,
}

/// The covering loop: learn a clause, drop the positives it covers, repeat.
pub fn learn(instance: &Instance, examples: &ExampleSet, config: &LearnerConfig) -> Result<Learned> {
    config.validate()?;
    let ctx = Context::new(instance, examples, config);
    let strategy: &dyn LearnClause = match config.learner {
        LearnerKind::Foil => &Foil,
        LearnerKind::ModifiedFoil => &ModifiedFoil,
        LearnerKind::Golem => &Golem,
        LearnerKind::Progolem => &ProGolem,
    };
    let mut uncovered: Vec<Atom> = examples.positives.clone();
    let mut clauses = Vec::new();
    let mut partial = false;
    while !uncovered.is_empty() {
        let Some(c) = strategy.learn_clause(&ctx, &uncovered) else {
            partial = true;
            break;
        };
        let hit: HashSet<usize> = covered_indices(ctx.db(), &c, &uncovered).into_iter().collect();
        if hit.is_empty() {
            partial = true;
            break;
        }
        uncovered = uncovered
            .into_iter()
            .enumerate()
            .filter(|(i, _)| !hit.contains(i))
            .map(|(_, e)| e)
            .collect();
        clauses.push(c.canonical());
    }
    Ok(Learned {
        definition: HornDefinition { clauses },
        uncovered: uncovered.len(),
        partial,
    })
}

fn root_clause(target: Sym, arity: usize) -> OrderedClause {
    let mut gen = VarGen::new();
    OrderedClause::new(
        Atom::new(target, (0..arity).map(|_| Term::Var(gen.fresh())).collect()),
        Vec::new(),
    )
}

/// Every way to fill `slots` positions with existing variables or distinct
/// fresh ones. Returns index vectors: `i < existing` picks `vars[i]`,
/// otherwise a new variable.
fn slot_fillings(slots: usize, existing: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..slots {
        let mut next = Vec::new();
        for partial in &out {
            for k in 0..=existing {
                let mut p = partial.clone();
                p.push(k);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn fill(choice: &[usize], vars: &[Sym], gen: &mut VarGen, avoid: &mut HashSet<Sym>) -> Vec<Term> {
    choice
        .iter()
        .map(|&k| {
            if k < vars.len() {
                Term::Var(vars[k])
            } else {
                let v = gen.fresh_avoiding(avoid);
                avoid.insert(v);
                Term::Var(v)
            }
        })
        .collect()
}

fn unify_children(clause: &OrderedClause, out: &mut Vec<OrderedClause>) {
    let vars = clause.vars();
    for i in 0..vars.len() {
        for j in i + 1..vars.len() {
            let theta: HashMap<Sym, Term> = [(vars[j], Term::Var(vars[i]))].into_iter().collect();
            out.push(clause.apply(&theta));
        }
    }
}

fn dedup_canonical(children: Vec<OrderedClause>) -> Vec<OrderedClause> {
    let mut seen = HashSet::new();
    children
        .into_iter()
        .filter(|c| seen.insert(c.canonical().to_string()))
        .collect()
}

/// Single-step specializations: one more literal over any relation with
/// any mix of existing and fresh variables (only while the body is shorter
/// than `clause_length`), or two variables unified.
pub fn refine(clause: &OrderedClause, schema: &Schema, config: &LearnerConfig) -> Vec<OrderedClause> {
    let mut out = Vec::new();
    if clause.body.len() < config.clause_length {
        let vars = clause.vars();
        for r in schema.relations() {
            for choice in slot_fillings(r.arity(), vars.len()) {
                let mut avoid: HashSet<Sym> = vars.iter().copied().collect();
                let mut gen = VarGen::new();
                let args = fill(&choice, &vars, &mut gen, &mut avoid);
                let mut c = clause.clone();
                c.body.push(Atom::new(Sym::new(&r.name), args));
                out.push(c);
            }
        }
    }
    unify_children(clause, &mut out);
    dedup_canonical(out)
}

/// Positions of an inclusion class tied together by equality INDs. Each
/// slot is a list of (relation index in class, attribute position).
fn class_slots(schema: &Schema, class: &[String]) -> Vec<Vec<(usize, usize)>> {
    let mut ids: Vec<(usize, usize)> = Vec::new();
    for (ri, r) in class.iter().enumerate() {
        for p in 0..schema.relation(r).unwrap().arity() {
            ids.push((ri, p));
        }
    }
    let pos = |x: (usize, usize)| ids.iter().position(|y| *y == x).unwrap();
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(p: &[usize], mut x: usize) -> usize {
        while p[x] != x {
            x = p[x];
        }
        x
    }
    for (ri, r) in class.iter().enumerate() {
        for (pa, s, pb) in schema.eq_partners(r) {
            let Some(si) = class.iter().position(|c| *c == s) else { continue };
            for (a, b) in pa.iter().zip(&pb) {
                let (x, y) = (find(&parent, pos((ri, *a))), find(&parent, pos((si, *b))));
                if x != y {
                    parent[x.max(y)] = x.min(y);
                }
            }
        }
    }
    let mut slots: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut root_slot: HashMap<usize, usize> = HashMap::new();
    for (i, id) in ids.iter().enumerate() {
        let r = find(&parent, i);
        let s = *root_slot.entry(r).or_insert_with(|| {
            slots.push(Vec::new());
            slots.len() - 1
        });
        slots[s].push(*id);
    }
    slots
}

/// Number of inclusion-class additions in a clause built by
/// [`refine_classes`]: its removal groups.
pub fn class_count(clause: &OrderedClause, schema: &Schema) -> usize {
    removal_groups(clause, schema).len()
}

/// Modified FOIL moves: add a whole inclusion class at once, IND-linked
/// positions sharing one variable, or unify two variables. The length bound
/// counts inclusion classes.
pub fn refine_classes(clause: &OrderedClause, schema: &Schema, config: &LearnerConfig) -> Vec<OrderedClause> {
    let mut out = Vec::new();
    if class_count(clause, schema) < config.max_inclusion_classes {
        let vars = clause.vars();
        for class in inclusion_classes(schema) {
            let slots = class_slots(schema, &class);
            for choice in slot_fillings(slots.len(), vars.len()) {
                let mut avoid: HashSet<Sym> = vars.iter().copied().collect();
                let mut gen = VarGen::new();
                let terms = fill(&choice, &vars, &mut gen, &mut avoid);
                let mut c = clause.clone();
                for (ri, r) in class.iter().enumerate() {
                    let decl = schema.relation(r).unwrap();
                    let mut args = vec![Term::Var(Sym::new("_")); decl.arity()];
                    for (si, slot) in slots.iter().enumerate() {
                        for &(sri, p) in slot {
                            if sri == ri {
                                args[p] = terms[si];
                            }
                        }
                    }
                    c.body.push(Atom::new(Sym::new(r), args));
                }
                out.push(c);
            }
        }
    }
    unify_children(clause, &mut out);
    dedup_canonical(out)
}

/// Greedy descent shared by both FOIL variants. Ties keep the child
/// generated first.
fn greedy_descent(
    ctx: &Context,
    uncovered: &[Atom],
    children: impl Fn(&OrderedClause) -> Vec<OrderedClause>,
) -> Option<OrderedClause> {
    let mut cur = root_clause(ctx.target, ctx.arity);
    let mut cur_score = ctx.score(&cur, uncovered);
    loop {
        if cur_score.n <= ctx.max_neg {
            return (cur_score.p > 0).then_some(cur);
        }
        let kids = children(&cur);
        let scored: Vec<Scored> = kids.par_iter().map(|k| ctx.score(k, uncovered)).collect();
        let mut best: Option<usize> = None;
        for (i, s) in scored.iter().enumerate() {
            if s.p == 0 {
                continue;
            }
            if best.is_none_or(|b| s.score > scored[b].score) {
                best = Some(i);
            }
        }
        match best {
            Some(b) if scored[b].score > cur_score.score => {
                cur = kids[b].clone();
                cur_score = scored[b];
            }
            _ => return None,
        }
    }
}

impl LearnClause for Foil {
    fn learn_clause(&self, ctx: &Context, uncovered: &[Atom]) -> Option<OrderedClause> {
        greedy_descent(ctx, uncovered, |c| refine(c, ctx.schema(), ctx.config))
    }
}

impl LearnClause for ModifiedFoil {
    fn learn_clause(&self, ctx: &Context, uncovered: &[Atom]) -> Option<OrderedClause> {
        greedy_descent(ctx, uncovered, |c| refine_classes(c, ctx.schema(), ctx.config))
    }
}

/// Every clause reachable from the empty body by add-literal moves alone,
/// up to `max_literals` literals (FOIL) or `max_classes` class additions
/// (modified FOIL, when `classes` is set). Deduplicated up to renaming.
pub fn enumerate_space(
    target: Sym,
    arity: usize,
    schema: &Schema,
    bound: usize,
    classes: bool,
) -> Vec<OrderedClause> {
    let config = LearnerConfig {
        clause_length: bound,
        max_inclusion_classes: bound,
        ..LearnerConfig::default()
    };
    let mut all = vec![root_clause(target, arity)];
    let mut frontier = all.clone();
    let mut seen: HashSet<String> = all.iter().map(|c| c.canonical().to_string()).collect();
    for _ in 0..bound {
        let mut next = Vec::new();
        for c in &frontier {
            let kids = if classes {
                refine_classes(c, schema, &config)
            } else {
                refine(c, schema, &config)
            };
            for k in kids {
                if k.body.len() == c.body.len() {
                    continue; // unification move
                }
                if seen.insert(k.canonical().to_string()) {
                    next.push(k);
                }
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all
}

/// Plotkin's least general generalization. Equal constants stay; every
/// other pair of terms gets one variable, shared across the clause.
pub fn lgg(c1: &OrderedClause, c2: &OrderedClause) -> Option<OrderedClause> {
    if c1.head.pred != c2.head.pred || c1.head.arity() != c2.head.arity() {
        return None;
    }
    let mut table: HashMap<(Term, Term), Term> = HashMap::new();
    let mut n = 0usize;
    let mut gen_term = |a: Term, b: Term| -> Term {
        if let (Term::Const(x), Term::Const(y)) = (a, b) {
            if x == y {
                return a;
            }
        }
        *table.entry((a, b)).or_insert_with(|| {
            n += 1;
            Term::Var(Sym::new(&format!("V{}", n)))
        })
    };
    let head = Atom::new(
        c1.head.pred,
        c1.head.args.iter().zip(&c2.head.args).map(|(a, b)| gen_term(*a, *b)).collect(),
    );
    let mut body = Vec::new();
    let mut seen = HashSet::new();
    for l1 in &c1.body {
        for l2 in &c2.body {
            if l1.pred != l2.pred || l1.arity() != l2.arity() {
                continue;
            }
            let a = Atom::new(l1.pred, l1.args.iter().zip(&l2.args).map(|(x, y)| gen_term(*x, *y)).collect());
            if seen.insert(a.clone()) {
                body.push(a);
            }
        }
    }
    Some(OrderedClause::new(head, body))
}

/// lgg of two ground saturations, without the literals not connected to
/// the head.
pub fn rlgg(e1: &Atom, e2: &Atom, instance: &Instance, order: &ClassOrder, max_constants: usize) -> Option<OrderedClause> {
    let s1 = ground_saturation(e1, instance, max_constants, order);
    let s2 = ground_saturation(e2, instance, max_constants, order);
    lgg(&s1, &s2).map(|c| c.retain_head_connected())
}

fn reduce(ctx: &Context, c: &OrderedClause) -> OrderedClause {
    let groups = removal_groups(c, ctx.schema());
    reduce_negative(c, ctx.instance, ctx.negatives, &groups, ctx.max_neg).unwrap_or_else(|_| c.clone())
}

/// Highest coverage of `pos`; ties go to fewer removal groups, then to the
/// earlier candidate.
fn argmax(ctx: &Context, cands: &[OrderedClause], pos: &[Atom]) -> usize {
    let keys: Vec<(usize, usize)> = cands
        .par_iter()
        .map(|c| (covered_indices(ctx.db(), c, pos).len(), removal_groups(c, ctx.schema()).len()))
        .collect();
    let mut best = 0;
    for i in 1..keys.len() {
        let (p, g) = keys[i];
        let (bp, bg) = keys[best];
        if p > bp || (p == bp && g < bg) {
            best = i;
        }
    }
    best
}

impl Golem {
    fn pairs(ctx: &Context, n: usize) -> Vec<(usize, usize)> {
        let mut all: Vec<(usize, usize)> = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                all.push((i, j));
            }
        }
        if all.len() > ctx.config.max_pairs {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.seed);
            all.shuffle(&mut rng);
            all.truncate(ctx.config.max_pairs);
            all.sort();
        }
        all
    }
}

impl LearnClause for Golem {
    fn learn_clause(&self, ctx: &Context, uncovered: &[Atom]) -> Option<OrderedClause> {
        let bound = ctx.config.maxvars;
        let sat: Vec<OrderedClause> = uncovered
            .par_iter()
            .map(|e| ground_saturation(e, ctx.instance, bound, &ctx.order))
            .collect();
        let fallback = || {
            let c = reduce(ctx, &sat[0]);
            ctx.consistent(&c).then_some(c)
        };
        if uncovered.len() < 2 {
            return fallback();
        }
        let mut cands: Vec<OrderedClause> = Self::pairs(ctx, uncovered.len())
            .par_iter()
            .filter_map(|&(i, j)| {
                let c = lgg(&sat[i], &sat[j])?.retain_head_connected();
                ctx.consistent(&c).then_some(c)
            })
            .collect();
        if cands.is_empty() {
            return fallback();
        }
        let mut u: Vec<usize> = (0..uncovered.len()).collect();
        let mut best = None;
        while !cands.is_empty() {
            let pos: Vec<Atom> = u.iter().map(|&i| uncovered[i].clone()).collect();
            let c = reduce(ctx, &cands[argmax(ctx, &cands, &pos)]);
            let hit: HashSet<usize> = covered_indices(ctx.db(), &c, &pos).into_iter().collect();
            u = u
                .iter()
                .enumerate()
                .filter(|(k, _)| !hit.contains(k))
                .map(|(_, &i)| i)
                .collect();
            cands = u
                .par_iter()
                .filter_map(|&i| {
                    let g = lgg(&c, &sat[i])?.retain_head_connected();
                    ctx.consistent(&g).then_some(g)
                })
                .collect();
            best = Some(c);
        }
        best
    }
}

/// Index of the first body literal whose prefix cannot be satisfied with
/// the head bound to `e`; `None` when the whole body is satisfiable. A head
/// that cannot match `e` blocks at the first literal.
pub fn find_blocking_atom(clause: &OrderedClause, e: &Atom, db: &Db) -> Option<usize> {
    let Some(init) = crate::relmodel::match_head(&clause.head, e) else {
        return Some(0);
    };
    if satisfiable(db, &clause.body, &init, None) == Some(true) {
        return None;
    }
    // prefix satisfiability is monotone, so bisect for the shortest failing one
    let (mut lo, mut hi) = (0usize, clause.body.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        if satisfiable(db, &clause.body[..=mid], &init, None) == Some(true) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Drops blocking atoms, and then literals no longer connected to the head,
/// until `e` is covered. With `schema`, a blocking atom takes its whole
/// chase group with it.
pub fn armg(clause: &OrderedClause, e: &Atom, db: &Db, schema: Option<&Schema>) -> OrderedClause {
    if crate::relmodel::match_head(&clause.head, e).is_none() {
        return clause.clone();
    }
    let groups: Vec<Vec<usize>> = match schema {
        Some(s) => removal_groups(clause, s),
        None => crate::chase::literal_groups(clause),
    };
    let mut group_of = vec![0; clause.body.len()];
    for (g, members) in groups.iter().enumerate() {
        for &i in members {
            group_of[i] = g;
        }
    }
    let mut alive = vec![true; clause.body.len()];
    loop {
        let idx: Vec<usize> = (0..alive.len()).filter(|&i| alive[i]).collect();
        let cur = crate::chase::subclause(clause, &alive);
        let Some(b) = find_blocking_atom(&cur, e, db) else {
            return cur;
        };
        for &i in &groups[group_of[idx[b]]] {
            alive[i] = false;
        }
        alive = crate::chase::prune_disconnected(clause, &alive);
    }
}

impl LearnClause for ProGolem {
    fn learn_clause(&self, ctx: &Context, uncovered: &[Atom]) -> Option<OrderedClause> {
        let cfg = ctx.config;
        let grouped = cfg.bottom == BottomKind::Maxvars;
        let schema = grouped.then(|| ctx.schema());
        let db = ctx.db();
        for (si, seed) in uncovered.iter().enumerate() {
            let bottom = match cfg.bottom {
                BottomKind::Maxvars => bottom_clause_maxvars(seed, ctx.instance, cfg.maxvars, &ctx.order),
                BottomKind::Depth => bottom_clause_depth(seed, ctx.instance, cfg.max_depth, &ctx.order),
            }
            .clause;
            let others: Vec<&Atom> = uncovered
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != si)
                .map(|(_, e)| e)
                .collect();
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ si as u64);
            let mut beam = vec![(bottom.clone(), ctx.score(&bottom, uncovered))];
            loop {
                let mut sample = others.clone();
                sample.shuffle(&mut rng);
                sample.truncate(cfg.sample_size);
                let mut cands: Vec<OrderedClause> = Vec::new();
                let mut seen = HashSet::new();
                for (c, _) in &beam {
                    for e in &sample {
                        let g = armg(c, e, db, schema);
                        if seen.insert(g.canonical().to_string()) {
                            cands.push(g);
                        }
                    }
                }
                let mut scored: Vec<(usize, Scored, usize)> = cands
                    .par_iter()
                    .enumerate()
                    .map(|(i, c)| {
                        let groups = match schema {
                            Some(s) => removal_groups(c, s).len(),
                            None => c.body.len(),
                        };
                        (i, ctx.score(c, uncovered), groups)
                    })
                    .collect();
                scored.sort_by(|a, b| b.1.score.cmp(&a.1.score).then(a.2.cmp(&b.2)).then(a.0.cmp(&b.0)));
                scored.truncate(cfg.beam_width);
                match scored.first() {
                    Some(top) if top.1.score > beam[0].1.score => {
                        beam = scored.iter().map(|(i, s, _)| (cands[*i].clone(), *s)).collect();
                    }
                    _ => break,
                }
            }
            let winner = &beam[0].0;
            if !ctx.consistent(winner) {
                continue;
            }
            let groups = match schema {
                Some(s) => removal_groups(winner, s),
                None => crate::chase::literal_groups(winner),
            };
            let Ok(reduced) = reduce_negative(winner, ctx.instance, ctx.negatives, &groups, ctx.max_neg) else {
                continue;
            };
            if clause_covers(&reduced, db, seed, None) == Some(true) {
                return Some(reduced);
            }
        }
        None
    }
}
