//! Clause machinery: chase with equality INDs, θ-subsumption, equivalence,
//! negative reduction and minimization.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::relmodel::{
    covers_at_most, for_each_binding, Atom, Db, HornDefinition, Instance, OrderedClause, Schema,
    Search, Sym, Term, VarGen,
};
use crate::transform::{Direction, Transformation};
use crate::{Error, Result};

/// Default node budget for subsumption checks.
pub const SUBSUMPTION_BUDGET: u64 = 2_000_000;

pub type Substitution = HashMap<Sym, Term>;

/// Adds, for every body literal and every equality IND on its relation, a
/// partner literal carrying the same terms on the IND attributes and fresh
/// variables elsewhere. Partners already present (same relation, same terms
/// on the IND attributes) are not added again.
pub fn chase_clause(clause: &OrderedClause, schema: &Schema) -> Result<OrderedClause> {
    let mut body = clause.body.clone();
    let mut used: HashSet<Sym> = clause.vars().into_iter().collect();
    let mut gen = VarGen::new();
    let n_inds = schema.equality_inds().count().max(1);
    let guard = schema.relations().len() * n_inds * body.len().max(1) + body.len() + 16;
    let mut partners: HashMap<Sym, Vec<(Vec<usize>, Sym, Vec<usize>)>> = HashMap::new();
    let mut i = 0;
    let mut added = 0;
    while i < body.len() {
        let lit = body[i].clone();
        let ps = partners.entry(lit.pred).or_insert_with(|| {
            if schema.contains(lit.pred.as_str()) {
                schema
                    .eq_partners(lit.pred.as_str())
                    .into_iter()
                    .map(|(pa, r, pb)| (pa, Sym::new(&r), pb))
                    .collect()
            } else {
                Vec::new()
            }
        });
        for (pa, rk, pb) in ps.clone() {
            let key: Vec<Term> = pa.iter().map(|&p| lit.args[p]).collect();
            let present = body.iter().any(|m| {
                m.pred == rk && pb.iter().zip(&key).all(|(&p, t)| m.args[p] == *t)
            });
            if present {
                continue;
            }
            let arity = schema.relation(rk.as_str()).unwrap().arity();
            let mut args = Vec::with_capacity(arity);
            for p in 0..arity {
                match pb.iter().position(|&q| q == p) {
                    Some(k) => args.push(key[k]),
                    None => {
                        let v = gen.fresh_avoiding(&used);
                        used.insert(v);
                        args.push(Term::Var(v));
                    }
                }
            }
            body.push(Atom::new(rk, args));
            added += 1;
            if added > guard {
                return Err(Error::Internal(format!(
                    "chase of {} did not reach a fixpoint within {} steps",
                    clause, guard
                )));
            }
        }
        i += 1;
    }
    Ok(OrderedClause::new(clause.head.clone(), body))
}

/// Identifies terms forced equal by the schema FDs: two literals of a
/// relation agreeing on an FD's left side get their right-side terms
/// unified. Two distinct constants are never merged.
pub fn merge_fds(clause: &OrderedClause, schema: &Schema) -> OrderedClause {
    let head_vars: HashSet<Sym> = clause.head.vars().collect();
    let mut rep: HashMap<Term, Term> = HashMap::new();
    fn find(rep: &HashMap<Term, Term>, mut t: Term) -> Term {
        while let Some(&n) = rep.get(&t) {
            t = n;
        }
        t
    }
    let fds: Vec<(Sym, Vec<usize>, Vec<usize>)> = schema
        .fds()
        .iter()
        .filter_map(|fd| {
            let r = schema.relation(&fd.relation)?;
            let l = fd.lhs.iter().map(|a| r.position(a)).collect::<Option<Vec<_>>>()?;
            let rr = fd.rhs.iter().map(|a| r.position(a)).collect::<Option<Vec<_>>>()?;
            Some((Sym::new(&fd.relation), l, rr))
        })
        .collect();
    if fds.is_empty() {
        return clause.clone();
    }
    loop {
        let mut changed = false;
        for (rel, lhs, rhs) in &fds {
            let mut seen: HashMap<Vec<Term>, Vec<Term>> = HashMap::new();
            for lit in clause.body.iter().filter(|a| a.pred == *rel) {
                let key: Vec<Term> = lhs.iter().map(|&p| find(&rep, lit.args[p])).collect();
                let val: Vec<Term> = rhs.iter().map(|&p| find(&rep, lit.args[p])).collect();
                match seen.get(&key) {
                    None => {
                        seen.insert(key, val);
                    }
                    Some(prev) => {
                        for (&a, &b) in prev.clone().iter().zip(&val) {
                            let (a, b) = (find(&rep, a), find(&rep, b));
                            if a == b {
                                continue;
                            }
                            // keep constants, then head variables, then the smaller name
                            let keep_b = match (a, b) {
                                (Term::Const(_), Term::Const(_)) => continue,
                                (Term::Const(_), _) => false,
                                (_, Term::Const(_)) => true,
                                (Term::Var(x), Term::Var(y)) => {
                                    let hx = head_vars.contains(&x);
                                    let hy = head_vars.contains(&y);
                                    if hx != hy {
                                        hy
                                    } else {
                                        y.cmp_str(x) == std::cmp::Ordering::Less
                                    }
                                }
                            };
                            if keep_b {
                                rep.insert(a, b);
                            } else {
                                rep.insert(b, a);
                            }
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    if rep.is_empty() {
        return clause.clone();
    }
    let sub = |a: &Atom| Atom::new(a.pred, a.args.iter().map(|&t| find(&rep, t)).collect());
    let mut body: Vec<Atom> = Vec::with_capacity(clause.body.len());
    for a in &clause.body {
        let b = sub(a);
        if !body.contains(&b) {
            body.push(b);
        }
    }
    OrderedClause::new(sub(&clause.head), body)
}

/// IND chase and FD merging alternated to a fixpoint. Used for equivalence
/// checks, where a clause mapped into a composed schema joins several
/// projections of the same key.
pub fn chase_with_fds(clause: &OrderedClause, schema: &Schema) -> Result<OrderedClause> {
    let mut c = chase_clause(clause, schema)?;
    for _ in 0..64 {
        let m = merge_fds(&c, schema);
        if m == c {
            return Ok(c);
        }
        c = chase_clause(&m, schema)?;
    }
    Err(Error::Internal(format!("FD chase of {} did not settle", clause)))
}

pub fn chase_definition(def: &HornDefinition, schema: &Schema) -> Result<HornDefinition> {
    Ok(HornDefinition {
        clauses: def
            .clauses
            .iter()
            .map(|c| chase_clause(c, schema))
            .collect::<Result<_>>()?,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Subsumption {
    Yes(Substitution),
    No,
    Unknown,
}

impl Subsumption {
    pub fn holds(&self) -> bool {
        matches!(self, Subsumption::Yes(_))
    }

    pub fn substitution(&self) -> Option<&Substitution> {
        match self {
            Subsumption::Yes(t) => Some(t),
            _ => None,
        }
    }
}

fn skolem(v: Sym) -> Sym {
    Sym::new(&format!("\u{1}{}", v.as_str()))
}

fn unskolem(c: Sym) -> Term {
    match c.as_str().strip_prefix('\u{1}') {
        Some(name) => Term::Var(Sym::new(name)),
        None => Term::Const(c),
    }
}

fn freeze(t: Term) -> Sym {
    match t {
        Term::Var(v) => skolem(v),
        Term::Const(c) => c,
    }
}

/// Searches for θ with head(c)θ = head(d) and body(c)θ ⊆ body(d).
pub fn theta_subsumes(c: &OrderedClause, d: &OrderedClause) -> Subsumption {
    theta_subsumes_with(c, d, SUBSUMPTION_BUDGET)
}

pub fn theta_subsumes_with(c: &OrderedClause, d: &OrderedClause, budget: u64) -> Subsumption {
    if c.head.pred != d.head.pred || c.head.arity() != d.head.arity() {
        return Subsumption::No;
    }
    let mut init: HashMap<Sym, Sym> = HashMap::new();
    for (s, t) in c.head.args.iter().zip(&d.head.args) {
        let target = freeze(*t);
        match s {
            Term::Const(k) => {
                if *k != target {
                    return Subsumption::No;
                }
            }
            Term::Var(v) => {
                if let Some(prev) = init.insert(*v, target) {
                    if prev != target {
                        return Subsumption::No;
                    }
                }
            }
        }
    }
    let mut db = Db::new();
    for a in &d.body {
        db.insert(a.pred, a.args.iter().map(|t| freeze(*t)).collect());
    }
    let free: Vec<Sym> = c
        .vars()
        .into_iter()
        .filter(|v| !init.contains_key(v))
        .collect();
    let mut found: Option<Vec<Sym>> = None;
    let r = for_each_binding(&db, &c.body, &init, &free, Some(budget), |vals| {
        found = Some(vals.to_vec());
        false
    });
    match (found, r) {
        (Some(vals), _) => {
            let mut theta: Substitution = init.iter().map(|(k, v)| (*k, unskolem(*v))).collect();
            for (v, val) in free.iter().zip(vals) {
                theta.insert(*v, unskolem(val));
            }
            Subsumption::Yes(theta)
        }
        (None, Search::Exhausted) => Subsumption::Unknown,
        (None, _) => Subsumption::No,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Equivalent,
    Different,
    Unknown,
}

#[derive(Clone, Debug)]
pub struct EquivalenceVerdict {
    pub verdict: Verdict,
    /// θ with cθ ⊆ d (after mapping and chase).
    pub forward: Option<Substitution>,
    /// θ with dθ ⊆ c.
    pub backward: Option<Substitution>,
    /// The two clauses actually compared.
    pub compared: (OrderedClause, OrderedClause),
}

impl EquivalenceVerdict {
    pub fn equivalent(&self) -> bool {
        self.verdict == Verdict::Equivalent
    }
}

fn combine(a: &Subsumption, b: &Subsumption) -> Verdict {
    match (a, b) {
        (Subsumption::Yes(_), Subsumption::Yes(_)) => Verdict::Equivalent,
        (Subsumption::No, _) | (_, Subsumption::No) => Verdict::Different,
        _ => Verdict::Unknown,
    }
}

/// Mutual θ-subsumption after chasing both sides. With `tau`, `c` is first
/// carried into `schema_d` through the forward definition mapping.
pub fn clause_equivalent(
    c: &OrderedClause,
    d: &OrderedClause,
    schema_c: &Schema,
    schema_d: &Schema,
    tau: Option<&Transformation>,
) -> Result<EquivalenceVerdict> {
    let c_mapped = match tau {
        Some(t) => t.map_clause(c, Direction::Forward)?,
        None => {
            if schema_c != schema_d {
                return Err(Error::Invalid(
                    "clauses over different schemas need a transformation".into(),
                ));
            }
            c.clone()
        }
    };
    let cc = chase_with_fds(&c_mapped, schema_d)?;
    let dd = chase_with_fds(d, schema_d)?;
    let f = theta_subsumes(&cc, &dd);
    let b = theta_subsumes(&dd, &cc);
    Ok(EquivalenceVerdict {
        verdict: combine(&f, &b),
        forward: f.substitution().cloned(),
        backward: b.substitution().cloned(),
        compared: (cc, dd),
    })
}

/// Definitions as unions of clauses: every clause of each side must be
/// subsumed by some clause of the other, after chase.
pub fn definition_equivalent(
    a: &HornDefinition,
    b: &HornDefinition,
    schema_a: &Schema,
    schema_b: &Schema,
    tau: Option<&Transformation>,
) -> Result<Verdict> {
    let a = match tau {
        Some(t) => t.map_definition(a, Direction::Forward)?,
        None => {
            if schema_a != schema_b {
                return Err(Error::Invalid(
                    "definitions over different schemas need a transformation".into(),
                ));
            }
            a.clone()
        }
    };
    let fd_chase = |d: &HornDefinition| -> Result<HornDefinition> {
        Ok(HornDefinition {
            clauses: d.clauses.iter().map(|c| chase_with_fds(c, schema_b)).collect::<Result<_>>()?,
        })
    };
    let ca = fd_chase(&a)?;
    let cb = fd_chase(b)?;
    let mut unknown = false;
    for (xs, ys) in [(&ca, &cb), (&cb, &ca)] {
        for x in &xs.clauses {
            let mut found = false;
            for y in &ys.clauses {
                match theta_subsumes(y, x) {
                    Subsumption::Yes(_) => {
                        found = true;
                        break;
                    }
                    Subsumption::Unknown => unknown = true,
                    Subsumption::No => {}
                }
            }
            if !found {
                return Ok(if unknown { Verdict::Unknown } else { Verdict::Different });
            }
        }
    }
    Ok(Verdict::Equivalent)
}

/// Negative reduction. `groups` lists body-literal index sets in the order
/// they are considered; a group is removed when the clause without it (and
/// without the literals that lose their head connection) covers at most
/// `max_neg` negatives.
pub fn reduce_negative(
    clause: &OrderedClause,
    instance: &Instance,
    negatives: &[Atom],
    groups: &[Vec<usize>],
    max_neg: usize,
) -> Result<OrderedClause> {
    let db = instance.db();
    if !covers_at_most(db, clause, negatives, max_neg) {
        return Err(Error::Invalid(format!(
            "negative reduction needs a consistent clause, {} is not",
            clause
        )));
    }
    let mut alive = vec![true; clause.body.len()];
    for g in groups {
        if g.iter().all(|&i| !alive[i]) {
            continue;
        }
        let mut trial = alive.clone();
        for &i in g {
            trial[i] = false;
        }
        let trial = prune_disconnected(clause, &trial);
        let cand = subclause(clause, &trial);
        if covers_at_most(db, &cand, negatives, max_neg) {
            alive = trial;
        }
    }
    Ok(subclause(clause, &alive))
}

/// One group per literal, in body order.
pub fn literal_groups(clause: &OrderedClause) -> Vec<Vec<usize>> {
    (0..clause.body.len()).map(|i| vec![i]).collect()
}

pub(crate) fn subclause(clause: &OrderedClause, alive: &[bool]) -> OrderedClause {
    OrderedClause::new(
        clause.head.clone(),
        clause
            .body
            .iter()
            .zip(alive)
            .filter(|(_, a)| **a)
            .map(|(l, _)| l.clone())
            .collect(),
    )
}

/// Clears literals that are not connected to the head through live ones.
pub(crate) fn prune_disconnected(clause: &OrderedClause, alive: &[bool]) -> Vec<bool> {
    clause.head_connected_among(alive)
}

#[derive(Clone, Debug)]
pub struct Minimized {
    pub definition: HornDefinition,
    /// Indices (into the input) of clauses left unminimized because a
    /// subsumption check ran out of budget.
    pub flagged: Vec<usize>,
}

/// Removes body literals while a self-subsumption onto the shorter clause
/// exists, trying the last literal first so earlier ones survive. `None` if
/// a check ran out of budget.
pub fn core_minimize(clause: &OrderedClause) -> Option<OrderedClause> {
    let mut cur = clause.clone();
    let mut i = cur.body.len();
    while i > 0 {
        i -= 1;
        let mut cand = cur.clone();
        cand.body.remove(i);
        if !cand.unbound_head_vars().is_empty() {
            continue;
        }
        match theta_subsumes(&cur, &cand) {
            Subsumption::Yes(_) => cur = cand,
            Subsumption::No => {}
            Subsumption::Unknown => return None,
        }
        i = i.min(cur.body.len());
    }
    Some(cur)
}

/// Chase and core-minimize each clause, then drop clauses subsumed by
/// another clause of the definition.
pub fn minimize_definition(def: &HornDefinition, schema: &Schema) -> Result<Minimized> {
    let mut flagged = Vec::new();
    let mut clauses = Vec::new();
    for (i, c) in def.clauses.iter().enumerate() {
        let chased = chase_clause(c, schema)?;
        match core_minimize(&chased) {
            Some(m) => clauses.push(m),
            None => {
                flagged.push(i);
                clauses.push(chased);
            }
        }
    }
    let mut keep = vec![true; clauses.len()];
    for i in 0..clauses.len() {
        for j in 0..clauses.len() {
            if i == j || !keep[j] || !keep[i] {
                continue;
            }
            if theta_subsumes(&clauses[j], &clauses[i]).holds() {
                // ties between mutually subsuming clauses keep the earlier one
                let mutual = theta_subsumes(&clauses[i], &clauses[j]).holds();
                if !mutual || j < i {
                    keep[i] = false;
                }
            }
        }
    }
    let clauses = clauses
        .into_iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(c, _)| c)
        .collect();
    Ok(Minimized {
        definition: HornDefinition { clauses },
        flagged,
    })
}
