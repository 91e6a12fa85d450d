//! Conjunctive evaluation of clause bodies against a [`Db`].
//!
//! Bodies are compiled to slot vectors and solved by backtracking. At each
//! node the literal with the fewest candidate tuples is expanded next, using
//! the per-column indexes. Once every projected variable is bound the rest of
//! the body only needs one witness, so the search switches to an existence
//! check split into independent components.

use std::collections::{BTreeSet, HashMap, HashSet};

use super::clause::{Atom, HornDefinition, OrderedClause, Term};
use super::instance::{Db, Instance};
use super::symbol::Sym;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Var(usize),
    Val(Sym),
}

#[derive(Clone, Debug)]
struct CLit {
    pred: Sym,
    slots: Vec<Slot>,
}

/// Result of a bounded search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Search {
    Complete,
    Stopped,
    Exhausted,
}

struct Solver<'a> {
    db: &'a Db,
    lits: Vec<CLit>,
    binding: Vec<Option<Sym>>,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl<'a> Solver<'a> {
    fn compile(
        db: &'a Db,
        body: &[Atom],
        init: &HashMap<Sym, Sym>,
        order: &[Sym],
        budget: Option<u64>,
    ) -> (Solver<'a>, HashMap<Sym, usize>) {
        let mut idx: HashMap<Sym, usize> = HashMap::new();
        for v in order {
            let n = idx.len();
            idx.entry(*v).or_insert(n);
        }
        let mut lits = Vec::with_capacity(body.len());
        for a in body {
            let slots = a
                .args
                .iter()
                .map(|t| match t {
                    Term::Const(c) => Slot::Val(*c),
                    Term::Var(v) => match init.get(v) {
                        Some(c) => Slot::Val(*c),
                        None => {
                            let n = idx.len();
                            Slot::Var(*idx.entry(*v).or_insert(n))
                        }
                    },
                })
                .collect();
            lits.push(CLit { pred: a.pred, slots });
        }
        let n = idx.len();
        (
            Solver {
                db,
                lits,
                binding: vec![None; n],
                nodes: 0,
                budget: budget.unwrap_or(u64::MAX),
                exhausted: false,
            },
            idx,
        )
    }

    fn value(&self, s: Slot) -> Option<Sym> {
        match s {
            Slot::Val(c) => Some(c),
            Slot::Var(i) => self.binding[i],
        }
    }

    /// Candidate tuple ids for a literal under the current binding, or
    /// `None` meaning "scan the whole table".
    fn candidates(&self, li: usize) -> Option<Option<&'a [u32]>> {
        let lit = &self.lits[li];
        let table = self.db.table(lit.pred)?;
        let mut best: Option<&'a [u32]> = None;
        for (col, s) in lit.slots.iter().enumerate() {
            if let Some(v) = self.value(*s) {
                let ids = table.lookup(col, v);
                if best.is_none_or(|b| ids.len() < b.len()) {
                    best = Some(ids);
                }
            }
        }
        Some(best)
    }

    fn cand_len(&self, li: usize) -> usize {
        match self.candidates(li) {
            None => 0,
            Some(Some(ids)) => ids.len(),
            Some(None) => self.db.table(self.lits[li].pred).map_or(0, |t| t.len()),
        }
    }

    /// Try to bind `lit` to `tuple`; returns the newly bound variables or
    /// `None` on mismatch (with no bindings left behind).
    fn unify(&mut self, li: usize, tuple: &[Sym]) -> Option<Vec<usize>> {
        let mut newly = Vec::new();
        for (k, s) in self.lits[li].slots.iter().enumerate() {
            match *s {
                Slot::Val(c) => {
                    if c != tuple[k] {
                        for &v in &newly {
                            self.binding[v] = None;
                        }
                        return None;
                    }
                }
                Slot::Var(i) => match self.binding[i] {
                    Some(c) if c != tuple[k] => {
                        for &v in &newly {
                            self.binding[v] = None;
                        }
                        return None;
                    }
                    Some(_) => {}
                    None => {
                        self.binding[i] = Some(tuple[k]);
                        newly.push(i);
                    }
                },
            }
        }
        Some(newly)
    }

    fn pick(&self, remaining: &[usize]) -> (usize, usize) {
        let mut best = (0, usize::MAX);
        for (pos, &li) in remaining.iter().enumerate() {
            let n = self.cand_len(li);
            if n < best.1 {
                best = (pos, n);
                if n == 0 {
                    break;
                }
            }
        }
        best
    }

    fn tick(&mut self) -> bool {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            false
        } else {
            true
        }
    }

    fn lit_vars(&self, li: usize) -> impl Iterator<Item = usize> + '_ {
        self.lits[li].slots.iter().filter_map(|s| match s {
            Slot::Var(i) => Some(*i),
            _ => None,
        })
    }

    /// Split remaining literals into groups linked by unbound variables.
    fn components(&self, remaining: &[usize]) -> Vec<Vec<usize>> {
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut var_group: HashMap<usize, usize> = HashMap::new();
        let mut parent: Vec<usize> = Vec::new();
        fn root(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &li in remaining {
            let g = groups.len();
            groups.push(vec![li]);
            parent.push(g);
            let vars: Vec<usize> = self.lit_vars(li).filter(|v| self.binding[*v].is_none()).collect();
            for v in vars {
                match var_group.get(&v) {
                    Some(&h) => {
                        let (a, b) = (root(&mut parent, h), root(&mut parent, g));
                        if a != b {
                            parent[b] = a;
                        }
                    }
                    None => {
                        var_group.insert(v, g);
                    }
                }
            }
        }
        let mut merged: HashMap<usize, Vec<usize>> = HashMap::new();
        let mut order = Vec::new();
        for g in 0..groups.len() {
            let r = root(&mut parent, g);
            if !merged.contains_key(&r) {
                order.push(r);
            }
            merged.entry(r).or_default().extend(groups[g].iter().copied());
        }
        order.into_iter().map(|r| merged.remove(&r).unwrap()).collect()
    }

    /// Existence of a witness for `remaining`; `None` if the budget ran out.
    fn exists(&mut self, remaining: &[usize]) -> Option<bool> {
        let comps = self.components(remaining);
        if comps.len() > 1 {
            for c in comps {
                match self.exists_connected(&c) {
                    Some(true) => {}
                    other => return other,
                }
            }
            return Some(true);
        }
        self.exists_connected(remaining)
    }

    fn exists_connected(&mut self, remaining: &[usize]) -> Option<bool> {
        if remaining.is_empty() {
            return Some(true);
        }
        let (pos, n) = self.pick(remaining);
        if n == 0 {
            return Some(false);
        }
        let li = remaining[pos];
        let rest: Vec<usize> = remaining
            .iter()
            .enumerate()
            .filter(|(p, _)| *p != pos)
            .map(|(_, l)| *l)
            .collect();
        let ids: Vec<u32> = match self.candidates(li) {
            Some(Some(ids)) => ids.to_vec(),
            Some(None) => (0..self.db.table(self.lits[li].pred).unwrap().len() as u32).collect(),
            None => return Some(false),
        };
        let table = self.db.table(self.lits[li].pred).unwrap();
        for id in ids {
            if !self.tick() {
                return None;
            }
            let tuple = table.get(id);
            if let Some(newly) = self.unify(li, tuple) {
                let r = if newly.is_empty() {
                    self.exists_connected(&rest)
                } else {
                    self.exists(&rest)
                };
                for v in newly {
                    self.binding[v] = None;
                }
                match r {
                    Some(false) => {}
                    other => return other,
                }
            }
        }
        Some(false)
    }

    /// Enumerate distinct bindings of `proj` for which `remaining` has a
    /// witness. `f` returns false to stop.
    fn enumerate(
        &mut self,
        remaining: &[usize],
        proj: &[usize],
        f: &mut dyn FnMut(&[Sym]) -> bool,
    ) -> Search {
        if proj.iter().all(|&v| self.binding[v].is_some()) {
            return match self.exists(remaining) {
                None => Search::Exhausted,
                Some(false) => Search::Complete,
                Some(true) => {
                    let vals: Vec<Sym> = proj.iter().map(|&v| self.binding[v].unwrap()).collect();
                    if f(&vals) {
                        Search::Complete
                    } else {
                        Search::Stopped
                    }
                }
            };
        }
        if remaining.is_empty() {
            return Search::Complete;
        }
        let (pos, n) = self.pick(remaining);
        if n == 0 {
            return Search::Complete;
        }
        let li = remaining[pos];
        let rest: Vec<usize> = remaining
            .iter()
            .enumerate()
            .filter(|(p, _)| *p != pos)
            .map(|(_, l)| *l)
            .collect();
        let ids: Vec<u32> = match self.candidates(li) {
            Some(Some(ids)) => ids.to_vec(),
            Some(None) => (0..self.db.table(self.lits[li].pred).unwrap().len() as u32).collect(),
            None => return Search::Complete,
        };
        let table = self.db.table(self.lits[li].pred).unwrap();
        for id in ids {
            if !self.tick() {
                return Search::Exhausted;
            }
            let tuple = table.get(id);
            if let Some(newly) = self.unify(li, tuple) {
                let r = self.enumerate(&rest, proj, f);
                for v in newly {
                    self.binding[v] = None;
                }
                if r != Search::Complete {
                    return r;
                }
            }
        }
        Search::Complete
    }
}

/// Calls `f` once per distinct binding of `proj` that extends `init` to a
/// satisfying valuation of `body`. Variables of `proj` missing from the body
/// must be bound by `init`.
pub fn for_each_binding(
    db: &Db,
    body: &[Atom],
    init: &HashMap<Sym, Sym>,
    proj: &[Sym],
    budget: Option<u64>,
    mut f: impl FnMut(&[Sym]) -> bool,
) -> Search {
    let free: Vec<Sym> = proj.iter().filter(|v| !init.contains_key(v)).copied().collect();
    let (mut s, idx) = Solver::compile(db, body, init, &free, budget);
    let pidx: Vec<usize> = free.iter().map(|v| idx[v]).collect();
    let all: Vec<usize> = (0..s.lits.len()).collect();
    let mut emit = |vals: &[Sym]| {
        let mut it = vals.iter();
        let full: Vec<Sym> = proj
            .iter()
            .map(|v| init.get(v).copied().unwrap_or_else(|| *it.next().unwrap()))
            .collect();
        f(&full)
    };
    let r = s.enumerate(&all, &pidx, &mut emit);
    if s.exhausted {
        Search::Exhausted
    } else {
        r
    }
}

/// True if some extension of `init` satisfies every atom of `body`.
/// `None` when the node budget runs out first.
pub fn satisfiable(db: &Db, body: &[Atom], init: &HashMap<Sym, Sym>, budget: Option<u64>) -> Option<bool> {
    let (mut s, _) = Solver::compile(db, body, init, &[], budget);
    let all: Vec<usize> = (0..s.lits.len()).collect();
    s.exists(&all)
}

/// Bind head terms to the constants of a ground atom, or `None` if they
/// cannot match.
pub fn match_head(head: &Atom, e: &Atom) -> Option<HashMap<Sym, Sym>> {
    if head.pred != e.pred || head.arity() != e.arity() {
        return None;
    }
    let mut m = HashMap::new();
    for (h, g) in head.args.iter().zip(&e.args) {
        let Term::Const(c) = g else { return None };
        match h {
            Term::Const(k) if k != c => return None,
            Term::Const(_) => {}
            Term::Var(v) => {
                if let Some(prev) = m.insert(*v, *c) {
                    if prev != *c {
                        return None;
                    }
                }
            }
        }
    }
    Some(m)
}

fn instantiate_head(head: &Atom, vars: &[Sym], vals: &[Sym]) -> Atom {
    let m: HashMap<Sym, Sym> = vars.iter().copied().zip(vals.iter().copied()).collect();
    Atom {
        pred: head.pred,
        args: head
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => Term::Const(m[v]),
                c => *c,
            })
            .collect(),
    }
}

fn clause_over_db(clause: &OrderedClause, db: &Db, out: &mut BTreeSet<Atom>) -> Result<()> {
    let unbound = clause.unbound_head_vars();
    if !unbound.is_empty() {
        return Err(Error::Invalid(format!(
            "head variable {} does not occur in the body of {}",
            unbound[0], clause
        )));
    }
    let mut hv: Vec<Sym> = Vec::new();
    for v in clause.head.vars() {
        if !hv.contains(&v) {
            hv.push(v);
        }
    }
    for_each_binding(db, &clause.body, &HashMap::new(), &hv, None, |vals| {
        out.insert(instantiate_head(&clause.head, &hv, vals));
        true
    });
    Ok(())
}

/// Head instantiations of every valuation satisfying the body.
pub fn evaluate_clause(clause: &OrderedClause, instance: &Instance) -> Result<BTreeSet<Atom>> {
    let mut out = BTreeSet::new();
    clause_over_db(clause, instance.db(), &mut out)?;
    Ok(out)
}

fn is_recursive(def: &HornDefinition) -> bool {
    def.clauses
        .iter()
        .any(|c| c.body.iter().any(|a| a.pred == c.head.pred))
}

/// Least fixpoint of the definition over the instance. Non-recursive
/// definitions take a single pass.
pub fn evaluate_definition(def: &HornDefinition, instance: &Instance) -> Result<BTreeSet<Atom>> {
    let mut out = BTreeSet::new();
    if !is_recursive(def) {
        for c in &def.clauses {
            clause_over_db(c, instance.db(), &mut out)?;
        }
        return Ok(out);
    }
    let mut db = instance.db().clone();
    loop {
        let mut round = BTreeSet::new();
        for c in &def.clauses {
            clause_over_db(c, &db, &mut round)?;
        }
        let mut grew = false;
        for a in round {
            if out.insert(a.clone()) {
                db.insert(a.pred, a.consts().unwrap());
                grew = true;
            }
        }
        if !grew {
            return Ok(out);
        }
    }
}

/// True if the clause entails `e` over the instance.
pub fn clause_covers(clause: &OrderedClause, db: &Db, e: &Atom, budget: Option<u64>) -> Option<bool> {
    match match_head(&clause.head, e) {
        None => Some(false),
        Some(init) => satisfiable(db, &clause.body, &init, budget),
    }
}

/// A definition or a single clause.
pub enum Hypothesis<'a> {
    Clause(&'a OrderedClause),
    Definition(&'a HornDefinition),
}

impl<'a> From<&'a OrderedClause> for Hypothesis<'a> {
    fn from(c: &'a OrderedClause) -> Self {
        Hypothesis::Clause(c)
    }
}

impl<'a> From<&'a HornDefinition> for Hypothesis<'a> {
    fn from(d: &'a HornDefinition) -> Self {
        Hypothesis::Definition(d)
    }
}

/// The examples entailed by the hypothesis over the instance.
pub fn covers<'a>(instance: &Instance, hypothesis: impl Into<Hypothesis<'a>>, examples: &[Atom]) -> BTreeSet<Atom> {
    let clauses: Vec<&OrderedClause> = match hypothesis.into() {
        Hypothesis::Clause(c) => vec![c],
        Hypothesis::Definition(d) => {
            if is_recursive(d) {
                let derived = evaluate_definition(d, instance).unwrap_or_default();
                return examples.iter().filter(|e| derived.contains(e)).cloned().collect();
            }
            d.clauses.iter().collect()
        }
    };
    examples
        .iter()
        .filter(|e| {
            clauses
                .iter()
                .any(|c| clause_covers(c, instance.db(), e, None) == Some(true))
        })
        .cloned()
        .collect()
}

/// Indices of the covered examples, for callers that keep examples in a
/// fixed order.
pub fn covered_indices(db: &Db, clause: &OrderedClause, examples: &[Atom]) -> Vec<usize> {
    examples
        .iter()
        .enumerate()
        .filter(|(_, e)| clause_covers(clause, db, e, None) == Some(true))
        .map(|(i, _)| i)
        .collect()
}

/// Number of examples covered.
pub fn count_covered(db: &Db, clause: &OrderedClause, examples: &[Atom]) -> usize {
    examples
        .iter()
        .filter(|e| clause_covers(clause, db, e, None) == Some(true))
        .count()
}

/// True if the clause covers at most `limit` of the examples; stops early.
pub fn covers_at_most(db: &Db, clause: &OrderedClause, examples: &[Atom], limit: usize) -> bool {
    let mut n = 0;
    for e in examples {
        if clause_covers(clause, db, e, None) == Some(true) {
            n += 1;
            if n > limit {
                return false;
            }
        }
    }
    true
}

/// Variables of an atom sequence, distinct.
pub fn vars_of(atoms: &[Atom]) -> HashSet<Sym> {
    atoms.iter().flat_map(|a| a.vars()).collect()
}
