use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use super::clause::{Atom, Term};
use super::schema::Schema;
use super::symbol::{cmp_tuple, Sym};
use crate::{Error, Result};

pub type Tuple = Vec<Sym>;

/// Tuples of one predicate with a hash index per column.
#[derive(Clone, Debug, Default)]
pub struct Table {
    arity: usize,
    tuples: Vec<Tuple>,
    set: HashSet<Tuple>,
    index: Vec<HashMap<Sym, Vec<u32>>>,
}

impl Table {
    pub fn new(arity: usize) -> Table {
        Table {
            arity,
            tuples: Vec::new(),
            set: HashSet::new(),
            index: vec![HashMap::new(); arity],
        }
    }

    /// Builds a table with tuples in the given order, dropping duplicates.
    pub fn from_tuples(arity: usize, tuples: impl IntoIterator<Item = Tuple>) -> Table {
        let mut t = Table::new(arity);
        for tup in tuples {
            t.insert(tup);
        }
        t
    }

    pub fn insert(&mut self, tup: Tuple) -> bool {
        debug_assert_eq!(tup.len(), self.arity);
        if self.set.contains(&tup) {
            return false;
        }
        let id = self.tuples.len() as u32;
        for (i, c) in tup.iter().enumerate() {
            self.index[i].entry(*c).or_default().push(id);
        }
        self.set.insert(tup.clone());
        self.tuples.push(tup);
        true
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn contains(&self, t: &[Sym]) -> bool {
        self.set.contains(t)
    }

    /// Ids of tuples with `value` in column `col`.
    pub fn lookup(&self, col: usize, value: Sym) -> &[u32] {
        self.index[col].get(&value).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn get(&self, id: u32) -> &Tuple {
        &self.tuples[id as usize]
    }

    fn sorted(mut self) -> Table {
        let mut tuples = std::mem::take(&mut self.tuples);
        tuples.sort_by(|a, b| cmp_tuple(a, b));
        Table::from_tuples(self.arity, tuples)
    }
}

/// A set of predicate tables. Instances wrap one; θ-subsumption builds one
/// from a clause body.
#[derive(Clone, Debug, Default)]
pub struct Db {
    tables: HashMap<Sym, Table>,
}

impl Db {
    pub fn new() -> Db {
        Db::default()
    }

    pub fn insert(&mut self, pred: Sym, tup: Tuple) -> bool {
        let arity = tup.len();
        self.tables
            .entry(pred)
            .or_insert_with(|| Table::new(arity))
            .insert(tup)
    }

    pub fn table(&self, pred: Sym) -> Option<&Table> {
        self.tables.get(&pred)
    }

    pub fn contains(&self, pred: Sym, tup: &[Sym]) -> bool {
        self.tables.get(&pred).is_some_and(|t| t.contains(tup))
    }
}

/// A finite database over a schema: one tuple set per relation, kept in
/// lexicographic order of constant names.
#[derive(Clone)]
pub struct Instance {
    schema: Arc<Schema>,
    db: Db,
    rel_syms: Vec<Sym>,
    occurrences: HashMap<Sym, Vec<(Sym, u32)>>,
}

impl Instance {
    /// Builds and validates an instance. Fails on unknown relations, arity
    /// mismatches, and FD or IND violations.
    pub fn new(
        schema: Arc<Schema>,
        facts: impl IntoIterator<Item = (String, Tuple)>,
    ) -> Result<Instance> {
        let inst = Instance::build(schema, facts)?;
        inst.validate()?;
        Ok(inst)
    }

    /// Builds an instance without checking FDs and INDs.
    pub fn new_unchecked(
        schema: Arc<Schema>,
        facts: impl IntoIterator<Item = (String, Tuple)>,
    ) -> Result<Instance> {
        Instance::build(schema, facts)
    }

    pub fn empty(schema: Arc<Schema>) -> Instance {
        Instance::build(schema, std::iter::empty()).expect("empty instance")
    }

    fn build(schema: Arc<Schema>, facts: impl IntoIterator<Item = (String, Tuple)>) -> Result<Instance> {
        let mut raw: HashMap<Sym, Vec<Tuple>> = HashMap::new();
        for (rel, tup) in facts {
            let decl = schema
                .relation(&rel)
                .ok_or_else(|| Error::Data(format!("unknown relation {}", rel)))?;
            if decl.arity() != tup.len() {
                return Err(Error::Data(format!(
                    "{} expects {} arguments, got {}",
                    rel,
                    decl.arity(),
                    tup.len()
                )));
            }
            raw.entry(Sym::new(&rel)).or_default().push(tup);
        }
        let mut db = Db::new();
        let mut rel_syms = Vec::new();
        for r in schema.relations() {
            let s = Sym::new(&r.name);
            rel_syms.push(s);
            let t = Table::from_tuples(r.arity(), raw.remove(&s).unwrap_or_default()).sorted();
            db.tables.insert(s, t);
        }
        let mut occurrences: HashMap<Sym, Vec<(Sym, u32)>> = HashMap::new();
        for &s in &rel_syms {
            for (i, t) in db.tables[&s].tuples.iter().enumerate() {
                let mut seen = Vec::new();
                for c in t {
                    if !seen.contains(c) {
                        seen.push(*c);
                        occurrences.entry(*c).or_default().push((s, i as u32));
                    }
                }
            }
        }
        Ok(Instance {
            schema,
            db,
            rel_syms,
            occurrences,
        })
    }

    pub fn validate(&self) -> Result<()> {
        for fd in self.schema.fds() {
            let r = self.schema.relation(&fd.relation).unwrap();
            let lp: Vec<usize> = fd.lhs.iter().map(|a| r.position(a).unwrap()).collect();
            let rp: Vec<usize> = fd.rhs.iter().map(|a| r.position(a).unwrap()).collect();
            let mut seen: HashMap<Vec<Sym>, &Tuple> = HashMap::new();
            for t in self.tuples(&fd.relation) {
                let key: Vec<Sym> = lp.iter().map(|&i| t[i]).collect();
                if let Some(prev) = seen.get(&key) {
                    if rp.iter().any(|&i| prev[i] != t[i]) {
                        return Err(Error::Constraint(format!(
                            "fd {}: {:?} -> {:?} violated by {}({}) and {}({})",
                            fd.relation,
                            fd.lhs,
                            fd.rhs,
                            fd.relation,
                            fmt_tuple(prev),
                            fd.relation,
                            fmt_tuple(t)
                        )));
                    }
                } else {
                    seen.insert(key, t);
                }
            }
        }
        for ind in self.schema.inds() {
            let sides = if ind.equality {
                vec![(&ind.lhs, &ind.rhs), (&ind.rhs, &ind.lhs)]
            } else {
                vec![(&ind.lhs, &ind.rhs)]
            };
            for (a, b) in sides {
                let pb = self.projection(&b.relation, &b.attrs);
                let ra = self.schema.relation(&a.relation).unwrap();
                let pos: Vec<usize> = a.attrs.iter().map(|x| ra.position(x).unwrap()).collect();
                for t in self.tuples(&a.relation) {
                    let key: Vec<Sym> = pos.iter().map(|&i| t[i]).collect();
                    if !pb.contains(&key) {
                        return Err(Error::Constraint(format!(
                            "ind {}[{}] {} {}[{}] violated by {}({})",
                            ind.lhs.relation,
                            ind.lhs.attrs.join(","),
                            if ind.equality { "=" } else { "<=" },
                            ind.rhs.relation,
                            ind.rhs.attrs.join(","),
                            a.relation,
                            fmt_tuple(t)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn projection(&self, rel: &str, attrs: &[String]) -> HashSet<Vec<Sym>> {
        let r = self.schema.relation(rel).unwrap();
        let pos: Vec<usize> = attrs.iter().map(|x| r.position(x).unwrap()).collect();
        self.tuples(rel)
            .iter()
            .map(|t| pos.iter().map(|&i| t[i]).collect())
            .collect()
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn schema_arc(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn db(&self) -> &Db {
        &self.db
    }

    pub fn table(&self, rel: Sym) -> Option<&Table> {
        self.db.table(rel)
    }

    pub fn tuples(&self, rel: &str) -> &[Tuple] {
        self.db
            .table(Sym::new(rel))
            .map(|t| t.tuples())
            .unwrap_or(&[])
    }

    /// Relation symbols in schema declaration order.
    pub fn relation_syms(&self) -> &[Sym] {
        &self.rel_syms
    }

    pub fn contains(&self, rel: &str, t: &[Sym]) -> bool {
        self.db.contains(Sym::new(rel), t)
    }

    pub fn contains_atom(&self, a: &Atom) -> bool {
        match a.consts() {
            Some(t) => self.db.contains(a.pred, &t),
            None => false,
        }
    }

    /// Tuples mentioning constant `c`, as (relation, tuple id), in schema order.
    pub fn occurrences(&self, c: Sym) -> &[(Sym, u32)] {
        self.occurrences.get(&c).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.rel_syms.iter().map(|s| self.db.tables[s].len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn constants(&self) -> BTreeSet<Sym> {
        self.occurrences.keys().copied().collect()
    }

    /// All facts as ground atoms in schema and tuple order.
    pub fn atoms(&self) -> Vec<Atom> {
        let mut out = Vec::new();
        for &s in &self.rel_syms {
            for t in self.db.tables[&s].tuples() {
                out.push(Atom::new(s, t.iter().map(|c| Term::Const(*c)).collect()));
            }
        }
        out
    }

    pub fn facts(&self) -> Vec<(String, Tuple)> {
        let mut out = Vec::new();
        for &s in &self.rel_syms {
            for t in self.db.tables[&s].tuples() {
                out.push((s.as_str().to_string(), t.clone()));
            }
        }
        out
    }

    /// Same schema, a subset of the tuples.
    pub fn filter(&self, keep: impl Fn(&str, &Tuple) -> bool) -> Instance {
        let facts = self.facts().into_iter().filter(|(r, t)| keep(r, t));
        Instance::build(self.schema.clone(), facts).expect("filter keeps arity")
    }
}

impl PartialEq for Instance {
    fn eq(&self, other: &Instance) -> bool {
        let mine: BTreeSet<&str> = self.rel_syms.iter().map(|s| s.as_str()).collect();
        let theirs: BTreeSet<&str> = other.rel_syms.iter().map(|s| s.as_str()).collect();
        mine == theirs
            && self.rel_syms.iter().all(|s| {
                let a = &self.db.tables[s];
                let b = &other.db.tables[s];
                a.len() == b.len() && a.tuples().iter().all(|t| b.contains(t))
            })
    }
}

impl fmt::Debug for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Instance({} tuples)", self.len())
    }
}

impl fmt::Display for Instance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in self.atoms() {
            writeln!(f, "{}.", super::parse::fact_string(&a))?;
        }
        Ok(())
    }
}

pub(crate) fn fmt_tuple(t: &[Sym]) -> String {
    t.iter().map(|s| s.as_str()).collect::<Vec<_>>().join(",")
}
