//! Vertical decomposition and composition of schemas, instances and Horn
//! definitions.
//!
//! A [`Transformation`] is a chain of steps. Each step either splits one
//! relation into projections sharing a key `C̄`, or joins such a group back
//! into one relation. Both directions are kept as Horn programs with one
//! clause per defined relation, which is what [`Transformation::map_clause`]
//! unfolds.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::relmodel::{
    attr_closure, evaluate_clause, fd_closure, fd_signature, inclusion_classes, Atom, Cursor, Fd,
    HornDefinition, Ind, IndSide, Instance, OrderedClause, RelationDecl, Schema, Sym, Term,
    Tuple, VarGen,
};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Decomposed,
    Composed,
    Identity,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecompositionSpec {
    pub source: String,
    pub components: Vec<(String, Vec<String>)>,
}

impl DecompositionSpec {
    pub fn new(source: &str, components: &[(&str, &[&str])]) -> DecompositionSpec {
        DecompositionSpec {
            source: source.to_string(),
            components: components
                .iter()
                .map(|(n, a)| (n.to_string(), a.iter().map(|s| s.to_string()).collect()))
                .collect(),
        }
    }

    /// Attributes common to every component.
    pub fn shared(&self) -> BTreeSet<String> {
        let mut it = self.components.iter();
        let mut acc: BTreeSet<String> = match it.next() {
            Some((_, a)) => a.iter().cloned().collect(),
            None => return BTreeSet::new(),
        };
        for (_, a) in it {
            let s: BTreeSet<String> = a.iter().cloned().collect();
            acc = acc.intersection(&s).cloned().collect();
        }
        acc
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Decompose(DecompositionSpec),
    Compose { parts: Vec<String>, into: String },
    /// Renames one attribute of one relation; tuples are unchanged.
    Rename { relation: String, from: String, to: String },
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Step::Decompose(s) => {
                let parts: Vec<String> = s
                    .components
                    .iter()
                    .map(|(n, a)| format!("{}({})", n, a.join(",")))
                    .collect();
                write!(f, "decompose {} into {}", s.source, parts.join("; "))
            }
            Step::Compose { parts, into } => write!(f, "compose {} into {}", parts.join(","), into),
            Step::Rename { relation, from, to } => write!(f, "rename {}.{} to {}", relation, from, to),
        }
    }
}

/// A bijective map between two schemas, stored as Horn programs in both
/// directions.
#[derive(Clone, Debug)]
pub struct Transformation {
    source: Arc<Schema>,
    target: Arc<Schema>,
    /// One clause per target relation, over the source schema.
    forward: BTreeMap<String, OrderedClause>,
    /// One clause per source relation, over the target schema.
    inverse: BTreeMap<String, OrderedClause>,
    steps: Vec<Step>,
    inverted: bool,
}

fn var_for(attr: &str) -> Term {
    let mut s = String::from("A_");
    s.push_str(attr);
    Term::Var(Sym::new(&s))
}

fn rel_atom(rel: &RelationDecl) -> Atom {
    Atom::new(Sym::new(&rel.name), rel.attrs.iter().map(|a| var_for(a)).collect())
}

fn identity_programs(schema: &Schema, skip: &HashSet<String>) -> BTreeMap<String, OrderedClause> {
    schema
        .relations()
        .iter()
        .filter(|r| !skip.contains(&r.name))
        .map(|r| (r.name.clone(), OrderedClause::new(rel_atom(r), vec![rel_atom(r)])))
        .collect()
}

/// Replace an IND side on `old` by sides on the relations in `new` that
/// contain all its attributes.
fn rehome_side(side: &IndSide, old: &str, new: &[(String, Vec<String>)]) -> Result<Vec<IndSide>> {
    if side.relation != old {
        return Ok(vec![side.clone()]);
    }
    let out: Vec<IndSide> = new
        .iter()
        .filter(|(_, attrs)| side.attrs.iter().all(|a| attrs.contains(a)))
        .map(|(n, _)| IndSide {
            relation: n.clone(),
            attrs: side.attrs.clone(),
        })
        .collect();
    if out.is_empty() {
        return Err(Error::Schema(format!(
            "ind on {}[{}] does not fit in any component",
            old,
            side.attrs.join(",")
        )));
    }
    Ok(out)
}

fn check_key(schema: &Schema, rel: &str, key: &BTreeSet<String>, attrs: &[String]) -> Result<()> {
    let fds: Vec<(BTreeSet<String>, BTreeSet<String>)> = schema
        .fds_of(rel)
        .map(|f| (f.lhs.clone(), f.rhs.clone()))
        .collect();
    let cl = attr_closure(key, &fds);
    if let Some(a) = attrs.iter().find(|a| !cl.contains(*a)) {
        return Err(Error::Schema(format!(
            "shared attributes {{{}}} do not determine {} in {}",
            key.iter().cloned().collect::<Vec<_>>().join(","),
            a,
            rel
        )));
    }
    Ok(())
}

/// Splits one relation into components. Every component must contain the
/// shared attributes `C̄`, and `C̄` must determine each component under the
/// FDs of the source relation.
pub fn decompose(schema: &Schema, spec: &DecompositionSpec) -> Result<(Schema, Transformation)> {
    let t = Transformation::single(Arc::new(schema.clone()), Step::Decompose(spec.clone()))?;
    Ok(((*t.target).clone(), t))
}

/// Joins relations linked by equality INDs on their common attributes into
/// one relation named `into`.
pub fn compose(schema: &Schema, parts: &[String], into: &str) -> Result<(Schema, Transformation)> {
    let t = Transformation::single(
        Arc::new(schema.clone()),
        Step::Compose {
            parts: parts.to_vec(),
            into: into.to_string(),
        },
    )?;
    Ok(((*t.target).clone(), t))
}

struct StepResult {
    target: Schema,
    forward: BTreeMap<String, OrderedClause>,
    inverse: BTreeMap<String, OrderedClause>,
}

fn apply_decompose(schema: &Schema, spec: &DecompositionSpec) -> Result<StepResult> {
    let src = schema.require(&spec.source)?.clone();
    if spec.components.is_empty() {
        return Err(Error::Schema(format!("decomposition of {} has no components", src.name)));
    }
    let all: BTreeSet<String> = src.attrs.iter().cloned().collect();
    let mut union = BTreeSet::new();
    for (name, attrs) in &spec.components {
        if attrs.is_empty() {
            return Err(Error::Schema(format!("component {} has no attributes", name)));
        }
        for a in attrs {
            if !all.contains(a) {
                return Err(Error::Schema(format!("{} is not an attribute of {}", a, src.name)));
            }
            union.insert(a.clone());
        }
        if name != &src.name && schema.contains(name) {
            return Err(Error::Schema(format!("component name {} is already taken", name)));
        }
    }
    if union != all {
        return Err(Error::Schema(format!(
            "components of {} do not cover all its attributes",
            src.name
        )));
    }
    let names: BTreeSet<&String> = spec.components.iter().map(|(n, _)| n).collect();
    if names.len() != spec.components.len() {
        return Err(Error::Schema("component names repeat".into()));
    }
    if spec.components.len() == 1 {
        let (name, attrs) = &spec.components[0];
        if name == &src.name && attrs == &src.attrs {
            return Ok(StepResult {
                target: schema.clone(),
                forward: identity_programs(schema, &HashSet::new()),
                inverse: identity_programs(schema, &HashSet::new()),
            });
        }
        return Err(Error::Schema(format!(
            "a single component must repeat {} unchanged",
            src.name
        )));
    }
    let shared = spec.shared();
    if shared.is_empty() {
        return Err(Error::Schema(format!(
            "components of {} share no attribute",
            src.name
        )));
    }
    if shared == all {
        return Err(Error::Schema(format!(
            "shared attributes of {} cover the whole relation",
            src.name
        )));
    }
    for i in 0..spec.components.len() {
        for j in i + 1..spec.components.len() {
            let a: BTreeSet<&String> = spec.components[i].1.iter().collect();
            let b: BTreeSet<&String> = spec.components[j].1.iter().collect();
            let common: BTreeSet<String> = a.intersection(&b).map(|s| (*s).clone()).collect();
            if common != shared {
                return Err(Error::Schema(format!(
                    "components {} and {} share more than the common attributes",
                    spec.components[i].0, spec.components[j].0
                )));
            }
        }
    }
    for (_, attrs) in &spec.components {
        check_key(schema, &src.name, &shared, attrs)?;
    }
    // relations, keeping the source's position
    let mut rels = Vec::new();
    for r in schema.relations() {
        if r.name == src.name {
            for (n, attrs) in &spec.components {
                rels.push(RelationDecl {
                    name: n.clone(),
                    attrs: attrs.clone(),
                });
            }
        } else {
            rels.push(r.clone());
        }
    }
    let mut fds = Vec::new();
    for fd in schema.fds() {
        if fd.relation != src.name {
            fds.push(fd.clone());
            continue;
        }
        // each component containing the left side keeps the part of the
        // right side it holds; the closure check below catches losses
        for (h, attrs) in &spec.components {
            if !fd.lhs.iter().all(|a| attrs.contains(a)) {
                continue;
            }
            let rhs: BTreeSet<String> = fd
                .rhs
                .iter()
                .filter(|a| attrs.contains(*a) && !fd.lhs.contains(*a))
                .cloned()
                .collect();
            if !rhs.is_empty() {
                fds.push(Fd {
                    relation: h.clone(),
                    lhs: fd.lhs.clone(),
                    rhs,
                });
            }
        }
    }
    let mut inds = Vec::new();
    for ind in schema.inds() {
        for l in rehome_side(&ind.lhs, &src.name, &spec.components)? {
            for r in rehome_side(&ind.rhs, &src.name, &spec.components)? {
                if l.relation == r.relation && l.attrs == r.attrs {
                    continue;
                }
                inds.push(Ind {
                    lhs: l.clone(),
                    rhs: r,
                    equality: ind.equality,
                });
            }
        }
    }
    let key: Vec<String> = src.attrs.iter().filter(|a| shared.contains(*a)).cloned().collect();
    for i in 0..spec.components.len() {
        for j in i + 1..spec.components.len() {
            inds.push(Ind::eq(
                IndSide {
                    relation: spec.components[i].0.clone(),
                    attrs: key.clone(),
                },
                IndSide {
                    relation: spec.components[j].0.clone(),
                    attrs: key.clone(),
                },
            ));
        }
    }
    let target = Schema::new(rels, fds, inds)?;
    if fd_signature(&fd_closure(schema)) != fd_signature(&fd_closure(&target)) {
        return Err(Error::Schema(format!(
            "decomposing {} changes the closure of the FDs",
            src.name
        )));
    }
    let skip_src: HashSet<String> = [src.name.clone()].into_iter().collect();
    let skip_tgt: HashSet<String> = spec.components.iter().map(|(n, _)| n.clone()).collect();
    let mut forward = identity_programs(schema, &skip_src);
    let mut inverse = identity_programs(schema, &skip_src);
    forward.retain(|k, _| !skip_tgt.contains(k));
    inverse.retain(|k, _| !skip_tgt.contains(k) || k == &src.name);
    let src_atom = rel_atom(&src);
    let mut join = Vec::new();
    for (n, attrs) in &spec.components {
        let decl = RelationDecl {
            name: n.clone(),
            attrs: attrs.clone(),
        };
        forward.insert(n.clone(), OrderedClause::new(rel_atom(&decl), vec![src_atom.clone()]));
        join.push(rel_atom(&decl));
    }
    inverse.insert(src.name.clone(), OrderedClause::new(src_atom, join));
    Ok(StepResult {
        target,
        forward,
        inverse,
    })
}

fn apply_compose(schema: &Schema, parts: &[String], into: &str) -> Result<StepResult> {
    if parts.is_empty() {
        return Err(Error::Schema("compose needs at least one relation".into()));
    }
    let decls: Vec<RelationDecl> = parts
        .iter()
        .map(|p| schema.require(p).cloned())
        .collect::<Result<_>>()?;
    if into != parts[0] && !parts.contains(&into.to_string()) && schema.contains(into) {
        return Err(Error::Schema(format!("relation name {} is already taken", into)));
    }
    if parts.len() == 1 {
        if into != parts[0] {
            return Err(Error::Schema("composing one relation cannot rename it".into()));
        }
        return Ok(StepResult {
            target: schema.clone(),
            forward: identity_programs(schema, &HashSet::new()),
            inverse: identity_programs(schema, &HashSet::new()),
        });
    }
    let spec = DecompositionSpec {
        source: into.to_string(),
        components: decls.iter().map(|d| (d.name.clone(), d.attrs.clone())).collect(),
    };
    let shared = spec.shared();
    if shared.is_empty() {
        return Err(Error::Schema(format!("{} share no attribute", parts.join(","))));
    }
    for i in 0..decls.len() {
        for j in i + 1..decls.len() {
            let a: BTreeSet<&String> = decls[i].attrs.iter().collect();
            let b: BTreeSet<&String> = decls[j].attrs.iter().collect();
            let common: BTreeSet<String> = a.intersection(&b).map(|s| (*s).clone()).collect();
            if common != shared {
                return Err(Error::Schema(format!(
                    "{} and {} share attributes beyond the common key",
                    decls[i].name, decls[j].name
                )));
            }
        }
    }
    // the parts must be linked by equality INDs on exactly the shared attributes
    let mut linked: BTreeSet<usize> = [0].into_iter().collect();
    loop {
        let before = linked.len();
        for ind in schema.equality_inds() {
            let li = parts.iter().position(|p| *p == ind.lhs.relation);
            let ri = parts.iter().position(|p| *p == ind.rhs.relation);
            if let (Some(li), Some(ri)) = (li, ri) {
                let la: BTreeSet<&String> = ind.lhs.attrs.iter().collect();
                let ra: BTreeSet<&String> = ind.rhs.attrs.iter().collect();
                let sh: BTreeSet<&String> = shared.iter().collect();
                if la == sh && ra == sh && ind.lhs.attrs == ind.rhs.attrs {
                    if linked.contains(&li) {
                        linked.insert(ri);
                    }
                    if linked.contains(&ri) {
                        linked.insert(li);
                    }
                }
            }
        }
        if linked.len() == before {
            break;
        }
    }
    if linked.len() != parts.len() {
        return Err(Error::Schema(format!(
            "{} are not linked by equality INDs on their common attributes",
            parts.join(",")
        )));
    }
    for d in &decls {
        check_key(schema, &d.name, &shared, &d.attrs)?;
    }
    let mut attrs: Vec<String> = Vec::new();
    for d in &decls {
        for a in &d.attrs {
            if !attrs.contains(a) {
                attrs.push(a.clone());
            }
        }
    }
    let composed = RelationDecl {
        name: into.to_string(),
        attrs: attrs.clone(),
    };
    let first_pos = schema
        .relations()
        .iter()
        .position(|r| parts.contains(&r.name))
        .unwrap();
    let mut rels = Vec::new();
    for (i, r) in schema.relations().iter().enumerate() {
        if i == first_pos {
            rels.push(composed.clone());
        } else if !parts.contains(&r.name) {
            rels.push(r.clone());
        }
    }
    let mut fds = Vec::new();
    for fd in schema.fds() {
        let f = if parts.contains(&fd.relation) {
            Fd {
                relation: into.to_string(),
                lhs: fd.lhs.clone(),
                rhs: fd.rhs.clone(),
            }
        } else {
            fd.clone()
        };
        if !fds.contains(&f) {
            fds.push(f);
        }
    }
    let mut inds = Vec::new();
    for ind in schema.inds() {
        let inside = parts.contains(&ind.lhs.relation) && parts.contains(&ind.rhs.relation);
        let mv = |s: &IndSide| {
            if parts.contains(&s.relation) {
                IndSide {
                    relation: into.to_string(),
                    attrs: s.attrs.clone(),
                }
            } else {
                s.clone()
            }
        };
        let (l, r) = (mv(&ind.lhs), mv(&ind.rhs));
        if inside && l.attrs == r.attrs {
            continue;
        }
        let n = Ind {
            lhs: l,
            rhs: r,
            equality: ind.equality,
        };
        if !inds.iter().any(|x: &Ind| x.normalized() == n.normalized()) {
            inds.push(n);
        }
    }
    let target = Schema::new(rels, fds, inds)?;
    if fd_signature(&fd_closure(schema)) != fd_signature(&fd_closure(&target)) {
        return Err(Error::Schema(format!(
            "composing {} changes the closure of the FDs",
            parts.join(",")
        )));
    }
    let skip_src: HashSet<String> = parts.iter().cloned().collect();
    let mut forward = identity_programs(schema, &skip_src);
    let mut inverse = identity_programs(schema, &skip_src);
    forward.remove(into);
    inverse.retain(|k, _| !skip_src.contains(k));
    let comp_atom = rel_atom(&composed);
    forward.insert(
        into.to_string(),
        OrderedClause::new(comp_atom.clone(), decls.iter().map(rel_atom).collect()),
    );
    for d in &decls {
        inverse.insert(d.name.clone(), OrderedClause::new(rel_atom(d), vec![comp_atom.clone()]));
    }
    Ok(StepResult {
        target,
        forward,
        inverse,
    })
}

fn apply_rename(schema: &Schema, relation: &str, from: &str, to: &str) -> Result<StepResult> {
    let decl = schema.require(relation)?;
    if decl.position(from).is_none() {
        return Err(Error::Schema(format!("{} is not an attribute of {}", from, relation)));
    }
    if from != to && decl.position(to).is_some() {
        return Err(Error::Schema(format!("{} already has an attribute {}", relation, to)));
    }
    let ren = |a: &String| if a == from { to.to_string() } else { a.clone() };
    let rels: Vec<RelationDecl> = schema
        .relations()
        .iter()
        .map(|r| {
            if r.name == relation {
                RelationDecl {
                    name: r.name.clone(),
                    attrs: r.attrs.iter().map(ren).collect(),
                }
            } else {
                r.clone()
            }
        })
        .collect();
    let fds: Vec<Fd> = schema
        .fds()
        .iter()
        .map(|f| {
            if f.relation == relation {
                Fd {
                    relation: f.relation.clone(),
                    lhs: f.lhs.iter().map(ren).collect(),
                    rhs: f.rhs.iter().map(ren).collect(),
                }
            } else {
                f.clone()
            }
        })
        .collect();
    let side = |s: &IndSide| {
        if s.relation == relation {
            IndSide {
                relation: s.relation.clone(),
                attrs: s.attrs.iter().map(ren).collect(),
            }
        } else {
            s.clone()
        }
    };
    let inds: Vec<Ind> = schema
        .inds()
        .iter()
        .map(|i| Ind {
            lhs: side(&i.lhs),
            rhs: side(&i.rhs),
            equality: i.equality,
        })
        .collect();
    let target = Schema::new(rels, fds, inds)?;
    // programs are positional, so the target's variable names serve both sides
    let p = identity_programs(&target, &HashSet::new());
    Ok(StepResult {
        target,
        forward: p.clone(),
        inverse: p,
    })
}

/// Unfold every literal whose predicate `program` defines. Fresh variables
/// are named V1, V2, ... left to right, avoiding names already in `clause`.
fn unfold(clause: &OrderedClause, program: &BTreeMap<String, OrderedClause>) -> OrderedClause {
    let mut used: HashSet<Sym> = clause.vars().into_iter().collect();
    let mut gen = VarGen::new();
    let mut body = Vec::new();
    for lit in &clause.body {
        let Some(def) = program.get(lit.pred.as_str()) else {
            body.push(lit.clone());
            continue;
        };
        let mut theta: HashMap<Sym, Term> = HashMap::new();
        for (h, t) in def.head.args.iter().zip(&lit.args) {
            if let Term::Var(v) = h {
                theta.insert(*v, *t);
            }
        }
        for a in &def.body {
            for v in a.vars() {
                theta.entry(v).or_insert_with(|| {
                    let f = gen.fresh_avoiding(&used);
                    used.insert(f);
                    Term::Var(f)
                });
            }
            body.push(a.apply(&theta));
        }
    }
    OrderedClause::new(clause.head.clone(), body)
}

impl Transformation {
    pub fn identity(schema: Arc<Schema>) -> Transformation {
        let p = identity_programs(&schema, &HashSet::new());
        Transformation {
            source: schema.clone(),
            target: schema,
            forward: p.clone(),
            inverse: p,
            steps: Vec::new(),
            inverted: false,
        }
    }

    pub fn single(source: Arc<Schema>, step: Step) -> Result<Transformation> {
        let r = match &step {
            Step::Decompose(spec) => apply_decompose(&source, spec)?,
            Step::Compose { parts, into } => apply_compose(&source, parts, into)?,
            Step::Rename { relation, from, to } => apply_rename(&source, relation, from, to)?,
        };
        Ok(Transformation {
            source,
            target: Arc::new(r.target),
            forward: r.forward,
            inverse: r.inverse,
            steps: vec![step],
            inverted: false,
        })
    }

    /// Applies the steps one after another.
    pub fn from_steps(source: Arc<Schema>, steps: &[Step]) -> Result<Transformation> {
        let mut t = Transformation::identity(source);
        for s in steps {
            let next = Transformation::single(t.target.clone(), s.clone())?;
            t = t.then(&next)?;
        }
        Ok(t)
    }

    /// Parses a transformation file and applies it to `source`.
    pub fn parse(source: Arc<Schema>, text: &str) -> Result<Transformation> {
        Transformation::from_steps(source, &parse_steps(text)?)
    }

    pub fn source(&self) -> &Arc<Schema> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Schema> {
        &self.target
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn forward_program(&self) -> &BTreeMap<String, OrderedClause> {
        &self.forward
    }

    pub fn inverse_program(&self) -> &BTreeMap<String, OrderedClause> {
        &self.inverse
    }

    /// Forward program as Horn definitions, one per target relation.
    pub fn forward_definitions(&self) -> Vec<HornDefinition> {
        self.forward.values().map(|c| HornDefinition::single(c.clone())).collect()
    }

    pub fn inverse_definitions(&self) -> Vec<HornDefinition> {
        self.inverse.values().map(|c| HornDefinition::single(c.clone())).collect()
    }

    /// Per target relation: how it arises from the source.
    pub fn kinds(&self) -> BTreeMap<String, Kind> {
        self.forward
            .iter()
            .map(|(name, c)| {
                let k = if c.body.len() > 1 {
                    Kind::Composed
                } else if c.body[0].pred.as_str() == name
                    && c.body[0].args == c.head.args
                {
                    Kind::Identity
                } else {
                    Kind::Decomposed
                };
                (name.clone(), k)
            })
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.kinds().values().all(|k| *k == Kind::Identity)
    }

    pub fn inverse(&self) -> Transformation {
        Transformation {
            source: self.target.clone(),
            target: self.source.clone(),
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
            steps: self.steps.clone(),
            inverted: !self.inverted,
        }
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Transformation) -> Result<Transformation> {
        if self.target.relations() != next.source.relations() {
            return Err(Error::Schema(
                "transformations do not chain: schemas differ".into(),
            ));
        }
        let forward = next
            .forward
            .iter()
            .map(|(k, c)| (k.clone(), unfold(c, &self.forward)))
            .collect();
        let inverse = self
            .inverse
            .iter()
            .map(|(k, c)| (k.clone(), unfold(c, &next.inverse)))
            .collect();
        let mut steps = self.serial_steps();
        steps.extend(next.serial_steps());
        Ok(Transformation {
            source: self.source.clone(),
            target: next.target.clone(),
            forward,
            inverse,
            steps,
            inverted: false,
        })
    }

    /// Steps in the order they apply from source to target.
    pub fn serial_steps(&self) -> Vec<Step> {
        if !self.inverted {
            return self.steps.clone();
        }
        // replay the inverted chain to recover each intermediate schema
        let mut schemas = vec![self.target.clone()];
        for s in &self.steps {
            let last = schemas.last().unwrap().clone();
            let t = Transformation::single(last, s.clone()).expect("replay of a valid chain");
            schemas.push(t.target.clone());
        }
        let mut out = Vec::new();
        for (i, s) in self.steps.iter().enumerate().rev() {
            out.push(match s {
                Step::Decompose(d) => Step::Compose {
                    parts: d.components.iter().map(|(n, _)| n.clone()).collect(),
                    into: d.source.clone(),
                },
                Step::Rename { relation, from, to } => Step::Rename {
                    relation: relation.clone(),
                    from: to.clone(),
                    to: from.clone(),
                },
                Step::Compose { parts, into } => {
                    let before = &schemas[i];
                    Step::Decompose(DecompositionSpec {
                        source: into.clone(),
                        components: parts
                            .iter()
                            .map(|p| {
                                let d = before.relation(p).unwrap();
                                (d.name.clone(), d.attrs.clone())
                            })
                            .collect(),
                    })
                }
            });
        }
        out
    }

    pub fn program(&self, dir: Direction) -> &BTreeMap<String, OrderedClause> {
        match dir {
            Direction::Forward => &self.forward,
            Direction::Inverse => &self.inverse,
        }
    }

    /// Evaluates the direction's program over `instance` and validates the
    /// result against the direction's target schema.
    pub fn apply(&self, instance: &Instance, dir: Direction) -> Result<Instance> {
        let (prog, to) = match dir {
            Direction::Forward => (&self.forward, &self.target),
            Direction::Inverse => (&self.inverse, &self.source),
        };
        let mut facts: Vec<(String, Tuple)> = Vec::new();
        for r in to.relations() {
            let c = &prog[&r.name];
            for a in evaluate_clause(c, instance)? {
                facts.push((r.name.clone(), a.consts().unwrap()));
            }
        }
        Instance::new(to.clone(), facts).map_err(|e| match e {
            Error::Constraint(m) => Error::Constraint(format!("transformed instance: {}", m)),
            other => other,
        })
    }

    /// δ_τ for one clause: unfold each body literal through the opposite
    /// direction's program.
    pub fn map_clause(&self, clause: &OrderedClause, dir: Direction) -> Result<OrderedClause> {
        let (from, back) = match dir {
            Direction::Forward => (&self.source, &self.inverse),
            Direction::Inverse => (&self.target, &self.forward),
        };
        for a in &clause.body {
            if !from.contains(a.pred.as_str()) && a.pred != clause.head.pred {
                return Err(Error::Invalid(format!(
                    "{} is not a relation of the source schema",
                    a.pred
                )));
            }
        }
        Ok(unfold(clause, back))
    }

    pub fn map_definition(&self, def: &HornDefinition, dir: Direction) -> Result<HornDefinition> {
        Ok(HornDefinition {
            clauses: def
                .clauses
                .iter()
                .map(|c| self.map_clause(c, dir))
                .collect::<Result<_>>()?,
        })
    }

    /// Pairs (source class index, target class index) of inclusion classes
    /// related by the transformation, using [`inclusion_classes`] numbering.
    pub fn class_bijection(&self) -> Vec<(usize, usize)> {
        let sc = inclusion_classes(&self.source);
        let tc = inclusion_classes(&self.target);
        let s_of: HashMap<&str, usize> = sc
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.iter().map(move |r| (r.as_str(), i)))
            .collect();
        let mut pairs = BTreeSet::new();
        for (ti, class) in tc.iter().enumerate() {
            for r in class {
                for a in &self.forward[r].body {
                    pairs.insert((s_of[a.pred.as_str()], ti));
                }
            }
        }
        pairs.into_iter().collect()
    }

    pub fn to_spec_string(&self) -> String {
        let mut s = String::new();
        for st in self.serial_steps() {
            s.push_str(&st.to_string());
            s.push('\n');
        }
        s
    }
}

/// Parses transformation steps, one per line.
pub fn parse_steps(text: &str) -> Result<Vec<Step>> {
    let mut steps = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let no = i + 1;
        let toks = crate::relmodel::lex(line, no)?;
        if toks.is_empty() {
            continue;
        }
        let mut c = Cursor::new(toks, no, line.chars().count() + 1);
        if c.keyword("decompose") {
            let source = c.ident()?;
            if !c.keyword("into") {
                return Err(c.err("expected 'into'"));
            }
            let mut components = Vec::new();
            loop {
                let name = c.ident()?;
                c.expect("(")?;
                let attrs = c.ident_list(")")?;
                components.push((name, attrs));
                if !c.eat(";") || c.done() {
                    break;
                }
            }
            steps.push(Step::Decompose(DecompositionSpec { source, components }));
        } else if c.keyword("compose") {
            let mut parts = vec![c.ident()?];
            while c.eat(",") {
                parts.push(c.ident()?);
            }
            if !c.keyword("into") {
                return Err(c.err("expected 'into'"));
            }
            let into = c.ident()?;
            steps.push(Step::Compose { parts, into });
        } else if c.keyword("rename") {
            let relation = c.ident()?;
            c.expect(".")?;
            let from = c.ident()?;
            if !c.keyword("to") {
                return Err(c.err("expected 'to'"));
            }
            let to = c.ident()?;
            steps.push(Step::Rename { relation, from, to });
        } else {
            return Err(c.err("expected 'decompose', 'compose' or 'rename'"));
        }
        if !c.done() {
            return Err(c.err("trailing input"));
        }
    }
    Ok(steps)
}

#[derive(Clone, Debug, Serialize)]
pub struct BijectionReport {
    pub checked: usize,
    pub random_trials: usize,
    pub failures: Vec<String>,
    /// True when nothing was checked.
    pub no_evidence: bool,
}

impl BijectionReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Round-trips the given instances and `trials` random ones in both
/// directions.
pub fn verify_bijection(
    tau: &Transformation,
    instances: &[Instance],
    trials: usize,
    seed: u64,
) -> BijectionReport {
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let check = |inst: &Instance, t: &Transformation, label: &str, failures: &mut Vec<String>| {
        match t.apply(inst, Direction::Forward).and_then(|j| t.apply(&j, Direction::Inverse)) {
            Ok(back) if back == *inst => {}
            Ok(back) => failures.push(format!(
                "{}: round trip changed the instance ({} tuples in, {} out)",
                label,
                inst.len(),
                back.len()
            )),
            Err(e) => failures.push(format!("{}: {}", label, e)),
        }
    };
    let inv = tau.inverse();
    for (i, inst) in instances.iter().enumerate() {
        check(inst, tau, &format!("instance {}", i), &mut failures);
        checked += 1;
    }
    for k in 0..trials {
        let size = rng.gen_range(1..=40);
        let i = random_instance(&tau.source, size, rng.gen());
        check(&i, tau, &format!("random source instance {}", k), &mut failures);
        let j = random_instance(&tau.target, size, rng.gen());
        check(&j, &inv, &format!("random target instance {}", k), &mut failures);
        checked += 2;
    }
    BijectionReport {
        checked,
        random_trials: trials,
        no_evidence: checked == 0,
        failures,
    }
}

/// A random instance satisfying the schema's FDs and INDs. Each inclusion
/// class gets rows over the union of its attributes, which are projected
/// onto its relations; rows breaking an FD are skipped and rows breaking a
/// one-way IND are dropped until none is left. Values are drawn per
/// attribute name from pools of about `rows` constants, so relations
/// sharing an attribute name join.
pub fn random_instance(schema: &Schema, rows: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = inclusion_classes(schema);
    let pool = rows.max(2);
    let mut class_rows: Vec<(Vec<String>, Vec<Vec<Sym>>)> = Vec::new();
    for class in &classes {
        let mut attrs: Vec<String> = Vec::new();
        for r in class {
            for a in &schema.relation(r).unwrap().attrs {
                if !attrs.contains(a) {
                    attrs.push(a.clone());
                }
            }
        }
        let fds: Vec<(Vec<usize>, Vec<usize>)> = class
            .iter()
            .flat_map(|r| schema.fds_of(r))
            .map(|f| {
                (
                    f.lhs.iter().map(|a| attrs.iter().position(|x| x == a).unwrap()).collect(),
                    f.rhs.iter().map(|a| attrs.iter().position(|x| x == a).unwrap()).collect(),
                )
            })
            .collect();
        let mut kept: Vec<Vec<Sym>> = Vec::new();
        let n = rng.gen_range(0..=rows);
        for _ in 0..n {
            let row: Vec<Sym> = attrs
                .iter()
                .map(|a| Sym::new(&format!("{}{}", a, rng.gen_range(0..pool))))
                .collect();
            let ok = kept.iter().all(|k| {
                fds.iter().all(|(l, r)| {
                    !l.iter().all(|&i| k[i] == row[i]) || r.iter().all(|&i| k[i] == row[i])
                })
            });
            if ok && !kept.contains(&row) {
                kept.push(row);
            }
        }
        class_rows.push((attrs, kept));
    }
    let class_of: HashMap<&str, usize> = classes
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |r| (r.as_str(), i)))
        .collect();
    let project = |rows: &[(Vec<String>, Vec<Vec<Sym>>)], rel: &str, attrs: &[String]| -> HashSet<Vec<Sym>> {
        let (cattrs, crow) = &rows[class_of[rel]];
        let pos: Vec<usize> = attrs.iter().map(|a| cattrs.iter().position(|x| x == a).unwrap()).collect();
        crow.iter().map(|r| pos.iter().map(|&i| r[i]).collect()).collect()
    };
    loop {
        let mut changed = false;
        for ind in schema.inds().iter().filter(|i| !i.equality) {
            let allowed = project(&class_rows, &ind.rhs.relation, &ind.rhs.attrs);
            let ci = class_of[ind.lhs.relation.as_str()];
            let cattrs = class_rows[ci].0.clone();
            let pos: Vec<usize> = ind
                .lhs
                .attrs
                .iter()
                .map(|a| cattrs.iter().position(|x| x == a).unwrap())
                .collect();
            let before = class_rows[ci].1.len();
            class_rows[ci]
                .1
                .retain(|r| allowed.contains(&pos.iter().map(|&i| r[i]).collect::<Vec<_>>()));
            changed |= class_rows[ci].1.len() != before;
        }
        if !changed {
            break;
        }
    }
    let mut facts = Vec::new();
    for r in schema.relations() {
        for t in project(&class_rows, &r.name, &r.attrs) {
            facts.push((r.name.clone(), t));
        }
    }
    facts.shuffle(&mut rng);
    Instance::new(Arc::new(schema.clone()), facts).expect("generated instance satisfies its schema")
}
