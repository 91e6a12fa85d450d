use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RelationDecl {
    pub name: String,
    pub attrs: Vec<String>,
}

impl RelationDecl {
    pub fn new(name: &str, attrs: &[&str]) -> RelationDecl {
        RelationDecl {
            name: name.to_string(),
            attrs: attrs.iter().map(|a| a.to_string()).collect(),
        }
    }

    pub fn arity(&self) -> usize {
        self.attrs.len()
    }

    pub fn position(&self, attr: &str) -> Option<usize> {
        self.attrs.iter().position(|a| a == attr)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Fd {
    pub relation: String,
    pub lhs: BTreeSet<String>,
    pub rhs: BTreeSet<String>,
}

impl Fd {
    pub fn new(relation: &str, lhs: &[&str], rhs: &[&str]) -> Fd {
        Fd {
            relation: relation.to_string(),
            lhs: lhs.iter().map(|s| s.to_string()).collect(),
            rhs: rhs.iter().map(|s| s.to_string()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct IndSide {
    pub relation: String,
    pub attrs: Vec<String>,
}

impl IndSide {
    pub fn new(relation: &str, attrs: &[&str]) -> IndSide {
        IndSide {
            relation: relation.to_string(),
            attrs: attrs.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// `lhs ⊆ rhs`, or `lhs = rhs` when `equality` is set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Ind {
    pub lhs: IndSide,
    pub rhs: IndSide,
    pub equality: bool,
}

impl Ind {
    pub fn eq(lhs: IndSide, rhs: IndSide) -> Ind {
        Ind {
            lhs,
            rhs,
            equality: true,
        }
    }

    pub fn sub(lhs: IndSide, rhs: IndSide) -> Ind {
        Ind {
            lhs,
            rhs,
            equality: false,
        }
    }

    /// Same constraint regardless of which side is written first.
    pub fn normalized(&self) -> Ind {
        if self.equality && self.rhs < self.lhs {
            Ind::eq(self.rhs.clone(), self.lhs.clone())
        } else {
            self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Schema {
    relations: Vec<RelationDecl>,
    fds: Vec<Fd>,
    inds: Vec<Ind>,
    #[serde(skip)]
    by_name: HashMap<String, usize>,
}

impl Schema {
    pub fn new(relations: Vec<RelationDecl>, fds: Vec<Fd>, inds: Vec<Ind>) -> Result<Schema> {
        if relations.is_empty() {
            return Err(Error::Schema("empty schema".into()));
        }
        let mut by_name = HashMap::new();
        for (i, r) in relations.iter().enumerate() {
            if r.attrs.is_empty() {
                return Err(Error::Schema(format!("relation {} has no attributes", r.name)));
            }
            let mut seen = BTreeSet::new();
            for a in &r.attrs {
                if a.is_empty() || !seen.insert(a) {
                    return Err(Error::Schema(format!(
                        "relation {} repeats attribute {}",
                        r.name, a
                    )));
                }
            }
            if by_name.insert(r.name.clone(), i).is_some() {
                return Err(Error::Schema(format!("duplicate relation {}", r.name)));
            }
        }
        let s = Schema {
            relations,
            fds: Vec::new(),
            inds: Vec::new(),
            by_name,
        };
        for fd in &fds {
            if fd.lhs.is_empty() || fd.rhs.is_empty() {
                return Err(Error::Schema(format!("fd on {} has an empty side", fd.relation)));
            }
            let r = s.require(&fd.relation)?;
            for a in fd.lhs.iter().chain(&fd.rhs) {
                if r.position(a).is_none() {
                    return Err(Error::Schema(format!(
                        "unknown attribute {} in fd on {}",
                        a, fd.relation
                    )));
                }
            }
        }
        for ind in &inds {
            if ind.lhs.attrs.len() != ind.rhs.attrs.len() || ind.lhs.attrs.is_empty() {
                return Err(Error::Schema(format!(
                    "ind {}[..] / {}[..] sides differ in length",
                    ind.lhs.relation, ind.rhs.relation
                )));
            }
            for side in [&ind.lhs, &ind.rhs] {
                let r = s.require(&side.relation)?;
                for a in &side.attrs {
                    if r.position(a).is_none() {
                        return Err(Error::Schema(format!(
                            "unknown attribute {} in ind on {}",
                            a, side.relation
                        )));
                    }
                }
            }
        }
        let mut fds_d: Vec<Fd> = Vec::new();
        for fd in fds {
            if !fds_d.contains(&fd) {
                fds_d.push(fd);
            }
        }
        let mut inds_d: Vec<Ind> = Vec::new();
        for ind in inds {
            if !inds_d.iter().any(|x| x.normalized() == ind.normalized()) {
                inds_d.push(ind);
            }
        }
        Ok(Schema {
            fds: fds_d,
            inds: inds_d,
            ..s
        })
    }

    pub fn relations(&self) -> &[RelationDecl] {
        &self.relations
    }

    pub fn fds(&self) -> &[Fd] {
        &self.fds
    }

    pub fn inds(&self) -> &[Ind] {
        &self.inds
    }

    pub fn equality_inds(&self) -> impl Iterator<Item = &Ind> {
        self.inds.iter().filter(|i| i.equality)
    }

    pub fn relation(&self, name: &str) -> Option<&RelationDecl> {
        self.by_name.get(name).map(|&i| &self.relations[i])
    }

    pub fn require(&self, name: &str) -> Result<&RelationDecl> {
        self.relation(name)
            .ok_or_else(|| Error::Schema(format!("unknown relation {}", name)))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.by_name.contains_key(name)
    }

    pub fn max_arity(&self) -> usize {
        self.relations.iter().map(|r| r.arity()).max().unwrap_or(0)
    }

    pub fn fds_of<'a>(&'a self, rel: &'a str) -> impl Iterator<Item = &'a Fd> + 'a {
        self.fds.iter().filter(move |f| f.relation == rel)
    }

    /// Equality INDs touching `rel`, oriented so that `rel` is on the left.
    pub fn eq_partners(&self, rel: &str) -> Vec<(Vec<usize>, String, Vec<usize>)> {
        let mut out = Vec::new();
        for ind in self.equality_inds() {
            for (a, b) in [(&ind.lhs, &ind.rhs), (&ind.rhs, &ind.lhs)] {
                if a.relation == rel {
                    let ra = self.relation(&a.relation).unwrap();
                    let rb = self.relation(&b.relation).unwrap();
                    let pa = a.attrs.iter().map(|x| ra.position(x).unwrap()).collect();
                    let pb = b.attrs.iter().map(|x| rb.position(x).unwrap()).collect();
                    out.push((pa, b.relation.clone(), pb));
                }
            }
        }
        out
    }
}

/// Attribute closure of `start` under FDs given as (lhs, rhs) pairs.
pub fn attr_closure(start: &BTreeSet<String>, fds: &[(BTreeSet<String>, BTreeSet<String>)]) -> BTreeSet<String> {
    let mut cl = start.clone();
    loop {
        let before = cl.len();
        for (l, r) in fds {
            if l.is_subset(&cl) {
                cl.extend(r.iter().cloned());
            }
        }
        if cl.len() == before {
            return cl;
        }
    }
}

/// Nontrivial FDs implied by the schema, one attribute on the right and a
/// left side with no redundant attribute.
pub fn fd_closure(schema: &Schema) -> BTreeSet<Fd> {
    let mut out = BTreeSet::new();
    for r in schema.relations() {
        let fds: Vec<(BTreeSet<String>, BTreeSet<String>)> = schema
            .fds_of(&r.name)
            .map(|f| (f.lhs.clone(), f.rhs.clone()))
            .collect();
        if fds.is_empty() {
            continue;
        }
        let n = r.arity();
        let mut closures: BTreeMap<u64, BTreeSet<String>> = BTreeMap::new();
        for mask in 1u64..(1u64 << n) {
            let x: BTreeSet<String> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| r.attrs[i].clone())
                .collect();
            closures.insert(mask, attr_closure(&x, &fds));
        }
        for (&mask, cl) in &closures {
            for (j, a) in r.attrs.iter().enumerate() {
                if mask & (1 << j) != 0 || !cl.contains(a) {
                    continue;
                }
                // skip if a proper subset already determines a
                let reduced = (0..n).filter(|i| mask & (1 << i) != 0).all(|i| {
                    let sub = mask & !(1 << i);
                    sub == 0 || !closures[&sub].contains(a)
                });
                if reduced {
                    out.insert(Fd {
                        relation: r.name.clone(),
                        lhs: (0..n)
                            .filter(|i| mask & (1 << i) != 0)
                            .map(|i| r.attrs[i].clone())
                            .collect(),
                        rhs: std::iter::once(a.clone()).collect(),
                    });
                }
            }
        }
    }
    out
}

/// FD closure with relation names dropped, for comparing schemas whose
/// attributes are matched by name.
pub fn fd_signature(fds: &BTreeSet<Fd>) -> BTreeSet<(BTreeSet<String>, BTreeSet<String>)> {
    fds.iter().map(|f| (f.lhs.clone(), f.rhs.clone())).collect()
}

/// Connected components of the equality-IND graph, each sorted by name,
/// listed in order of their first relation's declaration.
pub fn inclusion_classes(schema: &Schema) -> Vec<Vec<String>> {
    let n = schema.relations().len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    for ind in schema.equality_inds() {
        let a = schema.by_name[&ind.lhs.relation];
        let b = schema.by_name[&ind.rhs.relation];
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups
            .entry(r)
            .or_default()
            .push(schema.relations()[i].name.clone());
    }
    groups
        .into_values()
        .map(|mut g| {
            g.sort();
            g
        })
        .collect()
}

/// Map from relation name to the index of its class in [`inclusion_classes`].
pub fn class_index(schema: &Schema) -> HashMap<String, usize> {
    inclusion_classes(schema)
        .into_iter()
        .enumerate()
        .flat_map(|(i, c)| c.into_iter().map(move |r| (r, i)))
        .collect()
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.relations {
            writeln!(f, "relation {}({})", r.name, r.attrs.join(","))?;
        }
        for fd in &self.fds {
            writeln!(
                f,
                "fd {}: {} -> {}",
                fd.relation,
                fd.lhs.iter().cloned().collect::<Vec<_>>().join(","),
                fd.rhs.iter().cloned().collect::<Vec<_>>().join(",")
            )?;
        }
        for ind in &self.inds {
            writeln!(
                f,
                "ind {}[{}] {} {}[{}]",
                ind.lhs.relation,
                ind.lhs.attrs.join(","),
                if ind.equality { "=" } else { "<=" },
                ind.rhs.relation,
                ind.rhs.attrs.join(",")
            )?;
        }
        Ok(())
    }
}
