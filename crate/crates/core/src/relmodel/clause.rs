use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use super::symbol::{is_bare_ident, Sym};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(Sym),
    Const(Sym),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Sym::new(name))
    }

    pub fn cst(name: &str) -> Term {
        Term::Const(Sym::new(name))
    }

    pub fn is_var(self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn as_var(self) -> Option<Sym> {
        match self {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{}", v),
            Term::Const(c) => {
                let s = c.as_str();
                let starts_upper = s.chars().next().is_some_and(|ch| ch.is_uppercase() || ch == '_');
                if is_bare_ident(s) && !starts_upper {
                    f.write_str(s)
                } else {
                    write!(f, "'{}'", s.replace('\\', "\\\\").replace('\'', "\\'"))
                }
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: Sym,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: impl Into<Sym>, args: Vec<Term>) -> Atom {
        Atom {
            pred: pred.into(),
            args,
        }
    }

    /// Ground atom from constant names.
    pub fn ground(pred: &str, consts: &[&str]) -> Atom {
        Atom::new(pred, consts.iter().map(|c| Term::cst(c)).collect())
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(|t| !t.is_var())
    }

    pub fn vars(&self) -> impl Iterator<Item = Sym> + '_ {
        self.args.iter().filter_map(|t| t.as_var())
    }

    /// Constant values of a ground atom.
    pub fn consts(&self) -> Option<Vec<Sym>> {
        self.args
            .iter()
            .map(|t| match t {
                Term::Const(c) => Some(*c),
                Term::Var(_) => None,
            })
            .collect()
    }

    pub fn apply(&self, theta: &HashMap<Sym, Term>) -> Atom {
        Atom {
            pred: self.pred,
            args: self
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => theta.get(v).copied().unwrap_or(*t),
                    c => *c,
                })
                .collect(),
        }
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.pred)?;
        for (i, a) in self.args.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", a)?;
        }
        f.write_str(")")
    }
}

/// A definite Horn clause whose body order and duplicates are significant.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OrderedClause {
    pub head: Atom,
    pub body: Vec<Atom>,
}

impl OrderedClause {
    pub fn new(head: Atom, body: Vec<Atom>) -> OrderedClause {
        OrderedClause { head, body }
    }

    pub fn len(&self) -> usize {
        self.body.len()
    }

    pub fn is_empty(&self) -> bool {
        self.body.is_empty()
    }

    /// Distinct variables in order of first appearance, head first.
    pub fn vars(&self) -> Vec<Sym> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for a in std::iter::once(&self.head).chain(&self.body) {
            for v in a.vars() {
                if seen.insert(v) {
                    out.push(v);
                }
            }
        }
        out
    }

    pub fn body_vars(&self) -> HashSet<Sym> {
        self.body.iter().flat_map(|a| a.vars()).collect()
    }

    /// Head variables that do not occur in the body.
    pub fn unbound_head_vars(&self) -> Vec<Sym> {
        let bv = self.body_vars();
        let mut out: Vec<Sym> = self.head.vars().filter(|v| !bv.contains(v)).collect();
        out.dedup();
        out
    }

    pub fn apply(&self, theta: &HashMap<Sym, Term>) -> OrderedClause {
        OrderedClause {
            head: self.head.apply(theta),
            body: self.body.iter().map(|a| a.apply(theta)).collect(),
        }
    }

    /// Rename variables to V1, V2, ... in order of first appearance.
    pub fn canonical(&self) -> OrderedClause {
        let theta: HashMap<Sym, Term> = self
            .vars()
            .into_iter()
            .enumerate()
            .map(|(i, v)| (v, Term::Var(Sym::new(&format!("V{}", i + 1)))))
            .collect();
        self.apply(&theta)
    }

    /// Rename variables apart from every name in `avoid`.
    pub fn rename_apart(&self, avoid: &HashSet<Sym>, gen: &mut VarGen) -> OrderedClause {
        let theta: HashMap<Sym, Term> = self
            .vars()
            .into_iter()
            .map(|v| (v, Term::Var(gen.fresh_avoiding(avoid))))
            .collect();
        self.apply(&theta)
    }

    /// Body literals reachable from the head through shared variables.
    pub fn head_connected(&self) -> Vec<bool> {
        self.head_connected_among(&vec![true; self.body.len()])
    }

    /// Head-connectedness restricted to the literals marked alive. Literals
    /// link through shared variables or shared constants.
    pub fn head_connected_among(&self, alive: &[bool]) -> Vec<bool> {
        let mut reach: HashSet<Term> = self.head.args.iter().copied().collect();
        let mut conn = vec![false; self.body.len()];
        loop {
            let mut changed = false;
            for (i, a) in self.body.iter().enumerate() {
                if alive[i] && !conn[i] && a.args.iter().any(|t| reach.contains(t)) {
                    conn[i] = true;
                    reach.extend(a.args.iter().copied());
                    changed = true;
                }
            }
            if !changed {
                return conn;
            }
        }
    }

    /// Drop body literals that are not head-connected.
    pub fn retain_head_connected(&self) -> OrderedClause {
        let conn = self.head_connected();
        OrderedClause {
            head: self.head.clone(),
            body: self
                .body
                .iter()
                .zip(conn)
                .filter(|(_, c)| *c)
                .map(|(a, _)| a.clone())
                .collect(),
        }
    }

    pub fn body_set(&self) -> BTreeSet<&Atom> {
        self.body.iter().collect()
    }
}

impl fmt::Debug for OrderedClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for OrderedClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} :- ", self.head)?;
        if self.body.is_empty() {
            return f.write_str("true.");
        }
        for (i, a) in self.body.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", a)?;
        }
        f.write_str(".")
    }
}

/// A set of clauses sharing one head predicate.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct HornDefinition {
    pub clauses: Vec<OrderedClause>,
}

impl HornDefinition {
    pub fn new(clauses: Vec<OrderedClause>) -> crate::Result<HornDefinition> {
        if let Some(first) = clauses.first() {
            for c in &clauses[1..] {
                if c.head.pred != first.head.pred || c.head.arity() != first.head.arity() {
                    return Err(crate::Error::Invalid(format!(
                        "definition mixes heads {} and {}",
                        first.head, c.head
                    )));
                }
            }
        }
        Ok(HornDefinition { clauses })
    }

    pub fn single(c: OrderedClause) -> HornDefinition {
        HornDefinition { clauses: vec![c] }
    }

    pub fn head_pred(&self) -> Option<(Sym, usize)> {
        self.clauses.first().map(|c| (c.head.pred, c.head.arity()))
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }
}

impl fmt::Debug for HornDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for HornDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            writeln!(f, "{}", c)?;
        }
        Ok(())
    }
}

/// Fresh variable names V1, V2, ... skipping names already in use.
#[derive(Debug, Clone, Default)]
pub struct VarGen {
    next: usize,
}

impl VarGen {
    pub fn new() -> VarGen {
        VarGen { next: 0 }
    }

    pub fn starting_at(n: usize) -> VarGen {
        VarGen { next: n }
    }

    pub fn fresh(&mut self) -> Sym {
        self.next += 1;
        Sym::new(&format!("V{}", self.next))
    }

    pub fn fresh_avoiding(&mut self, avoid: &HashSet<Sym>) -> Sym {
        loop {
            let v = self.fresh();
            if !avoid.contains(&v) {
                return v;
            }
        }
    }
}

impl serde::Serialize for OrderedClause {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl serde::Serialize for HornDefinition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.clauses.len()))?;
        for c in &self.clauses {
            seq.serialize_element(c)?;
        }
        seq.end()
    }
}
