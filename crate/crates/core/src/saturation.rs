//! Bottom clauses.
//!
//! Three constructions share one breadth-first core: the depth-bounded one,
//! the maxvars one that chases equality INDs as tuples are added, and the
//! ground saturation used by Golem. Literals are ordered by iteration, then
//! by the rank of their inclusion class, so that bottom clauses over
//! equivalent instances of different schemas list their classes in the same
//! order.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::relmodel::{
    cmp_tuple, inclusion_classes, Atom, Instance, OrderedClause, Schema, Sym, Term, Tuple,
};

/// Constant to variable map, built as a construction runs.
#[derive(Clone, Debug, Default)]
pub struct VarMap {
    to_var: HashMap<Sym, Sym>,
    to_const: HashMap<Sym, Sym>,
}

impl VarMap {
    pub fn var(&self, c: Sym) -> Option<Sym> {
        self.to_var.get(&c).copied()
    }

    pub fn constant(&self, v: Sym) -> Option<Sym> {
        self.to_const.get(&v).copied()
    }

    pub fn len(&self) -> usize {
        self.to_var.len()
    }

    pub fn is_empty(&self) -> bool {
        self.to_var.is_empty()
    }

    fn insert(&mut self, c: Sym, v: Sym) {
        self.to_var.insert(c, v);
        self.to_const.insert(v, c);
    }

    /// Substitution from variables back to constants.
    pub fn inverse(&self) -> HashMap<Sym, Term> {
        self.to_const.iter().map(|(v, c)| (*v, Term::Const(*c))).collect()
    }
}

#[derive(Clone, Debug)]
pub struct BottomClause {
    pub clause: OrderedClause,
    /// Source tuple of each body literal.
    pub provenance: Vec<(Sym, Tuple)>,
    pub varmap: VarMap,
    /// d(X): 0 for head variables, else one more than the least depth of a
    /// variable sharing a literal with X.
    pub depth: HashMap<Sym, usize>,
    /// Iteration in which each body literal was added.
    pub iteration: Vec<usize>,
}

impl BottomClause {
    pub fn len(&self) -> usize {
        self.clause.body.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clause.body.is_empty()
    }

    pub fn max_depth(&self) -> usize {
        self.depth.values().copied().max().unwrap_or(0)
    }
}

/// Rank of each inclusion class, from the natural join of its relations.
#[derive(Clone, Debug, Serialize)]
pub struct ClassOrder {
    /// Classes from first to last rank; each lists its relations by name.
    pub classes: Vec<Vec<String>>,
    rank: HashMap<String, usize>,
}

impl ClassOrder {
    pub fn rank_of(&self, rel: &str) -> Option<usize> {
        self.rank.get(rel).copied()
    }

    /// Ranks by schema declaration order only, for when no instance is at hand.
    pub fn declared(schema: &Schema) -> ClassOrder {
        ClassOrder::from_classes(inclusion_classes(schema))
    }

    fn from_classes(classes: Vec<Vec<String>>) -> ClassOrder {
        let rank = classes
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.iter().map(move |r| (r.clone(), i)))
            .collect();
        ClassOrder { classes, rank }
    }

}

/// Natural join of a class: attribute names (sorted) and rows.
fn class_join(inst: &Instance, class: &[String]) -> (Vec<String>, Vec<Vec<Sym>>) {
    let schema = inst.schema();
    let mut header: Vec<String> = Vec::new();
    let mut rows: Vec<Vec<Sym>> = vec![Vec::new()];
    for rel in class {
        let decl = schema.relation(rel).unwrap();
        let shared: Vec<(usize, usize)> = decl
            .attrs
            .iter()
            .enumerate()
            .filter_map(|(i, a)| header.iter().position(|h| h == a).map(|j| (j, i)))
            .collect();
        let fresh: Vec<usize> = (0..decl.arity())
            .filter(|i| !header.contains(&decl.attrs[*i]))
            .collect();
        let mut by_key: HashMap<Vec<Sym>, Vec<&Tuple>> = HashMap::new();
        for t in inst.tuples(rel) {
            by_key
                .entry(shared.iter().map(|&(_, i)| t[i]).collect())
                .or_default()
                .push(t);
        }
        let mut next = Vec::new();
        for row in &rows {
            let key: Vec<Sym> = shared.iter().map(|&(j, _)| row[j]).collect();
            if let Some(ts) = by_key.get(&key) {
                for t in ts {
                    let mut r = row.clone();
                    r.extend(fresh.iter().map(|&i| t[i]));
                    next.push(r);
                }
            }
        }
        header.extend(fresh.iter().map(|&i| decl.attrs[i].clone()));
        rows = next;
    }
    let mut perm: Vec<usize> = (0..header.len()).collect();
    perm.sort_by(|&a, &b| header[a].cmp(&header[b]));
    let sorted_header = perm.iter().map(|&i| header[i].clone()).collect();
    let sorted_rows = rows
        .into_iter()
        .map(|r| perm.iter().map(|&i| r[i]).collect())
        .collect();
    (sorted_header, sorted_rows)
}

fn serialize_rows(rows: &[Vec<Sym>]) -> String {
    let mut lines: Vec<String> = rows
        .iter()
        .map(|r| r.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("\t"))
        .collect();
    lines.sort();
    lines.join("\n")
}

/// Orders inclusion classes by the serialized natural join of each class,
/// breaking ties by the sorted attribute names of the class.
pub fn order_inclusion_classes(schema: &Schema, instance: &Instance) -> ClassOrder {
    let mut keyed: Vec<(String, Vec<String>, Vec<String>)> = inclusion_classes(schema)
        .into_iter()
        .map(|class| {
            let (_, rows) = class_join(instance, &class);
            let mut attrs: Vec<String> = class
                .iter()
                .flat_map(|r| schema.relation(r).unwrap().attrs.clone())
                .collect();
            attrs.sort();
            (serialize_rows(&rows), attrs, class)
        })
        .collect();
    keyed.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    ClassOrder::from_classes(keyed.into_iter().map(|(_, _, c)| c).collect())
}

/// Groups of body literals that the chase adds together: literals of one
/// inclusion class whose terms agree on the positions of an equality IND
/// between their relations, closed transitively. Groups come in order of
/// their first literal.
pub fn removal_groups(clause: &OrderedClause, schema: &Schema) -> Vec<Vec<usize>> {
    let n = clause.body.len();
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
    let mut partners: HashMap<Sym, Vec<(Vec<usize>, Sym, Vec<usize>)>> = HashMap::new();
    for lit in &clause.body {
        partners.entry(lit.pred).or_insert_with(|| {
            schema
                .eq_partners(lit.pred.as_str())
                .into_iter()
                .map(|(a, s, b)| (a, Sym::new(&s), b))
                .collect()
        });
    }
    for i in 0..n {
        let li = &clause.body[i];
        for (pa, s, pb) in &partners[&li.pred] {
            for j in 0..n {
                let lj = &clause.body[j];
                if i == j || lj.pred != *s || lj.arity() <= pb.iter().copied().max().unwrap_or(0) {
                    continue;
                }
                if pa.iter().zip(pb).all(|(&x, &y)| li.args[x] == lj.args[y]) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut first: HashMap<usize, usize> = HashMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        let f = *first.entry(r).or_insert(i);
        groups.entry(f).or_default().push(i);
    }
    groups.into_values().collect()
}

#[derive(Clone, Copy)]
enum Stop {
    Depth(usize),
    Vars(usize),
}

/// Breadth-first collection of tuples linked to the seed's constants.
/// Returns (relation, tuple id, iteration) in the order found.
fn collect(
    e: &Atom,
    inst: &Instance,
    stop: Stop,
    chase: bool,
) -> (Vec<(Sym, u32, usize)>, HashSet<Sym>) {
    let mut known: HashSet<Sym> = HashSet::new();
    let mut frontier: Vec<Sym> = Vec::new();
    for t in &e.args {
        if let Term::Const(c) = t {
            if known.insert(*c) {
                frontier.push(*c);
            }
        }
    }
    let mut added: HashSet<(Sym, u32)> = HashSet::new();
    let mut out = Vec::new();
    let partners: HashMap<Sym, Vec<(Vec<usize>, Sym, Vec<usize>)>> = inst
        .relation_syms()
        .iter()
        .map(|&r| {
            let p = if chase {
                inst.schema()
                    .eq_partners(r.as_str())
                    .into_iter()
                    .map(|(a, s, b)| (a, Sym::new(&s), b))
                    .collect()
            } else {
                Vec::new()
            };
            (r, p)
        })
        .collect();
    let mut iteration = 0;
    loop {
        match stop {
            Stop::Depth(d) if iteration >= d => break,
            Stop::Vars(m) if iteration > 0 && known.len() >= m => break,
            _ => {}
        }
        if frontier.is_empty() {
            break;
        }
        iteration += 1;
        let mut cands: Vec<(Sym, u32)> = Vec::new();
        for c in &frontier {
            for &(r, id) in inst.occurrences(*c) {
                if r != e.pred && !added.contains(&(r, id)) {
                    cands.push((r, id));
                }
            }
        }
        cands.sort_by(|a, b| a.0.cmp_str(b.0).then(a.1.cmp(&b.1)));
        cands.dedup();
        let mut next = Vec::new();
        let mut queue: VecDeque<(Sym, u32)> = cands.into_iter().collect();
        while let Some((r, id)) = queue.pop_front() {
            if !added.insert((r, id)) {
                continue;
            }
            out.push((r, id, iteration));
            let table = inst.table(r).unwrap();
            let t = table.get(id);
            for c in t {
                if known.insert(*c) {
                    next.push(*c);
                }
            }
            for (pa, s, pb) in &partners[&r] {
                let st = inst.table(*s).unwrap();
                for &sid in st.lookup(pb[0], t[pa[0]]) {
                    let u = st.get(sid);
                    if pa.iter().zip(pb).all(|(&x, &y)| t[x] == u[y]) && !added.contains(&(*s, sid)) {
                        queue.push_back((*s, sid));
                    }
                }
            }
        }
        frontier = next;
    }
    (out, known)
}

fn variabilize(
    e: &Atom,
    inst: &Instance,
    found: Vec<(Sym, u32, usize)>,
    order: &ClassOrder,
    grouped: bool,
) -> BottomClause {
    let schema = inst.schema();
    let lits: Vec<(Sym, Tuple, usize)> = found
        .into_iter()
        .map(|(r, id, it)| (r, inst.table(r).unwrap().get(id).clone(), it))
        .collect();
    // Constants are indexed in discovery order. Within an iteration, groups
    // (chase groups, or single literals) sort by class rank, then by the
    // earliest known constant they mention, then by content. New constants
    // of a chase group are indexed by attribute name, so the order does not
    // depend on how the class is split into relations.
    let mut index: HashMap<Sym, usize> = HashMap::new();
    for t in &e.args {
        if let Term::Const(c) = t {
            let n = index.len();
            index.entry(*c).or_insert(n);
        }
    }
    let last = lits.iter().map(|l| l.2).max().unwrap_or(0);
    let mut ordered: Vec<(Sym, Tuple, usize)> = Vec::with_capacity(lits.len());
    for it in 1..=last {
        let layer: Vec<(Sym, Tuple, usize)> = lits.iter().filter(|l| l.2 == it).cloned().collect();
        let groups: Vec<Vec<usize>> = if grouped {
            ground_groups(&layer, schema)
        } else {
            (0..layer.len()).map(|i| vec![i]).collect()
        };
        let mut keyed: Vec<(usize, usize, String, Vec<usize>)> = groups
            .into_iter()
            .map(|mut g| {
                g.sort_by(|&a, &b| {
                    layer[a].0.cmp_str(layer[b].0).then_with(|| cmp_tuple(&layer[a].1, &layer[b].1))
                });
                let rank = order.rank_of(layer[g[0]].0.as_str()).unwrap_or(usize::MAX);
                let first = g
                    .iter()
                    .flat_map(|&i| layer[i].1.iter())
                    .filter_map(|c| index.get(c).copied())
                    .min()
                    .unwrap_or(usize::MAX);
                let key = if grouped {
                    entity_key(&layer, &g, schema)
                } else {
                    let (r, t, _) = &layer[g[0]];
                    format!("{}({})", r, t.iter().map(|c| c.as_str()).collect::<Vec<_>>().join("\t"))
                };
                (rank, first, key, g)
            })
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then_with(|| a.2.cmp(&b.2)));
        for (_, _, _, g) in keyed {
            let mut fresh: Vec<(String, Sym)> = Vec::new();
            for &i in &g {
                let (r, t, _) = &layer[i];
                let decl = schema.relation(r.as_str()).unwrap();
                for (a, c) in decl.attrs.iter().zip(t) {
                    if !index.contains_key(c) {
                        fresh.push((if grouped { a.clone() } else { String::new() }, *c));
                    }
                }
            }
            if grouped {
                fresh.sort_by(|x, y| x.0.cmp(&y.0).then_with(|| x.1.cmp_str(y.1)));
            }
            for (_, c) in fresh {
                let n = index.len();
                index.entry(c).or_insert(n);
            }
            ordered.extend(g.iter().map(|&i| layer[i].clone()));
        }
    }

    let mut varmap = VarMap::default();
    let mut n = 0;
    let mut var = |c: Sym, vm: &mut VarMap| -> Term {
        if let Some(v) = vm.var(c) {
            return Term::Var(v);
        }
        n += 1;
        let v = Sym::new(&format!("V{}", n));
        vm.insert(c, v);
        Term::Var(v)
    };
    let head = Atom::new(
        e.pred,
        e.args
            .iter()
            .map(|t| match t {
                Term::Const(c) => var(*c, &mut varmap),
                v => *v,
            })
            .collect(),
    );
    let mut body = Vec::with_capacity(ordered.len());
    let mut provenance = Vec::with_capacity(ordered.len());
    let mut iteration = Vec::with_capacity(ordered.len());
    for (r, t, it) in ordered {
        body.push(Atom::new(r, t.iter().map(|c| var(*c, &mut varmap)).collect()));
        provenance.push((r, t));
        iteration.push(it);
    }
    let clause = OrderedClause::new(head, body);
    let depth = variable_depths(&clause);
    BottomClause {
        clause,
        provenance,
        varmap,
        depth,
        iteration,
    }
}

/// Chase groups of ground literals.
fn ground_groups(lits: &[(Sym, Tuple, usize)], schema: &Schema) -> Vec<Vec<usize>> {
    let atoms: Vec<Atom> = lits
        .iter()
        .map(|(r, t, _)| Atom::new(*r, t.iter().map(|c| Term::Const(*c)).collect()))
        .collect();
    let c = OrderedClause::new(Atom::new(Sym::new("\u{1}"), vec![]), atoms);
    removal_groups(&c, schema)
}

/// The sorted (attribute, value) pairs of a chase group. The same on every
/// schema holding the same class rows.
fn entity_key(lits: &[(Sym, Tuple, usize)], group: &[usize], schema: &Schema) -> String {
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    for &i in group {
        let (r, t, _) = &lits[i];
        let decl = schema.relation(r.as_str()).unwrap();
        for (a, v) in decl.attrs.iter().zip(t) {
            pairs.push((a.as_str(), v.as_str()));
        }
    }
    pairs.sort();
    pairs.dedup();
    pairs.iter().map(|(a, v)| format!("{}={}", a, v)).collect::<Vec<_>>().join("\t")
}

/// Breadth-first distance from the head variables in the graph linking
/// variables that share a body literal.
pub fn variable_depths(clause: &OrderedClause) -> HashMap<Sym, usize> {
    let mut depth: HashMap<Sym, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    for v in clause.head.vars() {
        if depth.insert(v, 0).is_none() {
            queue.push_back(v);
        }
    }
    let mut by_var: HashMap<Sym, Vec<usize>> = HashMap::new();
    for (i, a) in clause.body.iter().enumerate() {
        for v in a.vars() {
            by_var.entry(v).or_default().push(i);
        }
    }
    while let Some(v) = queue.pop_front() {
        let d = depth[&v];
        for &i in by_var.get(&v).map(|x| x.as_slice()).unwrap_or(&[]) {
            for w in clause.body[i].vars() {
                if !depth.contains_key(&w) {
                    depth.insert(w, d + 1);
                    queue.push_back(w);
                }
            }
        }
    }
    depth
}

/// Classic construction: iteration i adds every tuple holding a constant
/// found before iteration i, for `max_depth` iterations.
pub fn bottom_clause_depth(e: &Atom, instance: &Instance, max_depth: usize, order: &ClassOrder) -> BottomClause {
    let (found, _) = collect(e, instance, Stop::Depth(max_depth), false);
    variabilize(e, instance, found, order, false)
}

/// Construction with the equality-IND chase: each added tuple pulls in its
/// partners at once. Stops after the first iteration that ends with at
/// least `maxvars` distinct variables, or when nothing new is reachable.
pub fn bottom_clause_maxvars(e: &Atom, instance: &Instance, maxvars: usize, order: &ClassOrder) -> BottomClause {
    let (found, _) = collect(e, instance, Stop::Vars(maxvars), true);
    variabilize(e, instance, found, order, true)
}

/// Ground bottom clause for Golem: the chase-closed tuples reachable from
/// the seed, stopping once `max_constants` constants are known at the end
/// of an iteration.
pub fn ground_saturation(e: &Atom, instance: &Instance, max_constants: usize, order: &ClassOrder) -> OrderedClause {
    let (found, _) = collect(e, instance, Stop::Vars(max_constants), true);
    let b = variabilize(e, instance, found, order, true);
    b.clause.apply(&b.varmap.inverse())
}
