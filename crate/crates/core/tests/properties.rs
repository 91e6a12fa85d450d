mod common;

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use proptest::prelude::*;

use common::*;
use relearn::chase::{chase_clause, core_minimize, theta_subsumes};
use relearn::harness::uwcse::Family;
use relearn::harness::{generate_random_definition, metrics};
use relearn::learners::lgg;
use relearn::relmodel::{evaluate_clause, inclusion_classes, Atom, ExampleSet, Instance, OrderedClause, Sym, Term};
use relearn::transform::{random_instance, Direction};

const PLAIN: &str = "relation p(a, b)\nrelation q(a, b)\nrelation r(a)";
const PLAIN_RELS: [(&str, usize); 3] = [("p", 2), ("q", 2), ("r", 1)];

/// Body literals as (relation, argument variable indices) over `rels`.
fn body_strategy(rels: &'static [(&'static str, usize)], vars: usize, max_len: usize) -> impl Strategy<Value = Vec<(usize, Vec<usize>)>> {
    prop::collection::vec(
        (0..rels.len()).prop_flat_map(move |r| (Just(r), prop::collection::vec(0..vars, rels[r].1))),
        1..=max_len,
    )
}

fn v(i: usize) -> Term {
    Term::var(&format!("V{}", i))
}

/// `t(X)` over the first variable of the first literal, so the clause is safe.
fn build(rels: &[(&str, usize)], body: &[(usize, Vec<usize>)]) -> OrderedClause {
    let lits: Vec<Atom> = body.iter().map(|(r, args)| Atom::new(rels[*r].0, args.iter().map(|&i| v(i)).collect())).collect();
    let head = Atom::new("t", vec![lits[0].args[0].clone()]);
    OrderedClause::new(head, lits)
}

fn plain_instance(facts: &[(usize, Vec<usize>)]) -> Instance {
    let schema = Arc::new(schema(PLAIN));
    let facts = facts
        .iter()
        .map(|(r, args)| (PLAIN_RELS[*r].0.to_string(), args.iter().map(|c| Sym::new(&format!("c{}", c))).collect()));
    Instance::new_unchecked(schema, facts).unwrap()
}

fn facts_strategy(max: usize) -> impl Strategy<Value = Vec<(usize, Vec<usize>)>> {
    prop::collection::vec((0..3usize).prop_flat_map(|r| (Just(r), prop::collection::vec(0..4usize, PLAIN_RELS[r].1))), 0..max)
}

const FRAGMENT_RELS: [(&str, usize); 5] =
    [("professor", 1), ("hasPosition", 2), ("student", 1), ("inPhase", 2), ("publication", 2)];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn chase_is_idempotent_and_keeps_answers(body in body_strategy(&FRAGMENT_RELS, 4, 4)) {
        let inst = fragment();
        let c = build(&FRAGMENT_RELS, &body);
        let once = chase_clause(&c, inst.schema()).unwrap();
        let twice = chase_clause(&once, inst.schema()).unwrap();
        prop_assert_eq!(once.body.len(), twice.body.len());
        prop_assert!(theta_subsumes(&once, &twice).holds() && theta_subsumes(&twice, &once).holds());
        // the fragment satisfies its INDs, so partners never filter answers
        prop_assert_eq!(evaluate_clause(&c, &inst).unwrap(), evaluate_clause(&once, &inst).unwrap());
    }

    #[test]
    fn subsumption_is_reflexive_and_transitive(
        body in body_strategy(&PLAIN_RELS, 4, 4),
        keep in prop::collection::vec(any::<bool>(), 4),
        merge in prop::collection::vec(0..4usize, 4),
        extra in body_strategy(&PLAIN_RELS, 6, 3),
    ) {
        let c = build(&PLAIN_RELS, &body);
        prop_assert!(theta_subsumes(&c, &c).holds());
        // a: a sublist of c that keeps the first literal, so a subsumes c
        let sub: Vec<(usize, Vec<usize>)> = body.iter().enumerate().filter(|(i, _)| *i == 0 || keep[*i % 4]).map(|(_, l)| l.clone()).collect();
        let a = build(&PLAIN_RELS, &sub);
        // b: c under a variable merge plus extra literals, so c subsumes b
        let merged: Vec<(usize, Vec<usize>)> = body.iter().chain(&extra).enumerate()
            .map(|(i, (r, args))| (*r, args.iter().map(|&x| if i < body.len() { merge[x] } else { x }).collect()))
            .collect();
        let b = build(&PLAIN_RELS, &merged);
        prop_assert!(theta_subsumes(&a, &c).holds());
        prop_assert!(theta_subsumes(&c, &b).holds());
        prop_assert!(theta_subsumes(&a, &b).holds());
    }

    #[test]
    fn lgg_generalizes_both_within_the_product_bound(
        b1 in body_strategy(&PLAIN_RELS, 4, 4),
        b2 in body_strategy(&PLAIN_RELS, 4, 4),
    ) {
        let (c1, c2) = (build(&PLAIN_RELS, &b1), build(&PLAIN_RELS, &b2));
        let g = lgg(&c1, &c2).unwrap();
        prop_assert!(g.body.len() <= c1.body.len() * c2.body.len());
        prop_assert!(theta_subsumes(&g, &c1).holds());
        prop_assert!(theta_subsumes(&g, &c2).holds());
    }

    #[test]
    fn core_is_equivalent_and_stable(body in body_strategy(&PLAIN_RELS, 4, 5)) {
        let c = build(&PLAIN_RELS, &body);
        let m = core_minimize(&c).unwrap();
        prop_assert!(m.body.len() <= c.body.len());
        prop_assert!(theta_subsumes(&m, &c).holds() && theta_subsumes(&c, &m).holds());
        prop_assert_eq!(core_minimize(&m).unwrap().body.len(), m.body.len());
    }

    #[test]
    fn evaluation_is_monotone(
        body in body_strategy(&PLAIN_RELS, 4, 3),
        small in facts_strategy(12),
        more in facts_strategy(12),
    ) {
        let c = build(&PLAIN_RELS, &body);
        let all: Vec<_> = small.iter().chain(&more).cloned().collect();
        let a = evaluate_clause(&c, &plain_instance(&small)).unwrap();
        let b = evaluate_clause(&c, &plain_instance(&all)).unwrap();
        prop_assert!(a.is_subset(&b));
    }

    #[test]
    fn metrics_stay_in_range(
        labels in prop::collection::vec(0..3u8, 1..20),
        picks in prop::collection::vec(any::<bool>(), 20),
        more in prop::collection::vec(any::<bool>(), 20),
    ) {
        // label 0 positive, 1 negative, 2 unlabeled
        let atom = |i: usize| Atom::ground("t", &[&format!("a{}", i)]);
        let pos: Vec<Atom> = (0..labels.len()).filter(|&i| labels[i] == 0).map(atom).collect();
        let neg: Vec<Atom> = (0..labels.len()).filter(|&i| labels[i] == 1).map(atom).collect();
        prop_assume!(!pos.is_empty() || !neg.is_empty());
        let e = ExampleSet::new(pos, neg).unwrap();
        let small: BTreeSet<Atom> = (0..labels.len()).filter(|&i| picks[i]).map(atom).collect();
        let large: BTreeSet<Atom> = (0..labels.len()).filter(|&i| picks[i] || more[i]).map(atom).collect();
        let (m, n) = (metrics(&small, &e), metrics(&large, &e));
        for x in [m.precision, m.recall, n.precision, n.recall].into_iter().flatten() {
            prop_assert!((0.0..=1.0).contains(&x));
        }
        if let (Some(r1), Some(r2)) = (m.recall, n.recall) {
            prop_assert!(r1 <= r2);
        }
        prop_assert_eq!(m.tp + m.fn_, e.positives.len());
    }

    #[test]
    fn family_round_trips(seed in any::<u64>(), rows in 1..30usize, k in 1..4usize) {
        let fam = Family::new().unwrap();
        let tau = &fam.from_original[k];
        let i = random_instance(tau.source(), rows, seed);
        let j = tau.apply(&i, Direction::Forward).unwrap();
        prop_assert_eq!(tau.apply(&j, Direction::Inverse).unwrap(), i);
        let j = random_instance(tau.target(), rows, seed);
        let i = tau.apply(&j, Direction::Inverse).unwrap();
        prop_assert_eq!(tau.apply(&i, Direction::Forward).unwrap(), j);
    }
}

#[test]
fn random_definitions_over_many_seeds() {
    let fam = Family::new().unwrap();
    for seed in 0..1000u64 {
        let s = &fam.schemas[(seed % 4) as usize];
        let nc = 1 + (seed % 5) as usize;
        let nv = 4 + (seed / 5 % 5) as usize;
        let d = generate_random_definition(s, nc, nv, seed).unwrap();
        assert_eq!(d.clauses.len(), nc);
        let head = d.clauses[0].head.pred;
        for c in &d.clauses {
            assert_eq!(c.head.pred, head);
            assert_eq!(c.vars().len(), nv, "seed {}: {}", seed, c);
            let body = c.body_vars();
            assert!(c.head.vars().all(|x| body.contains(&x)), "seed {}: {}", seed, c);
            for a in std::iter::once(&c.head).chain(&c.body) {
                assert!(a.args.iter().all(|t| t.is_var()), "seed {}: constant in {}", seed, c);
                assert!(a.pred == head || s.contains(a.pred.as_str()), "seed {}: {}", seed, a);
            }
        }
    }
}

#[test]
fn inclusion_classes_partition_relations() {
    let fam = Family::new().unwrap();
    for s in &fam.schemas {
        let classes = inclusion_classes(s);
        let mut seen = HashSet::new();
        for rel in classes.iter().flatten() {
            assert!(seen.insert(rel.clone()), "{} in two classes", rel);
        }
        let all: HashSet<String> = s.relations().iter().map(|r| r.name.clone()).collect();
        assert_eq!(seen, all);
        let class_of = |r: &str| classes.iter().position(|c| c.iter().any(|x| x == r)).unwrap();
        for ind in s.equality_inds() {
            assert_eq!(class_of(&ind.lhs.relation), class_of(&ind.rhs.relation));
        }
    }
}
