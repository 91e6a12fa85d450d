//! Hand-traced results on the four-person publication fragment.

mod common;

use std::collections::BTreeSet;

use common::*;
use relearn::chase::{clause_equivalent, reduce_negative, theta_subsumes};
use relearn::learners::{armg, find_blocking_atom, lgg, rlgg};
use relearn::relmodel::{evaluate_clause, Atom};
use relearn::saturation::{
    bottom_clause_depth, bottom_clause_maxvars, ground_saturation, order_inclusion_classes, removal_groups,
};

fn atoms(list: &[(&str, &[&str])]) -> BTreeSet<Atom> {
    list.iter().map(|(p, a)| ground(p, a)).collect()
}

#[test]
fn single_literal_query() {
    let inst = fragment();
    let got = evaluate_clause(&clause("t(X) :- student(X)."), &inst).unwrap();
    assert_eq!(got, atoms(&[("t", &["Jake"]), ("t", &["Sara"])]));
}

#[test]
fn coauthor_pairs() {
    let inst = fragment();
    let got = evaluate_clause(&clause("c(X,Y) :- publication(P,X), publication(P,Y)."), &inst).unwrap();
    let mut want = BTreeSet::new();
    for group in [["John", "Jake"], ["Mary", "Sara"]] {
        for x in group {
            for y in group {
                want.insert(ground("c", &[x, y]));
            }
        }
    }
    assert_eq!(got.len(), 8);
    assert_eq!(got, want);
}

fn depth_one_expected() -> relearn::relmodel::OrderedClause {
    clause(
        "collaborated(V1,V2) :- professor(V1), student(V2), hasPosition(V1,V3), inPhase(V2,V4), \
         publication(V5,V1), publication(V5,V2).",
    )
}

#[test]
fn depth_one_bottom_clause() {
    let inst = fragment();
    let order = order_inclusion_classes(inst.schema(), &inst);
    let e = ground("collaborated", &["John", "Jake"]);
    let b = bottom_clause_depth(&e, &inst, 1, &order);
    assert_eq!(b.len(), 6);
    let want = depth_one_expected();
    assert!(theta_subsumes(&b.clause, &want).holds());
    assert!(theta_subsumes(&want, &b.clause).holds());
    assert!(b.max_depth() <= 1);
    // ground correctness
    let back = b.clause.apply(&b.varmap.inverse());
    assert_eq!(back.head, e);
    for a in &back.body {
        assert!(inst.contains_atom(a), "{} not in the instance", a);
    }
}

#[test]
fn zero_depth_and_unknown_seed_give_head_only() {
    let inst = fragment();
    let order = order_inclusion_classes(inst.schema(), &inst);
    let e = ground("collaborated", &["John", "Jake"]);
    assert!(bottom_clause_depth(&e, &inst, 0, &order).is_empty());
    let stranger = ground("collaborated", &["Nobody", "Else"]);
    assert!(bottom_clause_depth(&stranger, &inst, 3, &order).is_empty());
    assert!(bottom_clause_maxvars(&stranger, &inst, 10, &order).is_empty());
}

#[test]
fn maxvars_chases_partners() {
    let inst = fragment();
    let order = order_inclusion_classes(inst.schema(), &inst);
    let e = ground("collaborated", &["John", "Jake"]);
    // arity bound: exactly one iteration
    let b = bottom_clause_maxvars(&e, &inst, 2, &order);
    assert_eq!(b.len(), 6);
    assert!(b.iteration.iter().all(|&i| i == 1));
    let prof = b.clause.body.iter().position(|a| a.pred.as_str() == "professor").unwrap();
    let pos = b.clause.body.iter().position(|a| a.pred.as_str() == "hasPosition").unwrap();
    assert_eq!(b.clause.body[prof].args[0], b.clause.body[pos].args[0]);
    // chase groups: the professor pair, the student pair, two publications
    assert_eq!(removal_groups(&b.clause, inst.schema()).len(), 4);
}

#[test]
fn ground_saturation_reaches_only_linked_facts() {
    let inst = fragment();
    let order = order_inclusion_classes(inst.schema(), &inst);
    let e = ground("collaborated", &["John", "Jake"]);
    let g = ground_saturation(&e, &inst, 100, &order);
    let body: BTreeSet<Atom> = g.body.iter().cloned().collect();
    let want = atoms(&[
        ("professor", &["John"]),
        ("hasPosition", &["John", "Associate"]),
        ("publication", &["A", "John"]),
        ("student", &["Jake"]),
        ("inPhase", &["Jake", "PreQuals"]),
        ("publication", &["A", "Jake"]),
    ]);
    assert_eq!(body, want);
    assert_eq!(g.head, e);
}

#[test]
fn blocking_atoms() {
    let inst = fragment();
    let order = order_inclusion_classes(inst.schema(), &inst);
    let b = bottom_clause_depth(&ground("collaborated", &["John", "Jake"]), &inst, 1, &order).clause;
    assert_eq!(find_blocking_atom(&b, &ground("collaborated", &["Mary", "Sara"]), inst.db()), None);
    let i = find_blocking_atom(&b, &ground("collaborated", &["John", "Sara"]), inst.db()).unwrap();
    let lit = &b.body[i];
    assert_eq!(lit.pred.as_str(), "publication");
    assert_eq!(lit.args[1], b.head.args[1]);
    // the prefix before it is satisfiable, the one ending at it is not
    let head_bound = relearn::relmodel::match_head(&b.head, &ground("collaborated", &["John", "Sara"])).unwrap();
    assert_eq!(relearn::relmodel::satisfiable(inst.db(), &b.body[..i], &head_bound, None), Some(true));
    assert_eq!(relearn::relmodel::satisfiable(inst.db(), &b.body[..=i], &head_bound, None), Some(false));
}

#[test]
fn armg_drops_the_blocking_publication() {
    let inst = fragment();
    let order = order_inclusion_classes(inst.schema(), &inst);
    let b = bottom_clause_depth(&ground("collaborated", &["John", "Jake"]), &inst, 1, &order).clause;
    let g = armg(&b, &ground("collaborated", &["John", "Sara"]), inst.db(), None);
    let want = clause(
        "collaborated(V1,V2) :- professor(V1), student(V2), hasPosition(V1,V3), inPhase(V2,V4), publication(V5,V1).",
    );
    assert_eq!(g.len(), 5);
    assert!(theta_subsumes(&g, &want).holds() && theta_subsumes(&want, &g).holds());
    // already covered: unchanged
    assert_eq!(armg(&b, &ground("collaborated", &["Mary", "Sara"]), inst.db(), None), b);
}

#[test]
fn lgg_anti_unifies_differing_constants() {
    let g = lgg(&clause("t(a) :- r(a,b)."), &clause("t(a) :- r(a,c).")).unwrap();
    assert!(clause_equivalent(&g, &clause("t(a) :- r(a,X)."), &empty_schema(), &empty_schema(), None).unwrap().equivalent());
    assert!(lgg(&clause("t(a) :- r(a,b)."), &clause("u(a) :- r(a,b).")).is_none());
}

fn empty_schema() -> relearn::relmodel::Schema {
    schema("relation r(a, b)")
}

#[test]
fn rlgg_of_the_two_coauthor_examples() {
    let inst = fragment();
    let order = order_inclusion_classes(inst.schema(), &inst);
    let e1 = ground("collaborated", &["John", "Jake"]);
    let e2 = ground("collaborated", &["Mary", "Sara"]);
    let r = rlgg(&e1, &e2, &inst, &order, 100).unwrap();
    let core = clause(
        "collaborated(X,Y) :- professor(X), student(Y), hasPosition(X,Z), inPhase(Y,W), publication(P,X), publication(P,Y).",
    );
    assert!(theta_subsumes(&r, &core).holds() && theta_subsumes(&core, &r).holds());
    // rlgg(e, e) is equivalent to the saturation
    let s = ground_saturation(&e1, &inst, 100, &order);
    let same = rlgg(&e1, &e1, &inst, &order, 100).unwrap();
    assert!(theta_subsumes(&same, &s).holds() && theta_subsumes(&s, &same).holds());
}

#[test]
fn negative_reduction_keeps_the_coauthor_core() {
    let inst = fragment();
    let order = order_inclusion_classes(inst.schema(), &inst);
    let e1 = ground("collaborated", &["John", "Jake"]);
    let e2 = ground("collaborated", &["Mary", "Sara"]);
    let r = rlgg(&e1, &e2, &inst, &order, 100).unwrap();
    // only the shared publication separates these from the positives
    let negs = vec![ground("collaborated", &["John", "Sara"]), ground("collaborated", &["Mary", "Jake"])];
    let groups = relearn::chase::literal_groups(&r);
    let red = reduce_negative(&r, &inst, &negs, &groups, 0).unwrap();
    let core = clause("collaborated(X,Y) :- publication(P,X), publication(P,Y).");
    assert!(theta_subsumes(&red, &core).holds() && theta_subsumes(&core, &red).holds(), "{}", red);
    // locally minimal: dropping either literal covers a negative
    for i in 0..red.body.len() {
        let mut c = red.clone();
        c.body.remove(i);
        assert!(!relearn::relmodel::covers_at_most(inst.db(), &c, &negs, 0));
    }
    // a literal that excludes a negative on its own stays
    let negs = vec![ground("collaborated", &["John", "Mary"])];
    let red = reduce_negative(&r, &inst, &negs, &groups, 0).unwrap();
    assert!(relearn::relmodel::covers_at_most(inst.db(), &red, &negs, 0));
    assert!(!red.body.is_empty());
}
