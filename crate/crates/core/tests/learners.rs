mod common;

use std::collections::BTreeSet;

use common::*;
use relearn::chase::{clause_equivalent, theta_subsumes};
use relearn::harness::counterexample::counterexample;
use relearn::learners::{
    find_blocking_atom, learn, lgg, refine, refine_classes, BottomKind, LearnerConfig, LearnerKind,
};
use relearn::relmodel::{covers_at_most, ExampleSet, OrderedClause};
use relearn::transform::Direction;

fn canon(cs: &[OrderedClause]) -> BTreeSet<String> {
    cs.iter().map(|c| c.canonical().to_string()).collect()
}

#[test]
fn root_refinements_over_the_fragment() {
    let inst = fragment();
    let cfg = LearnerConfig::new(LearnerKind::Foil);
    let kids = canon(&refine(&clause("collaborated(X,Y) :- true."), inst.schema(), &cfg));
    for want in [
        "collaborated(X,Y) :- student(X).",
        "collaborated(X,Y) :- inPhase(X,Z).",
        "collaborated(X,Y) :- publication(Z,X).",
        "collaborated(X,X) :- true.",
    ] {
        assert!(kids.contains(&clause(want).canonical().to_string()), "missing {}", want);
    }
}

#[test]
fn length_bound_leaves_only_unifications() {
    let inst = fragment();
    let mut cfg = LearnerConfig::new(LearnerKind::Foil);
    cfg.clause_length = 1;
    let kids = refine(&clause("t(X,Y) :- student(X)."), inst.schema(), &cfg);
    assert_eq!(canon(&kids), canon(&[clause("t(X,X) :- student(X).")]));
}

#[test]
fn unary_schema_children() {
    let s = schema("relation r(a)");
    let cfg = LearnerConfig::new(LearnerKind::Foil);
    let kids = canon(&refine(&clause("t(X) :- true."), &s, &cfg));
    assert_eq!(kids, canon(&[clause("t(X) :- r(X)."), clause("t(X) :- r(Y).")]));
}

#[test]
fn class_moves_add_partners_together() {
    let inst = fragment();
    let cfg = LearnerConfig::new(LearnerKind::ModifiedFoil);
    let kids = refine_classes(&clause("t(X) :- true."), inst.schema(), &cfg);
    let k = kids
        .iter()
        .find(|c| c.body.iter().any(|a| a.pred.as_str() == "professor"))
        .expect("a professor move");
    assert_eq!(k.body.len(), 2);
    let preds: BTreeSet<&str> = k.body.iter().map(|a| a.pred.as_str()).collect();
    assert_eq!(preds, ["hasPosition", "professor"].into_iter().collect());
    assert_eq!(k.body[0].args[0], k.body[1].args[0]);
    // without equality INDs both operators coincide
    let plain = schema("relation r(a, b)\nrelation s(a)");
    let mut c1 = LearnerConfig::new(LearnerKind::Foil);
    c1.clause_length = 2;
    let mut c2 = LearnerConfig::new(LearnerKind::ModifiedFoil);
    c2.max_inclusion_classes = 2;
    let root = clause("t(X,Y) :- r(X,Z).");
    assert_eq!(canon(&refine(&root, &plain, &c1)), canon(&refine_classes(&root, &plain, &c2)));
}

#[test]
fn foil_finds_the_two_literal_concept_only_over_the_composed_schema() {
    let cx = counterexample().unwrap();
    let mut cfg = LearnerConfig::new(LearnerKind::Foil);
    cfg.clause_length = 2;
    let over_r = learn(&cx.instance, &cx.examples, &cfg).unwrap();
    assert_eq!(over_r.definition.len(), 1);
    let r = cx.instance.schema();
    assert!(clause_equivalent(&over_r.definition.clauses[0], &cx.target, r, r, None).unwrap().equivalent());
    let j = cx.tau.apply(&cx.instance, Direction::Forward).unwrap();
    let over_s = learn(&j, &cx.examples, &cfg).unwrap();
    assert!(over_s.definition.is_empty() && over_s.partial);
}

#[test]
fn modified_foil_agrees_on_both_sides() {
    let cx = counterexample().unwrap();
    let j = cx.tau.apply(&cx.instance, Direction::Forward).unwrap();
    for k in [1, 2] {
        let mut cfg = LearnerConfig::new(LearnerKind::ModifiedFoil);
        cfg.max_inclusion_classes = k;
        let hr = learn(&cx.instance, &cx.examples, &cfg).unwrap().definition;
        let hs = learn(&j, &cx.examples, &cfg).unwrap().definition;
        assert_eq!(hr.len(), hs.len(), "k = {}", k);
        for (c, d) in hr.clauses.iter().zip(&hs.clauses) {
            let v = clause_equivalent(c, d, cx.tau.source(), cx.tau.target(), Some(&cx.tau)).unwrap();
            assert!(v.equivalent(), "{} vs {}", c, d);
        }
        assert_eq!(hr.is_empty(), k == 1);
    }
}

#[test]
fn golem_keeps_the_coauthor_core() {
    let inst = fragment();
    let ex = ExampleSet::new(
        vec![ground("collaborated", &["John", "Jake"]), ground("collaborated", &["Mary", "Sara"])],
        vec![ground("collaborated", &["John", "Mary"]), ground("collaborated", &["John", "Sara"])],
    )
    .unwrap();
    let h = learn(&inst, &ex, &LearnerConfig::new(LearnerKind::Golem)).unwrap();
    assert_eq!(h.definition.len(), 1);
    let c = &h.definition.clauses[0];
    let core = clause("collaborated(X,Y) :- publication(P,X), publication(P,Y).");
    assert!(theta_subsumes(&core, c).holds(), "{}", c);
    assert!(covers_at_most(inst.db(), c, &ex.negatives, 0));
}

#[test]
fn golem_falls_back_when_no_pair_generalizes() {
    // the only negative shares every feature of the two positives
    let inst = fragment();
    let ex = ExampleSet::new(
        vec![ground("t", &["Jake"]), ground("t", &["Sara"])],
        vec![ground("t", &["John"])],
    )
    .unwrap();
    let h = learn(&inst, &ex, &LearnerConfig::new(LearnerKind::Golem)).unwrap();
    assert!(!h.partial, "{:?}", h.definition);
    for c in &h.definition.clauses {
        assert!(covers_at_most(inst.db(), c, &ex.negatives, 0));
    }
}

#[test]
fn no_positives_gives_an_empty_definition() {
    let inst = fragment();
    let ex = ExampleSet::new(vec![], vec![ground("t", &["John"])]).unwrap();
    for kind in [LearnerKind::Foil, LearnerKind::ModifiedFoil, LearnerKind::Golem, LearnerKind::Progolem] {
        let h = learn(&inst, &ex, &LearnerConfig::new(kind)).unwrap();
        assert!(h.definition.is_empty() && !h.partial);
    }
}

#[test]
fn progolem_learns_the_coauthor_rule() {
    let inst = fragment();
    let ex = ExampleSet::new(
        vec![ground("collaborated", &["John", "Jake"]), ground("collaborated", &["Mary", "Sara"])],
        vec![ground("collaborated", &["John", "Sara"]), ground("collaborated", &["Mary", "Jake"])],
    )
    .unwrap();
    for bottom in [BottomKind::Depth, BottomKind::Maxvars] {
        let mut cfg = LearnerConfig::new(LearnerKind::Progolem);
        cfg.bottom = bottom;
        cfg.beam_width = 1;
        let h = learn(&inst, &ex, &cfg).unwrap();
        assert_eq!(h.definition.len(), 1, "{:?}", bottom);
        let c = &h.definition.clauses[0];
        let core = clause("collaborated(X,Y) :- publication(P,X), publication(P,Y).");
        assert!(theta_subsumes(c, &core).holds() && theta_subsumes(&core, c).holds(), "{}", c);
    }
}

#[test]
fn heads_that_cannot_match_block_at_once() {
    let inst = fragment();
    let c = clause("t(X,X) :- student(X).");
    assert_eq!(find_blocking_atom(&c, &ground("t", &["Jake", "Sara"]), inst.db()), Some(0));
}

#[test]
fn lgg_of_a_clause_with_itself() {
    let c = clause("t(X,Y) :- r(X,Z), s(Z,Y), r(Y,c).");
    let g = lgg(&c, &c).unwrap();
    assert!(theta_subsumes(&g, &c).holds() && theta_subsumes(&c, &g).holds());
}

#[test]
fn config_validation() {
    let mut cfg = LearnerConfig::new(LearnerKind::Foil);
    assert!(cfg.validate().is_ok());
    cfg.noise = 1.5;
    assert!(cfg.validate().is_err());
    cfg.noise = 0.0;
    cfg.clause_length = 0;
    assert!(cfg.validate().is_err());
    assert_eq!("mfoil".parse::<LearnerKind>().unwrap(), LearnerKind::ModifiedFoil);
    assert!("aleph".parse::<LearnerKind>().is_err());
}
