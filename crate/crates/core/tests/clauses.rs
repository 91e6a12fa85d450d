//! Parsing, evaluation, closure and the clause operations of the chase
//! module on small hand-checked inputs.

mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::*;
use relearn::chase::{
    clause_equivalent, core_minimize, literal_groups, merge_fds, minimize_definition, reduce_negative,
    theta_subsumes, theta_subsumes_with, Subsumption, Verdict,
};
use relearn::relmodel::{
    covers, fd_closure, inclusion_classes, parse_definition, parse_examples, parse_facts, parse_schema, Atom, Fd,
    Instance, Term,
};
use relearn::Error;

#[test]
fn schema_parsing() {
    let s = schema("relation student(stud)\nrelation inPhase(stud,phase)\nind student[stud] = inPhase[stud]");
    assert_eq!(s.relations().len(), 2);
    assert_eq!(s.equality_inds().count(), 1);
    assert!(matches!(parse_schema(""), Err(Error::Schema(_))));
    assert!(parse_schema("relation r(a)\nfd r: b -> a").is_err());
    assert!(parse_schema("relation r(a, a)").is_err());
    assert!(parse_schema("relation r(a)\nrelation r(b)").is_err());
    let err = parse_schema("relation r(a\n").unwrap_err().to_string();
    assert!(err.contains("1"), "{}", err);
}

#[test]
fn fact_loading() {
    let inst = fragment();
    assert_eq!(inst.len(), 12);
    assert_eq!(inst.schema().relations().len(), 5);
    let s = Arc::new(inst.schema().clone());
    assert!(parse_facts("", s.clone()).unwrap().is_empty());
    let bad = parse_facts("student(jake). inPhase(jake,prequals). inPhase(jake,post).", s.clone());
    assert!(matches!(bad, Err(Error::Constraint(_))));
    // the equality IND needs both sides
    assert!(matches!(parse_facts("student(jake).", s.clone()), Err(Error::Constraint(_))));
    assert!(matches!(parse_facts("student(jake, x).", s.clone()), Err(Error::Data(_))));
    assert!(matches!(parse_facts("teaches(x).", s), Err(Error::Data(_))));
}

#[test]
fn coverage() {
    let inst = fragment();
    let c = clause("collaborated(X,Y) :- publication(P,X), publication(P,Y).");
    let ex = vec![ground("collaborated", &["John", "Jake"]), ground("collaborated", &["John", "Sara"])];
    let got = covers(&inst, &c, &ex);
    assert_eq!(got, [ground("collaborated", &["John", "Jake"])].into_iter().collect());
    assert!(covers(&inst, &c, &[]).is_empty());
    let top = clause("collaborated(X,Y) :- true.");
    assert_eq!(covers(&inst, &top, &ex).len(), 2);
    let empty = Instance::empty(Arc::new(inst.schema().clone()));
    assert!(relearn::relmodel::evaluate_clause(&c, &empty).unwrap().is_empty());
}

#[test]
fn example_files() {
    let e = parse_examples("+ t(a,b).\n- t(b,a).\n\n+ t(c,c).").unwrap();
    assert_eq!((e.positives.len(), e.negatives.len(), e.arity), (2, 1, 2));
    assert!(parse_examples("t(a).").is_err());
    assert!(parse_examples("+ t(a).\n- u(a).").is_err());
    // ground atoms read capitalized names as constants
    assert_eq!(parse_examples("+ t(X).").unwrap().positives[0], Atom::ground("t", &["X"]));
}

#[test]
fn closure_of_fds() {
    let s = schema("relation r(a, b, c)\nfd r: a -> b\nfd r: b -> c");
    assert!(fd_closure(&s).contains(&Fd::new("r", &["a"], &["c"])));
    assert!(fd_closure(&schema("relation r(a, b)")).is_empty());
    let st = schema("relation student(stud, phase, years)\nfd student: stud -> phase\nfd student: stud -> years");
    let want: BTreeSet<Fd> = [Fd::new("student", &["stud"], &["phase"]), Fd::new("student", &["stud"], &["years"])]
        .into_iter()
        .collect();
    assert_eq!(fd_closure(&st), want);
}

#[test]
fn classes() {
    let s = schema(
        "relation student(stud)\nrelation inPhase(stud, phase)\nrelation yearsInProgram(stud, years)\n\
         relation professor(prof)\nrelation hasPosition(prof, position)\nrelation publication(title, person)\n\
         ind student[stud] = inPhase[stud]\nind student[stud] = yearsInProgram[stud]\nind professor[prof] = hasPosition[prof]",
    );
    let classes: BTreeSet<BTreeSet<String>> =
        inclusion_classes(&s).into_iter().map(|c| c.into_iter().collect()).collect();
    let want: BTreeSet<BTreeSet<String>> = [
        vec!["student", "inPhase", "yearsInProgram"],
        vec!["professor", "hasPosition"],
        vec!["publication"],
    ]
    .into_iter()
    .map(|c| c.into_iter().map(String::from).collect())
    .collect();
    assert_eq!(classes, want);
    assert_eq!(inclusion_classes(&schema("relation a(x)\nrelation b(x)")).len(), 2);
    let chain = schema("relation r1(x)\nrelation r2(x)\nrelation r3(x)\nind r1[x] = r2[x]\nind r2[x] = r3[x]");
    assert_eq!(inclusion_classes(&chain).len(), 1);
}

#[test]
fn subsumption_examples() {
    let c = clause("t(X) :- r(X,Y).");
    let d = clause("t(A) :- r(A,B), s(B).");
    match theta_subsumes(&c, &d) {
        Subsumption::Yes(theta) => {
            assert_eq!(theta[&"X".into()], Term::var("A"));
            assert_eq!(theta[&"Y".into()], Term::var("B"));
        }
        other => panic!("{:?}", other),
    }
    assert!(theta_subsumes(&d, &d).holds());
    assert!(!theta_subsumes(&clause("t(X) :- r(X,X)."), &clause("t(A) :- r(A,B).")).holds());
    // a tiny budget gives up instead of guessing
    let big = clause("t(X) :- r(X,Y), r(Y,Z), r(Z,W), r(W,U), r(U,X).");
    let grid = clause("t(A) :- r(A,B), r(B,A), r(B,C), r(C,B), r(C,D), r(D,C), r(D,A), r(A,D).");
    assert!(matches!(theta_subsumes_with(&big, &grid, 1), Subsumption::Unknown));
}

#[test]
fn equivalence_examples() {
    let s = schema("relation r(a, b)\nrelation publication(title, person)");
    let c = clause("collaborated(X,Y) :- publication(P,X), publication(P,Y).");
    let v = clause_equivalent(&c, &c, &s, &s, None).unwrap();
    assert!(v.equivalent());
    assert!(v.forward.is_some() && v.backward.is_some());
    let v = clause_equivalent(&clause("t(X) :- r(X,X)."), &clause("t(X) :- r(X,Y)."), &s, &s, None).unwrap();
    assert_eq!(v.verdict, Verdict::Different);
}

#[test]
fn fd_merging_identifies_joined_keys() {
    let r = schema("relation r1(a, b, c)\nfd r1: b -> a, c");
    // two projections of one keyed row, as produced by mapping a decomposed clause
    let joined = clause("t(X,W) :- r1(X,Z,V1), r1(V2,Z,W).");
    let merged = merge_fds(&joined, &r);
    assert_eq!(merged.body.len(), 1);
    assert!(clause_equivalent(&joined, &clause("t(X,W) :- r1(X,Z,W)."), &r, &r, None).unwrap().equivalent());
    // distinct constants are never merged
    let clash = clause("t(Z) :- r1(x,Z,V1), r1(y,Z,V2).");
    assert_eq!(merge_fds(&clash, &r).body.len(), 2);
}

#[test]
fn negative_reduction_examples() {
    let inst = fragment();
    let negs = vec![ground("collaborated", &["John", "Sara"])];
    // the only literal separating the negative stays
    let c = clause("collaborated(X,Y) :- publication(P,X), publication(P,Y).");
    let red = reduce_negative(&c, &inst, &negs, &literal_groups(&c), 0).unwrap();
    assert_eq!(red, c);
    // a duplicate goes
    let dup = clause("collaborated(X,Y) :- publication(P,X), publication(P,X), publication(P,Y).");
    let red = reduce_negative(&dup, &inst, &negs, &literal_groups(&dup), 0).unwrap();
    assert_eq!(red.body.len(), 2);
    // an inconsistent input is refused
    let loose = clause("collaborated(X,Y) :- publication(P,X).");
    assert!(reduce_negative(&loose, &inst, &negs, &literal_groups(&loose), 0).is_err());
}

#[test]
fn minimization_examples() {
    let s = schema("relation r(a, b)");
    assert_eq!(core_minimize(&clause("t(X) :- r(X,Y), r(X,Z).")).unwrap(), clause("t(X) :- r(X,Y)."));
    let m = clause("t(X) :- r(X,Y), r(Y,X).");
    assert_eq!(core_minimize(&m).unwrap(), m);
    let def = parse_definition("t(X) :- r(X,Y).\nt(X) :- r(X,Y), r(Y,Z).").unwrap();
    let min = minimize_definition(&def, &s).unwrap();
    assert_eq!(min.definition.clauses, vec![clause("t(X) :- r(X,Y).")]);
    assert!(min.flagged.is_empty());
}

#[test]
fn ground_atoms_print_and_parse_back() {
    let a = Atom::ground("p", &["John", "x1", "two words"]);
    let text = format!("+ {}.", relearn::relmodel::fact_string(&a));
    assert_eq!(parse_examples(&text).unwrap().positives[0], a);
}
