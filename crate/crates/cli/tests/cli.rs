use std::path::Path;
use std::process::{Command, Output};

fn relearn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relearn")).args(args).output().unwrap()
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn bundle(kind: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let o = relearn(&["dataset", kind, "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    dir
}

#[test]
fn transform_round_trips_through_files() {
    let d = bundle("uwcse");
    let out = tempfile::tempdir().unwrap();
    let fwd = out.path().join("fwd");
    let o = relearn(&[
        "transform", "--schema", &p(d.path(), "schema.txt"), "--spec", &p(d.path(), "to_4nf.txt"),
        "--facts", &p(d.path(), "facts.txt"), "--direction", "fwd", "--out", fwd.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let back = out.path().join("back");
    let o = relearn(&[
        "transform", "--schema", &p(d.path(), "schema.txt"), "--spec", &p(d.path(), "to_4nf.txt"),
        "--facts", &p(&fwd, "facts.txt"), "--direction", "inv", "--out", back.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let original = std::fs::read_to_string(d.path().join("facts.txt")).unwrap();
    assert_eq!(std::fs::read_to_string(back.join("facts.txt")).unwrap(), original);
    let schema = std::fs::read_to_string(fwd.join("schema.txt")).unwrap();
    assert!(schema.contains("relation student(stud,phase,years)"), "{}", schema);
}

#[test]
fn verify_reports_json() {
    let d = bundle("uwcse");
    let o = relearn(&[
        "verify", "--schema", &p(d.path(), "schema.txt"), "--spec", &p(d.path(), "to_denorm1.txt"),
        "--trials", "5", "--seed", "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["checked"], 10);
    assert!(v["failures"].as_array().unwrap().is_empty());
}

#[test]
fn independence_exit_codes() {
    let d = bundle("counterexample");
    let base = [
        "independence".to_string(), "--schema".into(), p(d.path(), "schema.txt"), "--spec".into(),
        p(d.path(), "decompose.txt"), "--facts".into(), p(d.path(), "facts.txt"), "--examples".into(),
        p(d.path(), "examples.txt"), "--clause-length".into(), "2".into(),
    ];
    let run = |extra: &[&str]| {
        let mut args: Vec<&str> = base.iter().map(|s| s.as_str()).collect();
        args.extend_from_slice(extra);
        relearn(&args)
    };
    let o = run(&["--learner", "foil", "--expect", "independent"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stdout(&o).starts_with("dependent"));
    // without --expect a dependent verdict is not an error
    assert_eq!(run(&["--learner", "foil"]).status.code(), Some(0));
    let o = run(&["--learner", "mfoil", "--max-inclusion-classes", "2", "--expect", "independent"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn learn_writes_reports() {
    let d = bundle("counterexample");
    let out = tempfile::tempdir().unwrap();
    let o = relearn(&[
        "learn", "--schema", &p(d.path(), "schema.txt"), "--facts", &p(d.path(), "facts.txt"),
        "--examples", &p(d.path(), "examples.txt"), "--learner", "golem", "--folds", "2",
        "--out", out.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(v["folds"].as_array().unwrap().len(), 2);
    assert!(out.path().join("report.csv").exists());
    assert!(out.path().join("definitions.txt").exists());
}

#[test]
fn randdefs_and_saturate() {
    let d = bundle("uwcse");
    let out = tempfile::tempdir().unwrap();
    let o = relearn(&[
        "randdefs", "--schema", &p(d.path(), "schema.txt"), "--spec", &p(d.path(), "to_denorm2.txt"),
        "--clauses", "1..2", "--vars", "4..5", "--count", "2", "--out", out.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("8 passed, 0 failed"), "{}", stdout(&o));
    let o = relearn(&[
        "saturate", "--schema", &p(d.path(), "schema.txt"), "--facts", &p(d.path(), "facts.txt"),
        "--example", "advisedBy(student1,person4)", "--mode", "depth", "--bound", "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.starts_with("advisedBy(V1,V2) :- "), "{}", s);
    assert!(s.contains("student(V1)") && s.contains("professor(V2)"), "{}", s);
}

#[test]
fn config_and_data_errors() {
    let o = relearn(&["verify", "--schema", "/nonexistent/s.txt", "--spec", "/nonexistent/t.txt"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(relearn(&["learn", "--learner", "nope"]).status.code(), Some(2));
    let d = bundle("counterexample");
    // a fact breaking the key of r1
    let facts = d.path().join("bad.txt");
    std::fs::write(&facts, "r1(a,k,c). r1(b,k,c). r2(d,k,e).").unwrap();
    let o = relearn(&[
        "transform", "--schema", &p(d.path(), "schema.txt"), "--spec", &p(d.path(), "decompose.txt"),
        "--facts", facts.to_str().unwrap(), "--out", d.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let bad_spec = d.path().join("bad_spec.txt");
    std::fs::write(&bad_spec, "decompose r9 into x(a); y(b)").unwrap();
    let o = relearn(&["verify", "--schema", &p(d.path(), "schema.txt"), "--spec", bad_spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
