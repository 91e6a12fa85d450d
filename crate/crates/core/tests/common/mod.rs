#![allow(dead_code)]

use std::sync::Arc;

use relearn::relmodel::{parse_clause, parse_facts, parse_schema, Atom, Instance, OrderedClause, Schema};

pub const FRAGMENT_SCHEMA: &str = "
relation professor(prof)
relation hasPosition(prof, position)
relation student(stud)
relation inPhase(stud, phase)
relation publication(title, person)
fd hasPosition: prof -> position
fd inPhase: stud -> phase
ind professor[prof] = hasPosition[prof]
ind student[stud] = inPhase[stud]
";

pub const FRAGMENT_FACTS: &str = "
professor('John'). hasPosition('John','Associate'). publication('A','John').
professor('Mary'). hasPosition('Mary','Assistant'). publication('B','Mary').
student('Jake'). inPhase('Jake','PreQuals'). publication('A','Jake').
student('Sara'). inPhase('Sara','PostQuals'). publication('B','Sara').
";

pub fn fragment() -> Instance {
    let schema = Arc::new(parse_schema(FRAGMENT_SCHEMA).unwrap());
    parse_facts(FRAGMENT_FACTS, schema).unwrap()
}

pub fn schema(text: &str) -> Schema {
    parse_schema(text).unwrap()
}

pub fn clause(text: &str) -> OrderedClause {
    parse_clause(text).unwrap()
}

pub fn ground(pred: &str, args: &[&str]) -> Atom {
    Atom::ground(pred, args)
}
