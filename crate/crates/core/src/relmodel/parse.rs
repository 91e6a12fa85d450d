//! Text formats: schema files, facts files, example files and clauses.

use std::collections::BTreeSet;
use std::sync::Arc;

use super::clause::{Atom, HornDefinition, OrderedClause, Term};
use super::instance::Instance;
use super::schema::{Fd, Ind, IndSide, RelationDecl, Schema};
use super::symbol::{is_bare_ident, Sym};
use super::ExampleSet;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Quoted(String),
    Punct(&'static str),
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const PUNCT: [&str; 13] = [":-", "->", "<=", "(", ")", ",", ".", "[", "]", ":", "=", ";", "+"];

pub(crate) fn lex(text: &str, line_no: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
        } else if c == '#' || c == '%' {
            break;
        } else if c.is_alphanumeric() || c == '_' {
            let st = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token {
                tok: Tok::Ident(chars[st..i].iter().collect()),
                line: line_no,
                col,
            });
        } else if c == '\'' {
            i += 1;
            let mut s = String::new();
            loop {
                if i >= chars.len() {
                    return Err(Error::syntax(line_no, col, "unterminated quoted constant"));
                }
                match chars[i] {
                    '\\' if i + 1 < chars.len() => {
                        s.push(chars[i + 1]);
                        i += 2;
                    }
                    '\'' => {
                        i += 1;
                        break;
                    }
                    ch => {
                        s.push(ch);
                        i += 1;
                    }
                }
            }
            out.push(Token {
                tok: Tok::Quoted(s),
                line: line_no,
                col,
            });
        } else if c == '-' && chars.get(i + 1) != Some(&'>') {
            out.push(Token {
                tok: Tok::Punct("-"),
                line: line_no,
                col,
            });
            i += 1;
        } else {
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            match PUNCT.iter().find(|p| rest.starts_with(**p)) {
                Some(p) => {
                    out.push(Token {
                        tok: Tok::Punct(p),
                        line: line_no,
                        col,
                    });
                    i += p.len();
                }
                None => return Err(Error::syntax(line_no, col, format!("unexpected character {:?}", c))),
            }
        }
    }
    Ok(out)
}

pub(crate) struct Cursor {
    toks: Vec<Token>,
    pos: usize,
    line: usize,
    end_col: usize,
}

impl Cursor {
    pub(crate) fn new(toks: Vec<Token>, line: usize, end_col: usize) -> Cursor {
        Cursor {
            toks,
            pos: 0,
            line,
            end_col,
        }
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => (self.line, self.end_col),
        }
    }

    pub(crate) fn err(&self, msg: impl Into<String>) -> Error {
        let (l, c) = self.here();
        Error::syntax(l, c, msg)
    }

    pub(crate) fn done(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    pub(crate) fn eat(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Punct(q)) if *q == p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn expect(&mut self, p: &str) -> Result<()> {
        if self.eat(p) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", p)))
        }
    }

    pub(crate) fn ident(&mut self) -> Result<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => Err(self.err("expected identifier")),
        }
    }

    pub(crate) fn keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn ident_list(&mut self, close: &str) -> Result<Vec<String>> {
        let mut out = vec![self.ident()?];
        while self.eat(",") {
            out.push(self.ident()?);
        }
        self.expect(close)?;
        Ok(out)
    }

    /// Comma list of identifiers without a closing token.
    fn bare_list(&mut self) -> Result<Vec<String>> {
        let mut out = vec![self.ident()?];
        while self.eat(",") {
            out.push(self.ident()?);
        }
        Ok(out)
    }

    /// A term; `vars` selects Prolog-style variable detection.
    fn term(&mut self, vars: bool) -> Result<Term> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                let first = s.chars().next().unwrap();
                if vars && (first.is_uppercase() || first == '_') {
                    Ok(Term::Var(Sym::new(&s)))
                } else {
                    Ok(Term::Const(Sym::new(&s)))
                }
            }
            Some(Tok::Quoted(s)) => {
                self.pos += 1;
                Ok(Term::Const(Sym::new(&s)))
            }
            _ => Err(self.err("expected term")),
        }
    }

    pub(crate) fn atom(&mut self, vars: bool) -> Result<Atom> {
        let name = self.ident()?;
        self.expect("(")?;
        let mut args = vec![self.term(vars)?];
        while self.eat(",") {
            args.push(self.term(vars)?);
        }
        self.expect(")")?;
        Ok(Atom::new(Sym::new(&name), args))
    }
}

fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l))
}

fn cursor_for(line: &str, no: usize) -> Result<Cursor> {
    Ok(Cursor::new(lex(line, no)?, no, line.chars().count() + 1))
}

pub fn parse_schema(text: &str) -> Result<Schema> {
    let mut rels = Vec::new();
    let mut fds = Vec::new();
    let mut inds = Vec::new();
    for (no, line) in lines(text) {
        let mut c = cursor_for(line, no)?;
        if c.done() {
            continue;
        }
        if c.keyword("relation") {
            let name = c.ident()?;
            c.expect("(")?;
            let attrs = c.ident_list(")")?;
            rels.push(RelationDecl { name, attrs });
        } else if c.keyword("fd") {
            let relation = c.ident()?;
            c.expect(":")?;
            let lhs = c.bare_list()?;
            c.expect("->")?;
            let rhs = c.bare_list()?;
            fds.push(Fd {
                relation,
                lhs: lhs.into_iter().collect(),
                rhs: rhs.into_iter().collect(),
            });
        } else if c.keyword("ind") {
            let lr = c.ident()?;
            c.expect("[")?;
            let la = c.ident_list("]")?;
            let equality = if c.eat("=") {
                true
            } else if c.eat("<=") {
                false
            } else {
                return Err(c.err("expected '=' or '<='"));
            };
            let rr = c.ident()?;
            c.expect("[")?;
            let ra = c.ident_list("]")?;
            inds.push(Ind {
                lhs: IndSide { relation: lr, attrs: la },
                rhs: IndSide { relation: rr, attrs: ra },
                equality,
            });
        } else {
            return Err(c.err("expected 'relation', 'fd' or 'ind'"));
        }
        if !c.done() {
            return Err(c.err("trailing input"));
        }
    }
    Schema::new(rels, fds, inds)
}

pub fn schema_to_string(s: &Schema) -> String {
    s.to_string()
}

/// Ground atoms terminated by '.', any number per line.
fn parse_ground_atoms(text: &str) -> Result<Vec<Atom>> {
    let mut out = Vec::new();
    for (no, line) in lines(text) {
        let mut c = cursor_for(line, no)?;
        while !c.done() {
            out.push(c.atom(false)?);
            c.expect(".")?;
        }
    }
    Ok(out)
}

pub fn parse_facts(text: &str, schema: Arc<Schema>) -> Result<Instance> {
    let atoms = parse_ground_atoms(text).map_err(|e| Error::Data(e.to_string()))?;
    let facts = atoms
        .into_iter()
        .map(|a| (a.pred.as_str().to_string(), a.consts().expect("ground")));
    Instance::new(schema, facts)
}

pub fn fact_string(a: &Atom) -> String {
    let args: Vec<String> = a
        .args
        .iter()
        .map(|t| match t {
            Term::Const(c) if is_bare_ident(c.as_str()) => c.as_str().to_string(),
            Term::Const(c) => format!("'{}'", c.as_str().replace('\\', "\\\\").replace('\'', "\\'")),
            Term::Var(v) => v.as_str().to_string(),
        })
        .collect();
    format!("{}({})", a.pred, args.join(","))
}

pub fn facts_to_string(inst: &Instance) -> String {
    inst.to_string()
}

pub fn parse_examples(text: &str) -> Result<ExampleSet> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for (no, line) in lines(text) {
        let mut c = cursor_for(line, no).map_err(|e| Error::Data(e.to_string()))?;
        if c.done() {
            continue;
        }
        let positive = if c.eat("+") {
            true
        } else if c.eat("-") {
            false
        } else {
            return Err(Error::Data(c.err("expected '+' or '-'").to_string()));
        };
        let a = c.atom(false).map_err(|e| Error::Data(e.to_string()))?;
        c.expect(".").map_err(|e| Error::Data(e.to_string()))?;
        if !c.done() {
            return Err(Error::Data(c.err("trailing input").to_string()));
        }
        if positive {
            pos.push(a)
        } else {
            neg.push(a)
        }
    }
    ExampleSet::new(pos, neg)
}

pub fn examples_to_string(e: &ExampleSet) -> String {
    let mut s = String::new();
    for a in &e.positives {
        s.push_str(&format!("+ {}.\n", fact_string(a)));
    }
    for a in &e.negatives {
        s.push_str(&format!("- {}.\n", fact_string(a)));
    }
    s
}

/// Parses `head(X,Y) :- b1(X,Z), b2(Z,Y).`; `true` or a missing body gives an
/// empty body. Uppercase identifiers are variables, others constants.
pub fn parse_clause(text: &str) -> Result<OrderedClause> {
    let mut c = multiline_cursor(text)?;
    let cl = clause_from(&mut c)?;
    if !c.done() {
        return Err(c.err("trailing input"));
    }
    Ok(cl)
}

fn multiline_cursor(text: &str) -> Result<Cursor> {
    let mut toks = Vec::new();
    let mut last = (1, 1);
    for (no, line) in lines(text) {
        toks.extend(lex(line, no)?);
        last = (no, line.chars().count() + 1);
    }
    Ok(Cursor::new(toks, last.0, last.1))
}

fn clause_from(c: &mut Cursor) -> Result<OrderedClause> {
    let head = c.atom(true)?;
    let mut body = Vec::new();
    if c.eat(":-") {
        if c.keyword("true") {
        } else {
            body.push(c.atom(true)?);
            while c.eat(",") {
                body.push(c.atom(true)?);
            }
        }
    }
    c.expect(".")?;
    Ok(OrderedClause::new(head, body))
}

/// One clause per statement; all clauses must share the head predicate.
pub fn parse_definition(text: &str) -> Result<HornDefinition> {
    let mut c = multiline_cursor(text)?;
    let mut clauses = Vec::new();
    while !c.done() {
        clauses.push(clause_from(&mut c)?);
    }
    HornDefinition::new(clauses)
}

/// Constants appearing in the examples, in order of first appearance.
pub fn example_constants(e: &ExampleSet) -> Vec<Sym> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for a in e.positives.iter().chain(&e.negatives) {
        for c in a.consts().unwrap_or_default() {
            if seen.insert(c) {
                out.push(c);
            }
        }
    }
    out
}
