//! Parser for the program text format.
//!
//! One clause per line is conventional but not required; clauses end with
//! `.` and `%` starts a comment running to end of line. Variables are single
//! uppercase letters mapped positionally (A=0, B=1, ...). Unknown predicate
//! names are declared on first use with the arity they appear at: the first
//! clause's head becomes the target, other clause heads are classified as
//! invented, and body-only predicates as primitives.

use std::collections::BTreeSet;

use smallvec::SmallVec;
use thiserror::Error;

use super::{Clause, Lit, PredicateKind, PredicateSymbol, Program};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("parse error at {line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: &'static str, found: String },
    #[error("predicate {name} used with arity {arity}, previously {prev}")]
    InconsistentArity { name: String, arity: u8, prev: u8 },
    #[error("predicate arity {0} out of range (must be 1 or 2)")]
    BadArity(usize),
    #[error("clause has no body (facts are not part of the format)")]
    MissingBody,
    #[error("program has no clauses")]
    EmptyProgram,
}

struct Scanner<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Self {
        Scanner { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { line: self.line, col: self.col, kind }
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        let found = match self.peek() {
            Some(c) => format!("{:?}", c as char),
            None => "end of input".to_string(),
        };
        self.error(ParseErrorKind::Unexpected { expected, found })
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek()?;
        self.pos += 1;
        if c == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_ascii_whitespace() {
                self.bump();
            } else if c == b'%' {
                while let Some(c) = self.bump() {
                    if c == b'\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, expected: u8, what: &'static str) -> Result<(), ParseError> {
        if self.peek() == Some(expected) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_lowercase() => {}
            _ => return Err(self.unexpected("predicate name")),
        }
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == b'_' {
                self.bump();
            } else {
                break;
            }
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string())
    }

    fn variable(&mut self) -> Result<u8, ParseError> {
        match self.peek() {
            Some(c) if c.is_ascii_uppercase() => {
                self.bump();
                Ok(c - b'A')
            }
            _ => Err(self.unexpected("variable (single uppercase letter)")),
        }
    }
}

struct RawLit {
    name: String,
    vars: SmallVec<[u8; 2]>,
    line: usize,
    col: usize,
}

fn parse_lit(s: &mut Scanner) -> Result<RawLit, ParseError> {
    s.skip_trivia();
    let (line, col) = (s.line, s.col);
    let name = s.ident()?;
    s.skip_trivia();
    s.eat(b'(', "'('")?;
    let mut vars = SmallVec::new();
    loop {
        s.skip_trivia();
        vars.push(s.variable()?);
        s.skip_trivia();
        match s.peek() {
            Some(b',') => {
                s.bump();
            }
            Some(b')') => {
                s.bump();
                break;
            }
            _ => return Err(s.unexpected("',' or ')'")),
        }
    }
    if vars.is_empty() || vars.len() > 2 {
        return Err(ParseError { line, col, kind: ParseErrorKind::BadArity(vars.len()) });
    }
    Ok(RawLit { name, vars, line, col })
}

struct RawClause {
    head: RawLit,
    body: Vec<RawLit>,
}

fn parse_clause(s: &mut Scanner) -> Result<RawClause, ParseError> {
    let head = parse_lit(s)?;
    s.skip_trivia();
    if s.peek() == Some(b'.') {
        let err = ParseError { line: s.line, col: s.col, kind: ParseErrorKind::MissingBody };
        return Err(err);
    }
    s.eat(b':', "':-'")?;
    s.eat(b'-', "':-'")?;
    let mut body = vec![parse_lit(s)?];
    loop {
        s.skip_trivia();
        match s.peek() {
            Some(b',') => {
                s.bump();
                body.push(parse_lit(s)?);
            }
            Some(b'.') => {
                s.bump();
                break;
            }
            _ => return Err(s.unexpected("',' or '.'")),
        }
    }
    Ok(RawClause { head, body })
}

/// Parses the text format back into a [`Program`], the inverse of
/// [`render_program`](super::render_program) up to structural equality.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut s = Scanner::new(text);
    let mut raw: Vec<RawClause> = Vec::new();
    loop {
        s.skip_trivia();
        if s.peek().is_none() {
            break;
        }
        raw.push(parse_clause(&mut s)?);
    }
    if raw.is_empty() {
        return Err(ParseError { line: s.line, col: s.col, kind: ParseErrorKind::EmptyProgram });
    }

    // Arity consistency across every occurrence; first use wins the record.
    let mut arities: Vec<(String, u8, usize, usize)> = Vec::new();
    for lit in raw.iter().flat_map(|c| std::iter::once(&c.head).chain(&c.body)) {
        let arity = lit.vars.len() as u8;
        match arities.iter().find(|(n, ..)| n == &lit.name) {
            Some(&(_, prev, ..)) if prev != arity => {
                return Err(ParseError {
                    line: lit.line,
                    col: lit.col,
                    kind: ParseErrorKind::InconsistentArity {
                        name: lit.name.clone(),
                        arity,
                        prev,
                    },
                });
            }
            Some(_) => {}
            None => arities.push((lit.name.clone(), arity, lit.line, lit.col)),
        }
    }

    let target_name = raw[0].head.name.clone();
    let head_names: Vec<&str> = raw.iter().map(|c| c.head.name.as_str()).collect();
    let kind_of = |name: &str| {
        if name == target_name {
            PredicateKind::LearnedTarget
        } else if head_names.contains(&name) {
            PredicateKind::Invented
        } else {
            PredicateKind::Primitive
        }
    };
    let symbol = |lit: &RawLit| PredicateSymbol {
        name: lit.name.clone(),
        arity: lit.vars.len() as u8,
        kind: kind_of(&lit.name),
    };

    let clauses: Vec<Clause> = raw
        .iter()
        .map(|c| Clause {
            head: Lit { pred: symbol(&c.head), vars: c.head.vars.clone() },
            body: c
                .body
                .iter()
                .map(|l| Lit { pred: symbol(l), vars: l.vars.clone() })
                .collect(),
            provenance: None,
        })
        .collect();

    let invented: BTreeSet<PredicateSymbol> = clauses
        .iter()
        .map(|c| c.head.pred.clone())
        .filter(|s| s.kind == PredicateKind::Invented)
        .collect();
    let target = clauses[0].head.pred.clone();
    Ok(Program { target, clauses, invented })
}

#[cfg(test)]
mod tests {
    use super::super::render_program;
    use super::*;

    #[test]
    fn parses_figure_style_listing() {
        let text = "build_95(A,B):-play_228(A,C),play_136_1(C,B).\n\
                    play_228(A,B):-play_52(A,B),uppercase(B).\n\
                    play_228(A,B):-skip1(A,C),play_228(C,B).\n\
                    play_136_1(A,B):-play_9(A,C),mk_uppercase(C,B).\n\
                    play_9(A,B):-skip1(A,C),mk_uppercase(C,B).\n\
                    play_52(A,B):-skip1(A,C),copy1(C,B).\n";
        let prog = parse_program(text).unwrap();
        assert_eq!(prog.clauses.len(), 6);
        assert_eq!(prog.target.name, "build_95");
        let defined: Vec<&str> =
            prog.defined_symbols().iter().map(|s| s.name.as_str()).collect();
        assert_eq!(defined, ["build_95", "play_228", "play_136_1", "play_9", "play_52"]);
        // round trip
        let rendered = render_program(&prog).unwrap();
        assert_eq!(rendered, text);
        assert!(parse_program(&rendered).unwrap().structurally_eq(&prog));
    }

    #[test]
    fn positioned_error_on_malformed_line() {
        let text = "f(A,B):-q(A,C),r(C,B).\nf(A,B):-q(A,C) r(C,B).\n";
        let err = parse_program(text).unwrap_err();
        assert_eq!(err.line, 2);
        assert!(matches!(err.kind, ParseErrorKind::Unexpected { .. }));
    }

    #[test]
    fn arity_inconsistency_is_reported() {
        let text = "f(A,B):-q(A,C),r(C,B).\ng(A,B):-q(A),r(A,B).\n";
        let err = parse_program(text).unwrap_err();
        assert!(matches!(
            err.kind,
            ParseErrorKind::InconsistentArity { ref name, arity: 1, prev: 2 } if name == "q"
        ));
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "% listing\n\nf(A,B):-q(A,B). % ident shape\n";
        let prog = parse_program(text).unwrap();
        assert_eq!(prog.clauses.len(), 1);
    }

    #[test]
    fn facts_are_rejected() {
        let err = parse_program("f(A,B).\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::MissingBody);
    }

    #[test]
    fn empty_input_is_rejected() {
        let err = parse_program("% nothing here\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::EmptyProgram);
    }
}
