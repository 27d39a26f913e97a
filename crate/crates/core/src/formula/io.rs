//! Text format for instances.
//!
//! ```text
//! c optional comments
//! p mcsp <n> <m>          (or: p cnf <n> <m>)
//! u 1 0                   unit
//! o 1 -2 3 0              disjunction of any width
//! x 1 2 0                 xor of two literals
//! a 1 -2 0                and of two literals
//! g 0111 1 2 0            truth table f(00) f(01) f(10) f(11) over two literals
//! ```
//!
//! In the `cnf` dialect every clause line is a bare literal list. The clause
//! count in the header is informational and not enforced.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{Clause, ClauseKind, Formula, Literal, Normalized, TruthTable};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: malformed header: {reason}")]
    MalformedHeader { line: usize, reason: String },
    #[error("no `p` header line found")]
    MissingHeader,
    #[error("line {line}: clause is not terminated by 0")]
    MissingTerminator { line: usize },
    #[error("line {line}: tokens after the terminating 0")]
    TrailingTokens { line: usize },
    #[error("line {line}: variable {var} exceeds n = {n}")]
    VarOutOfRange { line: usize, var: u64, n: u32 },
    #[error("line {line}: unknown clause kind `{tag}`")]
    UnknownKind { line: usize, tag: String },
    #[error("line {line}: invalid literal `{token}`")]
    InvalidLiteral { line: usize, token: String },
    #[error("line {line}: `{tag}` clause needs {expected} literal(s), found {found}")]
    ArityMismatch {
        line: usize,
        tag: char,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: malformed truth table `{token}`")]
    MalformedTruthTable { line: usize, token: String },
    #[error("read error: {0}")]
    Io(#[from] io::Error),
}

impl ParseError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::MalformedHeader { line, .. }
            | ParseError::MissingTerminator { line }
            | ParseError::TrailingTokens { line }
            | ParseError::VarOutOfRange { line, .. }
            | ParseError::UnknownKind { line, .. }
            | ParseError::InvalidLiteral { line, .. }
            | ParseError::ArityMismatch { line, .. }
            | ParseError::MalformedTruthTable { line, .. } => Some(*line),
            ParseError::MissingHeader | ParseError::Io(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dialect {
    Mcsp,
    Cnf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub dialect: Dialect,
    pub n: u32,
    pub m: u64,
}

/// Streaming clause reader. Yields one normalized clause per clause line and
/// never holds more than the current line in memory (plus comment lines).
pub struct ClauseReader<R> {
    input: R,
    header: Header,
    line_no: usize,
    buf: String,
    comments: Vec<String>,
}

/// One parsed clause line after normalization.
pub type Item = Normalized;

impl<R: BufRead> ClauseReader<R> {
    /// Consumes leading comments and the header line.
    pub fn new(input: R) -> Result<Self, ParseError> {
        let mut reader = ClauseReader {
            input,
            header: Header {
                dialect: Dialect::Mcsp,
                n: 0,
                m: 0,
            },
            line_no: 0,
            buf: String::new(),
            comments: Vec::new(),
        };
        loop {
            if !reader.next_line()? {
                return Err(ParseError::MissingHeader);
            }
            let line = reader.buf.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(c) = comment_text(line) {
                reader.comments.push(c.to_string());
                continue;
            }
            reader.header = parse_header(line, reader.line_no)?;
            return Ok(reader);
        }
    }

    pub fn header(&self) -> Header {
        self.header
    }

    /// Comment lines seen so far, without the leading `c`.
    pub fn comments(&self) -> &[String] {
        &self.comments
    }

    fn next_line(&mut self) -> io::Result<bool> {
        self.buf.clear();
        let read = self.input.read_line(&mut self.buf)?;
        self.line_no += 1;
        Ok(read > 0)
    }

    fn parse_line(&self, line: &str) -> Result<Item, ParseError> {
        let line_no = self.line_no;
        let mut tokens = line.split_whitespace();
        let (tag, table) = match self.header.dialect {
            Dialect::Cnf => ('o', None),
            Dialect::Mcsp => {
                let tok = tokens.next().expect("line is non-empty");
                let tag = match tok {
                    "u" | "o" | "x" | "a" | "g" => tok.chars().next().unwrap(),
                    "p" => {
                        return Err(ParseError::MalformedHeader {
                            line: line_no,
                            reason: "duplicate header".into(),
                        })
                    }
                    _ => {
                        return Err(ParseError::UnknownKind {
                            line: line_no,
                            tag: tok.to_string(),
                        })
                    }
                };
                let table = if tag == 'g' {
                    let tok = tokens.next().unwrap_or("");
                    let table: TruthTable = tok.parse().map_err(|_| ParseError::MalformedTruthTable {
                        line: line_no,
                        token: tok.to_string(),
                    })?;
                    Some(table)
                } else {
                    None
                };
                (tag, table)
            }
        };

        let mut lits = Vec::new();
        let mut terminated = false;
        for tok in tokens.by_ref() {
            let code: i64 = tok.parse().map_err(|_| ParseError::InvalidLiteral {
                line: line_no,
                token: tok.to_string(),
            })?;
            if code == 0 {
                terminated = true;
                break;
            }
            let var = code.unsigned_abs();
            if var > u64::from(self.header.n) {
                return Err(ParseError::VarOutOfRange {
                    line: line_no,
                    var,
                    n: self.header.n,
                });
            }
            lits.push(Literal::from_dimacs(code).expect("nonzero and within n"));
        }
        if !terminated {
            return Err(ParseError::MissingTerminator { line: line_no });
        }
        if tokens.next().is_some() {
            return Err(ParseError::TrailingTokens { line: line_no });
        }

        let expected = match tag {
            'u' => Some(1),
            'x' | 'a' | 'g' => Some(2),
            _ => None,
        };
        if let Some(expected) = expected {
            if lits.len() != expected {
                return Err(ParseError::ArityMismatch {
                    line: line_no,
                    tag,
                    expected,
                    found: lits.len(),
                });
            }
        }
        let clause = match tag {
            'u' => Clause::unit(lits[0]),
            'x' => Clause::xor2(lits[0], lits[1]),
            'a' => Clause::and2(lits[0], lits[1]),
            'g' => Clause::generic(table.expect("parsed above"), lits[0], lits[1]),
            _ => Clause::or(lits),
        };
        Ok(clause.normalize())
    }
}

impl<R: BufRead> Iterator for ClauseReader<R> {
    type Item = Result<Item, ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            match self.next_line() {
                Ok(false) => return None,
                Ok(true) => {}
                Err(e) => return Some(Err(e.into())),
            }
            let line = self.buf.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(c) = comment_text(line) {
                let c = c.to_string();
                self.comments.push(c);
                continue;
            }
            let line = line.to_string();
            return Some(self.parse_line(&line));
        }
    }
}

fn comment_text(line: &str) -> Option<&str> {
    line.strip_prefix('c').map(str::trim)
}

fn parse_header(line: &str, line_no: usize) -> Result<Header, ParseError> {
    let bad = |reason: &str| ParseError::MalformedHeader {
        line: line_no,
        reason: reason.to_string(),
    };
    let tokens: Vec<&str> = line.split_whitespace().collect();
    let [p, dialect, n, m] = tokens.as_slice() else {
        return Err(bad("expected `p <mcsp|cnf> <n> <m>`"));
    };
    if *p != "p" {
        return Err(bad("expected a `p` line"));
    }
    let dialect = match *dialect {
        "mcsp" => Dialect::Mcsp,
        "cnf" => Dialect::Cnf,
        _ => return Err(bad("dialect must be `mcsp` or `cnf`")),
    };
    let n = n.parse().map_err(|_| bad("variable count is not a non-negative integer"))?;
    let m = m.parse().map_err(|_| bad("clause count is not a non-negative integer"))?;
    Ok(Header { dialect, n, m })
}

/// A parsed file: the formula plus its header and comment lines.
#[derive(Debug, Clone)]
pub struct ParsedFile {
    pub formula: Formula,
    pub header: Header,
    pub comments: Vec<String>,
}

pub fn parse_with_comments<R: BufRead>(input: R) -> Result<ParsedFile, ParseError> {
    let mut reader = ClauseReader::new(input)?;
    let mut formula = Formula::new(reader.header().n);
    for item in reader.by_ref() {
        formula.push_normalized(item?);
    }
    Ok(ParsedFile {
        formula,
        header: reader.header(),
        comments: reader.comments,
    })
}

pub fn parse<R: BufRead>(input: R) -> Result<Formula, ParseError> {
    parse_with_comments(input).map(|p| p.formula)
}

pub fn parse_str(text: &str) -> Result<Formula, ParseError> {
    parse(text.as_bytes())
}

fn write_literals(out: &mut impl Write, lits: &[Literal]) -> io::Result<()> {
    for l in lits {
        write!(out, " {}", l.to_dimacs())?;
    }
    writeln!(out, " 0")
}

/// Writes a formula in the `mcsp` dialect. Constant clauses are written as
/// `o 1 -1 0` (tautology) and `a 1 -1 0` (contradiction) so that reading
/// the output back restores both counters.
pub fn write_mcsp(formula: &Formula, out: &mut impl Write) -> io::Result<()> {
    let constants = formula.tautology_count() + formula.contradiction_count();
    let n = if constants > 0 { formula.n().max(1) } else { formula.n() };
    writeln!(out, "p mcsp {} {}", n, formula.m() as u64 + constants)?;
    for c in formula.clauses() {
        write!(out, "{}", c.kind().tag())?;
        if c.kind() == ClauseKind::Generic {
            write!(out, " {}", c.table().expect("generic clause carries a table"))?;
        }
        write_literals(out, c.literals())?;
    }
    for _ in 0..formula.tautology_count() {
        writeln!(out, "o 1 -1 0")?;
    }
    for _ in 0..formula.contradiction_count() {
        writeln!(out, "a 1 -1 0")?;
    }
    Ok(())
}

impl Formula {
    pub fn to_mcsp_string(&self) -> String {
        let mut buf = Vec::new();
        write_mcsp(self, &mut buf).expect("writing to memory cannot fail");
        String::from_utf8(buf).expect("output is ASCII")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_and_clause() {
        let f = parse_str("p mcsp 2 1\na 1 -2 0").unwrap();
        assert_eq!(f.n(), 2);
        assert_eq!(f.clauses(), &[Clause::and2(Literal::pos(1), Literal::neg(2))]);
    }

    #[test]
    fn reads_cnf() {
        let f = parse_str("p cnf 3 2\n1 2 3 0\n-1 0").unwrap();
        assert_eq!(
            f.clauses(),
            &[
                Clause::or([Literal::pos(1), Literal::pos(2), Literal::pos(3)]),
                Clause::unit(Literal::neg(1)),
            ]
        );
    }

    #[test]
    fn tautology_is_counted() {
        let f = parse_str("p mcsp 1 1\no 1 -1 0").unwrap();
        assert_eq!(f.m(), 0);
        assert_eq!(f.tautology_count(), 1);
    }

    #[test]
    fn comments_and_generic() {
        let text = "c planted 1 0\np mcsp 2 1\nc mid\ng 0110 1 2 0\n";
        let p = parse_with_comments(text.as_bytes()).unwrap();
        assert_eq!(p.comments, vec!["planted 1 0".to_string(), "mid".to_string()]);
        assert_eq!(p.formula.clauses(), &[Clause::xor2(Literal::pos(1), Literal::pos(2))]);
    }

    type Case = (&'static str, fn(&ParseError) -> bool, usize);

    #[test]
    fn error_kinds_carry_lines() {
        let cases: [Case; 8] = [
            ("p mcsp x 1\n", |e| matches!(e, ParseError::MalformedHeader { .. }), 1),
            ("c\np mcsp 2 1\na 1 2\n", |e| matches!(e, ParseError::MissingTerminator { .. }), 3),
            ("p mcsp 2 1\nu 3 0\n", |e| matches!(e, ParseError::VarOutOfRange { var: 3, .. }), 2),
            ("p mcsp 2 1\nz 1 0\n", |e| matches!(e, ParseError::UnknownKind { .. }), 2),
            ("p mcsp 2 1\na 1 0\n", |e| matches!(e, ParseError::ArityMismatch { .. }), 2),
            ("p mcsp 2 1\ng 01 1 2 0\n", |e| matches!(e, ParseError::MalformedTruthTable { .. }), 2),
            ("p mcsp 2 1\nu q 0\n", |e| matches!(e, ParseError::InvalidLiteral { .. }), 2),
            ("p mcsp 2 1\nu 1 0 2\n", |e| matches!(e, ParseError::TrailingTokens { .. }), 2),
        ];
        for (text, check, line) in cases {
            let err = parse_str(text).unwrap_err();
            assert!(check(&err), "{text:?} gave {err}");
            assert_eq!(err.line(), Some(line), "{text:?}");
        }
        assert!(matches!(parse_str("c only\n"), Err(ParseError::MissingHeader)));
    }

    #[test]
    fn round_trip_with_counters() {
        let text = "p mcsp 3 4\no 1 -2 3 0\nx 1 2 0\no 2 -2 0\nx 3 3 0\n";
        let f = parse_str(text).unwrap();
        assert_eq!((f.tautology_count(), f.contradiction_count()), (1, 1));
        let again = parse_str(&f.to_mcsp_string()).unwrap();
        assert_eq!(again, f);
    }
}
