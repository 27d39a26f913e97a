//! Boolean constraint instances: literals, typed clauses, formulas.
//!
//! Clauses are normalized on insertion into a [`Formula`]: tautologies and
//! contradictions are dropped into counters, duplicate literals are merged,
//! and `Generic` truth-table clauses are rewritten into the canonical kind
//! that computes the same function. A normalized formula therefore only
//! holds `Unit`, `Or`, `Xor2` and `And2` clauses.

mod io;
mod stats;

pub use io::{parse, parse_str, parse_with_comments, write_mcsp, ClauseReader, Dialect, Header, Item, ParseError, ParsedFile};
pub use stats::{stats, FormulaStats};

use std::fmt;
use std::num::NonZeroU32;

use thiserror::Error;

/// A possibly negated Boolean variable. Variables are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    var: NonZeroU32,
    negated: bool,
}

impl Literal {
    /// Panics if `var` is zero.
    pub fn new(var: u32, negated: bool) -> Self {
        let var = NonZeroU32::new(var).expect("variable indices are 1-based");
        Literal { var, negated }
    }

    pub fn pos(var: u32) -> Self {
        Literal::new(var, false)
    }

    pub fn neg(var: u32) -> Self {
        Literal::new(var, true)
    }

    /// Literal that is true exactly when `var` takes `value`.
    pub fn with_value(var: u32, value: bool) -> Self {
        Literal::new(var, !value)
    }

    /// Signed DIMACS encoding; `None` for 0 or out-of-range magnitudes.
    pub fn from_dimacs(code: i64) -> Option<Self> {
        let var = u32::try_from(code.unsigned_abs()).ok()?;
        let var = NonZeroU32::new(var)?;
        Some(Literal {
            var,
            negated: code < 0,
        })
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var.get());
        if self.negated {
            -v
        } else {
            v
        }
    }

    pub fn var(self) -> u32 {
        self.var.get()
    }

    pub fn is_negated(self) -> bool {
        self.negated
    }

    pub fn negate(self) -> Self {
        Literal {
            negated: !self.negated,
            ..self
        }
    }

    /// Truth value of the literal when its variable is `var_value`.
    #[inline]
    pub fn value(self, var_value: bool) -> bool {
        var_value != self.negated
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "¬x{}", self.var)
        } else {
            write!(f, "x{}", self.var)
        }
    }
}

/// A binary Boolean function stored as four bits; bit `2a + b` is `f(a, b)`.
///
/// The textual form lists `f(0,0) f(0,1) f(1,0) f(1,1)`, so `0111` is OR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TruthTable(u8);

impl TruthTable {
    pub const OR: TruthTable = TruthTable(0b1110);
    pub const AND: TruthTable = TruthTable(0b1000);
    pub const XOR: TruthTable = TruthTable(0b0110);

    /// Only the low four bits are kept.
    pub fn from_bits(bits: u8) -> Self {
        TruthTable(bits & 0xF)
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    /// Builds the table of an arbitrary two-input function.
    pub fn from_fn(f: impl Fn(bool, bool) -> bool) -> Self {
        let mut bits = 0u8;
        for row in 0..4u8 {
            if f(row & 2 != 0, row & 1 != 0) {
                bits |= 1 << row;
            }
        }
        TruthTable(bits)
    }

    #[inline]
    pub fn get(self, a: bool, b: bool) -> bool {
        let row = (usize::from(a) << 1) | usize::from(b);
        self.0 >> row & 1 == 1
    }

    pub fn ones(self) -> u32 {
        self.0.count_ones()
    }

    pub fn depends_on_first(self) -> bool {
        self.get(false, false) != self.get(true, false) || self.get(false, true) != self.get(true, true)
    }

    pub fn depends_on_second(self) -> bool {
        self.get(false, false) != self.get(false, true) || self.get(true, false) != self.get(true, true)
    }
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in 0..4 {
            f.write_str(if self.0 >> row & 1 == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl std::str::FromStr for TruthTable {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        if s.len() != 4 {
            return Err(());
        }
        let mut bits = 0u8;
        for (row, c) in s.bytes().enumerate() {
            match c {
                b'0' => {}
                b'1' => bits |= 1 << row,
                _ => return Err(()),
            }
        }
        Ok(TruthTable(bits))
    }
}

/// Predicate types of binary Boolean functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PredicateType {
    /// Depends on at most one input.
    Tr,
    /// Exactly three satisfying rows.
    Or,
    /// Two satisfying rows and depends on both inputs.
    Xor,
    /// Exactly one satisfying row.
    And,
}

impl PredicateType {
    pub const ALL: [PredicateType; 4] = [
        PredicateType::Tr,
        PredicateType::Or,
        PredicateType::Xor,
        PredicateType::And,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PredicateType::Tr => "TR",
            PredicateType::Or => "OR",
            PredicateType::Xor => "XOR",
            PredicateType::And => "AND",
        }
    }
}

pub fn classify_predicate(tt: TruthTable) -> PredicateType {
    if !(tt.depends_on_first() && tt.depends_on_second()) {
        return PredicateType::Tr;
    }
    match tt.ones() {
        3 => PredicateType::Or,
        1 => PredicateType::And,
        _ => PredicateType::Xor,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClauseKind {
    Unit,
    Or,
    Xor2,
    And2,
    Generic,
}

impl ClauseKind {
    pub fn tag(self) -> char {
        match self {
            ClauseKind::Unit => 'u',
            ClauseKind::Or => 'o',
            ClauseKind::Xor2 => 'x',
            ClauseKind::And2 => 'a',
            ClauseKind::Generic => 'g',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    kind: ClauseKind,
    literals: Vec<Literal>,
    table: Option<TruthTable>,
}

/// Result of normalizing a single clause.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Normalized {
    Clause(Clause),
    Tautology,
    Contradiction,
}

impl Clause {
    pub fn unit(lit: Literal) -> Self {
        Clause {
            kind: ClauseKind::Unit,
            literals: vec![lit],
            table: None,
        }
    }

    pub fn or(literals: impl IntoIterator<Item = Literal>) -> Self {
        Clause {
            kind: ClauseKind::Or,
            literals: literals.into_iter().collect(),
            table: None,
        }
    }

    pub fn xor2(a: Literal, b: Literal) -> Self {
        Clause {
            kind: ClauseKind::Xor2,
            literals: vec![a, b],
            table: None,
        }
    }

    pub fn and2(a: Literal, b: Literal) -> Self {
        Clause {
            kind: ClauseKind::And2,
            literals: vec![a, b],
            table: None,
        }
    }

    /// `f(a, b)` where `a`, `b` are the *literal* values.
    pub fn generic(table: TruthTable, a: Literal, b: Literal) -> Self {
        Clause {
            kind: ClauseKind::Generic,
            literals: vec![a, b],
            table: Some(table),
        }
    }

    pub fn kind(&self) -> ClauseKind {
        self.kind
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    /// Number of literal slots (a repeated literal counts twice).
    pub fn arity(&self) -> usize {
        self.literals.len()
    }

    pub fn table(&self) -> Option<TruthTable> {
        self.table
    }

    pub fn max_var(&self) -> u32 {
        self.literals.iter().map(|l| l.var()).max().unwrap_or(0)
    }

    /// Evaluates the clause; `value(v)` gives the value of variable `v`.
    pub fn eval(&self, value: impl Fn(u32) -> bool) -> bool {
        let lit = |l: &Literal| l.value(value(l.var()));
        match self.kind {
            ClauseKind::Unit => lit(&self.literals[0]),
            ClauseKind::Or => self.literals.iter().any(lit),
            ClauseKind::Xor2 => lit(&self.literals[0]) != lit(&self.literals[1]),
            ClauseKind::And2 => lit(&self.literals[0]) && lit(&self.literals[1]),
            ClauseKind::Generic => {
                let table = self.table.expect("generic clause carries a table");
                table.get(lit(&self.literals[0]), lit(&self.literals[1]))
            }
        }
    }

    /// Distinct variables in order of first appearance.
    pub fn vars(&self) -> Vec<u32> {
        let mut vars: Vec<u32> = Vec::with_capacity(self.literals.len());
        for l in &self.literals {
            if !vars.contains(&l.var()) {
                vars.push(l.var());
            }
        }
        vars
    }

    /// Table of the clause as a function of its (at most two) variables.
    ///
    /// For single-variable clauses the second input is ignored.
    fn var_table(&self) -> Option<(u32, Option<u32>, TruthTable)> {
        let vars = self.vars();
        match vars.as_slice() {
            [] => None,
            [u] => {
                let u = *u;
                Some((u, None, TruthTable::from_fn(|a, _| self.eval(|_| a))))
            }
            [u, v] => {
                let (u, v) = (*u, *v);
                let table = TruthTable::from_fn(|a, b| self.eval(|x| if x == u { a } else { b }));
                Some((u, Some(v), table))
            }
            _ => None,
        }
    }

    /// Predicate type of the clause viewed as a function of its variables.
    /// `None` for clauses over three or more variables.
    pub fn predicate_type(&self) -> Option<PredicateType> {
        if self.literals.is_empty() {
            return Some(PredicateType::Tr);
        }
        self.var_table().map(|(_, _, t)| classify_predicate(t))
    }

    /// Canonical form: merges duplicate literals, detects constant clauses,
    /// and rewrites `Generic` into `Unit`/`Or`/`Xor2`/`And2`.
    pub fn normalize(self) -> Normalized {
        match self.kind {
            ClauseKind::Unit => Normalized::Clause(self),
            ClauseKind::Or => {
                let mut lits: Vec<Literal> = Vec::with_capacity(self.literals.len());
                for l in self.literals {
                    if lits.contains(&l.negate()) {
                        return Normalized::Tautology;
                    }
                    if !lits.contains(&l) {
                        lits.push(l);
                    }
                }
                match lits.len() {
                    0 => Normalized::Contradiction,
                    1 => Normalized::Clause(Clause::unit(lits[0])),
                    _ => Normalized::Clause(Clause::or(lits)),
                }
            }
            ClauseKind::Xor2 => {
                let (a, b) = (self.literals[0], self.literals[1]);
                if a.var() != b.var() {
                    Normalized::Clause(self)
                } else if a == b {
                    Normalized::Contradiction
                } else {
                    Normalized::Tautology
                }
            }
            ClauseKind::And2 => {
                let (a, b) = (self.literals[0], self.literals[1]);
                if a.var() == b.var() && a != b {
                    Normalized::Contradiction
                } else {
                    Normalized::Clause(self)
                }
            }
            ClauseKind::Generic => {
                let (u, v, table) = self.var_table().expect("generic clauses have two literals");
                canonical_from_table(u, v, table)
            }
        }
    }
}

fn canonical_from_table(u: u32, v: Option<u32>, table: TruthTable) -> Normalized {
    match table.ones() {
        0 => return Normalized::Contradiction,
        4 => return Normalized::Tautology,
        _ => {}
    }
    let Some(v) = v.filter(|_| table.depends_on_second()) else {
        // function of x_u only
        return Normalized::Clause(Clause::unit(Literal::with_value(u, table.get(true, false))));
    };
    if !table.depends_on_first() {
        return Normalized::Clause(Clause::unit(Literal::with_value(v, table.get(false, true))));
    }
    let rows = [(false, false), (false, true), (true, false), (true, true)];
    match classify_predicate(table) {
        PredicateType::Or => {
            let &(a0, b0) = rows.iter().find(|(a, b)| !table.get(*a, *b)).expect("one falsifying row");
            Normalized::Clause(Clause::or([Literal::with_value(u, !a0), Literal::with_value(v, !b0)]))
        }
        PredicateType::And => {
            let &(a1, b1) = rows.iter().find(|(a, b)| table.get(*a, *b)).expect("one satisfying row");
            Normalized::Clause(Clause::and2(Literal::with_value(u, a1), Literal::with_value(v, b1)))
        }
        PredicateType::Xor => {
            let second = Literal::new(v, table.get(false, false));
            Normalized::Clause(Clause::xor2(Literal::pos(u), second))
        }
        PredicateType::Tr => unreachable!("depends on both inputs"),
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = match self.kind {
            ClauseKind::Unit | ClauseKind::Or => " ∨ ",
            ClauseKind::Xor2 => " ⊕ ",
            ClauseKind::And2 => " ∧ ",
            ClauseKind::Generic => ", ",
        };
        if let Some(t) = self.table {
            write!(f, "{t}")?;
        }
        f.write_str("(")?;
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str(sep)?;
            }
            write!(f, "{l}")?;
        }
        f.write_str(")")
    }
}

/// AND-clauses equivalent to a clause of arity at most two: for every
/// assignment exactly one output is satisfied iff the input clause is.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AndDecomposition {
    pub clauses: Vec<Clause>,
    /// 1 when the input is constant true, else 0.
    pub satisfied_constants: u64,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("variable x{var} exceeds the declared variable count {n}")]
    VarOutOfRange { var: u32, n: u32 },
    #[error("clause over {vars} variables cannot be decomposed into 2-AND clauses")]
    ArityTooLarge { vars: usize },
}

pub fn decompose_to_and(clause: &Clause) -> Result<AndDecomposition, FormulaError> {
    let vars = clause.vars();
    if vars.len() > 2 {
        return Err(FormulaError::ArityTooLarge { vars: vars.len() });
    }
    let Some((u, v, table)) = clause.var_table() else {
        // no literals: an empty OR, never satisfied
        return Ok(AndDecomposition {
            clauses: Vec::new(),
            satisfied_constants: 0,
        });
    };
    if table.ones() == 4 {
        return Ok(AndDecomposition {
            clauses: Vec::new(),
            satisfied_constants: 1,
        });
    }
    let clauses = match v {
        None => [true, false]
            .into_iter()
            .filter(|&a| table.get(a, false))
            .map(|a| Clause::and2(Literal::with_value(u, a), Literal::with_value(u, a)))
            .collect(),
        Some(v) => [(true, true), (true, false), (false, true), (false, false)]
            .into_iter()
            .filter(|&(a, b)| table.get(a, b))
            .map(|(a, b)| Clause::and2(Literal::with_value(u, a), Literal::with_value(v, b)))
            .collect(),
    };
    Ok(AndDecomposition {
        clauses,
        satisfied_constants: 0,
    })
}

/// A normalized constraint instance over variables `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Formula {
    n: u32,
    clauses: Vec<Clause>,
    tautology_count: u64,
    contradiction_count: u64,
}

impl Formula {
    pub fn new(n: u32) -> Self {
        Formula {
            n,
            ..Default::default()
        }
    }

    pub fn from_clauses(n: u32, clauses: impl IntoIterator<Item = Clause>) -> Result<Self, FormulaError> {
        let mut f = Formula::new(n);
        for c in clauses {
            f.push(c)?;
        }
        Ok(f)
    }

    /// Normalizes and appends a clause.
    pub fn push(&mut self, clause: Clause) -> Result<(), FormulaError> {
        let var = clause.max_var();
        if var > self.n {
            return Err(FormulaError::VarOutOfRange { var, n: self.n });
        }
        self.push_normalized(clause.normalize());
        Ok(())
    }

    pub(crate) fn push_normalized(&mut self, item: Normalized) {
        match item {
            Normalized::Clause(c) => self.clauses.push(c),
            Normalized::Tautology => self.tautology_count += 1,
            Normalized::Contradiction => self.contradiction_count += 1,
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of stored (non-constant) clauses.
    pub fn m(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn tautology_count(&self) -> u64 {
        self.tautology_count
    }

    pub fn contradiction_count(&self) -> u64 {
        self.contradiction_count
    }

    pub fn max_arity(&self) -> usize {
        self.clauses.iter().map(Clause::arity).max().unwrap_or(0)
    }

    /// Predicate types present among clauses over at most two variables.
    pub fn predicate_types(&self) -> Vec<PredicateType> {
        let mut types: Vec<PredicateType> = self.clauses.iter().filter_map(Clause::predicate_type).collect();
        types.sort();
        types.dedup();
        types
    }

    /// True when every clause is a `Unit` or an `Or` (a Max-kSAT instance).
    pub fn is_sat(&self) -> bool {
        self.clauses
            .iter()
            .all(|c| matches!(c.kind(), ClauseKind::Unit | ClauseKind::Or))
    }

    /// The same instance with every literal flipped.
    pub fn negated(&self) -> Formula {
        let clauses = self
            .clauses
            .iter()
            .map(|c| Clause {
                literals: c.literals.iter().map(|l| l.negate()).collect(),
                ..c.clone()
            })
            .collect();
        Formula { clauses, ..self.clone() }
    }

    /// Replaces every clause by its AND decomposition.
    pub fn to_and_form(&self) -> Result<Formula, FormulaError> {
        let mut out = Formula::new(self.n);
        out.tautology_count = self.tautology_count;
        out.contradiction_count = self.contradiction_count;
        for c in &self.clauses {
            let d = decompose_to_and(c)?;
            out.tautology_count += d.satisfied_constants;
            out.clauses.extend(d.clauses);
        }
        Ok(out)
    }
}
