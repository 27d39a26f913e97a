//! Exact optimum by exhaustive search.
//!
//! Clauses are compiled to bit masks over the assignment word. Assignments
//! are visited in Gray-code order, so each step flips one variable and only
//! the clauses touching it are re-evaluated.

use thiserror::Error;

use crate::assignment::Assignment;
use crate::formula::{Clause, ClauseKind, Formula};

pub const DEFAULT_N_LIMIT: u32 = 24;
/// Hard ceiling imposed by the 64-bit assignment word.
const WORD_LIMIT: u32 = 40;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{n} variables exceed the exhaustive-search limit of {limit}")]
    TooManyVariables { n: u32, limit: u32 },
    #[error("assignment has {got} values but the formula has {expected} variables")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    /// Optimum including tautological clauses.
    pub val: u64,
    pub argmax: Assignment,
    pub evaluated: u64,
}

#[derive(Debug, Clone, Copy)]
enum Compiled {
    Or { pos: u64, neg: u64 },
    And { pos: u64, neg: u64 },
    Xor { a: u32, b: u32, parity: u64 },
    Table { a: u32, b: u32, flip: u8, table: u8 },
}

impl Compiled {
    fn new(c: &Clause) -> Self {
        let bit = |v: u32| 1u64 << (v - 1);
        let (mut pos, mut neg) = (0u64, 0u64);
        for l in c.literals() {
            if l.is_negated() {
                neg |= bit(l.var());
            } else {
                pos |= bit(l.var());
            }
        }
        match c.kind() {
            ClauseKind::Unit | ClauseKind::Or => Compiled::Or { pos, neg },
            ClauseKind::And2 => Compiled::And { pos, neg },
            ClauseKind::Xor2 => {
                let [a, b] = [c.literals()[0], c.literals()[1]];
                Compiled::Xor {
                    a: a.var() - 1,
                    b: b.var() - 1,
                    parity: u64::from(a.is_negated() != b.is_negated()),
                }
            }
            ClauseKind::Generic => {
                let [a, b] = [c.literals()[0], c.literals()[1]];
                Compiled::Table {
                    a: a.var() - 1,
                    b: b.var() - 1,
                    flip: (u8::from(a.is_negated()) << 1) | u8::from(b.is_negated()),
                    table: c.table().expect("generic clause carries a table").bits(),
                }
            }
        }
    }

    #[inline]
    fn eval(self, x: u64) -> bool {
        match self {
            Compiled::Or { pos, neg } => x & pos != 0 || !x & neg != 0,
            Compiled::And { pos, neg } => x & pos == pos && x & neg == 0,
            Compiled::Xor { a, b, parity } => ((x >> a) ^ (x >> b) ^ parity) & 1 == 1,
            Compiled::Table { a, b, flip, table } => {
                let row = (((x >> a & 1) << 1 | (x >> b & 1)) as u8) ^ flip;
                table >> row & 1 == 1
            }
        }
    }
}

pub fn exact_val(formula: &Formula, n_limit: u32) -> Result<OracleResult, OracleError> {
    let n = formula.n();
    let limit = n_limit.min(WORD_LIMIT);
    if n > limit {
        return Err(OracleError::TooManyVariables { n, limit });
    }
    let compiled: Vec<Compiled> = formula.clauses().iter().map(Compiled::new).collect();
    let mut touching: Vec<Vec<u32>> = vec![Vec::new(); n as usize];
    for (k, c) in formula.clauses().iter().enumerate() {
        for v in c.vars() {
            touching[v as usize - 1].push(k as u32);
        }
    }

    let mut x = 0u64;
    let mut sat: Vec<bool> = compiled.iter().map(|c| c.eval(x)).collect();
    let mut count = sat.iter().filter(|&&s| s).count() as u64;
    let (mut best, mut best_x) = (count, x);
    let total = 1u64 << n;
    for step in 1..total {
        let flip = step.trailing_zeros();
        x ^= 1 << flip;
        for &k in &touching[flip as usize] {
            let k = k as usize;
            let now = compiled[k].eval(x);
            if now != sat[k] {
                sat[k] = now;
                if now {
                    count += 1;
                } else {
                    count -= 1;
                }
            }
        }
        if count > best {
            best = count;
            best_x = x;
        }
    }
    Ok(OracleResult {
        val: best + formula.tautology_count(),
        argmax: Assignment::from_mask(best_x, n as usize),
        evaluated: total,
    })
}

/// Fast repeated evaluation of one formula on assignment words (bit `v-1`
/// is variable `v`).
#[derive(Debug, Clone)]
pub struct Evaluator {
    compiled: Vec<Compiled>,
    tautologies: u64,
}

impl Evaluator {
    /// Panics if the formula has more than 64 variables.
    pub fn new(formula: &Formula) -> Self {
        assert!(formula.n() <= 64, "assignment words hold at most 64 variables");
        Evaluator {
            compiled: formula.clauses().iter().map(Compiled::new).collect(),
            tautologies: formula.tautology_count(),
        }
    }

    /// Satisfied clauses, tautologies included.
    pub fn count(&self, x: u64) -> u64 {
        self.compiled.iter().filter(|c| c.eval(x)).count() as u64 + self.tautologies
    }
}

/// Number of satisfied clauses (including tautologies) under `sigma`.
pub fn val_of(formula: &Formula, sigma: &Assignment) -> Result<u64, OracleError> {
    if sigma.len() != formula.n() as usize {
        return Err(OracleError::LengthMismatch {
            expected: formula.n() as usize,
            got: sigma.len(),
        });
    }
    let sat = formula.clauses().iter().filter(|c| c.eval(|v| sigma.get(v))).count() as u64;
    Ok(sat + formula.tautology_count())
}
