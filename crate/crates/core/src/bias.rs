//! Per-variable bias and total bias, exact or ℓ1-sketched.
//!
//! An `r`-literal clause adds `±2^{1-r}` to the signed count of each of its
//! variables (sign by literal polarity); a variable's bias is the absolute
//! value of that count and the total bias is the ℓ1 norm. To stay in
//! integers every weight is multiplied by `2^{k_max-1}`, so an `r`-clause
//! contributes `±2^{k_max-r}`.
//!
//! With `k_max = 2` this gives `bias_i = ½|2pos¹ + pos² − 2neg¹ − neg²|`.

use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::formula::{Clause, Formula};
use crate::l1sketch::{ExactL1, L1Sketch, SketchError};

/// Largest supported arity; `2^{k_max-1}` must fit an `i64` update.
pub const MAX_K: u32 = 63;

#[derive(Debug, Error, PartialEq)]
pub enum BiasError {
    #[error("k_max must be in 1..={MAX_K}, got {0}")]
    BadKMax(u32),
    #[error("clause of arity {arity} exceeds k_max = {k_max}")]
    ArityExceedsKMax { arity: usize, k_max: u32 },
    #[error("accumulators differ in mode, k_max or sketch layout")]
    Incompatible,
    #[error(transparent)]
    Sketch(#[from] SketchError),
}

#[derive(Debug, Clone)]
enum Store {
    Exact(ExactL1),
    Sketched(L1Sketch),
}

#[derive(Debug, Clone)]
pub struct BiasAccumulator {
    k_max: u32,
    store: Store,
}

fn check_k(k_max: u32) -> Result<(), BiasError> {
    if (1..=MAX_K).contains(&k_max) {
        Ok(())
    } else {
        Err(BiasError::BadKMax(k_max))
    }
}

impl BiasAccumulator {
    pub fn exact(k_max: u32) -> Result<Self, BiasError> {
        check_k(k_max)?;
        Ok(BiasAccumulator {
            k_max,
            store: Store::Exact(ExactL1::new()),
        })
    }

    pub fn sketched(k_max: u32, delta: f64, t: u64, seed: u64) -> Result<Self, BiasError> {
        check_k(k_max)?;
        let unit = 0.5f64.powi(k_max as i32 - 1);
        let sketch = L1Sketch::new(delta, t, seed)?.with_scale(unit);
        Ok(BiasAccumulator {
            k_max,
            store: Store::Sketched(sketch),
        })
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.store, Store::Exact(_))
    }

    pub fn ingest_clause(&mut self, clause: &Clause) -> Result<(), BiasError> {
        let arity = clause.arity();
        if arity == 0 {
            return Ok(());
        }
        if arity > self.k_max as usize {
            return Err(BiasError::ArityExceedsKMax {
                arity,
                k_max: self.k_max,
            });
        }
        let weight = 1i64 << (self.k_max as usize - arity);
        for l in clause.literals() {
            let v = if l.is_negated() { -weight } else { weight };
            let i = u64::from(l.var());
            match &mut self.store {
                Store::Exact(e) => e.update(i, v),
                Store::Sketched(s) => s.update(i, v),
            }
        }
        Ok(())
    }

    pub fn ingest_formula(&mut self, formula: &Formula) -> Result<(), BiasError> {
        formula.clauses().iter().try_for_each(|c| self.ingest_clause(c))
    }

    /// Total bias: exact in exact mode, a `(1±δ)` estimate when sketched.
    pub fn total_bias(&self) -> f64 {
        match &self.store {
            Store::Exact(e) => self.unscale(e.norm()),
            Store::Sketched(s) => s.estimate(),
        }
    }

    fn unscale(&self, raw: u128) -> f64 {
        raw as f64 * 0.5f64.powi(self.k_max as i32 - 1)
    }

    fn denominator(&self) -> BigInt {
        BigInt::from(1u8) << (self.k_max - 1)
    }

    /// Exact total bias as a rational; `None` when sketched.
    pub fn total_bias_exact(&self) -> Option<BigRational> {
        match &self.store {
            Store::Exact(e) => Some(BigRational::new(BigInt::from(e.norm()), self.denominator())),
            Store::Sketched(_) => None,
        }
    }

    /// Scaled signed count `t_i`; `None` when sketched.
    pub fn signed_count(&self, var: u32) -> Option<i128> {
        match &self.store {
            Store::Exact(e) => Some(e.get(u64::from(var))),
            Store::Sketched(_) => None,
        }
    }

    /// Exact `bias_i`; `None` when sketched.
    pub fn bias_of(&self, var: u32) -> Option<BigRational> {
        let t = self.signed_count(var)?;
        Some(BigRational::new(BigInt::from(t.unsigned_abs()), self.denominator()))
    }

    pub fn merge(&mut self, other: &BiasAccumulator) -> Result<(), BiasError> {
        if self.k_max != other.k_max {
            return Err(BiasError::Incompatible);
        }
        match (&mut self.store, &other.store) {
            (Store::Exact(a), Store::Exact(b)) => {
                a.merge(b);
                Ok(())
            }
            (Store::Sketched(a), Store::Sketched(b)) => a.merge(b).map_err(|_| BiasError::Incompatible),
            _ => Err(BiasError::Incompatible),
        }
    }

    pub fn memory_bytes(&self) -> usize {
        match &self.store {
            Store::Exact(e) => e.memory_bytes(),
            Store::Sketched(s) => s.memory_bytes(),
        }
    }
}

/// Exact total bias of a formula under the given arity scaling.
pub fn exact_bias(formula: &Formula, k_max: u32) -> Result<BigRational, BiasError> {
    let mut acc = BiasAccumulator::exact(k_max)?;
    acc.ingest_formula(formula)?;
    Ok(acc.total_bias_exact().expect("exact accumulator"))
}

/// Scaled signed counts `t_1..t_n` (index 0 is variable 1) for `k_max`.
pub fn signed_counts(formula: &Formula, k_max: u32) -> Result<Vec<i128>, BiasError> {
    let mut acc = BiasAccumulator::exact(k_max)?;
    acc.ingest_formula(formula)?;
    Ok((1..=formula.n()).map(|v| acc.signed_count(v).unwrap_or(0)).collect())
}
