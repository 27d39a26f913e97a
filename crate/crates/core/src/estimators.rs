//! Value estimators computed from clause counts and a (possibly
//! approximate) total bias `B`.
//!
//! The closed forms are generic over [`Scalar`] so the same code runs in
//! `f64` for sketched inputs and in exact rationals for the exact backend.
//! Exact results are rounded to `f64` once at the end; rounding to nearest
//! is monotone, so an exact `v ≤ val` survives the conversion.
//!
//! Every estimator clamps `B` to the largest bias its class admits and caps
//! `v` at the certified upper bound, so `0 ≤ v ≤ ub` holds even when a
//! sketch misses.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, ToPrimitive, Zero};
use thiserror::Error;

use crate::bias::{BiasAccumulator, BiasError, MAX_K};
use crate::formula::{decompose_to_and, Clause, ClauseKind, Formula, PredicateType};

pub const ALPHA_AND: f64 = 4.0 / 9.0;
pub const ALPHA_OR: f64 = std::f64::consts::FRAC_1_SQRT_2;
pub const ALPHA_KSAT: f64 = std::f64::consts::FRAC_1_SQRT_2;
pub const ALPHA_EOR: f64 = 0.75;
pub const ALPHA_XOR: f64 = 0.5;
pub const ALPHA_TR: f64 = 1.0;

/// Numeric types the estimator formulas are evaluated in.
pub trait Scalar: Clone + PartialOrd + Num + FromPrimitive + fmt::Debug {}
impl<T: Clone + PartialOrd + Num + FromPrimitive + fmt::Debug> Scalar for T {}

fn lit<T: Scalar>(x: u64) -> T {
    T::from_u64(x).expect("small integer")
}

fn pow2<T: Scalar>(j: usize) -> T {
    lit(1u64 << j)
}

fn min<T: Scalar>(a: T, b: T) -> T {
    if b < a {
        b
    } else {
        a
    }
}

fn clamp<T: Scalar>(x: T, lo: T, hi: T) -> T {
    if x < lo {
        lo
    } else if x > hi {
        hi
    } else {
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Trivial,
    TrExact,
    AndLowBias,
    AndHighBias,
    OrLowBias,
    OrHighBias,
    KsatLowBias,
    KsatHighBias,
}

impl Branch {
    pub fn tag(self) -> &'static str {
        match self {
            Branch::Trivial => "trivial",
            Branch::TrExact => "tr_exact",
            Branch::AndLowBias => "and_low_bias",
            Branch::AndHighBias => "and_high_bias",
            Branch::OrLowBias => "or_low_bias",
            Branch::OrHighBias => "or_high_bias",
            Branch::KsatLowBias => "ksat_low_bias",
            Branch::KsatHighBias => "ksat_high_bias",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Result of one closed-form evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct Value<T> {
    pub v: T,
    pub ub: T,
    pub branch: Branch,
}

impl<T: Scalar> Value<T> {
    fn capped(v: T, ub: T, branch: Branch) -> Self {
        let v = clamp(v, T::zero(), ub.clone());
        Value { v, ub, branch }
    }
}

/// Inputs an estimate was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct Digest {
    /// `m[j-1]` = number of `j`-clauses.
    pub m: Vec<u64>,
    pub bias: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub v: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub branch: Branch,
    pub certified_ub: f64,
    pub digest: Digest,
}

impl Estimate {
    /// Whether ε lies in the range the approximation theorems cover.
    pub fn proven_regime(&self) -> bool {
        self.epsilon > 0.0 && self.epsilon < 0.01
    }

    fn from_value(value: Value<f64>, alpha: f64, digest: Digest) -> Self {
        Estimate {
            v: value.v,
            alpha,
            epsilon: 0.0,
            branch: value.branch,
            certified_ub: value.ub,
            digest,
        }
    }
}

impl fmt::Display for Estimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "v={} alpha={} eps={} branch={} ub={}",
            self.v, self.alpha, self.epsilon, self.branch, self.certified_ub
        )
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EstimateError {
    #[error("bias estimate must be non-negative, got {0}")]
    NegativeBias(f64),
    #[error("delta must lie in [0, 1), got {0}")]
    BadDelta(f64),
    #[error("epsilon must lie in (0, 0.5), got {0}")]
    BadEpsilon(f64),
    #[error("no predicate types given for a non-empty instance")]
    EmptyPredicateSet,
    #[error("clause arity {0} exceeds the supported maximum {MAX_K}")]
    KTooLarge(usize),
    #[error("clauses over more than two variables are only supported when every clause is a disjunction")]
    UnsupportedMix,
    #[error(transparent)]
    Bias(#[from] BiasError),
}

fn check_inputs(b: f64, delta: f64) -> Result<(), EstimateError> {
    if b.is_nan() || b < 0.0 {
        return Err(EstimateError::NegativeBias(b));
    }
    if !(0.0..1.0).contains(&delta) {
        return Err(EstimateError::BadDelta(delta));
    }
    Ok(())
}

/// Fraction of satisfying rows, the guarantee of a uniform assignment.
pub fn ones_fraction(t: PredicateType) -> f64 {
    match t {
        PredicateType::Tr | PredicateType::Xor => 0.5,
        PredicateType::Or => 0.75,
        PredicateType::And => 0.25,
    }
}

/// `v = α·m` with `α` the smallest ones fraction among the predicates.
pub fn trivial_estimate(m: u64, predicates: &[PredicateType]) -> Result<Estimate, EstimateError> {
    let alpha = match predicates.iter().copied().map(ones_fraction).reduce(f64::min) {
        Some(a) => a,
        None if m == 0 => 1.0,
        None => return Err(EstimateError::EmptyPredicateSet),
    };
    let m_f = m as f64;
    Ok(Estimate::from_value(
        Value {
            v: alpha * m_f,
            ub: m_f,
            branch: Branch::Trivial,
        },
        alpha,
        Digest {
            m: vec![m],
            bias: 0.0,
            delta: 0.0,
        },
    ))
}

/// Unit-only instances: `val = (m + bias)/2` exactly.
pub fn tr_value<T: Scalar>(m: T, b: T, delta: T) -> Value<T> {
    let one = T::one();
    let two: T = lit(2);
    let b = clamp(b, T::zero(), m.clone());
    let v = (m.clone() + b.clone() / (one.clone() + delta.clone())) / two.clone();
    let ub = min(m.clone(), (m + b / (one - delta)) / two);
    Value::capped(v, ub, Branch::TrExact)
}

/// Two-literal AND instances (units written as `x ∧ x`).
pub fn and_value<T: Scalar>(m: T, b: T, delta: T) -> Value<T> {
    let one = T::one();
    let b = clamp(b, T::zero(), m.clone());
    let threshold = m.clone() / lit(3) * (one.clone() - delta.clone());
    let ub = (m.clone() + b.clone() / (one.clone() - delta.clone())) / lit(2);
    if b <= threshold {
        let v = lit::<T>(2) * (m + b) / (lit::<T>(9) * (one + delta));
        Value::capped(v, ub, Branch::AndLowBias)
    } else {
        Value::capped(b / (one + delta), ub, Branch::AndHighBias)
    }
}

/// Disjunctions of width at most two.
pub fn or_value<T: Scalar>(m1: T, m2: T, b: T, delta: T) -> Value<T> {
    let one = T::one();
    let keep = one.clone() - delta.clone();
    let b = clamp(b, T::zero(), m1.clone() + m2.clone());
    let ub = min(
        m1.clone() + m2.clone(),
        (m1.clone() + lit::<T>(2) * m2.clone() + b.clone() / keep.clone()) / lit(2),
    );
    if b <= keep.clone() * m2.clone() {
        let v = if m2.is_zero() {
            m1 / lit(2)
        } else {
            keep.clone() * keep
                * (lit::<T>(2) * m1 + lit::<T>(3) * m2.clone() + b.clone() * b / m2)
                / lit(4)
        };
        Value::capped(v, ub, Branch::OrLowBias)
    } else {
        Value::capped(keep * (m1 + m2 + b) / lit(2), ub, Branch::OrHighBias)
    }
}

/// `D = Σ_{j≥2} (2^j − j − 1)/2^{j−2} · m_j`.
pub fn ksat_d<T: Scalar>(m: &[T]) -> T {
    m.iter().enumerate().skip(1).fold(T::zero(), |acc, (idx, mj)| {
        let j = idx + 1;
        let num: T = pow2::<T>(j) - lit(j as u64 + 1);
        acc + num * mj.clone() / pow2(j - 2)
    })
}

/// Disjunctions of any width; `m[j-1]` counts `j`-clauses.
pub fn ksat_value<T: Scalar>(m: &[T], b: T, delta: T) -> Value<T> {
    let one = T::one();
    let keep = one - delta;
    let total = m.iter().cloned().fold(T::zero(), |a, x| a + x);
    let mut b_max = T::zero();
    let mut certain = T::zero(); // Σ (1 − 2^{-j}) m_j
    let mut greedy = T::zero(); // Σ (j/2^j) m_j
    let mut slack = T::zero(); // Σ ((2^j + j − 2)/2^j) m_j
    for (idx, mj) in m.iter().enumerate() {
        let j = idx + 1;
        let p: T = pow2(j);
        let jt: T = lit(j as u64);
        b_max = b_max + jt.clone() * mj.clone() * lit(2) / p.clone();
        certain = certain + (p.clone() - T::one()) * mj.clone() / p.clone();
        greedy = greedy + jt.clone() * mj.clone() / p.clone();
        slack = slack + (p.clone() + jt - lit(2)) * mj.clone() / p;
    }
    let b = clamp(b, T::zero(), b_max);
    let d = ksat_d(m);
    let ub = min(total, b.clone() / (keep.clone() * lit(2)) + slack);
    if !d.is_zero() && b <= keep.clone() * d.clone() {
        let v = certain + keep.clone() * keep * b.clone() * b / (lit::<T>(4) * d);
        Value::capped(v, ub, Branch::KsatLowBias)
    } else {
        Value::capped(greedy + keep * b / lit(2), ub, Branch::KsatHighBias)
    }
}

pub fn tr_exact_estimate(m: u64, b: f64, delta: f64) -> Result<Estimate, EstimateError> {
    check_inputs(b, delta)?;
    let value = tr_value(m as f64, b, delta);
    Ok(Estimate::from_value(value, ALPHA_TR, digest(vec![m], b, delta)))
}

pub fn and_estimate(m: u64, b: f64, delta: f64) -> Result<Estimate, EstimateError> {
    check_inputs(b, delta)?;
    let value = and_value(m as f64, b, delta);
    Ok(Estimate::from_value(value, ALPHA_AND, digest(vec![0, m], b, delta)))
}

pub fn or_estimate(m1: u64, m2: u64, b: f64, delta: f64) -> Result<Estimate, EstimateError> {
    check_inputs(b, delta)?;
    let value = or_value(m1 as f64, m2 as f64, b, delta);
    Ok(Estimate::from_value(value, ALPHA_OR, digest(vec![m1, m2], b, delta)))
}

pub fn ksat_estimate(m: &[u64], b: f64, delta: f64) -> Result<Estimate, EstimateError> {
    check_inputs(b, delta)?;
    if m.len() > MAX_K as usize {
        return Err(EstimateError::KTooLarge(m.len()));
    }
    let mf: Vec<f64> = m.iter().map(|&x| x as f64).collect();
    let value = ksat_value(&mf, b, delta);
    Ok(Estimate::from_value(value, ALPHA_KSAT, digest(m.to_vec(), b, delta)))
}

/// Cut value from an estimate `v` of the OR image of an XOR instance with
/// `xor_m` clauses: `max{m/2, v − m}`.
pub fn cut_estimate_via_eor(xor_m: u64, eor_v: f64) -> f64 {
    let m = xor_m as f64;
    (m / 2.0).max(eor_v - m)
}

fn digest(m: Vec<u64>, bias: f64, delta: f64) -> Digest {
    Digest { m, bias, delta }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend {
    Exact,
    Sketch { t: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub epsilon: f64,
    pub backend: Backend,
    pub k_max: u32,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            epsilon: 0.1,
            backend: Backend::Exact,
            k_max: MAX_K,
        }
    }
}

/// Which closed form the dispatcher applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemClass {
    /// Units only (or empty).
    Tr,
    /// Units and 2-disjunctions.
    TrOr,
    /// 2-disjunctions only.
    Or,
    /// Some XOR-type clause, no AND-type clause.
    Xor,
    /// Some AND-type clause; everything is decomposed into 2-ANDs.
    And,
    /// Disjunctions of width three or more.
    Ksat,
}

impl ProblemClass {
    pub fn alpha(self) -> f64 {
        match self {
            ProblemClass::Tr => ALPHA_TR,
            ProblemClass::TrOr => ALPHA_OR,
            ProblemClass::Or => ALPHA_EOR,
            ProblemClass::Xor => ALPHA_XOR,
            ProblemClass::And => ALPHA_AND,
            ProblemClass::Ksat => ALPHA_KSAT,
        }
    }
}

const AND_SEED_SALT: u64 = 0x2545_f491_4f6c_dd1d;

/// One-pass estimator: feed clauses, then [`finish`](Self::finish).
///
/// Two bias accumulators run side by side because the class is only known
/// at the end of the stream: one over disjunctions and units at `k_max`,
/// one over the 2-AND decomposition of every clause of width at most two.
#[derive(Debug, Clone)]
pub struct StreamingEstimator {
    cfg: EstimatorConfig,
    /// counts by number of distinct variables
    m: Vec<u64>,
    types: [bool; 4],
    all_disjunctive: bool,
    tautologies: u64,
    m_and: u64,
    or_acc: BiasAccumulator,
    or_delta: f64,
    and_acc: BiasAccumulator,
    and_delta: f64,
}

impl StreamingEstimator {
    pub fn new(cfg: EstimatorConfig) -> Result<Self, EstimateError> {
        let eps = cfg.epsilon;
        if !(eps > 0.0 && eps < 0.5) {
            return Err(EstimateError::BadEpsilon(eps));
        }
        if !(1..=MAX_K).contains(&cfg.k_max) {
            return Err(BiasError::BadKMax(cfg.k_max).into());
        }
        let (or_acc, or_delta, and_acc, and_delta) = match cfg.backend {
            Backend::Exact => (
                BiasAccumulator::exact(cfg.k_max)?,
                0.0,
                BiasAccumulator::exact(2)?,
                0.0,
            ),
            Backend::Sketch { t, seed } => {
                // the disjunction accumulator serves the kSAT (ε/8), 2OR (ε/4)
                // and unit-only estimators; size it for the tightest one reachable
                let or_delta = if cfg.k_max > 2 { eps / 8.0 } else { eps / 4.0 };
                let and_delta = eps / 2.0;
                (
                    BiasAccumulator::sketched(cfg.k_max, or_delta, t, seed)?,
                    or_delta,
                    BiasAccumulator::sketched(2, and_delta, t, seed ^ AND_SEED_SALT)?,
                    and_delta,
                )
            }
        };
        Ok(StreamingEstimator {
            cfg,
            m: Vec::new(),
            types: [false; 4],
            all_disjunctive: true,
            tautologies: 0,
            m_and: 0,
            or_acc,
            or_delta,
            and_acc,
            and_delta,
        })
    }

    pub fn add_tautology(&mut self) {
        self.tautologies += 1;
    }

    /// Feeds one normalized clause.
    pub fn push(&mut self, clause: &Clause) -> Result<(), EstimateError> {
        let vars = clause.vars().len();
        if vars == 0 {
            return Ok(());
        }
        if vars > self.cfg.k_max as usize {
            return Err(BiasError::ArityExceedsKMax {
                arity: vars,
                k_max: self.cfg.k_max,
            }
            .into());
        }
        if self.m.len() < vars {
            self.m.resize(vars, 0);
        }
        self.m[vars - 1] += 1;

        let ptype = clause.predicate_type();
        if let Some(t) = ptype {
            self.types[t as usize] = true;
        }
        let disjunctive = matches!(clause.kind(), ClauseKind::Unit | ClauseKind::Or) || ptype == Some(PredicateType::Tr);
        self.all_disjunctive &= disjunctive;
        if disjunctive {
            self.or_acc.ingest_clause(clause)?;
        }
        if vars <= 2 {
            let d = decompose_to_and(clause).expect("at most two variables");
            self.m_and += d.clauses.len() as u64;
            self.tautologies += d.satisfied_constants;
            for c in &d.clauses {
                self.and_acc.ingest_clause(c)?;
            }
        }
        Ok(())
    }

    pub fn push_formula(&mut self, formula: &Formula) -> Result<(), EstimateError> {
        for c in formula.clauses() {
            self.push(c)?;
        }
        self.tautologies += formula.tautology_count();
        Ok(())
    }

    fn has(&self, t: PredicateType) -> bool {
        self.types[t as usize]
    }

    pub fn class(&self) -> Result<ProblemClass, EstimateError> {
        if self.m.len() > 2 {
            return if self.all_disjunctive {
                Ok(ProblemClass::Ksat)
            } else {
                Err(EstimateError::UnsupportedMix)
            };
        }
        Ok(if self.has(PredicateType::And) {
            ProblemClass::And
        } else if self.has(PredicateType::Xor) {
            ProblemClass::Xor
        } else if self.has(PredicateType::Or) && self.has(PredicateType::Tr) {
            ProblemClass::TrOr
        } else if self.has(PredicateType::Or) {
            ProblemClass::Or
        } else {
            ProblemClass::Tr
        })
    }

    fn m_at(&self, j: usize) -> u64 {
        self.m.get(j - 1).copied().unwrap_or(0)
    }

    pub fn memory_bytes(&self) -> usize {
        self.or_acc.memory_bytes() + self.and_acc.memory_bytes() + self.m.capacity() * 8
    }

    pub fn finish(&self) -> Result<Estimate, EstimateError> {
        let class = self.class()?;
        let total: u64 = self.m.iter().sum();
        let mut est = match class {
            ProblemClass::Xor | ProblemClass::Or => {
                let present: Vec<PredicateType> =
                    PredicateType::ALL.into_iter().filter(|&t| self.has(t)).collect();
                let mut e = trivial_estimate(total, &present)?;
                e.digest.m = self.m.clone();
                e
            }
            ProblemClass::And => self.evaluate(&self.and_acc, self.and_delta, vec![0, self.m_and], |m, b, d| {
                and_value(m[1].clone(), b, d)
            })?,
            ProblemClass::Tr => self.evaluate(&self.or_acc, self.or_delta, vec![total], |m, b, d| {
                tr_value(m[0].clone(), b, d)
            })?,
            ProblemClass::TrOr => self.evaluate(&self.or_acc, self.or_delta, self.counts(2), |m, b, d| {
                or_value(m[0].clone(), m[1].clone(), b, d)
            })?,
            ProblemClass::Ksat => {
                self.evaluate(&self.or_acc, self.or_delta, self.m.clone(), ksat_value)?
            }
        };
        est.alpha = class.alpha();
        est.epsilon = self.cfg.epsilon;
        let taut = self.tautologies as f64;
        est.v += taut;
        est.certified_ub += taut;
        Ok(est)
    }

    fn counts(&self, k: usize) -> Vec<u64> {
        (1..=k).map(|j| self.m_at(j)).collect()
    }

    /// Runs a closed form exactly (rationals) or in floating point,
    /// depending on the accumulator.
    fn evaluate(
        &self,
        acc: &BiasAccumulator,
        delta: f64,
        m: Vec<u64>,
        rational: impl Fn(&[BigRational], BigRational, BigRational) -> Value<BigRational>,
    ) -> Result<Estimate, EstimateError> {
        let b_f = acc.total_bias();
        let value = match acc.total_bias_exact() {
            Some(b) => {
                let mq: Vec<BigRational> = m.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect();
                let exact = rational(&mq, b, BigRational::zero());
                Value {
                    v: to_f64(&exact.v),
                    ub: to_f64(&exact.ub),
                    branch: exact.branch,
                }
            }
            None => {
                let b = b_f;
                check_inputs(b, delta)?;
                let mq: Vec<BigRational> = m.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect();
                let bq = BigRational::from_f64(b).expect("finite bias");
                let dq = BigRational::from_f64(delta).expect("finite delta");
                let approx = rational(&mq, bq, dq);
                Value {
                    v: to_f64(&approx.v),
                    ub: to_f64(&approx.ub),
                    branch: approx.branch,
                }
            }
        };
        Ok(Estimate::from_value(value, 0.0, digest(m, b_f, delta)))
    }
}

pub fn to_f64(q: &BigRational) -> f64 {
    q.to_f64().expect("finite rational")
}

/// Estimates a whole formula in one pass.
pub fn dispatch(formula: &Formula, cfg: EstimatorConfig) -> Result<Estimate, EstimateError> {
    let mut s = StreamingEstimator::new(cfg)?;
    s.push_formula(formula)?;
    s.finish()
}

/// Exact-backend dispatch with the user-facing ε fixed to a nominal value.
pub fn dispatch_exact(formula: &Formula) -> Result<Estimate, EstimateError> {
    dispatch(
        formula,
        EstimatorConfig {
            epsilon: 0.1,
            backend: Backend::Exact,
            k_max: MAX_K,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Literal;
    use num_traits::Signed;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn qi(n: i64) -> BigRational {
        q(n, 1)
    }

    #[test]
    fn trivial_examples() {
        assert_eq!(trivial_estimate(8, &[PredicateType::Or]).unwrap().v, 6.0);
        let e = trivial_estimate(8, &[PredicateType::And]).unwrap();
        assert_eq!((e.v, e.alpha), (2.0, 0.25));
        assert_eq!(trivial_estimate(0, &[]).unwrap().v, 0.0);
        assert_eq!(trivial_estimate(3, &[]), Err(EstimateError::EmptyPredicateSet));
    }

    #[test]
    fn tr_examples() {
        assert_eq!(tr_value(qi(3), qi(1), qi(0)).v, qi(2));
        assert_eq!(tr_value(qi(2), qi(0), qi(0)).v, qi(1));
        assert_eq!(tr_value(qi(1), qi(1), qi(0)).v, qi(1));
    }

    #[test]
    fn and_examples() {
        let low = and_value(qi(3), qi(1), qi(0));
        assert_eq!((low.v, low.branch), (q(8, 9), Branch::AndLowBias));
        let high = and_value(qi(2), qi(2), qi(0));
        assert_eq!((high.v, high.branch), (qi(2), Branch::AndHighBias));
        assert_eq!(and_value(qi(0), qi(0), qi(0)).v, qi(0));
    }

    #[test]
    fn and_boundary_goes_low_and_gap_has_closed_form() {
        for (m, d) in [(30i64, q(1, 20)), (90, q(1, 200)), (27, qi(0))] {
            let b = qi(m) / qi(3) * (qi(1) - d.clone());
            let at = and_value(qi(m), b.clone(), d.clone());
            assert_eq!(at.branch, Branch::AndLowBias);
            let other = b / (qi(1) + d.clone());
            let gap = (other - at.v).abs();
            // |1 − 7δ| m / (27(1+δ))
            let expected = (qi(1) - qi(7) * d.clone()).abs() * qi(m) / (qi(27) * (qi(1) + d));
            assert_eq!(gap, expected);
        }
    }

    #[test]
    fn or_examples() {
        let a = or_value(qi(2), qi(1), qi(1), qi(0));
        assert_eq!((a.v, a.branch), (qi(2), Branch::OrLowBias));
        let b = or_value(qi(2), qi(1), qi(3), qi(0));
        assert_eq!((b.v, b.branch), (qi(3), Branch::OrHighBias));
        assert_eq!(or_value(qi(0), qi(0), qi(0), qi(0)).v, qi(0));
        // no 2-clauses and zero bias: half of the units
        assert_eq!(or_value(qi(4), qi(0), qi(0), qi(0)).v, qi(2));
    }

    #[test]
    fn ksat_examples() {
        let m = [qi(1), qi(0), qi(1)];
        assert_eq!(ksat_d(&m), qi(2));
        let v = ksat_value(&m, q(5, 4), qi(0));
        assert_eq!(v.branch, Branch::KsatLowBias);
        assert_eq!(v.v, q(201, 128));
        let unit = ksat_value(&[qi(1)], qi(1), qi(0));
        assert_eq!((unit.v, unit.branch), (qi(1), Branch::KsatHighBias));
        assert_eq!(ksat_value::<BigRational>(&[], qi(0), qi(0)).v, qi(0));
    }

    #[test]
    fn ksat_on_two_clauses_matches_or_low_branch() {
        for (m2, b) in [(4i64, 1i64), (10, 3), (7, 0)] {
            let k = ksat_value(&[qi(0), qi(m2)], qi(b), qi(0));
            let o = or_value(qi(0), qi(m2), qi(b), qi(0));
            assert_eq!(k.v, o.v);
            assert_eq!(k.v, q(3 * m2, 4) + q(b * b, 4 * m2));
        }
    }

    #[test]
    fn float_wrappers_validate() {
        assert_eq!(and_estimate(3, -1.0, 0.0), Err(EstimateError::NegativeBias(-1.0)));
        assert_eq!(or_estimate(1, 1, 0.0, 1.0), Err(EstimateError::BadDelta(1.0)));
        let e = and_estimate(3, 1.0, 0.0).unwrap();
        assert!((e.v - 8.0 / 9.0).abs() < 1e-15);
        assert_eq!(e.branch, Branch::AndLowBias);
        let k = ksat_estimate(&[1, 0, 1], 1.25, 0.0).unwrap();
        assert_eq!(k.v, 1.5703125);
    }

    #[test]
    fn sketch_overshoot_is_clamped() {
        // a bias estimate beyond what the counts allow cannot push v past ub
        let e = or_estimate(2, 1, 50.0, 0.05).unwrap();
        assert!(e.v <= e.certified_ub);
        assert!(e.certified_ub <= 3.0);
    }

    #[test]
    fn cut_examples() {
        assert_eq!(cut_estimate_via_eor(1, 2.0), 1.0);
        assert_eq!(cut_estimate_via_eor(0, 0.0), 0.0);
        assert_eq!(cut_estimate_via_eor(3, 5.0), 2.0);
    }

    fn f(n: u32, clauses: Vec<Clause>) -> Formula {
        Formula::from_clauses(n, clauses).unwrap()
    }

    #[test]
    fn dispatch_classes() {
        let (x1, x2) = (Literal::pos(1), Literal::pos(2));
        let xor = f(2, vec![Clause::xor2(x1, x2)]);
        assert_eq!(dispatch_exact(&xor).unwrap().alpha, 0.5);
        let tr_or = f(2, vec![Clause::unit(x1), Clause::or([x1.negate(), x2])]);
        let e = dispatch_exact(&tr_or).unwrap();
        assert_eq!(e.alpha, ALPHA_OR);
        assert_eq!(e.branch, Branch::OrLowBias);
        let mixed = f(2, vec![Clause::or([x1, x2]), Clause::and2(x1, x2.negate())]);
        assert_eq!(dispatch_exact(&mixed).unwrap().alpha, ALPHA_AND);
        let wide_mixed = f(3, vec![Clause::or([x1, x2, Literal::pos(3)]), Clause::xor2(x1, x2)]);
        assert_eq!(dispatch_exact(&wide_mixed), Err(EstimateError::UnsupportedMix));
    }

    #[test]
    fn dispatch_and_example_and_empty() {
        let (x1, x2) = (Literal::pos(1), Literal::pos(2));
        let g = f(2, vec![Clause::and2(x1, x2), Clause::and2(x1.negate(), x2), Clause::and2(x1, x2.negate())]);
        let e = dispatch_exact(&g).unwrap();
        assert_eq!(e.branch, Branch::AndLowBias);
        assert_eq!(e.v, 8.0 / 9.0);
        let empty = dispatch_exact(&Formula::new(0)).unwrap();
        assert_eq!(empty.v, 0.0);
        assert_eq!(empty.to_string(), "v=0 alpha=1 eps=0.1 branch=tr_exact ub=0");
    }

    #[test]
    fn tautologies_are_added_back() {
        let mut g = Formula::new(1);
        g.push(Clause::or([Literal::pos(1), Literal::neg(1)])).unwrap();
        g.push(Clause::unit(Literal::pos(1))).unwrap();
        let e = dispatch_exact(&g).unwrap();
        assert_eq!((e.v, e.certified_ub), (2.0, 2.0));
    }

    #[test]
    fn bad_epsilon_rejected() {
        let cfg = EstimatorConfig {
            epsilon: 0.5,
            ..Default::default()
        };
        assert_eq!(dispatch(&Formula::new(1), cfg).unwrap_err(), EstimateError::BadEpsilon(0.5));
    }
}
