//! Exact checks of the bias inequalities.
//!
//! All quantities are rationals, and every comparison against `√2/2` is
//! done by squaring, so nothing here depends on floating-point tolerance.
//! The bound functions return the right-hand sides; the `check_*`
//! functions run every applicable inequality on a concrete formula against
//! the exhaustive oracle.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::bias::{exact_bias, MAX_K};
use crate::estimators::{dispatch_exact, ksat_d};
use crate::formula::{ClauseKind, Formula, PredicateType};
use crate::gapgen::xor_to_or;
use crate::oracle::{exact_val, val_of};
use crate::rounding::greedy_bias_assignment;

pub type Q = BigRational;

pub fn q(x: u64) -> Q {
    Q::from_integer(BigInt::from(x))
}

#[cfg(test)]
fn frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn pow2(j: usize) -> Q {
    Q::from_integer(BigInt::one() << j)
}

/// `lhs ≥ (√2/2)·rhs`, decided exactly.
pub fn ge_sqrt_half(lhs: &Q, rhs: &Q) -> bool {
    let two = q(2);
    match (lhs.is_negative(), rhs.is_negative()) {
        (false, true) => true,
        (true, false) => rhs.is_zero() && lhs.is_zero(),
        (false, false) => &two * lhs * lhs >= rhs * rhs,
        (true, true) => &two * lhs * lhs <= rhs * rhs,
    }
}

/// `(m + bias)/2`, the upper bound on any two-literal instance.
pub fn gvv_upper(m: &Q, bias: &Q) -> Q {
    (m + bias) / q(2)
}

/// `m/4 + bias²/(4(m − 2bias))` for 2-AND instances with `bias ≤ m/3`.
pub fn and_lower(m: &Q, bias: &Q) -> Option<Q> {
    if bias * q(3) > *m {
        return None;
    }
    if bias.is_zero() {
        return Some(m / q(4));
    }
    Some(m / q(4) + bias * bias / (q(4) * (m - q(2) * bias)))
}

/// `min{m₁ + m₂, (m₁ + 2m₂ + bias)/2}`.
pub fn or_upper(m1: &Q, m2: &Q, bias: &Q) -> Q {
    let a = m1 + m2;
    let b = (m1 + q(2) * m2 + bias) / q(2);
    a.min(b)
}

/// `(m₁ + m₂ + bias)/2` and, when `0 < m₂` and `bias ≤ m₂`,
/// `m₁/2 + 3m₂/4 + bias²/(4m₂)`.
pub fn or_lower(m1: &Q, m2: &Q, bias: &Q) -> (Q, Option<Q>) {
    let first = (m1 + m2 + bias) / q(2);
    let second = (m2.is_positive() && bias <= m2)
        .then(|| m1 / q(2) + q(3) * m2 / q(4) + bias * bias / (q(4) * m2));
    (first, second)
}

fn weighted(m: &[Q], w: impl Fn(usize) -> Q) -> Q {
    m.iter().enumerate().fold(Q::zero(), |acc, (idx, mj)| acc + w(idx + 1) * mj)
}

/// `min{Σm_j, bias/2 + Σ((2^j + j − 2)/2^j)m_j}`.
pub fn ksat_upper(m: &[Q], bias: &Q) -> Q {
    let total = weighted(m, |_| Q::one());
    let slack = weighted(m, |j| (pow2(j) + q(j as u64) - q(2)) / pow2(j));
    total.min(bias / q(2) + slack)
}

/// `bias/2 + Σ(j/2^j)m_j` and, when `0 < D` and `bias ≤ D`,
/// `Σ(1 − 2^{-j})m_j + bias²/(4D)`.
pub fn ksat_lower(m: &[Q], bias: &Q) -> (Q, Option<Q>) {
    let greedy = bias / q(2) + weighted(m, |j| q(j as u64) / pow2(j));
    let d = ksat_d(m);
    let second = (d.is_positive() && bias <= &d)
        .then(|| weighted(m, |j| Q::one() - Q::one() / pow2(j)) + bias * bias / (q(4) * &d));
    (greedy, second)
}

/// `(2x + 3y + x²/y) / (4(x + y)) ≥ √2/2` for `x ≥ 0, y > 0`.
pub fn claim_quadratic(x: &Q, y: &Q) -> Option<bool> {
    if x.is_negative() || !y.is_positive() {
        return None;
    }
    let num = q(2) * x + q(3) * y + x * x / y;
    Some(ge_sqrt_half(&num, &(q(4) * (x + y))))
}

/// `(2x + 3y + x²/y − 2a) / (4(x + y) − 3a) ≥ √2/2` for `x ≥ 0`, `y > 0`,
/// `y ≥ a ≥ 0`.
pub fn claim_shifted(x: &Q, y: &Q, a: &Q) -> Option<bool> {
    if x.is_negative() || !y.is_positive() || a.is_negative() || a > y {
        return None;
    }
    let num = q(2) * x + q(3) * y + x * x / y - q(2) * a;
    let den = q(4) * (x + y) - q(3) * a;
    Some(ge_sqrt_half(&num, &den))
}

/// Lower end of the middle range: `Σ((2 − j)/2^{j−1})m_j`.
pub fn small_b_limit(m: &[Q]) -> Q {
    weighted(m, |j| (q(2) - q(j as u64)) / pow2(j - 1))
}

fn ksat_low_lhs(m: &[Q], b: &Q, d: &Q) -> Q {
    weighted(m, |j| Q::one() - Q::one() / pow2(j)) + b * b / (q(4) * d)
}

/// `Σ(1 − 2^{-j})m_j + B²/(4D) ≥ (√2/2)Σm_j` for `limit ≤ B ≤ D`, `D > 0`.
pub fn claim_middle_b(m: &[Q], b: &Q) -> Option<bool> {
    let d = ksat_d(m);
    if !d.is_positive() || b.is_negative() || *b < small_b_limit(m) || *b > d {
        return None;
    }
    Some(ge_sqrt_half(&ksat_low_lhs(m, b, &d), &weighted(m, |_| Q::one())))
}

/// Same left side `≥ (√2/2)(B/2 + Σ((2^j + j − 2)/2^j)m_j)` for
/// `0 ≤ B ≤ limit`, `D > 0`.
pub fn claim_small_b(m: &[Q], b: &Q) -> Option<bool> {
    let d = ksat_d(m);
    if !d.is_positive() || b.is_negative() || *b > small_b_limit(m) {
        return None;
    }
    let rhs = b / q(2) + weighted(m, |j| (pow2(j) + q(j as u64) - q(2)) / pow2(j));
    Some(ge_sqrt_half(&ksat_low_lhs(m, b, &d), &rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

impl Check {
    fn compare(name: &'static str, holds: bool, detail: String) -> Self {
        Check {
            name,
            status: if holds { Status::Pass } else { Status::Fail },
            detail,
        }
    }

    fn skip(name: &'static str, why: &str) -> Self {
        Check {
            name,
            status: Status::Skip,
            detail: why.to_string(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "pass",
            Status::Fail => "FAIL",
            Status::Skip => "skip",
        };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn show(x: &Q) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        format!("{} (≈{:.6})", x, x.to_f64().unwrap_or(f64::NAN))
    }
}

/// Clause counts by number of distinct variables.
fn counts_by_vars(formula: &Formula) -> Vec<u64> {
    let mut m = Vec::new();
    for c in formula.clauses() {
        let j = c.vars().len();
        if m.len() < j {
            m.resize(j, 0);
        }
        m[j - 1] += 1;
    }
    m
}

fn disjunctive(formula: &Formula) -> bool {
    formula.clauses().iter().all(|c| {
        matches!(c.kind(), ClauseKind::Unit | ClauseKind::Or) || c.predicate_type() == Some(PredicateType::Tr)
    })
}

/// Runs every inequality that applies to `formula`. Checks that need the
/// optimum are skipped when `n > n_limit`.
pub fn check_formula(formula: &Formula, n_limit: u32) -> Vec<Check> {
    let mut out = Vec::new();
    let taut = formula.tautology_count();
    let oracle = exact_val(formula, n_limit).ok();
    // optimum over the stored clauses only
    let val = oracle.as_ref().map(|r| q(r.val - taut));
    let need_val = |name: &'static str, out: &mut Vec<Check>| {
        out.push(Check::skip(name, "too many variables for exhaustive search"));
    };
    let m_vars = counts_by_vars(formula);
    let narrow = m_vars.len() <= 2;

    if narrow {
        let and_form = formula.to_and_form().expect("at most two variables per clause");
        let m = q(and_form.m() as u64);
        let bias = exact_bias(&and_form, 2).expect("two-literal clauses");
        match &val {
            Some(val) => {
                out.push(Check::compare(
                    "and_bias_below_val",
                    &bias <= val,
                    format!("bias={} val={}", show(&bias), show(val)),
                ));
                let ub = gvv_upper(&m, &bias);
                out.push(Check::compare(
                    "and_val_below_half_m_plus_bias",
                    val <= &ub,
                    format!("val={} (m+bias)/2={}", show(val), show(&ub)),
                ));
                match and_lower(&m, &bias) {
                    Some(lb) => out.push(Check::compare(
                        "and_low_bias_lower_bound",
                        val >= &lb,
                        format!("val={} bound={}", show(val), show(&lb)),
                    )),
                    None => out.push(Check::skip("and_low_bias_lower_bound", "bias > m/3")),
                }
            }
            None => need_val("and_sandwich", &mut out),
        }
        if let Some(lb) = and_lower(&m, &bias) {
            let simple = q(2) * (&m + &bias) / q(9);
            out.push(Check::compare(
                "and_bound_dominates_two_ninths",
                lb >= simple,
                format!("bound={} 2(m+bias)/9={}", show(&lb), show(&simple)),
            ));
        }
        let greedy = greedy_bias_assignment(&and_form);
        let g = q(val_of(&and_form, &greedy).expect("length matches") - and_form.tautology_count());
        out.push(Check::compare(
            "greedy_at_least_bias",
            g >= bias,
            format!("greedy={} bias={}", show(&g), show(&bias)),
        ));
    }

    if disjunctive(formula) {
        let mq: Vec<Q> = m_vars.iter().map(|&x| q(x)).collect();
        let bias = exact_bias(formula, MAX_K).expect("arity within bound");
        if narrow {
            let m1 = mq.first().cloned().unwrap_or_else(Q::zero);
            let m2 = mq.get(1).cloned().unwrap_or_else(Q::zero);
            match &val {
                Some(val) => {
                    let ub = or_upper(&m1, &m2, &bias);
                    out.push(Check::compare(
                        "or_upper_bound",
                        val <= &ub,
                        format!("val={} bound={}", show(val), show(&ub)),
                    ));
                    let (lb1, lb2) = or_lower(&m1, &m2, &bias);
                    out.push(Check::compare(
                        "or_greedy_lower_bound",
                        val >= &lb1,
                        format!("val={} bound={}", show(val), show(&lb1)),
                    ));
                    match lb2 {
                        Some(lb) => out.push(Check::compare(
                            "or_low_bias_lower_bound",
                            val >= &lb,
                            format!("val={} bound={}", show(val), show(&lb)),
                        )),
                        None => out.push(Check::skip("or_low_bias_lower_bound", "bias > m2 or m2 = 0")),
                    }
                }
                None => need_val("or_sandwich", &mut out),
            }
        }
        match &val {
            Some(val) => {
                let ub = ksat_upper(&mq, &bias);
                out.push(Check::compare(
                    "ksat_upper_bound",
                    val <= &ub,
                    format!("val={} bound={}", show(val), show(&ub)),
                ));
                let (lb1, lb2) = ksat_lower(&mq, &bias);
                out.push(Check::compare(
                    "ksat_greedy_lower_bound",
                    val >= &lb1,
                    format!("val={} bound={}", show(val), show(&lb1)),
                ));
                match lb2 {
                    Some(lb) => out.push(Check::compare(
                        "ksat_low_bias_lower_bound",
                        val >= &lb,
                        format!("val={} bound={}", show(val), show(&lb)),
                    )),
                    None => out.push(Check::skip("ksat_low_bias_lower_bound", "bias > D or D = 0")),
                }
            }
            None => need_val("ksat_sandwich", &mut out),
        }

        if m_vars.len() <= 1 {
            if let Some(val) = &val {
                let exact = gvv_upper(&q(formula.m() as u64), &bias);
                out.push(Check::compare(
                    "units_value_identity",
                    *val == exact,
                    format!("val={} (m+bias)/2={}", show(val), show(&exact)),
                ));
            }
        }
    }

    let pure_xor = formula.m() > 0 && formula.clauses().iter().all(|c| c.kind() == ClauseKind::Xor2);
    if pure_xor {
        let or = xor_to_or(formula).expect("all clauses are XOR");
        match (&oracle, exact_val(&or, n_limit)) {
            (Some(x), Ok(o)) => {
                let m = formula.m() as u64;
                let xv = x.val - taut;
                out.push(Check::compare(
                    "xor_to_or_value_shift",
                    o.val == m + xv,
                    format!("val_or={} m+val_xor={}", o.val, m + xv),
                ));
            }
            _ => need_val("xor_to_or_value_shift", &mut out),
        }
    }

    match (dispatch_exact(formula), &oracle) {
        (Ok(est), Some(r)) => {
            let val = r.val as f64;
            out.push(Check::compare(
                "estimate_below_val",
                est.v <= val,
                format!("v={} val={}", est.v, r.val),
            ));
            out.push(Check::compare(
                "estimate_ratio",
                est.v >= est.alpha * val - 1e-12,
                format!("v={} alpha*val={}", est.v, est.alpha * val),
            ));
            out.push(Check::compare(
                "certified_ub_above_val",
                est.certified_ub >= val,
                format!("ub={} val={}", est.certified_ub, r.val),
            ));
        }
        (Ok(_), None) => need_val("estimate_soundness", &mut out),
        (Err(e), _) => out.push(Check::skip("estimate_soundness", &e.to_string())),
    }
    out
}
