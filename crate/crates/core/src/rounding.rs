//! Assignments that realize the bias lower bounds.
//!
//! Every variable is first oriented so that its signed count is
//! non-negative (the flip vector), then set to 1 independently with
//! probability `½ + γ`. `γ = ½` is the deterministic greedy assignment.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::assignment::Assignment;
use crate::bias::{exact_bias, signed_counts, MAX_K};
use crate::estimators::ksat_d;
use crate::formula::{ClauseKind, Formula, PredicateType};

#[derive(Debug, Error, PartialEq)]
pub enum RoundingError {
    #[error("bias {bias} exceeds m/3 = {limit}; use the greedy assignment instead")]
    BiasTooLarge { bias: f64, limit: f64 },
    #[error("gamma must lie in [0, 0.5], got {0}")]
    BadGamma(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundingPlan {
    gamma: f64,
    /// `flip[i]` negates variable `i+1` before sampling.
    flip: Vec<bool>,
}

impl RoundingPlan {
    pub fn new(gamma: f64) -> Result<Self, RoundingError> {
        if !(0.0..=0.5).contains(&gamma) {
            return Err(RoundingError::BadGamma(gamma));
        }
        Ok(RoundingPlan { gamma, flip: Vec::new() })
    }

    pub fn with_flips(mut self, flip: Vec<bool>) -> Self {
        self.flip = flip;
        self
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn flips(&self) -> &[bool] {
        &self.flip
    }

    fn flipped(&self, i: usize) -> bool {
        self.flip.get(i).copied().unwrap_or(false)
    }

    /// Probability that variable `i+1` (original orientation) is 1.
    pub fn probability(&self, i: usize) -> f64 {
        let p = 0.5 + self.gamma;
        if self.flipped(i) {
            1.0 - p
        } else {
            p
        }
    }
}

/// Variables whose signed count is negative.
pub fn flip_vector(formula: &Formula) -> Vec<bool> {
    signed_counts(formula, MAX_K)
        .expect("arity within the supported maximum")
        .into_iter()
        .map(|t| t < 0)
        .collect()
}

/// Sets each variable to the polarity it occurs in more (ties to 1).
///
/// On a 2-AND instance this is `x_i = 1` iff `pos_i ≥ neg_i`.
pub fn greedy_bias_assignment(formula: &Formula) -> Assignment {
    Assignment::new(flip_vector(formula).into_iter().map(|f| !f).collect())
}

/// `γ = bias / (2(m − 2·bias))`, defined for `bias ≤ m/3`.
pub fn make_plan_and(m: u64, bias: f64) -> Result<RoundingPlan, RoundingError> {
    let m = m as f64;
    if bias * 3.0 > m {
        return Err(RoundingError::BiasTooLarge { bias, limit: m / 3.0 });
    }
    let gamma = if bias == 0.0 { 0.0 } else { bias / (2.0 * (m - 2.0 * bias)) };
    RoundingPlan::new(gamma.min(0.5))
}

/// `γ = bias/(2m₂)` when `bias ≤ m₂`, else `½`.
pub fn make_plan_or(m2: u64, bias: f64) -> RoundingPlan {
    let m2 = m2 as f64;
    let gamma = if bias > m2 {
        0.5
    } else if m2 == 0.0 {
        0.0
    } else {
        bias / (2.0 * m2)
    };
    RoundingPlan::new(gamma.min(0.5)).expect("gamma in range")
}

/// `γ = bias/(2D)` when `bias ≤ D`, else `½` (greedy).
pub fn make_plan_ksat(m: &[u64], bias: f64) -> RoundingPlan {
    let mf: Vec<f64> = m.iter().map(|&x| x as f64).collect();
    let d = ksat_d(&mf);
    let gamma = if d > 0.0 && bias <= d { bias / (2.0 * d) } else { 0.5 };
    RoundingPlan::new(gamma.min(0.5)).expect("gamma in range")
}

/// The plan matching a formula's class, together with the formula the
/// plan's flips refer to (the 2-AND decomposition when any AND-type clause
/// is present). `None` for wide clauses mixed with non-disjunctions.
///
/// Classes without a bias-dependent guarantee (XOR present, no AND) get the
/// uniform plan.
pub fn plan_for(formula: &Formula) -> Option<(RoundingPlan, Formula)> {
    let narrow = formula.clauses().iter().all(|c| c.vars().len() <= 2);
    let disjunctive = formula.clauses().iter().all(|c| {
        matches!(c.kind(), ClauseKind::Unit | ClauseKind::Or) || c.predicate_type() == Some(PredicateType::Tr)
    });
    let to_f64 = |q: num_rational::BigRational| q.to_f64().expect("finite");
    if narrow && formula.predicate_types().contains(&PredicateType::And) {
        let and_form = formula.to_and_form().ok()?;
        let bias = to_f64(exact_bias(&and_form, 2).ok()?);
        let plan = make_plan_and(and_form.m() as u64, bias).unwrap_or_else(|_| RoundingPlan::new(0.5).expect("valid"));
        let flips = flip_vector(&and_form);
        return Some((plan.with_flips(flips), and_form));
    }
    if disjunctive {
        let mut m: Vec<u64> = Vec::new();
        for c in formula.clauses() {
            let j = c.vars().len();
            if m.len() < j {
                m.resize(j, 0);
            }
            m[j - 1] += 1;
        }
        let bias = to_f64(exact_bias(formula, MAX_K).ok()?);
        let plan = if narrow {
            make_plan_or(m.get(1).copied().unwrap_or(0), bias)
        } else {
            make_plan_ksat(&m, bias)
        };
        return Some((plan.with_flips(flip_vector(formula)), formula.clone()));
    }
    narrow.then(|| (RoundingPlan::new(0.0).expect("valid"), formula.clone()))
}

/// Reproducible stream of assignments drawn from a plan.
pub struct Sampler<'a> {
    plan: &'a RoundingPlan,
    n: usize,
    rng: ChaCha8Rng,
}

impl<'a> Sampler<'a> {
    pub fn new(plan: &'a RoundingPlan, n: usize, seed: u64) -> Self {
        Sampler {
            plan,
            n,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn draw(&mut self, i: usize) -> bool {
        let p = 0.5 + self.plan.gamma;
        let y = self.rng.random::<f64>() < p;
        y != self.plan.flipped(i)
    }

    pub fn sample(&mut self) -> Assignment {
        Assignment::new((0..self.n).map(|i| self.draw(i)).collect())
    }

    /// Bit `v-1` holds variable `v`; requires `n ≤ 64`.
    pub fn sample_mask(&mut self) -> u64 {
        assert!(self.n <= 64, "mask sampling needs n ≤ 64");
        (0..self.n).fold(0u64, |acc, i| acc | (u64::from(self.draw(i)) << i))
    }
}

pub fn sample(plan: &RoundingPlan, n: usize, seed: u64) -> Assignment {
    Sampler::new(plan, n, seed).sample()
}

pub fn sample_and(plan: &RoundingPlan, n: usize, seed: u64) -> Assignment {
    sample(plan, n, seed)
}

pub fn sample_or(plan: &RoundingPlan, n: usize, seed: u64) -> Assignment {
    sample(plan, n, seed)
}

pub fn sample_ksat(plan: &RoundingPlan, n: usize, seed: u64) -> Assignment {
    sample(plan, n, seed)
}

/// Closed-form expected value of the AND sampler: `m/4 + γ·bias + (2bias − m)γ²`.
pub fn expected_and(m: f64, bias: f64, gamma: f64) -> f64 {
    m / 4.0 + gamma * bias + (2.0 * bias - m) * gamma * gamma
}

/// Exact expected number of satisfied clauses when each variable is
/// independently 1 with the plan's probability. Clauses over more than 20
/// variables are not supported.
pub fn expected_value(formula: &Formula, plan: &RoundingPlan) -> f64 {
    let mut total = formula.tautology_count() as f64;
    for c in formula.clauses() {
        let vars = c.vars();
        assert!(vars.len() <= 20, "clause too wide for exact expectation");
        for mask in 0u32..(1 << vars.len()) {
            let value = |v: u32| {
                let k = vars.iter().position(|&u| u == v).expect("variable of clause");
                mask >> k & 1 == 1
            };
            if c.eval(value) {
                total += vars
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| {
                        let p = plan.probability(v as usize - 1);
                        if mask >> k & 1 == 1 {
                            p
                        } else {
                            1.0 - p
                        }
                    })
                    .product::<f64>();
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{Clause, Literal};
    use crate::oracle::val_of;

    fn f(n: u32, clauses: Vec<Clause>) -> Formula {
        Formula::from_clauses(n, clauses).unwrap()
    }

    #[test]
    fn greedy_examples() {
        let c = Clause::and2(Literal::pos(1), Literal::neg(2));
        let g = f(2, vec![c.clone(), c]);
        let s = greedy_bias_assignment(&g);
        assert_eq!(s.to_string(), "10");
        assert_eq!(val_of(&g, &s).unwrap(), 2);
        let h = f(2, vec![Clause::and2(Literal::pos(1), Literal::pos(2))]);
        assert_eq!(greedy_bias_assignment(&h).to_string(), "11");
        // ties go to 1
        let t = f(1, vec![Clause::unit(Literal::pos(1)), Clause::unit(Literal::neg(1))]);
        assert_eq!(greedy_bias_assignment(&t).to_string(), "1");
    }

    #[test]
    fn and_gamma_values() {
        assert_eq!(make_plan_and(3, 1.0).unwrap().gamma(), 0.5);
        assert_eq!(make_plan_and(4, 1.0).unwrap().gamma(), 0.25);
        assert_eq!(make_plan_and(9, 0.0).unwrap().gamma(), 0.0);
        assert!(matches!(make_plan_and(3, 1.5), Err(RoundingError::BiasTooLarge { .. })));
    }

    #[test]
    fn or_and_ksat_gamma_values() {
        assert_eq!(make_plan_or(4, 4.0).gamma(), 0.5);
        assert_eq!(make_plan_or(4, 0.0).gamma(), 0.0);
        assert_eq!(make_plan_or(4, 1.0).gamma(), 0.125);
        assert_eq!(make_plan_or(4, 5.0).gamma(), 0.5);
        assert_eq!(make_plan_ksat(&[1, 0, 1], 1.25).gamma(), 0.3125);
        assert_eq!(make_plan_ksat(&[1], 1.0).gamma(), 0.5);
    }

    #[test]
    fn half_gamma_is_greedy() {
        let g = f(
            3,
            vec![
                Clause::and2(Literal::neg(1), Literal::pos(2)),
                Clause::and2(Literal::neg(1), Literal::neg(3)),
            ],
        );
        let plan = RoundingPlan::new(0.5).unwrap().with_flips(flip_vector(&g));
        for seed in 0..20 {
            assert_eq!(sample_and(&plan, 3, seed), greedy_bias_assignment(&g));
        }
    }

    #[test]
    fn samples_are_reproducible() {
        let plan = RoundingPlan::new(0.2).unwrap();
        assert_eq!(sample(&plan, 50, 9), sample(&plan, 50, 9));
        assert_ne!(sample(&plan, 50, 9), sample(&plan, 50, 10));
    }

    #[test]
    fn closed_form_matches_exact_expectation() {
        let (x1, x2) = (Literal::pos(1), Literal::pos(2));
        let g = f(2, vec![Clause::and2(x1, x2), Clause::and2(x1.negate(), x2), Clause::and2(x1, x2.negate())]);
        let bias = exact_bias(&g, 2).unwrap().to_f64().unwrap();
        let plan = make_plan_and(3, bias).unwrap().with_flips(flip_vector(&g));
        let closed = expected_and(3.0, bias, plan.gamma());
        assert!((closed - 1.0).abs() < 1e-12);
        assert!((expected_value(&g, &plan) - closed).abs() < 1e-12);
    }

    #[test]
    fn and_sampler_mean() {
        let (x1, x2) = (Literal::pos(1), Literal::pos(2));
        let g = f(2, vec![Clause::and2(x1, x2), Clause::and2(x1.negate(), x2), Clause::and2(x1, x2.negate())]);
        let plan = make_plan_and(3, 1.0).unwrap().with_flips(flip_vector(&g));
        let mut s = Sampler::new(&plan, 2, 1);
        let trials = 100_000;
        let total: u64 = (0..trials).map(|_| val_of(&g, &s.sample()).unwrap()).sum();
        let mean = total as f64 / trials as f64;
        assert!((mean - 1.0).abs() <= 0.01, "mean {mean}");
    }

    #[test]
    fn uniform_on_single_and() {
        let g = f(2, vec![Clause::and2(Literal::pos(1), Literal::pos(2))]);
        let plan = RoundingPlan::new(0.0).unwrap();
        let mut s = Sampler::new(&plan, 2, 5);
        let trials = 100_000;
        let hits: u64 = (0..trials).map(|_| val_of(&g, &s.sample()).unwrap()).sum();
        let rate = hits as f64 / trials as f64;
        assert!((rate - 0.25).abs() < 0.01, "rate {rate}");
    }

    #[test]
    fn ksat_sampler_meets_bound() {
        let g = f(
            3,
            vec![
                Clause::or([Literal::pos(1), Literal::pos(2), Literal::pos(3)]),
                Clause::unit(Literal::neg(1)),
            ],
        );
        let plan = make_plan_ksat(&[1, 0, 1], 1.25).with_flips(flip_vector(&g));
        assert!(expected_value(&g, &plan) >= 1.5703125);
        let mut s = Sampler::new(&plan, 3, 3);
        let trials = 100_000;
        let total: u64 = (0..trials).map(|_| val_of(&g, &s.sample()).unwrap()).sum();
        assert!(total as f64 / trials as f64 >= 1.57);
    }

    #[test]
    fn plan_selection_by_class() {
        let (x1, x2) = (Literal::pos(1), Literal::pos(2));
        let and = f(2, vec![Clause::and2(x1, x2), Clause::or([x1, x2])]);
        let (plan, target) = plan_for(&and).unwrap();
        assert_eq!(target.m(), 4);
        assert!(plan.gamma() <= 0.5);
        let xor = f(2, vec![Clause::xor2(x1, x2)]);
        assert_eq!(plan_for(&xor).unwrap().0.gamma(), 0.0);
        let wide = f(3, vec![Clause::or([x1, x2, Literal::pos(3)]), Clause::xor2(x1, x2)]);
        assert!(plan_for(&wide).is_none());
    }

    #[test]
    fn greedy_or_example_is_deterministic() {
        let x1 = Literal::pos(1);
        let g = f(2, vec![Clause::unit(x1), Clause::unit(x1), Clause::or([x1, Literal::pos(2)])]);
        let plan = make_plan_or(1, 3.0).with_flips(flip_vector(&g));
        assert_eq!(plan.gamma(), 0.5);
        for seed in 0..5 {
            assert_eq!(val_of(&g, &sample_or(&plan, 2, seed)).unwrap(), 3);
        }
        let empty = Formula::new(0);
        assert_eq!(val_of(&empty, &sample_ksat(&plan, 0, 1)).unwrap(), 0);
    }
}
