//! Instance generators and independent reference computations shared by the
//! integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use streamcsp::formula::{Clause, Formula, Literal};

pub type Q = BigRational;

pub fn q(x: i64) -> Q {
    Q::from_integer(BigInt::from(x))
}

pub fn frac(a: i64, b: i64) -> Q {
    Q::new(BigInt::from(a), BigInt::from(b))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn distinct_literals(rng: &mut impl Rng, n: u32, k: usize) -> Vec<Literal> {
    sample(rng, n as usize, k)
        .into_iter()
        .map(|v| Literal::new(v as u32 + 1, rng.random()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// Units only.
    Tr,
    /// Units and 2-ORs.
    Or,
    /// Exactly-two-literal ORs.
    Eor,
    /// 2-XORs on distinct variables.
    Xor,
    /// 2-ANDs on distinct variables.
    And,
    /// ORs of width 1..=4.
    Ksat,
}

impl Family {
    pub const ALL: [Family; 6] = [Family::Tr, Family::Or, Family::Eor, Family::Xor, Family::And, Family::Ksat];

    pub fn name(self) -> &'static str {
        match self {
            Family::Tr => "TR",
            Family::Or => "2OR",
            Family::Eor => "2EOR",
            Family::Xor => "XOR",
            Family::And => "2AND",
            Family::Ksat => "kSAT",
        }
    }

    /// Ratio the estimator must reach on this family.
    pub fn alpha(self) -> f64 {
        match self {
            Family::Tr => 1.0,
            Family::Or | Family::Ksat => std::f64::consts::FRAC_1_SQRT_2,
            Family::Eor => 0.75,
            Family::Xor => 0.5,
            Family::And => 4.0 / 9.0,
        }
    }

    pub fn max_width(self) -> u32 {
        match self {
            Family::Tr => 1,
            Family::Ksat => 4,
            _ => 2,
        }
    }
}

/// Ratio owed on one instance of `family`. A draw can land in a narrower
/// class: a 2OR draw without units is a 2EOR instance, a draw with units
/// only is a TR instance, and a kSAT draw of width at most two is a 2OR one.
pub fn instance_alpha(family: Family, f: &Formula) -> f64 {
    match family {
        Family::Or | Family::Ksat | Family::Eor | Family::Tr => {
            let w = widths(f);
            if w[2] + w[3] > 0 || (w[0] > 0 && w[1] > 0) {
                std::f64::consts::FRAC_1_SQRT_2
            } else if w[1] > 0 {
                Family::Eor.alpha()
            } else {
                Family::Tr.alpha()
            }
        }
        _ => family.alpha(),
    }
}

/// Random instance with `2 ≤ n ≤ 12` and `1 ≤ m ≤ 40`.
pub fn random_instance(family: Family, rng: &mut impl Rng) -> Formula {
    let n = rng.random_range(2..=12u32);
    let m = rng.random_range(1..=40usize);
    let mut f = Formula::new(n);
    for _ in 0..m {
        let c = match family {
            Family::Tr => Clause::unit(distinct_literals(rng, n, 1)[0]),
            Family::Or => {
                let k = rng.random_range(1..=2);
                Clause::or(distinct_literals(rng, n, k))
            }
            Family::Eor => Clause::or(distinct_literals(rng, n, 2)),
            Family::Xor => {
                let l = distinct_literals(rng, n, 2);
                Clause::xor2(l[0], l[1])
            }
            Family::And => {
                let l = distinct_literals(rng, n, 2);
                Clause::and2(l[0], l[1])
            }
            Family::Ksat => {
                let k = rng.random_range(1..=4.min(n as usize));
                Clause::or(distinct_literals(rng, n, k))
            }
        };
        f.push(c).unwrap();
    }
    f
}

pub fn corpus(family: Family, count: usize, seed: u64) -> Vec<Formula> {
    let mut r = rng(seed ^ (family as u64) << 32);
    (0..count).map(|_| random_instance(family, &mut r)).collect()
}

/// Total bias straight from the definition: each literal of a clause over
/// `r` literals moves its variable by `±2^{1−r}`.
pub fn reference_bias(f: &Formula) -> Q {
    let mut per_var = vec![Q::zero(); f.n() as usize + 1];
    for c in f.clauses() {
        let w = frac(1, 1 << (c.literals().len() - 1));
        for l in c.literals() {
            if l.is_negated() {
                per_var[l.var() as usize] -= &w;
            } else {
                per_var[l.var() as usize] += &w;
            }
        }
    }
    per_var.iter().map(|b| b.abs()).sum()
}

/// Clause counts by width.
pub fn widths(f: &Formula) -> Vec<i64> {
    let mut m = vec![0i64; 4];
    for c in f.clauses() {
        m[c.literals().len() - 1] += 1;
    }
    m
}

/// Exhaustive optimum through plain clause evaluation.
pub fn naive_val(f: &Formula) -> u64 {
    let n = f.n();
    (0..1u64 << n)
        .map(|x| f.clauses().iter().filter(|c| c.eval(|v| x >> (v - 1) & 1 == 1)).count() as u64)
        .max()
        .unwrap_or(0)
        + f.tautology_count()
}

/// `a ≥ b·√2/2` decided exactly (`a, b ≥ 0`).
pub fn at_least_sqrt_half(a: &Q, b: &Q) -> bool {
    &(a * a) * q(2) >= b * b
}
