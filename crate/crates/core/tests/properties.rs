mod common;

use proptest::prelude::*;

use common::{naive_val, reference_bias};
use streamcsp::assignment::Assignment;
use streamcsp::bias::exact_bias;
use streamcsp::estimators::dispatch_exact;
use streamcsp::formula::{decompose_to_and, parse_str, Clause, Formula, Literal, Normalized, TruthTable};
use streamcsp::l1sketch::{ExactL1, L1Sketch};
use streamcsp::oracle::{exact_val, val_of};

const N: u32 = 6;

fn literal() -> impl Strategy<Value = Literal> {
    (1..=N, any::<bool>()).prop_map(|(v, neg)| Literal::new(v, neg))
}

fn clause() -> impl Strategy<Value = Clause> {
    prop_oneof![
        literal().prop_map(Clause::unit),
        prop::collection::vec(literal(), 1..=4).prop_map(Clause::or),
        (literal(), literal()).prop_map(|(a, b)| Clause::xor2(a, b)),
        (literal(), literal()).prop_map(|(a, b)| Clause::and2(a, b)),
        (0u8..16, literal(), literal()).prop_map(|(t, a, b)| Clause::generic(TruthTable::from_bits(t), a, b)),
    ]
}

/// Clauses touching at most two variables.
fn narrow_clause() -> impl Strategy<Value = Clause> {
    clause().prop_filter("at most two variables", |c| c.vars().len() <= 2)
}

fn formula() -> impl Strategy<Value = Formula> {
    prop::collection::vec(clause(), 0..25).prop_map(|cs| {
        let mut f = Formula::new(N);
        for c in cs {
            f.push(c).unwrap();
        }
        f
    })
}

fn updates() -> impl Strategy<Value = Vec<(u64, i64)>> {
    prop::collection::vec((1u64..200, -50i64..50), 0..40)
}

fn sketch_of(ups: &[(u64, i64)], seed: u64) -> L1Sketch {
    let mut s = L1Sketch::new(0.5, 3, seed).unwrap();
    for &(i, v) in ups {
        s.update(i, v);
    }
    s
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn and_decomposition_counts_match(c in narrow_clause()) {
        let d = decompose_to_and(&c).unwrap();
        prop_assert!(d.clauses.iter().all(|a| a.literals().len() == 2));
        for x in 0..1u64 << N {
            let value = |v: u32| x >> (v - 1) & 1 == 1;
            let ands = d.clauses.iter().filter(|a| a.eval(value)).count() as u64;
            prop_assert_eq!(ands + d.satisfied_constants, u64::from(c.eval(value)));
        }
    }
}

proptest! {
    #[test]
    fn serialization_round_trips(f in formula()) {
        let g = parse_str(&f.to_mcsp_string()).unwrap();
        prop_assert_eq!(g.n(), f.n());
        prop_assert_eq!(g.clauses(), f.clauses());
        prop_assert_eq!(g.tautology_count(), f.tautology_count());
        prop_assert_eq!(g.contradiction_count(), f.contradiction_count());
    }

    #[test]
    fn normalization_preserves_truth(c in clause()) {
        let normalized = c.clone().normalize();
        for x in 0..1u64 << N {
            let value = |v: u32| x >> (v - 1) & 1 == 1;
            let expected = c.eval(value);
            let got = match &normalized {
                Normalized::Clause(d) => d.eval(value),
                Normalized::Tautology => true,
                Normalized::Contradiction => false,
            };
            prop_assert_eq!(got, expected);
        }
    }

    #[test]
    fn sketch_is_linear(a in updates(), b in updates(), seed in any::<u64>()) {
        let mut merged = sketch_of(&a, seed);
        merged.merge(&sketch_of(&b, seed)).unwrap();
        let joint: Vec<_> = a.iter().chain(&b).copied().collect();
        prop_assert_eq!(merged.rows(), sketch_of(&joint, seed).rows());
    }

    #[test]
    fn sketch_ignores_update_order(mut a in updates(), seed in any::<u64>(), rot in 0usize..40) {
        let before = sketch_of(&a, seed).rows();
        if !a.is_empty() {
            let k = rot % a.len();
            a.rotate_left(k);
            a.reverse();
        }
        prop_assert_eq!(sketch_of(&a, seed).rows(), before);
    }

    #[test]
    fn sketch_scales_exactly(a in updates(), k in -20i64..20, seed in any::<u64>()) {
        let scaled: Vec<_> = a.iter().map(|&(i, v)| (i, v * k)).collect();
        let mut s = sketch_of(&scaled, seed);
        // subtract x once per unit of k, unbuffered
        let mut minus = L1Sketch::new(0.5, 3, seed).unwrap().with_buffer(0);
        for _ in 0..k.unsigned_abs() {
            for &(i, v) in &a {
                minus.update(i, -v * k.signum());
            }
        }
        s.merge(&minus).unwrap();
        prop_assert!(s.rows().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn exact_backend_matches_definition(a in updates()) {
        let mut e = ExactL1::new();
        let mut dense = vec![0i64; 200];
        for &(i, v) in &a {
            e.update(i, v);
            dense[i as usize] += v;
        }
        prop_assert_eq!(e.norm(), dense.iter().map(|v| v.unsigned_abs() as u128).sum::<u128>());
    }

    #[test]
    fn bias_matches_definition_and_bounds(f in formula()) {
        // clauses have at most four literals, so k_max = 4 suffices
        let b = exact_bias(&f, 4).unwrap();
        prop_assert_eq!(&b, &reference_bias(&f));
        prop_assert!(b <= common::q(f.m() as i64));
    }

    #[test]
    fn bias_is_negation_invariant(f in formula()) {
        prop_assert_eq!(exact_bias(&f, 63).unwrap(), exact_bias(&f.negated(), 63).unwrap());
        let x = Assignment::from_mask(0b10110, N as usize);
        prop_assert_eq!(val_of(&f, &x).unwrap(), val_of(&f.negated(), &x.complement()).unwrap());
    }

    #[test]
    fn oracle_is_the_maximum(f in formula(), mask in 0u64..1 << N) {
        let r = exact_val(&f, 24).unwrap();
        prop_assert_eq!(r.val, naive_val(&f));
        prop_assert_eq!(val_of(&f, &r.argmax).unwrap(), r.val);
        prop_assert!(val_of(&f, &Assignment::from_mask(mask, N as usize)).unwrap() <= r.val);
    }

    #[test]
    fn exact_estimate_never_exceeds_optimum(cs in prop::collection::vec(narrow_clause(), 0..25)) {
        let f = Formula::from_clauses(N, cs).unwrap();
        let e = dispatch_exact(&f).unwrap();
        let v = exact_val(&f, 24).unwrap().val as f64;
        prop_assert!(e.v <= v, "v={} val={}", e.v, v);
        prop_assert!(e.v >= e.alpha * v - 1e-12, "v={} alpha={} val={}", e.v, e.alpha, v);
        prop_assert!(e.certified_ub >= v);
    }
}

#[test]
fn single_update_coverage() {
    let delta = 0.1;
    let hits = (0..1000u64)
        .filter(|&seed| {
            let mut s = L1Sketch::new(delta, 1, seed).unwrap();
            s.update(1, 7);
            (s.estimate() - 7.0).abs() <= delta * 7.0
        })
        .count();
    assert!(hits >= 750, "{hits}/1000");
}

fn dense_sign_coverage(n: u64, t: u64, seeds: u64) -> u64 {
    let delta = 0.1;
    (0..seeds)
        .filter(|&seed| {
            let mut s = L1Sketch::new(delta, t, seed).unwrap();
            let mut r = common::rng(seed);
            for i in 1..=n {
                s.update(i, if rand::Rng::random::<bool>(&mut r) { 1 } else { -1 });
            }
            (s.estimate() - n as f64).abs() <= delta * n as f64
        })
        .count() as u64
}

#[test]
fn dense_sign_vector_smoke() {
    assert!(dense_sign_coverage(10_000, 3, 20) >= 15);
}

/// The full-size version, about six minutes on one core.
#[test]
#[ignore]
fn dense_sign_vector_coverage() {
    assert!(dense_sign_coverage(10_000, 15, 200) >= 198);
}
