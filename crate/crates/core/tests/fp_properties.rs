mod common;

use common::{oracle_round, rat};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;
use stabilis::fp::{fp_add, fp_div, fp_mul, fp_sub, round_rational, FpError, FpNumber, Precision};

fn rational() -> impl Strategy<Value = BigRational> {
    (any::<i64>(), 1u64..=u64::MAX, -200i32..200).prop_map(|(n, d, s)| {
        let q = BigRational::new(n.into(), d.into());
        let q = if q.is_zero() { BigRational::from_integer(1.into()) } else { q };
        let two = BigRational::from_integer(2.into());
        q * num_traits::Pow::pow(two, s)
    })
}

fn precision() -> impl Strategy<Value = Precision> {
    (3u32..=256).prop_map(|t| Precision::new(t).unwrap())
}

fn fp_at(p: Precision) -> impl Strategy<Value = FpNumber> {
    rational().prop_map(move |q| round_rational(&q, p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn rounding_error_at_most_u(q in rational(), p in precision()) {
        let r = round_rational(&q, p).to_exact();
        prop_assert!((&r - &q).abs() <= p.unit_roundoff() * q.abs());
        prop_assert_eq!(r, oracle_round(&q, p.bits()));
    }

    #[test]
    fn rounding_is_monotone(a in rational(), b in rational(), p in precision()) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(round_rational(&lo, p).to_exact() <= round_rational(&hi, p).to_exact());
    }

    #[test]
    fn rounding_is_odd(q in rational(), p in precision()) {
        prop_assert_eq!(round_rational(&-q.clone(), p), round_rational(&q, p).neg());
    }

    #[test]
    fn representable_values_are_fixed(q in rational(), t in 3u32..=200, extra in 0u32..64) {
        let p = Precision::new(t).unwrap();
        let a = round_rational(&q, p);
        let wider = Precision::new(t + extra).unwrap();
        prop_assert_eq!(round_rational(&a.to_exact(), wider).to_exact(), a.to_exact());
    }

    #[test]
    fn ops_match_exact_then_round(
        (p, a, b) in precision().prop_flat_map(|p| (Just(p), fp_at(p), fp_at(p)))
    ) {
        let (x, y) = (a.to_exact(), b.to_exact());
        let t = p.bits();
        prop_assert_eq!(fp_add(&a, &b, p).unwrap().to_exact(), oracle_round(&(&x + &y), t));
        prop_assert_eq!(fp_sub(&a, &b, p).unwrap().to_exact(), oracle_round(&(&x - &y), t));
        prop_assert_eq!(fp_mul(&a, &b, p).unwrap().to_exact(), oracle_round(&(&x * &y), t));
        prop_assert_eq!(fp_div(&a, &b, p).unwrap().to_exact(), oracle_round(&(&x / &y), t));
    }

    #[test]
    fn mixed_precision_operands(a in rational(), b in rational(), ta in 3u32..80, t in 3u32..80) {
        let pa = Precision::new(ta).unwrap();
        let p = Precision::new(t.max(ta)).unwrap();
        let (a, b) = (round_rational(&a, pa), round_rational(&b, pa));
        let exact = a.to_exact() + b.to_exact();
        prop_assert_eq!(fp_add(&a, &b, p).unwrap().to_exact(), oracle_round(&exact, p.bits()));
    }

    #[test]
    fn far_apart_addends(big in rational(), gap in 60i64..400, t in 3u32..64) {
        // the small operand only contributes a sticky bit
        let p = Precision::new(t).unwrap();
        let a = round_rational(&big, p);
        let small = round_rational(&(big.clone() / BigRational::from_integer(BigInt::from(1) << gap as usize)), p);
        let exact = a.to_exact() + small.to_exact();
        prop_assert_eq!(fp_add(&a, &small, p).unwrap().to_exact(), oracle_round(&exact, t));
        let exact = a.to_exact() - small.to_exact();
        prop_assert_eq!(fp_sub(&a, &small, p).unwrap().to_exact(), oracle_round(&exact, t));
    }
}

#[test]
fn one_tenth_at_three_bits() {
    let p = Precision::new(3).unwrap();
    let x = round_rational(&rat(1, 10), p);
    assert_eq!(x.mantissa(), &6u32.into());
    assert_eq!(x.exponent(), -3);
    assert_eq!(x.to_exact(), rat(3, 32));
    assert_eq!(x.to_f64(), 0.09375);
}

#[test]
fn one_plus_sixteenth_at_three_bits() {
    let p = Precision::new(3).unwrap();
    let one = FpNumber::one(p);
    let sixteenth = round_rational(&rat(1, 16), p);
    assert_eq!(fp_add(&one, &sixteenth, p).unwrap(), one);
}

#[test]
fn division_by_zero_is_an_error() {
    let p = Precision::DOUBLE;
    assert_eq!(fp_div(&FpNumber::one(p), &FpNumber::zero(p), p), Err(FpError::DivisionByZero));
}

#[test]
fn multiplying_by_one_is_exact() {
    let p = Precision::new(24).unwrap();
    let x = round_rational(&rat(22, 7), p);
    assert_eq!(fp_mul(&x, &FpNumber::one(p), p).unwrap(), x);
}

#[test]
fn small_integers_are_fixed_points() {
    for t in [3, 11, 53, 113] {
        let p = Precision::new(t).unwrap();
        assert_eq!(round_rational(&rat(3, 1), p).to_exact(), rat(3, 1));
        assert_eq!(round_rational(&rat(1, 1), p), FpNumber::one(p));
    }
}

#[test]
fn precision_bounds() {
    assert!(Precision::new(2).is_err());
    assert!(Precision::new(3).is_ok());
    assert_eq!(Precision::new(3).unwrap().unit_roundoff(), rat(1, 8));
}
