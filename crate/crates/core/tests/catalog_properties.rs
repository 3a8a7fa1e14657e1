mod common;

use common::{random_fp, random_rational, rat, sin_one_series};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stabilis::catalog::{
    babylonian_sqrt, high_precision_sin, inner_product, linear_map, matmul_2x2, naive_product, naive_sum, norm2,
    strassen_2x2, InnerProduct, Matmul2x2, NaiveProduct, NaiveSum, Norm2, NumericalAlgorithm, Strassen2x2,
};
use stabilis::fp::{round_rational, ExactReal, FpNumber, Precision};
use stabilis::harness::backward_check_product;
use stabilis::linalg::Matrix;
use stabilis::relmetric::{rel_dist, RelPoint};

fn prec(t: u32) -> Precision {
    Precision::new(t).unwrap()
}

fn fp(v: f64) -> FpNumber {
    FpNumber::from_f64(v).unwrap()
}

fn fps(v: &[f64]) -> Vec<FpNumber> {
    v.iter().map(|x| fp(*x)).collect()
}

fn exact_of(x: &[FpNumber]) -> Vec<ExactReal> {
    x.iter().map(ExactReal::from_fp).collect()
}

/// Relative distance from the computed output to the exact reference.
fn rel_error(alg: &dyn NumericalAlgorithm, x: &[FpNumber], p: Precision) -> f64 {
    let out = alg.evaluate(x, p).unwrap();
    let reference = alg.exact_reference(&exact_of(x), 4 * p.bits() + 64).unwrap();
    rel_dist(&RelPoint::from_fp(&out), &RelPoint::new(reference).unwrap()).unwrap().value()
}

#[test]
fn strassen_reference_is_the_matrix_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10_000 {
        let x: Vec<ExactReal> = (0..8).map(|_| ExactReal::Rational(random_rational(&mut rng, 40, 20))).collect();
        let s = Strassen2x2.exact_reference(&x, 64).unwrap();
        let m = Matmul2x2.exact_reference(&x, 64).unwrap();
        for (a, b) in s.iter().zip(&m) {
            assert!(a.is_exact() && b.is_exact());
            assert_eq!(a.midpoint(), b.midpoint());
        }
    }
}

#[test]
fn babylonian_square_is_within_five_u() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for t in [11, 24, 53, 113] {
        let p = prec(t);
        let u = p.unit_roundoff();
        for binade in -30..30 {
            for _ in 0..20 {
                let g = random_fp(&mut rng, t, 0).abs().mul_pow2(binade).unwrap();
                let r = babylonian_sqrt(&g, p).unwrap().to_exact();
                let g = g.to_exact();
                assert!((&r * &r - &g).abs() <= BigRational::from_integer(5.into()) * &u * &g, "t={t} g={g}");
            }
        }
    }
}

#[test]
fn babylonian_examples() {
    for t in [3, 8, 53, 200] {
        assert_eq!(babylonian_sqrt(&fp(4.0), prec(t)).unwrap().to_exact(), rat(2, 1));
        assert!(babylonian_sqrt(&fp(0.0), prec(t)).unwrap().is_zero());
    }
    assert!(babylonian_sqrt(&fp(-1.0), Precision::DOUBLE).is_err());
    let r = babylonian_sqrt(&fp(2.0), Precision::DOUBLE).unwrap();
    let d = rel_dist(&RelPoint::from_fp(&[r]), &RelPoint::new(vec![ExactReal::from_integer(2).sqrt(200).unwrap()]).unwrap()).unwrap();
    assert!(d.value() <= 50.0 * Precision::DOUBLE.unit_roundoff_f64());
}

#[test]
fn sin_one_agrees_with_series_to_sixty_digits() {
    let s = high_precision_sin(&ExactReal::from_integer(1), 256).unwrap().midpoint();
    let series = sin_one_series(40);
    let tol = BigRational::new(1.into(), BigInt::from(10).pow(60));
    assert!((s - series).abs() < tol);
}

#[test]
fn sin_of_sixth_of_pi_and_zero() {
    let x = ExactReal::pi(400).div(&ExactReal::from_integer(6), 400).unwrap();
    let s = high_precision_sin(&x, 256).unwrap();
    assert!(s.contains(&rat(1, 2)));
    assert!((s.midpoint() - rat(1, 2)).abs() < BigRational::new(1.into(), BigInt::from(1) << 250));
    assert!(high_precision_sin(&ExactReal::zero(), 256).unwrap().is_zero());
}

#[test]
fn small_exact_examples() {
    let p = prec(8);
    assert_eq!(naive_product(&fps(&[2.0, 2.0, 2.0]), prec(3)).unwrap().to_exact(), rat(8, 1));
    assert_eq!(naive_sum(&fps(&[1.0; 4]), p).unwrap().to_exact(), rat(4, 1));
    let dot = inner_product(&fps(&[1.0, 0.0, 2.0]), &fps(&[3.0, 5.0, 4.0]), p).unwrap();
    assert_eq!(dot.to_exact(), rat(11, 1));
    let five = norm2(&fps(&[3.0, 4.0]), Precision::DOUBLE).unwrap();
    let d = rel_dist(&RelPoint::from_fp(&[five]), &RelPoint::from_f64s(&[5.0]).unwrap()).unwrap();
    assert!(d.value() <= 100.0 * Precision::DOUBLE.unit_roundoff_f64());
    let id = fps(&[1.0, 0.0, 0.0, 1.0]);
    let out: Vec<BigRational> = strassen_2x2(&id, &id, prec(3)).unwrap().iter().map(|v| v.to_exact()).collect();
    assert_eq!(out, vec![rat(1, 1), rat(0, 1), rat(0, 1), rat(1, 1)]);
}

#[test]
fn matmul_is_stacked_inner_products() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let p = prec(24);
    for _ in 0..200 {
        let a: Vec<FpNumber> = (0..4).map(|_| random_fp(&mut rng, 24, 4)).collect();
        let b: Vec<FpNumber> = (0..4).map(|_| random_fp(&mut rng, 24, 4)).collect();
        let c = matmul_2x2(&a, &b, p).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let row = [a[2 * i].clone(), a[2 * i + 1].clone()];
                let col = [b[j].clone(), b[2 + j].clone()];
                assert_eq!(c[2 * i + j], inner_product(&row, &col, p).unwrap());
            }
            let m = Matrix::from_rows(&[vec![b[0].to_f64(), b[2].to_f64()], vec![b[1].to_f64(), b[3].to_f64()]]).unwrap();
            let via_map = linear_map(&m, &[a[2 * i].clone(), a[2 * i + 1].clone()], p).unwrap();
            assert_eq!(via_map, c[2 * i..2 * i + 2].to_vec());
        }
    }
}

#[test]
fn naive_product_error_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let p = prec(24);
    for _ in 0..2000 {
        let x: Vec<FpNumber> = (0..10).map(|_| random_fp(&mut rng, 24, 8)).collect();
        let d = rel_error(&NaiveProduct, &x, p);
        assert!(d <= 2.0 * 19.0 * p.unit_roundoff_f64(), "{d}");
    }
}

#[test]
fn naive_product_backward_witness() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for _ in 0..2000 {
        let k = rng.random_range(1..=16);
        let t = rng.random_range(8..=64u32);
        let p = prec(t);
        let x: Vec<FpNumber> = (0..k).map(|_| random_fp(&mut rng, t, 16)).collect();
        let w = backward_check_product(&x, p).unwrap();
        assert!(w <= 2.0 * k as f64 * p.unit_roundoff_f64(), "k={k} t={t} {w}");
    }
}

#[test]
fn cancelling_sum_has_large_loss() {
    let p = prec(24);
    let x = vec![fp(1.0), fp(-1.0 + 2f64.powi(-40))];
    // rounding the second input to 24 bits erases the difference
    let out = NaiveSum.evaluate(&x, p).unwrap();
    assert!(out[0].is_zero());
    assert!(rel_error(&NaiveSum, &x, p).is_infinite());
}

#[test]
fn strassen_forward_error_in_absolute_terms() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let p = Precision::DOUBLE;
    for _ in 0..2000 {
        let x: Vec<FpNumber> = (0..8).map(|_| random_fp(&mut rng, 53, 3)).collect();
        let out = strassen_2x2(&x[..4], &x[4..], p).unwrap();
        let exact = Matmul2x2.exact_reference(&exact_of(&x), 128).unwrap();
        let max = |v: &[FpNumber]| v.iter().map(|f| f.to_f64().abs()).fold(0.0, f64::max);
        let bound = 100.0 * max(&x[..4]) * max(&x[4..]) * p.unit_roundoff_f64();
        for (o, e) in out.iter().zip(&exact) {
            let diff = (o.to_exact() - e.midpoint()).abs();
            assert!(round_rational(&diff, p).to_f64() <= bound);
        }
    }
}

#[test]
fn strassen_loses_relative_accuracy_near_diagonal() {
    let eps = 1e-8;
    let x = fps(&[1.0, eps, eps, 1.0, 1.0, eps, eps, 1.0]);
    let lop = rel_error(&Strassen2x2, &x, Precision::DOUBLE) / Precision::DOUBLE.unit_roundoff_f64();
    assert!(lop >= 1e6, "{lop}");
    let classic = rel_error(&Matmul2x2, &x, Precision::DOUBLE) / Precision::DOUBLE.unit_roundoff_f64();
    assert!(classic <= 4.0, "{classic}");
}

#[test]
fn errors_vanish_with_precision() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    let algs: Vec<Box<dyn NumericalAlgorithm>> =
        vec![Box::new(NaiveSum), Box::new(NaiveProduct), Box::new(InnerProduct), Box::new(Norm2), Box::new(Strassen2x2)];
    for alg in algs {
        let x: Vec<FpNumber> = (0..8)
            .map(|_| random_fp(&mut rng, 30, 4).abs())
            .collect();
        let coarse = rel_error(alg.as_ref(), &x, prec(24));
        let fine = rel_error(alg.as_ref(), &x, prec(256));
        assert!(fine <= 1e-70 && fine <= coarse, "{}: {coarse} {fine}", alg.name());
    }
}

#[test]
fn exact_reference_is_tight() {
    let x = exact_of(&fps(&[2.0, 3.0]));
    let r = Norm2.exact_reference(&x, 200).unwrap();
    let v = r[0].midpoint();
    // sqrt(13) squared is 13 to about 2^-195
    let err = (&v * &v - rat(13, 1)).abs();
    assert!(err < BigRational::new(1.into(), BigInt::from(1) << 190));
    assert!(!BigRational::is_zero(&v));
}
