//! Independent oracles shared by the integration tests. None of these use
//! the library's rounding, interval or linear-algebra code.
#![allow(dead_code)]

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use stabilis::fp::{FpNumber, Precision};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn pow2(e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(BigInt::one() << e as usize)
    } else {
        BigRational::new(BigInt::one(), BigInt::one() << (-e) as usize)
    }
}

/// `floor(log2 |q|)` by bracketing with powers of two.
fn floor_log2(q: &BigRational) -> i64 {
    let q = q.abs();
    let mut e = q.numer().bits() as i64 - q.denom().bits() as i64;
    while pow2(e) > q {
        e -= 1;
    }
    while pow2(e + 1) <= q {
        e += 1;
    }
    e
}

/// Nearest `t`-bit float to `q` by enumerating the two neighbours on the
/// grid of the binade containing `q`; ties go to the even neighbour.
pub fn oracle_round(q: &BigRational, t: u32) -> BigRational {
    if q.is_zero() {
        return BigRational::zero();
    }
    let e = floor_log2(q);
    let ulp = pow2(e + 1 - t as i64);
    let scaled = q.abs() / &ulp;
    let below: BigInt = scaled.floor().to_integer();
    let above: BigInt = &below + 1;
    let lo = BigRational::from_integer(below.clone());
    let hi = BigRational::from_integer(above.clone());
    let d_lo = &scaled - &lo;
    let d_hi = &hi - &scaled;
    let k = if d_lo < d_hi || (d_lo == d_hi && below.is_even()) { below } else { above };
    let v = BigRational::from_integer(k) * ulp;
    if q.is_negative() {
        -v
    } else {
        v
    }
}

/// Random rational with numerator and denominator of up to `bits` bits
/// and a random binary scale in `[-scale, scale]`.
pub fn random_rational<R: Rng>(rng: &mut R, bits: u64, scale: i64) -> BigRational {
    let n = random_bigint(rng, bits);
    let mut d = random_bigint(rng, bits).abs();
    if d.is_zero() {
        d = BigInt::one();
    }
    let mut q = BigRational::new(n, d);
    if q.is_zero() {
        q = BigRational::one();
    }
    q * pow2(rng.random_range(-scale..=scale))
}

pub fn random_bigint<R: Rng>(rng: &mut R, bits: u64) -> BigInt {
    let words = bits.div_ceil(32) as usize;
    let mut digits: Vec<u32> = (0..words).map(|_| rng.random()).collect();
    let excess = words as u64 * 32 - bits;
    if let Some(last) = digits.last_mut() {
        *last >>= excess;
    }
    let sign = if rng.random() { Sign::Plus } else { Sign::Minus };
    BigInt::from_slice(sign, &digits)
}

/// Random nonzero float of precision `t` with exponent in `[-scale, scale]`.
pub fn random_fp<R: Rng>(rng: &mut R, t: u32, scale: i64) -> FpNumber {
    let p = Precision::new(t).unwrap();
    let mut m = random_bigint(rng, t as u64).abs();
    m.set_bit(t as u64 - 1, true);
    let negative = rng.random();
    FpNumber::from_parts(negative, m.to_biguint().unwrap(), rng.random_range(-scale..=scale), p).unwrap()
}

/// `sin 1` as an exact partial sum of its series; the truncation error is
/// below `1/(2n+3)!`.
pub fn sin_one_series(terms: u32) -> BigRational {
    let mut sum = BigRational::zero();
    let mut fact = BigInt::one();
    for n in 0..terms {
        let k = 2 * n + 1;
        if n > 0 {
            fact *= BigInt::from((k - 1) * k);
        }
        let term = BigRational::new(BigInt::one(), fact.clone());
        if n % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum
}

/// Largest eigenvalue of a symmetric matrix by bisection on the inertia of
/// `S - λI` (number of negative pivots of its LDLᵀ factorisation equals the
/// number of eigenvalues below λ).
pub fn largest_eigenvalue(s: &[Vec<f64>]) -> f64 {
    let n = s.len();
    let count_below = |lambda: f64| -> usize {
        let mut a: Vec<Vec<f64>> = s.to_vec();
        for (i, row) in a.iter_mut().enumerate() {
            row[i] -= lambda;
        }
        let mut negatives = 0;
        for k in 0..n {
            let mut pivot = a[k][k];
            if pivot == 0.0 {
                pivot = -1e-300;
            }
            if pivot < 0.0 {
                negatives += 1;
            }
            for i in k + 1..n {
                let f = a[i][k] / pivot;
                for j in k + 1..n {
                    a[i][j] -= f * a[k][j];
                }
            }
        }
        negatives
    };
    let bound: f64 = s.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max);
    let (mut lo, mut hi) = (-bound - 1.0, bound + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `‖M‖₂` as the square root of the largest eigenvalue of `MᵀM`.
pub fn spectral_norm_oracle(m: &[Vec<f64>]) -> f64 {
    let cols = m[0].len();
    let mut s = vec![vec![0.0; cols]; cols];
    for i in 0..cols {
        for j in 0..cols {
            s[i][j] = m.iter().map(|r| r[i] * r[j]).sum();
        }
    }
    largest_eigenvalue(&s).max(0.0).sqrt()
}

use stabilis::condition::{AffineOp, CatalogFunction};
use stabilis::linalg::Matrix;

/// Every catalog function with a fixed arity or a representative one.
pub fn catalog_cases() -> Vec<CatalogFunction> {
    use CatalogFunction as F;
    let matrix = Matrix::from_rows(&[
        vec![1.0, -2.0, 0.5, 3.0],
        vec![0.25, 1.0, -1.0, 2.0],
        vec![2.0, 0.0, 1.5, -0.5],
    ])
    .unwrap();
    vec![
        F::Product,
        F::Sum,
        F::Hadamard,
        F::TensorProduct { left: 2 },
        F::LinearMap(matrix),
        F::InnerProduct,
        F::Copy,
        F::SquaredNorm,
        F::Sqrt,
        F::Norm2,
        F::Power(3),
        F::Power(-2),
        F::Affine { op: AffineOp::Add, constant: 1.5 },
        F::Affine { op: AffineOp::Sub, constant: 0.25 },
        F::Affine { op: AffineOp::Mul, constant: -3.0 },
        F::Affine { op: AffineOp::Div, constant: 7.0 },
        F::Sin,
        F::StrassenH,
        F::StrassenG,
        F::MatmulEntry { row: 0, col: 1 },
        F::MatmulEntry { row: 1, col: 1 },
        F::Matmul2x2,
        F::composite(F::Sum, F::Hadamard),
        F::composite(F::Sqrt, F::SquaredNorm),
        F::composite(F::InnerProduct, F::Copy),
    ]
}

/// Input dimension used for `f` in randomized tests.
pub fn case_dim<R: Rng>(f: &CatalogFunction, rng: &mut R) -> usize {
    use CatalogFunction as F;
    match f {
        F::Sqrt | F::Power(_) | F::Affine { .. } | F::Sin => 1,
        F::StrassenH | F::MatmulEntry { .. } | F::Matmul2x2 => 8,
        F::StrassenG => 7,
        F::LinearMap(m) => m.cols(),
        F::TensorProduct { left } => left + rng.random_range(1..=4),
        F::Hadamard | F::InnerProduct => 2 * rng.random_range(1..=4),
        F::Composite { inner, .. } if matches!(**inner, F::Hadamard) => 2 * rng.random_range(1..=4),
        _ => rng.random_range(1..=8),
    }
}

/// Random point where `f` is smooth and moderately conditioned: positive
/// coordinates (mixed signs for sign-insensitive maps), `κ ≤ 1e3`.
pub fn smooth_point<R: Rng>(f: &CatalogFunction, rng: &mut R) -> Vec<f64> {
    use CatalogFunction as F;
    loop {
        let n = case_dim(f, rng);
        let x: Vec<f64> = match f {
            F::Sin => vec![rng.random_range(0.2..1.2)],
            _ => (0..n)
                .map(|_| {
                    let m = rng.random_range(0.5..2.0);
                    let mixed = matches!(f, F::Product | F::Hadamard | F::TensorProduct { .. } | F::Copy | F::SquaredNorm | F::Norm2 | F::Power(_));
                    if mixed && rng.random::<bool>() { -m } else { m }
                })
                .collect(),
        };
        if let Ok(k) = f.closed_form_kappa(&x).or_else(|_| stabilis::condition::kappa_at(f, &x)) {
            if k.is_finite() && k <= 1e3 {
                return x;
            }
        }
    }
}
