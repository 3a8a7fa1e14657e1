//! Numerical algorithms executed in software floating point, each paired
//! with the exact function it approximates.

mod sine;

use thiserror::Error;

pub use sine::{high_precision_sin, sine_working, taylor_terms};

use crate::condition::{AffineOp, CatalogFunction, ConditionError};
use crate::fp::{fp_add, fp_div, fp_mul, fp_sub, ExactReal, FpError, FpNumber, Precision};
use crate::linalg::Matrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("wrong input arity: {0}")]
    Arity(&'static str),
    #[error("input outside the domain of the algorithm")]
    OutsideDomain,
    #[error(transparent)]
    Fp(#[from] FpError),
    #[error(transparent)]
    Condition(#[from] ConditionError),
}

/// A finite sequence of floating-point operations approximating a
/// catalog function.
pub trait NumericalAlgorithm: Send + Sync {
    fn name(&self) -> String;

    /// The exact map the algorithm approximates.
    fn function(&self) -> CatalogFunction;

    /// Runs the algorithm at precision `p`; inputs are rounded to `p` first.
    fn evaluate(&self, x: &[FpNumber], p: Precision) -> Result<Vec<FpNumber>, CatalogError>;

    /// The exact value (or an enclosure with about `bits` bits).
    fn exact_reference(&self, x: &[ExactReal], bits: u32) -> Result<Vec<ExactReal>, CatalogError> {
        Ok(self.function().eval_exact(x, bits)?)
    }
}

fn rounded(x: &[FpNumber], p: Precision) -> Vec<FpNumber> {
    x.iter().map(|v| v.round_to(p)).collect()
}

fn check_len(x: &[FpNumber], f: &CatalogFunction) -> Result<usize, CatalogError> {
    Ok(f.output_dim(x.len())?)
}

/// Left-to-right summation.
pub fn naive_sum(x: &[FpNumber], p: Precision) -> Result<FpNumber, CatalogError> {
    let mut acc = FpNumber::zero(p);
    for v in x {
        acc = fp_add(&acc, &v.round_to(p), p)?;
    }
    Ok(acc)
}

/// Left-to-right product.
pub fn naive_product(x: &[FpNumber], p: Precision) -> Result<FpNumber, CatalogError> {
    let Some(first) = x.first() else {
        return Err(CatalogError::Arity("needs at least one input"));
    };
    let mut acc = first.round_to(p);
    for v in &x[1..] {
        acc = fp_mul(&acc, &v.round_to(p), p)?;
    }
    Ok(acc)
}

/// `Σ x_i y_i`, products rounded then summed left to right.
pub fn inner_product(x: &[FpNumber], y: &[FpNumber], p: Precision) -> Result<FpNumber, CatalogError> {
    if x.len() != y.len() || x.is_empty() {
        return Err(CatalogError::Arity("needs two vectors of equal length"));
    }
    let mut acc = FpNumber::zero(p);
    for (a, b) in x.iter().zip(y) {
        let prod = fp_mul(&a.round_to(p), &b.round_to(p), p)?;
        acc = fp_add(&acc, &prod, p)?;
    }
    Ok(acc)
}

/// `A x` with each row an inner product against the rounded matrix row.
pub fn linear_map(a: &Matrix, x: &[FpNumber], p: Precision) -> Result<Vec<FpNumber>, CatalogError> {
    if x.len() != a.cols() {
        return Err(CatalogError::Arity("input length must equal the number of matrix columns"));
    }
    (0..a.rows())
        .map(|i| {
            let row = a
                .row(i)
                .iter()
                .map(|v| FpNumber::round_f64(*v, p))
                .collect::<Result<Vec<_>, _>>()?;
            inner_product(&row, x, p)
        })
        .collect()
}

/// Square root by Newton's iteration on a scaled problem: with
/// `4^(k-1) <= g <= 4^k`, iterate on `x² - g 4^-k` from 1/2 until the step is
/// at most `4u x_n` (at most `2t` steps), then scale back by `2^k`.
pub fn babylonian_sqrt(g: &FpNumber, p: Precision) -> Result<FpNumber, CatalogError> {
    if g.is_negative() {
        return Err(CatalogError::OutsideDomain);
    }
    if g.is_zero() {
        return Ok(FpNumber::zero(p));
    }
    let g = g.round_to(p);
    let k = (g.exponent() + 1).div_euclid(2);
    let s = g.mul_pow2(-2 * k)?;
    let t = p.bits() as i64;
    let mut x = FpNumber::one(p).mul_pow2(-1)?;
    for _ in 0..2 * t {
        let next = fp_add(&x, &fp_div(&s, &x, p)?, p)?.mul_pow2(-1)?;
        let step = fp_sub(&next, &x, p)?.abs();
        let done = step <= x.mul_pow2(2 - t)?;
        x = next;
        if done {
            break;
        }
    }
    Ok(x.mul_pow2(k)?)
}

/// `‖x‖₂` as the Newton square root of the naive sum of squares.
pub fn norm2(x: &[FpNumber], p: Precision) -> Result<FpNumber, CatalogError> {
    babylonian_sqrt(&inner_product(x, x, p)?, p)
}

/// The textbook 2x2 product `c_ij = a_i1 b_1j + a_i2 b_2j`.
pub fn matmul_2x2(a: &[FpNumber], b: &[FpNumber], p: Precision) -> Result<Vec<FpNumber>, CatalogError> {
    if a.len() != 4 || b.len() != 4 {
        return Err(CatalogError::Arity("needs two 2x2 matrices"));
    }
    let mut c = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            c.push(inner_product(&[a[2 * i].clone(), a[2 * i + 1].clone()], &[b[j].clone(), b[2 + j].clone()], p)?);
        }
    }
    Ok(c)
}

fn signed_sum(coeffs: &[i8], x: &[FpNumber], p: Precision) -> Result<FpNumber, CatalogError> {
    let mut acc: Option<FpNumber> = None;
    for (c, v) in coeffs.iter().zip(x) {
        acc = match (*c, acc) {
            (0, a) => a,
            (1, None) => Some(v.clone()),
            (_, None) => Some(v.neg()),
            (1, Some(a)) => Some(fp_add(&a, v, p)?),
            (_, Some(a)) => Some(fp_sub(&a, v, p)?),
        };
    }
    Ok(acc.unwrap_or_else(|| FpNumber::zero(p)))
}

const LEFT: [[i8; 4]; 7] = [
    [1, 0, 0, 1],
    [0, 0, 1, 1],
    [1, 0, 0, 0],
    [0, 0, 0, 1],
    [1, 1, 0, 0],
    [-1, 0, 1, 0],
    [0, 1, 0, -1],
];
const RIGHT: [[i8; 4]; 7] = [
    [1, 0, 0, 1],
    [1, 0, 0, 0],
    [0, 1, 0, -1],
    [-1, 0, 1, 0],
    [0, 0, 0, 1],
    [1, 1, 0, 0],
    [0, 0, 1, 1],
];
const RECOMBINE: [[i8; 7]; 4] = [
    [1, 0, 0, 1, -1, 0, 1],
    [0, 0, 1, 0, 1, 0, 0],
    [0, 1, 0, 1, 0, 0, 0],
    [1, -1, 1, 0, 0, 1, 0],
];

/// The seven Strassen products.
pub fn strassen_products(a: &[FpNumber], b: &[FpNumber], p: Precision) -> Result<Vec<FpNumber>, CatalogError> {
    if a.len() != 4 || b.len() != 4 {
        return Err(CatalogError::Arity("needs two 2x2 matrices"));
    }
    let (a, b) = (rounded(a, p), rounded(b, p));
    (0..7)
        .map(|r| {
            let l = signed_sum(&LEFT[r], &a, p)?;
            let m = signed_sum(&RIGHT[r], &b, p)?;
            Ok(fp_mul(&l, &m, p)?)
        })
        .collect()
}

/// Recombination of the seven products, sums taken left to right.
pub fn strassen_recombine(x: &[FpNumber], p: Precision) -> Result<Vec<FpNumber>, CatalogError> {
    if x.len() != 7 {
        return Err(CatalogError::Arity("needs seven products"));
    }
    let x = rounded(x, p);
    RECOMBINE.iter().map(|row| signed_sum(row, &x, p)).collect()
}

/// Strassen's 2x2 product; matrices are row-major.
pub fn strassen_2x2(a: &[FpNumber], b: &[FpNumber], p: Precision) -> Result<Vec<FpNumber>, CatalogError> {
    strassen_recombine(&strassen_products(a, b, p)?, p)
}

macro_rules! simple_algorithm {
    ($name:ident, $label:expr, $func:expr, |$x:ident, $p:ident| $body:expr) => {
        #[derive(Clone, Copy, Debug, Default)]
        pub struct $name;

        impl NumericalAlgorithm for $name {
            fn name(&self) -> String {
                $label.to_string()
            }
            fn function(&self) -> CatalogFunction {
                $func
            }
            fn evaluate(&self, $x: &[FpNumber], $p: Precision) -> Result<Vec<FpNumber>, CatalogError> {
                check_len($x, &self.function())?;
                $body
            }
        }
    };
}

simple_algorithm!(NaiveSum, "naive_sum", CatalogFunction::Sum, |x, p| Ok(vec![naive_sum(x, p)?]));
simple_algorithm!(NaiveProduct, "naive_product", CatalogFunction::Product, |x, p| Ok(vec![
    naive_product(x, p)?
]));
simple_algorithm!(InnerProduct, "inner_product", CatalogFunction::InnerProduct, |x, p| {
    let h = x.len() / 2;
    Ok(vec![inner_product(&x[..h], &x[h..], p)?])
});
simple_algorithm!(Hadamard, "hadamard", CatalogFunction::Hadamard, |x, p| {
    let h = x.len() / 2;
    (0..h)
        .map(|i| Ok(fp_mul(&x[i].round_to(p), &x[h + i].round_to(p), p)?))
        .collect()
});
simple_algorithm!(Duplicate, "copy", CatalogFunction::Copy, |x, p| {
    let r = rounded(x, p);
    Ok(r.iter().chain(r.iter()).cloned().collect())
});
simple_algorithm!(SquaredNorm, "squared_norm", CatalogFunction::SquaredNorm, |x, p| Ok(vec![
    inner_product(x, x, p)?
]));
simple_algorithm!(BabylonianSqrt, "babylonian_sqrt", CatalogFunction::Sqrt, |x, p| Ok(vec![
    babylonian_sqrt(&x[0], p)?
]));
simple_algorithm!(Norm2, "norm2", CatalogFunction::Norm2, |x, p| Ok(vec![norm2(x, p)?]));
simple_algorithm!(Sine, "sine_working", CatalogFunction::Sin, |x, p| Ok(vec![sine_working(
    &x[0], p
)?]));
simple_algorithm!(Matmul2x2, "matmul_2x2", CatalogFunction::Matmul2x2, |x, p| matmul_2x2(
    &x[..4],
    &x[4..],
    p
));
simple_algorithm!(Strassen2x2, "strassen_2x2", CatalogFunction::composite(
    CatalogFunction::StrassenG,
    CatalogFunction::StrassenH
), |x, p| strassen_2x2(&x[..4], &x[4..], p));
simple_algorithm!(StrassenProducts, "strassen_h", CatalogFunction::StrassenH, |x, p| {
    strassen_products(&x[..4], &x[4..], p)
});
simple_algorithm!(StrassenRecombine, "strassen_g", CatalogFunction::StrassenG, |x, p| {
    strassen_recombine(x, p)
});

/// `x ⊗ y` with `x` of length `left`.
#[derive(Clone, Copy, Debug)]
pub struct TensorProduct {
    pub left: usize,
}

impl NumericalAlgorithm for TensorProduct {
    fn name(&self) -> String {
        "tensor_product".into()
    }
    fn function(&self) -> CatalogFunction {
        CatalogFunction::TensorProduct { left: self.left }
    }
    fn evaluate(&self, x: &[FpNumber], p: Precision) -> Result<Vec<FpNumber>, CatalogError> {
        check_len(x, &self.function())?;
        let r = rounded(x, p);
        let mut out = Vec::new();
        for i in 0..self.left {
            for j in self.left..r.len() {
                out.push(fp_mul(&r[i], &r[j], p)?);
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Debug)]
pub struct LinearMap {
    pub matrix: Matrix,
}

impl NumericalAlgorithm for LinearMap {
    fn name(&self) -> String {
        "linear_map".into()
    }
    fn function(&self) -> CatalogFunction {
        CatalogFunction::LinearMap(self.matrix.clone())
    }
    fn evaluate(&self, x: &[FpNumber], p: Precision) -> Result<Vec<FpNumber>, CatalogError> {
        linear_map(&self.matrix, x, p)
    }
}

/// `x^k` by repeated multiplication (and one division for `k < 0`).
#[derive(Clone, Copy, Debug)]
pub struct Power {
    pub exponent: i32,
}

impl NumericalAlgorithm for Power {
    fn name(&self) -> String {
        format!("power_{}", self.exponent)
    }
    fn function(&self) -> CatalogFunction {
        CatalogFunction::Power(self.exponent)
    }
    fn evaluate(&self, x: &[FpNumber], p: Precision) -> Result<Vec<FpNumber>, CatalogError> {
        check_len(x, &self.function())?;
        let v = x[0].round_to(p);
        let mut acc = FpNumber::one(p);
        for i in 0..self.exponent.unsigned_abs() {
            acc = if i == 0 { v.clone() } else { fp_mul(&acc, &v, p)? };
        }
        if self.exponent < 0 {
            acc = fp_div(&FpNumber::one(p), &acc, p).map_err(|e| match e {
                FpError::DivisionByZero => CatalogError::OutsideDomain,
                e => e.into(),
            })?;
        }
        Ok(vec![acc])
    }
}

/// `x ± c`, `x · c` or `x / c` for a constant `c` (rounded to the precision).
#[derive(Clone, Copy, Debug)]
pub struct Affine {
    pub op: AffineOp,
    pub constant: f64,
}

impl NumericalAlgorithm for Affine {
    fn name(&self) -> String {
        format!("affine_{:?}", self.op).to_lowercase()
    }
    fn function(&self) -> CatalogFunction {
        CatalogFunction::Affine {
            op: self.op,
            constant: self.constant,
        }
    }
    fn evaluate(&self, x: &[FpNumber], p: Precision) -> Result<Vec<FpNumber>, CatalogError> {
        check_len(x, &self.function())?;
        let v = x[0].round_to(p);
        let c = FpNumber::round_f64(self.constant, p)?;
        Ok(vec![match self.op {
            AffineOp::Add => fp_add(&v, &c, p)?,
            AffineOp::Sub => fp_sub(&v, &c, p)?,
            AffineOp::Mul => fp_mul(&v, &c, p)?,
            AffineOp::Div => fp_div(&v, &c, p)?,
        }])
    }
}

/// `outer ∘ inner`, run one after the other at the same precision.
pub struct Composed {
    pub outer: Box<dyn NumericalAlgorithm>,
    pub inner: Box<dyn NumericalAlgorithm>,
}

impl NumericalAlgorithm for Composed {
    fn name(&self) -> String {
        format!("{}∘{}", self.outer.name(), self.inner.name())
    }
    fn function(&self) -> CatalogFunction {
        CatalogFunction::composite(self.outer.function(), self.inner.function())
    }
    fn evaluate(&self, x: &[FpNumber], p: Precision) -> Result<Vec<FpNumber>, CatalogError> {
        self.outer.evaluate(&self.inner.evaluate(x, p)?, p)
    }
}
