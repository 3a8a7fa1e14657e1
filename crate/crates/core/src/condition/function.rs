use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::ConditionError;
use crate::fp::{ExactReal, FpNumber};
use crate::linalg::Matrix;
use crate::relmetric::euclid;

/// Scalar operation with a fixed constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AffineOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// The functions whose condition numbers are known in closed form.
///
/// Paired inputs `(x, y)` are laid out as `x` followed by `y`; a pair of
/// 2x2 matrices `(A, B)` as the row-major entries of `A` then of `B`.
#[derive(Clone, Debug, PartialEq)]
pub enum CatalogFunction {
    Product,
    Sum,
    Hadamard,
    /// `x ⊗ y` with `x` of length `left`, output indexed `(i, j)` row-major.
    TensorProduct { left: usize },
    LinearMap(Matrix),
    InnerProduct,
    Copy,
    SquaredNorm,
    Sqrt,
    Norm2,
    Power(i32),
    Affine { op: AffineOp, constant: f64 },
    Sin,
    /// The seven Strassen products of two 2x2 matrices.
    StrassenH,
    /// Recombination of the seven Strassen products into a 2x2 matrix.
    StrassenG,
    /// One entry (0-based) of a 2x2 matrix product.
    MatmulEntry { row: usize, col: usize },
    Matmul2x2,
    Composite {
        outer: Box<CatalogFunction>,
        inner: Box<CatalogFunction>,
    },
}

/// Factor structure of the Strassen products: `h_r = L_r(A) · M_r(B)`.
pub(crate) const STRASSEN_LEFT: [[i8; 4]; 7] = [
    [1, 0, 0, 1],
    [0, 0, 1, 1],
    [1, 0, 0, 0],
    [0, 0, 0, 1],
    [1, 1, 0, 0],
    [-1, 0, 1, 0],
    [0, 1, 0, -1],
];
pub(crate) const STRASSEN_RIGHT: [[i8; 4]; 7] = [
    [1, 0, 0, 1],
    [1, 0, 0, 0],
    [0, 1, 0, -1],
    [-1, 0, 1, 0],
    [0, 0, 0, 1],
    [1, 1, 0, 0],
    [0, 0, 1, 1],
];
/// Rows `c11, c12, c21, c22` of the recombination.
pub(crate) const STRASSEN_G: [[i8; 7]; 4] = [
    [1, 0, 0, 1, -1, 0, 1],
    [0, 0, 1, 0, 1, 0, 0],
    [0, 1, 0, 1, 0, 0, 0],
    [1, -1, 1, 0, 0, 1, 0],
];

pub fn strassen_g_matrix() -> Matrix {
    let rows: Vec<Vec<f64>> = STRASSEN_G
        .iter()
        .map(|r| r.iter().map(|&v| v as f64).collect())
        .collect();
    Matrix::from_rows(&rows).expect("constant shape")
}

fn exact(v: f64) -> Result<ExactReal, ConditionError> {
    Ok(ExactReal::from_f64(v)?)
}

fn exact_sum(x: &[f64]) -> BigRational {
    x.iter().fold(BigRational::zero(), |s, v| {
        s + FpNumber::from_f64(*v).expect("finite").to_exact()
    })
}

fn to_f64(q: &BigRational) -> f64 {
    ExactReal::Rational(q.clone()).to_f64()
}

fn combo(coeffs: &[i8], x: &[ExactReal]) -> ExactReal {
    coeffs
        .iter()
        .zip(x)
        .fold(ExactReal::zero(), |s, (&c, v)| match c {
            1 => s.add(v),
            -1 => s.sub(v),
            _ => s,
        })
}

impl CatalogFunction {
    pub fn composite(outer: CatalogFunction, inner: CatalogFunction) -> Self {
        CatalogFunction::Composite {
            outer: Box::new(outer),
            inner: Box::new(inner),
        }
    }

    /// Short identifier, also used by the command line.
    pub fn id(&self) -> String {
        match self {
            CatalogFunction::Product => "product".into(),
            CatalogFunction::Sum => "sum".into(),
            CatalogFunction::Hadamard => "hadamard".into(),
            CatalogFunction::TensorProduct { left } => format!("tensor:{left}"),
            CatalogFunction::LinearMap(m) => format!("linear:{}x{}", m.rows(), m.cols()),
            CatalogFunction::InnerProduct => "inner".into(),
            CatalogFunction::Copy => "copy".into(),
            CatalogFunction::SquaredNorm => "squared-norm".into(),
            CatalogFunction::Sqrt => "sqrt".into(),
            CatalogFunction::Norm2 => "norm2".into(),
            CatalogFunction::Power(k) => format!("power:{k}"),
            CatalogFunction::Affine { op, constant } => {
                let name = match op {
                    AffineOp::Add => "add",
                    AffineOp::Sub => "sub",
                    AffineOp::Mul => "mul",
                    AffineOp::Div => "div",
                };
                format!("{name}:{constant}")
            }
            CatalogFunction::Sin => "sin".into(),
            CatalogFunction::StrassenH => "strassen-h".into(),
            CatalogFunction::StrassenG => "strassen-g".into(),
            CatalogFunction::MatmulEntry { row, col } => format!("matmul-entry:{}{}", row + 1, col + 1),
            CatalogFunction::Matmul2x2 => "matmul".into(),
            CatalogFunction::Composite { outer, inner } => format!("{}∘{}", outer.id(), inner.id()),
        }
    }

    /// Inverse of [`CatalogFunction::id`] for everything except linear maps
    /// and composites.
    pub fn from_id(id: &str) -> Result<Self, ConditionError> {
        let unknown = || ConditionError::UnknownFunction(id.to_string());
        let (name, arg) = match id.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (id, None),
        };
        let f = match (name, arg) {
            ("product", None) => CatalogFunction::Product,
            ("sum", None) => CatalogFunction::Sum,
            ("hadamard", None) => CatalogFunction::Hadamard,
            ("tensor", Some(a)) => CatalogFunction::TensorProduct {
                left: a.parse().map_err(|_| unknown())?,
            },
            ("inner", None) => CatalogFunction::InnerProduct,
            ("copy", None) => CatalogFunction::Copy,
            ("squared-norm", None) => CatalogFunction::SquaredNorm,
            ("sqrt", None) => CatalogFunction::Sqrt,
            ("norm2", None) => CatalogFunction::Norm2,
            ("power", Some(a)) => CatalogFunction::Power(a.parse().map_err(|_| unknown())?),
            ("add" | "sub" | "mul" | "div", Some(a)) => CatalogFunction::Affine {
                op: match name {
                    "add" => AffineOp::Add,
                    "sub" => AffineOp::Sub,
                    "mul" => AffineOp::Mul,
                    _ => AffineOp::Div,
                },
                constant: a.parse().map_err(|_| unknown())?,
            },
            ("sin", None) => CatalogFunction::Sin,
            ("strassen-h", None) => CatalogFunction::StrassenH,
            ("strassen-g", None) => CatalogFunction::StrassenG,
            ("matmul-entry", Some(a)) => {
                let digits: Vec<usize> = a.chars().filter_map(|c| c.to_digit(10)).map(|d| d as usize).collect();
                match digits[..] {
                    [r, c] if (1..=2).contains(&r) && (1..=2).contains(&c) && a.len() == 2 => {
                        CatalogFunction::MatmulEntry { row: r - 1, col: c - 1 }
                    }
                    _ => return Err(unknown()),
                }
            }
            ("matmul", None) => CatalogFunction::Matmul2x2,
            _ => return Err(unknown()),
        };
        Ok(f)
    }

    /// Output dimension for an input of dimension `n`.
    pub fn output_dim(&self, n: usize) -> Result<usize, ConditionError> {
        let bad = |what: &'static str| Err(ConditionError::Arity(what));
        match self {
            CatalogFunction::Product
            | CatalogFunction::Sum
            | CatalogFunction::SquaredNorm
            | CatalogFunction::Norm2 => {
                if n == 0 {
                    bad("needs at least one input")
                } else {
                    Ok(1)
                }
            }
            CatalogFunction::Hadamard | CatalogFunction::InnerProduct => {
                if n == 0 || n % 2 != 0 {
                    bad("needs two vectors of equal length")
                } else if matches!(self, CatalogFunction::Hadamard) {
                    Ok(n / 2)
                } else {
                    Ok(1)
                }
            }
            CatalogFunction::TensorProduct { left } => {
                if *left == 0 || n <= *left {
                    bad("needs two nonempty vectors")
                } else {
                    Ok(left * (n - left))
                }
            }
            CatalogFunction::LinearMap(m) => {
                if n != m.cols() {
                    bad("input length must equal the number of matrix columns")
                } else {
                    Ok(m.rows())
                }
            }
            CatalogFunction::Copy => {
                if n == 0 {
                    bad("needs at least one input")
                } else {
                    Ok(2 * n)
                }
            }
            CatalogFunction::Sqrt
            | CatalogFunction::Power(_)
            | CatalogFunction::Affine { .. }
            | CatalogFunction::Sin => {
                if n != 1 {
                    bad("scalar function")
                } else {
                    Ok(1)
                }
            }
            CatalogFunction::StrassenH => {
                if n != 8 {
                    bad("needs two 2x2 matrices")
                } else {
                    Ok(7)
                }
            }
            CatalogFunction::StrassenG => {
                if n != 7 {
                    bad("needs seven products")
                } else {
                    Ok(4)
                }
            }
            CatalogFunction::MatmulEntry { row, col } => {
                if n != 8 || *row > 1 || *col > 1 {
                    bad("needs two 2x2 matrices and a valid entry")
                } else {
                    Ok(1)
                }
            }
            CatalogFunction::Matmul2x2 => {
                if n != 8 {
                    bad("needs two 2x2 matrices")
                } else {
                    Ok(4)
                }
            }
            CatalogFunction::Composite { outer, inner } => outer.output_dim(inner.output_dim(n)?),
        }
    }

    /// Whether `x` lies in the domain (the arity must already be right).
    pub fn in_domain(&self, x: &[f64]) -> bool {
        match self {
            CatalogFunction::Sqrt => x[0] >= 0.0,
            CatalogFunction::Power(k) => *k >= 0 || x[0] != 0.0,
            CatalogFunction::Affine {
                op: AffineOp::Div,
                constant,
            } => *constant != 0.0,
            CatalogFunction::Composite { outer, inner } => {
                inner.in_domain(x)
                    && match inner.eval_f64(x) {
                        Ok(y) => outer.in_domain(&y),
                        Err(_) => false,
                    }
            }
            _ => x.iter().all(|v| v.is_finite()),
        }
    }

    /// Exact value, or a certified enclosure with about `bits` bits for
    /// the non-rational functions.
    pub fn eval_exact(&self, x: &[ExactReal], bits: u32) -> Result<Vec<ExactReal>, ConditionError> {
        self.output_dim(x.len())?;
        let half = x.len() / 2;
        let out = match self {
            CatalogFunction::Product => {
                vec![x.iter().skip(1).fold(x[0].clone(), |p, v| p.mul(v))]
            }
            CatalogFunction::Sum => vec![x.iter().skip(1).fold(x[0].clone(), |p, v| p.add(v))],
            CatalogFunction::Hadamard => (0..half).map(|i| x[i].mul(&x[half + i])).collect(),
            CatalogFunction::TensorProduct { left } => {
                let mut out = Vec::new();
                for i in 0..*left {
                    for j in *left..x.len() {
                        out.push(x[i].mul(&x[j]));
                    }
                }
                out
            }
            CatalogFunction::LinearMap(m) => {
                let mut out = Vec::with_capacity(m.rows());
                for i in 0..m.rows() {
                    let mut s = ExactReal::zero();
                    for (j, v) in x.iter().enumerate() {
                        let a = m.get(i, j);
                        if a != 0.0 {
                            s = s.add(&exact(a)?.mul(v));
                        }
                    }
                    out.push(s);
                }
                out
            }
            CatalogFunction::InnerProduct => vec![(0..half)
                .fold(ExactReal::zero(), |s, i| s.add(&x[i].mul(&x[half + i])))],
            CatalogFunction::Copy => x.iter().chain(x.iter()).cloned().collect(),
            CatalogFunction::SquaredNorm => {
                vec![x.iter().fold(ExactReal::zero(), |s, v| s.add(&v.mul(v)))]
            }
            CatalogFunction::Sqrt => vec![x[0].sqrt(bits)?],
            CatalogFunction::Norm2 => {
                let s = x.iter().fold(ExactReal::zero(), |s, v| s.add(&v.mul(v)));
                vec![s.sqrt(bits)?]
            }
            CatalogFunction::Power(k) => {
                let mut p = ExactReal::from_integer(1);
                for _ in 0..k.unsigned_abs() {
                    p = p.mul(&x[0]);
                }
                if *k < 0 {
                    if x[0].is_zero() {
                        return Err(ConditionError::OutsideDomain);
                    }
                    p = ExactReal::from_integer(1).div(&p, bits)?;
                }
                vec![p]
            }
            CatalogFunction::Affine { op, constant } => {
                let c = exact(*constant)?;
                vec![match op {
                    AffineOp::Add => x[0].add(&c),
                    AffineOp::Sub => x[0].sub(&c),
                    AffineOp::Mul => x[0].mul(&c),
                    AffineOp::Div => {
                        if *constant == 0.0 {
                            return Err(ConditionError::OutsideDomain);
                        }
                        x[0].div(&c, bits)?
                    }
                }]
            }
            CatalogFunction::Sin => vec![x[0].sin(bits)?],
            CatalogFunction::StrassenH => (0..7)
                .map(|r| combo(&STRASSEN_LEFT[r], &x[..4]).mul(&combo(&STRASSEN_RIGHT[r], &x[4..])))
                .collect(),
            CatalogFunction::StrassenG => STRASSEN_G.iter().map(|row| combo(row, x)).collect(),
            CatalogFunction::MatmulEntry { row, col } => {
                vec![matmul_entry_exact(x, *row, *col)]
            }
            CatalogFunction::Matmul2x2 => (0..4)
                .map(|e| matmul_entry_exact(x, e / 2, e % 2))
                .collect(),
            CatalogFunction::Composite { outer, inner } => {
                outer.eval_exact(&inner.eval_exact(x, bits)?, bits)?
            }
        };
        Ok(out)
    }

    /// Value at a point of doubles, rounded to the nearest doubles.
    pub fn eval_f64(&self, x: &[f64]) -> Result<Vec<f64>, ConditionError> {
        if !self.in_domain_checked(x)? {
            return Err(ConditionError::OutsideDomain);
        }
        let ex = x.iter().map(|v| exact(*v)).collect::<Result<Vec<_>, _>>()?;
        Ok(self.eval_exact(&ex, 96)?.iter().map(|v| v.to_f64()).collect())
    }

    fn in_domain_checked(&self, x: &[f64]) -> Result<bool, ConditionError> {
        self.output_dim(x.len())?;
        Ok(self.in_domain(x))
    }

    /// Jacobian at `x` (rows: outputs, columns: inputs).
    pub fn jacobian(&self, x: &[f64]) -> Result<Matrix, ConditionError> {
        let m = self.output_dim(x.len())?;
        let n = x.len();
        if !self.in_domain(x) {
            return Err(ConditionError::OutsideDomain);
        }
        let half = n / 2;
        let mut j = Matrix::zeros(m, n);
        match self {
            CatalogFunction::Product => {
                for c in 0..n {
                    let p: f64 = (0..n).filter(|&i| i != c).map(|i| x[i]).product();
                    j.set(0, c, p);
                }
            }
            CatalogFunction::Sum => (0..n).for_each(|c| j.set(0, c, 1.0)),
            CatalogFunction::Hadamard => {
                for i in 0..half {
                    j.set(i, i, x[half + i]);
                    j.set(i, half + i, x[i]);
                }
            }
            CatalogFunction::TensorProduct { left } => {
                let right = n - left;
                for a in 0..*left {
                    for b in 0..right {
                        let r = a * right + b;
                        j.set(r, a, x[left + b]);
                        j.set(r, left + b, x[a]);
                    }
                }
            }
            CatalogFunction::LinearMap(a) => j = a.clone(),
            CatalogFunction::InnerProduct => {
                for i in 0..half {
                    j.set(0, i, x[half + i]);
                    j.set(0, half + i, x[i]);
                }
            }
            CatalogFunction::Copy => {
                for i in 0..n {
                    j.set(i, i, 1.0);
                    j.set(n + i, i, 1.0);
                }
            }
            CatalogFunction::SquaredNorm => (0..n).for_each(|c| j.set(0, c, 2.0 * x[c])),
            CatalogFunction::Sqrt => {
                if x[0] > 0.0 {
                    j.set(0, 0, 0.5 / x[0].sqrt());
                }
            }
            CatalogFunction::Norm2 => {
                let norm = euclid(x);
                if norm > 0.0 {
                    (0..n).for_each(|c| j.set(0, c, x[c] / norm));
                }
            }
            CatalogFunction::Power(k) => {
                if *k != 0 && (x[0] != 0.0 || *k >= 1) {
                    j.set(0, 0, *k as f64 * x[0].powi(k - 1));
                }
            }
            CatalogFunction::Affine { op, constant } => j.set(
                0,
                0,
                match op {
                    AffineOp::Add | AffineOp::Sub => 1.0,
                    AffineOp::Mul => *constant,
                    AffineOp::Div => 1.0 / constant,
                },
            ),
            CatalogFunction::Sin => j.set(0, 0, x[0].cos()),
            CatalogFunction::StrassenH => {
                for r in 0..7 {
                    let l: f64 = (0..4).map(|k| STRASSEN_LEFT[r][k] as f64 * x[k]).sum();
                    let mr: f64 = (0..4).map(|k| STRASSEN_RIGHT[r][k] as f64 * x[4 + k]).sum();
                    for k in 0..4 {
                        j.set(r, k, STRASSEN_LEFT[r][k] as f64 * mr);
                        j.set(r, 4 + k, STRASSEN_RIGHT[r][k] as f64 * l);
                    }
                }
            }
            CatalogFunction::StrassenG => j = strassen_g_matrix(),
            CatalogFunction::MatmulEntry { row, col } => set_matmul_row(&mut j, 0, x, *row, *col),
            CatalogFunction::Matmul2x2 => {
                for e in 0..4 {
                    set_matmul_row(&mut j, e, x, e / 2, e % 2);
                }
            }
            CatalogFunction::Composite { outer, inner } => {
                let y = inner.eval_f64(x)?;
                j = outer.jacobian(&y)?.matmul(&inner.jacobian(x)?)?;
            }
        }
        Ok(j)
    }

    /// Closed-form relative condition number at `x`, including the points
    /// where an output vanishes.
    pub fn closed_form_kappa(&self, x: &[f64]) -> Result<f64, ConditionError> {
        self.output_dim(x.len())?;
        if !self.in_domain(x) {
            return Err(ConditionError::OutsideDomain);
        }
        let n = x.len();
        let half = n / 2;
        let k = match self {
            CatalogFunction::Product => {
                if x.iter().any(|v| *v == 0.0) {
                    0.0
                } else {
                    (n as f64).sqrt()
                }
            }
            CatalogFunction::Sum => sum_kappa(x),
            CatalogFunction::Hadamard => {
                if (0..half).any(|i| x[i] != 0.0 && x[half + i] != 0.0) {
                    2f64.sqrt()
                } else {
                    0.0
                }
            }
            CatalogFunction::TensorProduct { left } => {
                let p = x[..*left].iter().filter(|v| **v != 0.0).count();
                let q = x[*left..].iter().filter(|v| **v != 0.0).count();
                if p > 0 && q > 0 {
                    ((p + q) as f64).sqrt()
                } else {
                    0.0
                }
            }
            CatalogFunction::LinearMap(a) => linear_map_kappa(a, x)?,
            CatalogFunction::InnerProduct => inner_product_kappa(&x[..half], &x[half..]),
            CatalogFunction::Copy => {
                if x.iter().any(|v| *v != 0.0) {
                    2f64.sqrt()
                } else {
                    0.0
                }
            }
            CatalogFunction::SquaredNorm => 2.0 * quartic_ratio(x),
            CatalogFunction::Norm2 => quartic_ratio(x),
            CatalogFunction::Sqrt => {
                if x[0] > 0.0 {
                    0.5
                } else {
                    0.0
                }
            }
            CatalogFunction::Power(k) => {
                if x[0] == 0.0 || *k == 0 {
                    0.0
                } else {
                    k.unsigned_abs() as f64
                }
            }
            CatalogFunction::Affine { op, constant } => match op {
                AffineOp::Add | AffineOp::Sub => {
                    let c = if *op == AffineOp::Add { *constant } else { -constant };
                    let y = exact_sum(&[x[0], c]);
                    if x[0] == 0.0 {
                        0.0
                    } else if y.is_zero() {
                        f64::INFINITY
                    } else {
                        x[0].abs() / to_f64(&y).abs()
                    }
                }
                AffineOp::Mul => {
                    if x[0] == 0.0 || *constant == 0.0 {
                        0.0
                    } else {
                        1.0
                    }
                }
                AffineOp::Div => {
                    if x[0] == 0.0 {
                        0.0
                    } else {
                        1.0
                    }
                }
            },
            CatalogFunction::Sin => {
                // sin has no nonzero rational root, so sin(x) != 0 for x != 0
                if x[0] == 0.0 {
                    0.0
                } else {
                    (x[0] * x[0].cos() / x[0].sin()).abs()
                }
            }
            CatalogFunction::StrassenH => strassen_h_kappa(x)?,
            CatalogFunction::StrassenG => linear_map_kappa(&strassen_g_matrix(), x)?,
            CatalogFunction::MatmulEntry { row, col } => {
                let (a, b) = matmul_pair(x, *row, *col);
                inner_product_kappa(&a, &b)
            }
            CatalogFunction::Matmul2x2 => matmul_kappa(x)?,
            CatalogFunction::Composite { outer, inner } => match known_composite(outer, inner) {
                Some(f) => f.closed_form_kappa(x)?,
                None => return Err(ConditionError::NoClosedForm),
            },
        };
        Ok(k)
    }

    /// `x_i ∂κ/∂x_i` where available, at points where κ is finite and
    /// differentiable.
    pub fn kappa_log_gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
        self.output_dim(x.len()).ok()?;
        let n = x.len();
        match self {
            CatalogFunction::Product
            | CatalogFunction::Hadamard
            | CatalogFunction::TensorProduct { .. }
            | CatalogFunction::Copy
            | CatalogFunction::Sqrt
            | CatalogFunction::Power(_) => Some(vec![0.0; n]),
            CatalogFunction::Affine {
                op: AffineOp::Mul | AffineOp::Div,
                ..
            } => Some(vec![0.0]),
            CatalogFunction::Affine { op, constant } => {
                let c = if *op == AffineOp::Add { *constant } else { -constant };
                let y = x[0] + c;
                if y == 0.0 {
                    return None;
                }
                let g = x[0] / y;
                Some(vec![g.signum() * x[0] * c / (y * y)])
            }
            CatalogFunction::Sum => {
                let s = to_f64(&exact_sum(x));
                if s == 0.0 {
                    return None;
                }
                let norm = euclid(x);
                Some(
                    x.iter()
                        .map(|v| v * v / (norm * s.abs()) - norm * v / (s * s.abs()))
                        .collect(),
                )
            }
            CatalogFunction::Sin => {
                let v = x[0];
                if v == 0.0 {
                    return Some(vec![0.0]);
                }
                let (s, c) = v.sin_cos();
                let g = v * c / s;
                let dg = c / s - v / (s * s);
                Some(vec![g.signum() * v * dg])
            }
            CatalogFunction::SquaredNorm | CatalogFunction::Norm2 => {
                let factor = if matches!(self, CatalogFunction::SquaredNorm) { 2.0 } else { 1.0 };
                let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                if scale == 0.0 {
                    return None;
                }
                let y: Vec<f64> = x.iter().map(|v| v / scale).collect();
                let n2: f64 = y.iter().map(|v| v * v).sum();
                let q = y.iter().map(|v| v.powi(4)).sum::<f64>().sqrt();
                Some(
                    y.iter()
                        .map(|v| {
                            factor * (2.0 * v.powi(4) / (q * n2) - 2.0 * v * v * q / (n2 * n2))
                        })
                        .collect(),
                )
            }
            CatalogFunction::InnerProduct => {
                let half = n / 2;
                let p: Vec<f64> = (0..half).map(|i| x[i] * x[half + i]).collect();
                let s = to_f64(&exact_sum(&p));
                if s == 0.0 {
                    return None;
                }
                let pn = euclid(&p);
                if pn == 0.0 {
                    return Some(vec![0.0; n]);
                }
                let r2 = 2f64.sqrt();
                let g: Vec<f64> = p
                    .iter()
                    .map(|pi| r2 * (pi * pi / (pn * s.abs()) - pn * pi / (s * s.abs())))
                    .collect();
                Some(g.iter().chain(g.iter()).copied().collect())
            }
            _ => None,
        }
    }
}

/// Catalog functions that a composite is equal to.
fn known_composite(outer: &CatalogFunction, inner: &CatalogFunction) -> Option<CatalogFunction> {
    use CatalogFunction as F;
    match (outer, inner) {
        (F::Sum, F::Hadamard) => Some(F::InnerProduct),
        (F::Sqrt, F::SquaredNorm) => Some(F::Norm2),
        (F::InnerProduct, F::Copy) => Some(F::SquaredNorm),
        (F::StrassenG, F::StrassenH) => Some(F::Matmul2x2),
        _ => None,
    }
}

fn matmul_pair(x: &[f64], row: usize, col: usize) -> ([f64; 2], [f64; 2]) {
    (
        [x[2 * row], x[2 * row + 1]],
        [x[4 + col], x[4 + 2 + col]],
    )
}

fn matmul_entry_exact(x: &[ExactReal], row: usize, col: usize) -> ExactReal {
    x[2 * row]
        .mul(&x[4 + col])
        .add(&x[2 * row + 1].mul(&x[4 + 2 + col]))
}

fn set_matmul_row(j: &mut Matrix, r: usize, x: &[f64], row: usize, col: usize) {
    for k in 0..2 {
        let a = 2 * row + k;
        let b = 4 + 2 * k + col;
        j.set(r, a, x[b]);
        j.set(r, b, x[a]);
    }
}

/// `‖x‖ / |Σ x|`, infinite when the sum cancels exactly.
pub(crate) fn sum_kappa(x: &[f64]) -> f64 {
    if x.iter().all(|v| *v == 0.0) {
        return 0.0;
    }
    let s = exact_sum(x);
    if s.is_zero() {
        return f64::INFINITY;
    }
    euclid(x) / to_f64(&s).abs()
}

fn inner_product_kappa(x: &[f64], y: &[f64]) -> f64 {
    let p: Vec<f64> = x.iter().zip(y).map(|(a, b)| a * b).collect();
    if p.iter().all(|v| *v == 0.0) {
        return 0.0;
    }
    let s: BigRational = x.iter().zip(y).fold(BigRational::zero(), |s, (a, b)| {
        s + FpNumber::from_f64(*a).expect("finite").to_exact()
            * FpNumber::from_f64(*b).expect("finite").to_exact()
    });
    if s.is_zero() {
        return f64::INFINITY;
    }
    2f64.sqrt() * euclid(&p) / to_f64(&s).abs()
}

/// `‖x ⊛ x‖ / ‖x‖²`, zero at the origin.
fn quartic_ratio(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let y: Vec<f64> = x.iter().map(|v| v / scale).collect();
    let n2: f64 = y.iter().map(|v| v * v).sum();
    let q = y.iter().map(|v| v.powi(4)).sum::<f64>().sqrt();
    q / n2
}

/// Rows of a relative Jacobian described by exact row sums and the
/// products forming them; `None` rows are identically zero nearby.
fn relative_rows_kappa(rows: Vec<Option<(BigRational, Vec<(usize, f64)>)>>, n: usize) -> Result<f64, ConditionError> {
    let mut r = Matrix::zeros(rows.len(), n);
    for (i, row) in rows.into_iter().enumerate() {
        let Some((total, terms)) = row else { continue };
        if terms.iter().all(|(_, v)| *v == 0.0) {
            continue;
        }
        if total.is_zero() {
            return Ok(f64::INFINITY);
        }
        let t = to_f64(&total);
        for (c, v) in terms {
            r.set(i, c, r.get(i, c) + v / t);
        }
    }
    Ok(r.spectral_norm()?)
}

fn linear_map_kappa(a: &Matrix, x: &[f64]) -> Result<f64, ConditionError> {
    let rows = (0..a.rows())
        .map(|i| {
            let terms: Vec<(usize, f64)> = (0..a.cols()).map(|j| (j, a.get(i, j) * x[j])).collect();
            let total = (0..a.cols()).fold(BigRational::zero(), |s, j| {
                s + FpNumber::from_f64(a.get(i, j)).expect("finite").to_exact()
                    * FpNumber::from_f64(x[j]).expect("finite").to_exact()
            });
            Some((total, terms))
        })
        .collect();
    relative_rows_kappa(rows, x.len())
}

fn strassen_h_kappa(x: &[f64]) -> Result<f64, ConditionError> {
    let ex: Vec<BigRational> = x
        .iter()
        .map(|v| FpNumber::from_f64(*v).expect("finite").to_exact())
        .collect();
    let mut r = Matrix::zeros(7, 8);
    for row in 0..7 {
        let factor = |coeffs: &[i8; 4], offset: usize| {
            let total = (0..4).fold(BigRational::zero(), |s, k| match coeffs[k] {
                1 => s + &ex[offset + k],
                -1 => s - &ex[offset + k],
                _ => s,
            });
            let live = (0..4).any(|k| coeffs[k] != 0 && x[offset + k] != 0.0);
            (total, live)
        };
        let (l, l_live) = factor(&STRASSEN_LEFT[row], 0);
        let (m, m_live) = factor(&STRASSEN_RIGHT[row], 4);
        if !l_live || !m_live {
            continue;
        }
        if l.is_zero() || m.is_zero() {
            return Ok(f64::INFINITY);
        }
        let (lf, mf) = (to_f64(&l), to_f64(&m));
        for k in 0..4 {
            r.set(row, k, STRASSEN_LEFT[row][k] as f64 * x[k] / lf);
            r.set(row, 4 + k, STRASSEN_RIGHT[row][k] as f64 * x[4 + k] / mf);
        }
    }
    Ok(r.spectral_norm()?)
}

fn matmul_kappa(x: &[f64]) -> Result<f64, ConditionError> {
    let rows = (0..4)
        .map(|e| {
            let (row, col) = (e / 2, e % 2);
            let mut terms = Vec::new();
            let mut total = BigRational::zero();
            for k in 0..2 {
                let a = 2 * row + k;
                let b = 4 + 2 * k + col;
                let p = x[a] * x[b];
                terms.push((a, p));
                terms.push((b, p));
                total += FpNumber::from_f64(x[a]).expect("finite").to_exact()
                    * FpNumber::from_f64(x[b]).expect("finite").to_exact();
            }
            Some((total, terms))
        })
        .collect();
    relative_rows_kappa(rows, 8)
}

impl fmt::Display for CatalogFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}
