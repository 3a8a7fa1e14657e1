//! The coordinatewise relative metric on `R^d`.
//!
//! Two points are at finite distance only when they share a sign pattern;
//! within a pattern the distance is the Euclidean norm of the coordinate
//! log-ratios.

use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::fp::{round_rational, ExactReal, FpError, FpNumber, Precision};
use crate::rng::stream_rng;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("points lie in different sign components")]
    InfiniteDistance,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Fp(#[from] FpError),
}

/// Signs (-1, 0, 1) of the coordinates of a point.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignPattern(Vec<i8>);

impl SignPattern {
    pub fn of_f64(x: &[f64]) -> Self {
        SignPattern(
            x.iter()
                .map(|v| {
                    if *v > 0.0 {
                        1
                    } else if *v < 0.0 {
                        -1
                    } else {
                        0
                    }
                })
                .collect(),
        )
    }

    pub fn signs(&self) -> &[i8] {
        &self.0
    }

    /// Indices of the nonzero coordinates.
    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] != 0).collect()
    }
}

/// A point of `R^d` with exact (or enclosed) coordinates and its pattern.
#[derive(Clone, Debug)]
pub struct RelPoint {
    coords: Vec<ExactReal>,
    pattern: SignPattern,
}

impl RelPoint {
    pub fn new(coords: Vec<ExactReal>) -> Result<Self, MetricError> {
        let signs = coords
            .iter()
            .map(|c| c.signum())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(RelPoint {
            coords,
            pattern: SignPattern(signs),
        })
    }

    pub fn from_f64s(x: &[f64]) -> Result<Self, MetricError> {
        let coords = x
            .iter()
            .map(|v| ExactReal::from_f64(*v))
            .collect::<Result<Vec<_>, _>>()?;
        RelPoint::new(coords)
    }

    pub fn from_fp(x: &[FpNumber]) -> Self {
        RelPoint::new(x.iter().map(ExactReal::from_fp).collect()).expect("exact coordinates")
    }

    pub fn from_rationals(x: Vec<BigRational>) -> Self {
        RelPoint::new(x.into_iter().map(ExactReal::Rational).collect())
            .expect("exact coordinates")
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[ExactReal] {
        &self.coords
    }

    pub fn pattern(&self) -> &SignPattern {
        &self.pattern
    }

    pub fn support(&self) -> Vec<usize> {
        self.pattern.support()
    }

    /// Nearest doubles of the coordinates (midpoints for enclosures).
    pub fn to_f64s(&self) -> Vec<f64> {
        self.coords.iter().map(|c| c.to_f64()).collect()
    }

    pub fn midpoints(&self) -> Vec<BigRational> {
        self.coords.iter().map(|c| c.midpoint()).collect()
    }
}

/// A distance in `[0, inf]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct ExtDist(f64);

impl ExtDist {
    pub const ZERO: ExtDist = ExtDist(0.0);
    pub const INFINITY: ExtDist = ExtDist(f64::INFINITY);

    pub fn new(v: f64) -> Result<Self, MetricError> {
        if v.is_nan() || v < 0.0 {
            return Err(MetricError::InvalidParameter("distance must be in [0, inf]"));
        }
        Ok(ExtDist(v))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl fmt::Display for ExtDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{:e}", self.0)
        }
    }
}

fn rational_to_f64(q: &BigRational) -> f64 {
    round_rational(q, Precision::DOUBLE).to_f64()
}

/// `|q| = m · 2^e` with `m` in `[1, 2)`.
fn split_binary(q: &BigRational) -> (f64, i64) {
    let x = round_rational(&q.abs(), Precision::DOUBLE);
    let m = x.mantissa().to_u64().expect("53-bit integer") as f64 / 2f64.powi(52);
    (m, x.exponent() - 1)
}

/// `|log(a / b)|` for nonzero `a`, `b` of equal sign, accurate to a few
/// units in the last place of the result.
pub fn log_ratio(a: &BigRational, b: &BigRational) -> f64 {
    if a == b {
        return 0.0;
    }
    let s = (a - b) / (a + b);
    if s.abs() <= BigRational::new(1.into(), 2.into()) {
        // log(a/b) = 2 atanh((a-b)/(a+b)), with the quotient formed exactly
        (2.0 * rational_to_f64(&s).atanh()).abs()
    } else {
        let (ma, ea) = split_binary(a);
        let (mb, eb) = split_binary(b);
        ((ma / mb).ln() + (ea - eb) as f64 * std::f64::consts::LN_2).abs()
    }
}

/// `|log(a / b)|` for nonzero doubles of equal sign.
pub fn log_ratio_f64(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (a, b) = (a.abs(), b.abs());
    if a <= 2.0 * b && b <= 2.0 * a {
        // a - b is exact here
        (2.0 * ((a - b) / (a + b)).atanh()).abs()
    } else {
        let q = a / b;
        if q.is_finite() && q > f64::MIN_POSITIVE {
            q.ln().abs()
        } else {
            (a.ln() - b.ln()).abs()
        }
    }
}

/// Euclidean norm without intermediate overflow or underflow.
pub(crate) fn euclid(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    if scale == 0.0 || scale.is_infinite() {
        return scale;
    }
    let sum: f64 = v.iter().map(|d| (d / scale) * (d / scale)).sum();
    scale * sum.sqrt()
}

/// Relative distance between two points of equal dimension.
pub fn rel_dist(x: &RelPoint, y: &RelPoint) -> Result<ExtDist, MetricError> {
    if x.dim() != y.dim() {
        return Err(MetricError::DimensionMismatch(x.dim(), y.dim()));
    }
    if x.pattern != y.pattern {
        return Ok(ExtDist::INFINITY);
    }
    let logs: Vec<f64> = x
        .support()
        .into_iter()
        .map(|i| log_ratio(&x.coords[i].midpoint(), &y.coords[i].midpoint()))
        .collect();
    ExtDist::new(euclid(&logs))
}

/// Relative distance between two vectors of doubles.
pub fn rel_dist_f64(x: &[f64], y: &[f64]) -> Result<ExtDist, MetricError> {
    if x.len() != y.len() {
        return Err(MetricError::DimensionMismatch(x.len(), y.len()));
    }
    let mut logs = Vec::with_capacity(x.len());
    for (a, b) in x.iter().zip(y) {
        if a.is_nan() || b.is_nan() {
            return Err(MetricError::InvalidParameter("NaN coordinate"));
        }
        if a == b {
            continue;
        }
        if *a == 0.0 || *b == 0.0 || (*a > 0.0) != (*b > 0.0) {
            return Ok(ExtDist::INFINITY);
        }
        logs.push(log_ratio_f64(*a, *b));
    }
    ExtDist::new(euclid(&logs))
}

/// Euclidean distance; for matrices laid out as vectors this is the
/// Frobenius norm of the difference.
pub fn abs_dist(x: &RelPoint, y: &RelPoint) -> Result<f64, MetricError> {
    if x.dim() != y.dim() {
        return Err(MetricError::DimensionMismatch(x.dim(), y.dim()));
    }
    let diffs: Vec<f64> = x
        .coords
        .iter()
        .zip(&y.coords)
        .map(|(a, b)| rational_to_f64(&(a.midpoint() - b.midpoint())))
        .collect();
    Ok(euclid(&diffs))
}

/// The point at parameter `s` in `[0, 1]` on the geodesic from `x` to `y`:
/// `z_i = x_i (y_i / x_i)^s`.
pub fn geodesic_point(x: &RelPoint, y: &RelPoint, s: f64) -> Result<RelPoint, MetricError> {
    if x.dim() != y.dim() {
        return Err(MetricError::DimensionMismatch(x.dim(), y.dim()));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(MetricError::InvalidParameter("geodesic parameter outside [0, 1]"));
    }
    if x.pattern != y.pattern {
        return Err(MetricError::InfiniteDistance);
    }
    const BITS: u32 = 160;
    let s_exact = ExactReal::from_f64(s)?;
    let mut coords = Vec::with_capacity(x.dim());
    for (a, b) in x.coords.iter().zip(&y.coords) {
        let a_mid = a.midpoint();
        if a_mid.is_zero() {
            coords.push(ExactReal::zero());
            continue;
        }
        let ratio = ExactReal::Rational(b.midpoint() / &a_mid);
        let z = ratio.log(BITS)?.mul(&s_exact).exp(BITS)?;
        coords.push(z.mul(&ExactReal::Rational(a_mid)));
    }
    RelPoint::new(coords)
}

/// Draws `n` points of the closed relative ball of radius `r` around `x`:
/// Gaussian direction on the support, radius uniform in `[0, r]`, except
/// that a `boundary_fraction` of the points is placed on the sphere.
/// Sample `i` uses random stream `i`, so any prefix is reproducible.
pub fn sample_ball_f64(
    x: &[f64],
    r: f64,
    n: usize,
    seed: u64,
    boundary_fraction: f64,
) -> Result<Vec<Vec<f64>>, MetricError> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(MetricError::InvalidParameter("radius must be finite and nonnegative"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(MetricError::InvalidParameter("non-finite coordinate"));
    }
    let support: Vec<usize> = (0..x.len()).filter(|&i| x[i] != 0.0).collect();
    let exact: Vec<BigRational> = x
        .iter()
        .map(|v| FpNumber::from_f64(*v).map(|f| f.to_exact()))
        .collect::<Result<_, _>>()?;
    let f = boundary_fraction.clamp(0.0, 1.0);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = stream_rng(seed, i as u64);
        if support.is_empty() || r == 0.0 {
            out.push(x.to_vec());
            continue;
        }
        let mut v: Vec<f64> = support.iter().map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm == 0.0 {
            v[0] = 1.0;
        } else {
            v.iter_mut().for_each(|c| *c /= norm);
        }
        let u: f64 = rng.random();
        // spread the boundary draws evenly through the sequence
        let on_sphere = ((i + 1) as f64 * f).floor() > (i as f64 * f).floor();
        let mut rho = if on_sphere { r } else { u * r };
        let mut y = x.to_vec();
        for _ in 0..60 {
            for (k, &j) in support.iter().enumerate() {
                y[j] = x[j] * (rho * v[k]).exp();
            }
            let d = exact_dist_f64(&exact, &y, &support);
            if d <= r {
                break;
            }
            rho *= if d.is_finite() { (r / d) * (1.0 - 1e-15) } else { 0.5 };
        }
        out.push(y);
    }
    Ok(out)
}

fn exact_dist_f64(x: &[BigRational], y: &[f64], support: &[usize]) -> f64 {
    let mut sum = 0.0;
    for &j in support {
        if !y[j].is_finite() || y[j] == 0.0 {
            return f64::INFINITY;
        }
        let yj = FpNumber::from_f64(y[j]).expect("finite").to_exact();
        let l = log_ratio(&x[j], &yj);
        sum += l * l;
    }
    sum.sqrt()
}

/// `n` points drawn from the closed relative ball of radius `r` around `x`.
/// The ball around a point with no nonzero coordinate is that point.
pub fn rel_ball_sample(
    x: &RelPoint,
    r: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<RelPoint>, MetricError> {
    let centre = x.to_f64s();
    let exact_centre = x.midpoints();
    let draws = sample_ball_f64(&centre, r, n, seed, 0.0)?;
    let mut out = Vec::with_capacity(n);
    for y in draws {
        let mut p = RelPoint::from_f64s(&y)?;
        // the centre may not be a double; pull back inside if rounding of
        // the centre pushed the draw out
        let mut d = rel_dist(x, &p)?.value();
        let mut shrink = 1.0;
        while d > r {
            shrink *= 0.5;
            let mut coords = Vec::with_capacity(y.len());
            for (j, c) in exact_centre.iter().enumerate() {
                if c.is_zero() {
                    coords.push(BigRational::zero());
                    continue;
                }
                let ratio = (y[j] / centre[j]).ln() * shrink;
                let f = FpNumber::from_f64(ratio.exp())?.to_exact();
                coords.push(c * f);
            }
            p = RelPoint::from_rationals(coords);
            d = rel_dist(x, &p)?.value();
        }
        out.push(p);
    }
    Ok(out)
}
