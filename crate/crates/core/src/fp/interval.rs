use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::number::{round_dyadic, FpNumber};
use super::{FpError, Precision};

/// A closed interval `[lo · 2^exp, hi · 2^exp]` with integer endpoints.
///
/// Sums, differences and products of such intervals are exact, so only
/// division and the transcendental kernels ever widen them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    lo: BigInt,
    hi: BigInt,
    exp: i64,
}

pub(crate) fn floor_shift(x: &BigInt, k: u64) -> BigInt {
    if k == 0 {
        return x.clone();
    }
    x.div_floor(&(BigInt::one() << k as usize))
}

pub(crate) fn ceil_shift(x: &BigInt, k: u64) -> BigInt {
    -floor_shift(&-x, k)
}

/// `floor(q · 2^k)` and `ceil(q · 2^k)`.
pub(crate) fn scaled_bounds(q: &BigRational, k: i64) -> (BigInt, BigInt) {
    let (n, d) = if k >= 0 {
        (q.numer() << k as usize, q.denom().clone())
    } else {
        (q.numer().clone(), q.denom() << (-k) as usize)
    };
    let lo = n.div_floor(&d);
    let hi = if (&lo * &d) == n { lo.clone() } else { &lo + 1 };
    (lo, hi)
}

fn dyadic_of(q: &BigRational) -> Option<(BigInt, i64)> {
    let d = q.denom();
    let tz = d.trailing_zeros().unwrap_or(0);
    if d == &(BigInt::one() << tz as usize) {
        Some((q.numer().clone(), -(tz as i64)))
    } else {
        None
    }
}

impl Interval {
    pub fn point(m: BigInt, exp: i64) -> Self {
        Interval {
            lo: m.clone(),
            hi: m,
            exp,
        }
    }

    pub fn from_fp(x: &FpNumber) -> Self {
        let (m, e) = x.to_dyadic();
        Interval::point(m, e)
    }

    /// Encloses `lo_m · 2^exp ..= hi_m · 2^exp`.
    pub fn new(lo: BigInt, hi: BigInt, exp: i64) -> Result<Self, FpError> {
        if lo > hi {
            return Err(FpError::EmptyInterval);
        }
        Ok(Interval { lo, hi, exp })
    }

    /// Tight enclosure of a rational with about `bits` significant bits.
    /// Dyadic rationals are represented exactly.
    pub fn from_rational(q: &BigRational, bits: u32) -> Self {
        if let Some((m, e)) = dyadic_of(q) {
            return Interval::point(m, e);
        }
        let mag = q.numer().bits() as i64 - q.denom().bits() as i64;
        let k = bits as i64 + 2 - mag;
        let (lo, hi) = scaled_bounds(q, k);
        Interval { lo, hi, exp: -k }
    }

    /// Smallest interval containing both endpoints given as rationals.
    pub fn hull_rational(a: &BigRational, b: &BigRational, bits: u32) -> Self {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        let lo = Interval::from_rational(x, bits);
        let hi = Interval::from_rational(y, bits);
        lo.hull(&hi)
    }

    pub fn lo(&self) -> BigRational {
        scale(&self.lo, self.exp)
    }

    pub fn hi(&self) -> BigRational {
        scale(&self.hi, self.exp)
    }

    pub fn mid(&self) -> BigRational {
        scale(&(&self.lo + &self.hi), self.exp - 1)
    }

    pub fn exp(&self) -> i64 {
        self.exp
    }

    pub fn lo_mantissa(&self) -> &BigInt {
        &self.lo
    }

    pub fn hi_mantissa(&self) -> &BigInt {
        &self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        &self.lo() <= q && q <= &self.hi()
    }

    /// Sign if it is the same over the whole interval.
    pub fn signum(&self) -> Option<i8> {
        if self.lo.is_positive() {
            Some(1)
        } else if self.hi.is_negative() {
            Some(-1)
        } else if self.lo.is_zero() && self.hi.is_zero() {
            Some(0)
        } else {
            None
        }
    }

    /// `log2` of the relative width `(hi - lo) / min(|lo|, |hi|)`;
    /// `None` when the interval touches zero (relative width unbounded)
    /// and `Some(-inf)` for points.
    pub fn relative_width_log2(&self) -> Option<f64> {
        if self.is_point() {
            return Some(f64::NEG_INFINITY);
        }
        if self.contains_zero() {
            return None;
        }
        let w = &self.hi - &self.lo;
        let m = self.lo.abs().min(self.hi.abs());
        Some(w.bits() as f64 - m.bits() as f64 + 1.0)
    }

    pub fn neg(&self) -> Self {
        Interval {
            lo: -&self.hi,
            hi: -&self.lo,
            exp: self.exp,
        }
    }

    pub fn mul_pow2(&self, k: i64) -> Self {
        Interval {
            lo: self.lo.clone(),
            hi: self.hi.clone(),
            exp: self.exp + k,
        }
    }

    fn aligned(&self, other: &Self) -> (BigInt, BigInt, BigInt, BigInt, i64) {
        let e = self.exp.min(other.exp);
        let a = (self.exp - e) as usize;
        let b = (other.exp - e) as usize;
        (
            &self.lo << a,
            &self.hi << a,
            &other.lo << b,
            &other.hi << b,
            e,
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        let (al, ah, bl, bh, e) = self.aligned(other);
        Interval {
            lo: al + bl,
            hi: ah + bh,
            exp: e,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let c = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = c.iter().min().expect("four").clone();
        let hi = c.iter().max().expect("four").clone();
        Interval {
            lo,
            hi,
            exp: self.exp + other.exp,
        }
    }

    pub fn mul_int(&self, k: &BigInt) -> Self {
        self.mul(&Interval::point(k.clone(), 0))
    }

    pub fn hull(&self, other: &Self) -> Self {
        let (al, ah, bl, bh, e) = self.aligned(other);
        Interval {
            lo: al.min(bl),
            hi: ah.max(bh),
            exp: e,
        }
    }

    /// Drops low-order bits so that the endpoints keep about `bits`
    /// significant bits, rounding outward.
    pub fn trim(&self, bits: u32) -> Self {
        let top = self.lo.bits().max(self.hi.bits());
        if top <= bits as u64 + 8 {
            return self.clone();
        }
        let d = top - bits as u64;
        Interval {
            lo: floor_shift(&self.lo, d),
            hi: ceil_shift(&self.hi, d),
            exp: self.exp + d as i64,
        }
    }

    /// Outward-rounded quotient with about `bits` significant bits.
    pub fn div(&self, other: &Self, bits: u32) -> Result<Self, FpError> {
        if other.contains_zero() {
            return Err(FpError::DivisionByZero);
        }
        let (al, ah) = (self.lo(), self.hi());
        let (bl, bh) = (other.lo(), other.hi());
        let c = [&al / &bl, &al / &bh, &ah / &bl, &ah / &bh];
        let lo = c.iter().min().expect("four");
        let hi = c.iter().max().expect("four");
        Ok(Interval::hull_rational(lo, hi, bits))
    }

    /// `round_t` of every point in the interval, if they all agree.
    pub fn round(&self, p: Precision) -> Result<FpNumber, FpError> {
        let a = round_dyadic(&self.lo, self.exp, p);
        if self.is_point() {
            return Ok(a);
        }
        let b = round_dyadic(&self.hi, self.exp, p);
        if a.cmp(&b) == Ordering::Equal {
            Ok(a)
        } else {
            Err(FpError::EnclosureTooWide)
        }
    }
}

fn scale(m: &BigInt, e: i64) -> BigRational {
    if e >= 0 {
        BigRational::from_integer(m << e as usize)
    } else {
        BigRational::new(m.clone(), BigInt::one() << (-e) as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rational_enclosure_is_tight() {
        let q = rat(1, 3);
        let i = Interval::from_rational(&q, 64);
        assert!(i.contains(&q));
        assert!(i.relative_width_log2().unwrap() <= -60.0);
        let d = Interval::from_rational(&rat(3, 8), 64);
        assert!(d.is_point());
    }

    #[test]
    fn arithmetic_contains_exact_results() {
        let a = Interval::from_rational(&rat(1, 3), 80);
        let b = Interval::from_rational(&rat(-2, 7), 80);
        assert!(a.add(&b).contains(&rat(1, 21)));
        assert!(a.sub(&b).contains(&rat(13, 21)));
        assert!(a.mul(&b).contains(&rat(-2, 21)));
        let q = a.div(&b, 80).unwrap();
        assert!(q.contains(&rat(-7, 6)));
        assert!(q.trim(40).contains(&rat(-7, 6)));
    }

    #[test]
    fn rounding_detects_straddle() {
        // [1, 1 + 2^-60] rounds to 1 at t=53
        let i = Interval::new(BigInt::one() << 60usize, (BigInt::one() << 60usize) + 1, -60)
            .unwrap();
        assert_eq!(i.round(Precision::DOUBLE).unwrap().to_f64(), 1.0);
        // an interval around a rounding boundary cannot be rounded
        let m = (BigInt::one() << 60usize) + (BigInt::one() << 7usize);
        let j = Interval::new(&m - 1, &m + 1, -60).unwrap();
        assert_eq!(j.round(Precision::DOUBLE), Err(FpError::EnclosureTooWide));
    }

    #[test]
    fn shifts_round_outward() {
        let x = BigInt::from(-5);
        assert_eq!(floor_shift(&x, 1), BigInt::from(-3));
        assert_eq!(ceil_shift(&x, 1), BigInt::from(-2));
        assert_eq!(ceil_shift(&BigInt::from(5), 1), BigInt::from(3));
    }
}
