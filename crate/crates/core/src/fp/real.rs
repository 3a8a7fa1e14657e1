use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::elementary;
use super::interval::Interval;
use super::number::{round_rational, FpNumber};
use super::{FpError, Precision};

/// A real number known either exactly or through a certified enclosure.
#[derive(Clone, Debug)]
pub enum ExactReal {
    Rational(BigRational),
    Enclosure(Interval),
}

impl ExactReal {
    pub fn zero() -> Self {
        ExactReal::Rational(BigRational::zero())
    }

    pub fn from_integer(n: i64) -> Self {
        ExactReal::Rational(BigRational::from_integer(n.into()))
    }

    pub fn from_ratio(n: i64, d: i64) -> Result<Self, FpError> {
        if d == 0 {
            return Err(FpError::DivisionByZero);
        }
        Ok(ExactReal::Rational(BigRational::new(n.into(), d.into())))
    }

    pub fn from_f64(x: f64) -> Result<Self, FpError> {
        Ok(ExactReal::Rational(FpNumber::from_f64(x)?.to_exact()))
    }

    pub fn from_fp(x: &FpNumber) -> Self {
        ExactReal::Rational(x.to_exact())
    }

    pub fn pi(bits: u32) -> Self {
        ExactReal::Enclosure(elementary::pi(bits))
    }

    pub fn is_exact(&self) -> bool {
        match self {
            ExactReal::Rational(_) => true,
            ExactReal::Enclosure(i) => i.is_point(),
        }
    }

    /// True only when the value is known to be exactly zero.
    pub fn is_zero(&self) -> bool {
        match self {
            ExactReal::Rational(q) => q.is_zero(),
            ExactReal::Enclosure(i) => i.signum() == Some(0),
        }
    }

    pub fn signum(&self) -> Result<i8, FpError> {
        match self {
            ExactReal::Rational(q) => Ok(if q.is_zero() {
                0
            } else if q.is_negative() {
                -1
            } else {
                1
            }),
            ExactReal::Enclosure(i) => i.signum().ok_or(FpError::SignUndetermined),
        }
    }

    /// The rational itself, or the midpoint of the enclosure.
    pub fn midpoint(&self) -> BigRational {
        match self {
            ExactReal::Rational(q) => q.clone(),
            ExactReal::Enclosure(i) => i.mid(),
        }
    }

    pub fn contains(&self, q: &BigRational) -> bool {
        match self {
            ExactReal::Rational(r) => r == q,
            ExactReal::Enclosure(i) => i.contains(q),
        }
    }

    /// Nearest double to the midpoint.
    pub fn to_f64(&self) -> f64 {
        round_rational(&self.midpoint(), Precision::DOUBLE).to_f64()
    }

    /// Enclosure view; rationals are enclosed with about `bits` bits.
    pub fn to_interval(&self, bits: u32) -> Interval {
        match self {
            ExactReal::Rational(q) => Interval::from_rational(q, bits),
            ExactReal::Enclosure(i) => i.clone(),
        }
    }

    fn working_bits(&self, other: &Self) -> u32 {
        let b = |x: &Self| match x {
            ExactReal::Rational(_) => 0,
            ExactReal::Enclosure(i) => i.lo_mantissa().bits().max(i.hi_mantissa().bits()) as u32,
        };
        b(self).max(b(other)) + 64
    }

    fn combine(
        &self,
        other: &Self,
        exact: impl Fn(&BigRational, &BigRational) -> BigRational,
        enclosed: impl Fn(&Interval, &Interval) -> Interval,
    ) -> Self {
        match (self, other) {
            (ExactReal::Rational(a), ExactReal::Rational(b)) => ExactReal::Rational(exact(a, b)),
            _ => {
                let bits = self.working_bits(other);
                let r = enclosed(&self.to_interval(bits), &other.to_interval(bits));
                ExactReal::Enclosure(r.trim(bits))
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a + b, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a - b, |a, b| a.sub(b))
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.combine(other, |a, b| a * b, |a, b| a.mul(b))
    }

    pub fn neg(&self) -> Self {
        match self {
            ExactReal::Rational(q) => ExactReal::Rational(-q),
            ExactReal::Enclosure(i) => ExactReal::Enclosure(i.neg()),
        }
    }

    pub fn div(&self, other: &Self, bits: u32) -> Result<Self, FpError> {
        match (self, other) {
            (ExactReal::Rational(a), ExactReal::Rational(b)) => {
                if b.is_zero() {
                    Err(FpError::DivisionByZero)
                } else {
                    Ok(ExactReal::Rational(a / b))
                }
            }
            _ => {
                let w = self.working_bits(other).max(bits + 16);
                Ok(ExactReal::Enclosure(
                    self.to_interval(w).div(&other.to_interval(w), w)?,
                ))
            }
        }
    }

    /// Square root with relative width about `2^-bits`; exact on rational
    /// squares.
    pub fn sqrt(&self, bits: u32) -> Result<Self, FpError> {
        if self.signum()? < 0 {
            return Err(FpError::OutsideDomain("square root of a negative number"));
        }
        let x = self;
        let r = elementary::refine(bits, |w| elementary::sqrt(&x.to_interval(w + 16), w))?;
        Ok(simplify(r))
    }

    pub fn exp(&self, bits: u32) -> Result<Self, FpError> {
        let x = self;
        let r = elementary::refine(bits, |w| elementary::exp(&x.to_interval(w + 64), w))?;
        Ok(simplify(r))
    }

    pub fn log(&self, bits: u32) -> Result<Self, FpError> {
        let x = self;
        let r = elementary::refine(bits, |w| elementary::log(&x.to_interval(w + 64), w))?;
        Ok(simplify(r))
    }

    pub fn sin(&self, bits: u32) -> Result<Self, FpError> {
        if self.is_zero() {
            return Ok(ExactReal::zero());
        }
        let x = self;
        let r = elementary::refine(bits, |w| elementary::sin(&x.to_interval(w + 64), w))?;
        Ok(simplify(r))
    }
}

fn simplify(i: Interval) -> ExactReal {
    if i.is_point() {
        ExactReal::Rational(i.mid())
    } else {
        ExactReal::Enclosure(i)
    }
}

impl From<BigRational> for ExactReal {
    fn from(q: BigRational) -> Self {
        ExactReal::Rational(q)
    }
}

impl From<BigInt> for ExactReal {
    fn from(n: BigInt) -> Self {
        ExactReal::Rational(BigRational::from_integer(n))
    }
}

impl From<&FpNumber> for ExactReal {
    fn from(x: &FpNumber) -> Self {
        ExactReal::from_fp(x)
    }
}

/// `round_t(x)`. Rationals always round; an enclosure rounds only when all
/// of its points round to the same number.
pub fn round(x: &ExactReal, p: Precision) -> Result<FpNumber, FpError> {
    match x {
        ExactReal::Rational(q) => Ok(round_rational(q, p)),
        ExactReal::Enclosure(i) => i.round(p),
    }
}

/// Guard bits tried first by [`round_with_retry`].
pub const INITIAL_GUARD: u32 = 64;
/// Guard bits beyond which [`round_with_retry`] gives up.
pub const MAX_GUARD: u32 = 1 << 16;

/// Correct rounding of a value given by an evaluator that accepts a number
/// of guard bits: starts at 64 guard bits and doubles until the enclosure
/// decides the rounding.
pub fn round_with_retry<F>(p: Precision, mut eval: F) -> Result<FpNumber, FpError>
where
    F: FnMut(u32) -> Result<ExactReal, FpError>,
{
    let mut guard = INITIAL_GUARD;
    loop {
        let x = eval(p.bits() + guard)?;
        match round(&x, p) {
            Err(FpError::EnclosureTooWide) if guard < MAX_GUARD => guard *= 2,
            r => return r,
        }
    }
}
