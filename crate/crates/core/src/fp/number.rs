use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::precision::ldexp;
use super::{FpError, Precision};

/// A normalized binary floating-point number of some precision `t`.
///
/// Nonzero values are `±m · 2^(e - t)` with `2^(t-1) <= m < 2^t`, so the
/// value lies in `[2^(e-1), 2^e)`. The exponent is unbounded in the model;
/// here it is an `i64` and arithmetic reports `ExponentOverflow` rather
/// than wrapping.
#[derive(Clone, Debug)]
pub struct FpNumber {
    negative: bool,
    mantissa: BigUint,
    exponent: i64,
    precision: u32,
}

impl FpNumber {
    pub fn zero(p: Precision) -> Self {
        FpNumber {
            negative: false,
            mantissa: BigUint::zero(),
            exponent: 0,
            precision: p.bits(),
        }
    }

    pub fn one(p: Precision) -> Self {
        FpNumber {
            negative: false,
            mantissa: BigUint::one() << (p.bits() - 1) as usize,
            exponent: 1,
            precision: p.bits(),
        }
    }

    /// Builds `±mantissa · 2^(exponent - t)` after checking normalization.
    pub fn from_parts(
        negative: bool,
        mantissa: BigUint,
        exponent: i64,
        p: Precision,
    ) -> Result<Self, FpError> {
        if mantissa.is_zero() {
            return Ok(FpNumber::zero(p));
        }
        if mantissa.bits() != p.bits() as u64 {
            return Err(FpError::NotNormalized);
        }
        Ok(FpNumber {
            negative,
            mantissa,
            exponent,
            precision: p.bits(),
        })
    }

    /// Exact conversion of a finite double; the result has precision 53.
    pub fn from_f64(x: f64) -> Result<Self, FpError> {
        if !x.is_finite() {
            return Err(FpError::NonFinite);
        }
        let bits = x.to_bits();
        let negative = bits >> 63 == 1;
        let biased = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (m, lsb) = if biased == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), biased - 1075)
        };
        if m == 0 {
            return Ok(FpNumber::zero(Precision::DOUBLE));
        }
        Ok(round_parts(
            negative,
            BigUint::from(m),
            lsb,
            false,
            Precision::DOUBLE,
        ))
    }

    /// `round_t(x)` for a double `x`.
    pub fn round_f64(x: f64, p: Precision) -> Result<Self, FpError> {
        Ok(FpNumber::from_f64(x)?.round_to(p))
    }

    pub fn from_i64(v: i64, p: Precision) -> Self {
        round_parts(v < 0, BigUint::from(v.unsigned_abs()), 0, false, p)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.negative && !self.is_zero()
    }

    /// -1, 0 or 1.
    pub fn signum(&self) -> i8 {
        if self.is_zero() {
            0
        } else if self.negative {
            -1
        } else {
            1
        }
    }

    pub fn mantissa(&self) -> &BigUint {
        &self.mantissa
    }

    /// Binary exponent `e`: a nonzero value lies in `[2^(e-1), 2^e)`.
    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn precision(&self) -> Precision {
        Precision::new(self.precision).expect("stored precision is valid")
    }

    /// Exponent of the last mantissa bit, `e - t`.
    pub fn lsb_exponent(&self) -> i64 {
        self.exponent - self.precision as i64
    }

    pub fn neg(&self) -> Self {
        let mut r = self.clone();
        if !r.is_zero() {
            r.negative = !r.negative;
        }
        r
    }

    pub fn abs(&self) -> Self {
        let mut r = self.clone();
        r.negative = false;
        r
    }

    /// Exact multiplication by `2^k`.
    pub fn mul_pow2(&self, k: i64) -> Result<Self, FpError> {
        if self.is_zero() {
            return Ok(self.clone());
        }
        let mut r = self.clone();
        r.exponent = r
            .exponent
            .checked_add(k)
            .ok_or(FpError::ExponentOverflow)?;
        Ok(r)
    }

    /// The exact value as a rational.
    pub fn to_exact(&self) -> BigRational {
        if self.is_zero() {
            return BigRational::zero();
        }
        let sign = if self.negative { Sign::Minus } else { Sign::Plus };
        let m = BigInt::from_biguint(sign, self.mantissa.clone());
        let lsb = self.lsb_exponent();
        if lsb >= 0 {
            BigRational::from_integer(m << lsb as usize)
        } else {
            BigRational::new(m, BigInt::one() << (-lsb) as usize)
        }
    }

    /// Signed mantissa and last-bit exponent: value = `m · 2^lsb`.
    pub fn to_dyadic(&self) -> (BigInt, i64) {
        let sign = if self.negative { Sign::Minus } else { Sign::Plus };
        (
            BigInt::from_biguint(sign, self.mantissa.clone()),
            self.lsb_exponent(),
        )
    }

    /// Re-rounds to another precision (exact when `p` is not smaller).
    pub fn round_to(&self, p: Precision) -> Self {
        if self.is_zero() {
            return FpNumber::zero(p);
        }
        round_parts(
            self.negative,
            self.mantissa.clone(),
            self.lsb_exponent(),
            false,
            p,
        )
    }

    /// Nearest double, ties to even. Saturates to infinity or zero.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        // subnormal range: round once to the fixed quantum 2^-1074
        if self.exponent < -1021 {
            let shift = -1074 - self.lsb_exponent();
            let q = if shift <= 0 {
                self.mantissa.clone() << (-shift) as usize
            } else if shift as u64 > self.mantissa.bits() {
                BigUint::zero()
            } else {
                let shift = shift as usize;
                let q = &self.mantissa >> shift;
                let rem = &self.mantissa - (&q << shift);
                let half = BigUint::one() << (shift - 1);
                match rem.cmp(&half) {
                    Ordering::Greater => q + 1u32,
                    Ordering::Equal if q.is_odd() => q + 1u32,
                    _ => q,
                }
            };
            let v = ldexp(q.to_u64().expect("fits") as f64, -1074);
            return if self.negative { -v } else { v };
        }
        let r = if self.precision > 53 {
            self.round_to(Precision::DOUBLE)
        } else {
            self.clone()
        };
        let m = r.mantissa.to_u64().expect("at most 53 bits") as f64;
        let lsb = r.lsb_exponent();
        let r_negative = r.negative;
        let v = ldexp(m, lsb);
        if r_negative {
            -v
        } else {
            v
        }
    }

    /// Exact decimal-free rendering `m*2^k`.
    pub fn to_exact_string(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        format!(
            "{}{}*2^{}",
            if self.negative { "-" } else { "" },
            self.mantissa,
            self.lsb_exponent()
        )
    }

    fn cmp_magnitude(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return Ordering::Equal,
            (true, false) => return Ordering::Less,
            (false, true) => return Ordering::Greater,
            _ => {}
        }
        match self.exponent.cmp(&other.exponent) {
            Ordering::Equal => {}
            o => return o,
        }
        let (a, b) = (self.precision, other.precision);
        if a >= b {
            self.mantissa
                .cmp(&(&other.mantissa << (a - b) as usize))
        } else {
            (&self.mantissa << (b - a) as usize).cmp(&other.mantissa)
        }
    }
}

impl PartialEq for FpNumber {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for FpNumber {}

impl PartialOrd for FpNumber {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for FpNumber {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.signum().cmp(&other.signum()) {
            Ordering::Equal => {}
            o => return o,
        }
        let m = self.cmp_magnitude(other);
        if self.is_negative() {
            m.reverse()
        } else {
            m
        }
    }
}

impl fmt::Display for FpNumber {
    /// Shortest round-trip decimal of the nearest double.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

/// Rounds `±mag · 2^lsb` (plus a sticky fraction strictly below the last
/// bit of `mag` when `sticky` is set) to `t` bits, nearest, ties to even.
///
/// A set sticky flag requires `mag` to have more than `t` bits.
pub(crate) fn round_parts(
    negative: bool,
    mag: BigUint,
    lsb: i64,
    sticky: bool,
    p: Precision,
) -> FpNumber {
    let t = p.bits() as i64;
    if mag.is_zero() {
        debug_assert!(!sticky);
        return FpNumber::zero(p);
    }
    let len = mag.bits() as i64;
    let mut exponent = lsb + len;
    let shift = len - t;
    let mantissa = if shift <= 0 {
        debug_assert!(!sticky, "sticky rounding needs guard bits");
        mag << (-shift) as usize
    } else {
        let shift = shift as usize;
        let q = &mag >> shift;
        let rem = &mag - (&q << shift);
        let half = BigUint::one() << (shift - 1);
        let up = match rem.cmp(&half) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => sticky || q.is_odd(),
        };
        if up {
            let q = q + 1u32;
            if q.bits() as i64 > t {
                exponent += 1;
                q >> 1usize
            } else {
                q
            }
        } else {
            q
        }
    };
    FpNumber {
        negative,
        mantissa,
        exponent,
        precision: p.bits(),
    }
}

/// `round_t` of an exact rational.
pub fn round_rational(x: &BigRational, p: Precision) -> FpNumber {
    if x.is_zero() {
        return FpNumber::zero(p);
    }
    let negative = x.is_negative();
    let n = x.numer().abs().to_biguint().expect("nonnegative");
    let d = x.denom().abs().to_biguint().expect("nonnegative");
    // guarantee at least t+3 quotient bits
    let s = p.bits() as i64 + 3 - (n.bits() as i64 - d.bits() as i64);
    let (q, r) = if s >= 0 {
        (n << s as usize).div_rem(&d)
    } else {
        n.div_rem(&(d << (-s) as usize))
    };
    round_parts(negative, q, -s, !r.is_zero(), p)
}

/// Rounds `m · 2^lsb` exactly as given (a dyadic rational).
pub fn round_dyadic(m: &BigInt, lsb: i64, p: Precision) -> FpNumber {
    round_parts(
        m.is_negative(),
        m.magnitude().clone(),
        lsb,
        false,
        p,
    )
}

fn check_exponent(x: FpNumber) -> Result<FpNumber, FpError> {
    // keep a wide margin so that later shifts cannot overflow
    const LIMIT: i64 = 1 << 60;
    if x.exponent.abs() > LIMIT {
        Err(FpError::ExponentOverflow)
    } else {
        Ok(x)
    }
}

/// Correctly rounded `a + b`.
pub fn fp_add(a: &FpNumber, b: &FpNumber, p: Precision) -> Result<FpNumber, FpError> {
    if a.is_zero() {
        return Ok(b.round_to(p));
    }
    if b.is_zero() {
        return Ok(a.round_to(p));
    }
    let (big, small) = if a.exponent >= b.exponent { (a, b) } else { (b, a) };
    let t = p.bits() as i64;
    let widen = (t + 3 - big.precision as i64).max(0);
    let big_m = &big.mantissa << widen as usize;
    let big_lsb = big.lsb_exponent() - widen;
    if small.exponent <= big_lsb {
        // |small| is below one unit of big_m: it only decides the sticky bit
        let mag = if big.negative == small.negative {
            big_m
        } else {
            big_m - 1u32
        };
        return check_exponent(round_parts(big.negative, mag, big_lsb, true, p));
    }
    let lsb = big.lsb_exponent().min(small.lsb_exponent());
    let signed = |x: &FpNumber| {
        let m = BigInt::from_biguint(
            if x.negative { Sign::Minus } else { Sign::Plus },
            x.mantissa.clone(),
        );
        m << (x.lsb_exponent() - lsb) as usize
    };
    let sum = signed(a) + signed(b);
    if sum.is_zero() {
        return Ok(FpNumber::zero(p));
    }
    check_exponent(round_parts(
        sum.is_negative(),
        sum.magnitude().clone(),
        lsb,
        false,
        p,
    ))
}

/// Correctly rounded `a - b`.
pub fn fp_sub(a: &FpNumber, b: &FpNumber, p: Precision) -> Result<FpNumber, FpError> {
    fp_add(a, &b.neg(), p)
}

/// Correctly rounded `a * b`.
pub fn fp_mul(a: &FpNumber, b: &FpNumber, p: Precision) -> Result<FpNumber, FpError> {
    if a.is_zero() || b.is_zero() {
        return Ok(FpNumber::zero(p));
    }
    let lsb = a
        .lsb_exponent()
        .checked_add(b.lsb_exponent())
        .ok_or(FpError::ExponentOverflow)?;
    check_exponent(round_parts(
        a.negative != b.negative,
        &a.mantissa * &b.mantissa,
        lsb,
        false,
        p,
    ))
}

/// Correctly rounded `a / b`; division by zero is an error.
pub fn fp_div(a: &FpNumber, b: &FpNumber, p: Precision) -> Result<FpNumber, FpError> {
    if b.is_zero() {
        return Err(FpError::DivisionByZero);
    }
    if a.is_zero() {
        return Ok(FpNumber::zero(p));
    }
    let s = (p.bits() as i64 + 2 + b.mantissa.bits() as i64 - a.mantissa.bits() as i64).max(0);
    let (q, r) = (&a.mantissa << s as usize).div_rem(&b.mantissa);
    let lsb = a
        .lsb_exponent()
        .checked_sub(b.lsb_exponent())
        .and_then(|v| v.checked_sub(s))
        .ok_or(FpError::ExponentOverflow)?;
    check_exponent(round_parts(
        a.negative != b.negative,
        q,
        lsb,
        !r.is_zero(),
        p,
    ))
}
