//! Certified enclosures of a few elementary functions.
//!
//! Every kernel evaluates a series in fixed point (integers scaled by
//! `2^w`) and tracks a bound on the accumulated truncation error in units
//! of the last place. The bounds are deliberately loose.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::interval::{scaled_bounds, Interval};
use super::number::round_rational;
use super::{FpError, Precision};

/// `sum_k (±1)^k 2^w / ((2k+1) n^(2k+1))` with its error bound in ulps.
fn inverse_arctan_series(n: u64, w: u32, alternating: bool) -> (BigInt, u64) {
    let n = BigInt::from(n);
    let n2 = &n * &n;
    let mut power = (BigInt::one() << w as usize) / &n;
    let mut sum = power.clone();
    let mut k = 0u64;
    loop {
        k += 1;
        power /= &n2;
        if power.is_zero() {
            break;
        }
        let term = &power / (2 * k + 1);
        if alternating && k % 2 == 1 {
            sum -= term;
        } else {
            sum += term;
        }
    }
    (sum, 2 * (k + 1) + 2)
}

/// Enclosure of pi with at least `bits` correct bits.
pub fn pi(bits: u32) -> Interval {
    let w = bits + 16;
    let (a, ea) = inverse_arctan_series(5, w, true);
    let (b, eb) = inverse_arctan_series(239, w, true);
    let m = a * 16 - b * 4;
    let e = BigInt::from(16 * ea + 4 * eb);
    Interval::new(&m - &e, &m + &e, -(w as i64)).expect("ordered")
}

/// Enclosure of ln 2 with at least `bits` correct bits.
pub fn ln2(bits: u32) -> Interval {
    let w = bits + 16;
    let (a, ea) = inverse_arctan_series(3, w, false);
    let m = a * 2;
    let e = BigInt::from(2 * ea);
    Interval::new(&m - &e, &m + &e, -(w as i64)).expect("ordered")
}

fn rational_to_f64(q: &BigRational) -> f64 {
    round_rational(q, Precision::DOUBLE).to_f64()
}

fn bit_len(n: &BigInt) -> u32 {
    n.bits() as u32
}

/// `exp(z) · 2^w` for `|z| <= 1/2`, with error bound.
fn exp_fixed(z: &BigRational, w: u32) -> (BigInt, u64) {
    let (zf, _) = scaled_bounds(z, w as i64);
    let mut term = BigInt::one() << w as usize;
    let mut sum = term.clone();
    let mut k = 0u64;
    loop {
        k += 1;
        term = ((term * &zf) >> w as usize) / k;
        if term.is_zero() {
            break;
        }
        sum += &term;
    }
    (sum, 4 * k + 6)
}

fn exp_point(z: &BigRational, bits: u32, lower: bool) -> Result<Interval, FpError> {
    if z.is_zero() {
        return Ok(Interval::point(BigInt::one(), 0));
    }
    let approx = rational_to_f64(z);
    if approx.abs() > 1e15 {
        return Err(FpError::ArgumentTooLarge);
    }
    let n = (approx / std::f64::consts::LN_2).round() as i64;
    let nbits = 64 - n.unsigned_abs().leading_zeros();
    let w = bits + 16;
    let l = ln2(w + nbits + 8);
    let reduced = Interval::from_rational(z, w + nbits + 16).sub(&l.mul_int(&BigInt::from(n)));
    let r = if lower { reduced.lo() } else { reduced.hi() };
    let (s, e) = exp_fixed(&r, w);
    let e = BigInt::from(e);
    Ok(Interval::new(&s - &e, &s + &e, -(w as i64))?.mul_pow2(n))
}

/// `[lower.lo, upper.hi]` for a monotone increasing kernel.
fn span(lower: &Interval, upper: &Interval) -> Interval {
    let e = lower.exp().min(upper.exp());
    let lo = lower.lo_mantissa() << (lower.exp() - e) as usize;
    let hi = upper.hi_mantissa() << (upper.exp() - e) as usize;
    Interval::new(lo, hi, e).expect("monotone kernel keeps order")
}

/// Enclosure of `exp` over an interval, relative precision about `bits`.
pub fn exp(x: &Interval, bits: u32) -> Result<Interval, FpError> {
    let lo = exp_point(&x.lo(), bits, true)?;
    if x.is_point() {
        return Ok(lo);
    }
    let hi = exp_point(&x.hi(), bits, false)?;
    Ok(span(&lo, &hi))
}

/// `atanh(s) · 2^w` for `|s| <= 1/5`, with error bound.
fn atanh_fixed(s: &BigRational, w: u32) -> (BigInt, u64) {
    // odd function: run the series on |s| so the shifted terms reach zero
    let (sf, _) = scaled_bounds(&s.abs(), w as i64);
    let s2 = (&sf * &sf) >> w as usize;
    let mut term = sf.clone();
    let mut sum = sf;
    let mut k = 0u64;
    loop {
        k += 1;
        term = (term * &s2) >> w as usize;
        if term.is_zero() {
            break;
        }
        sum += &term / (2 * k + 1);
    }
    if s.is_negative() {
        sum = -sum;
    }
    (sum, 3 * k + 6)
}

fn log_point(q: &BigRational, bits: u32) -> Result<Interval, FpError> {
    if !q.is_positive() {
        return Err(FpError::OutsideDomain("log of a nonpositive number"));
    }
    if q.is_one() {
        return Ok(Interval::point(BigInt::zero(), 0));
    }
    let mut e = q.numer().bits() as i64 - q.denom().bits() as i64;
    let pow2 = |k: i64| {
        if k >= 0 {
            BigRational::from_integer(BigInt::one() << k as usize)
        } else {
            BigRational::new(BigInt::one(), BigInt::one() << (-k) as usize)
        }
    };
    let mut m = q / pow2(e);
    let three_quarters = BigRational::new(3.into(), 4.into());
    let three_halves = BigRational::new(3.into(), 2.into());
    while m < three_quarters {
        m *= BigRational::from_integer(2.into());
        e -= 1;
    }
    while m >= three_halves {
        m /= BigRational::from_integer(2.into());
        e += 1;
    }
    let one = BigRational::one();
    let s = (&m - &one) / (&m + &one);
    let extra = if s.is_zero() {
        0
    } else {
        (s.denom().bits() as i64 - s.numer().bits() as i64).max(0) as u32
    };
    let w = bits + 16 + extra;
    let (a, err) = atanh_fixed(&s, w);
    let m2 = a * 2;
    let err = BigInt::from(2 * err);
    let mut out = Interval::new(&m2 - &err, &m2 + &err, -(w as i64))?;
    if e != 0 {
        let ebits = 64 - e.unsigned_abs().leading_zeros();
        out = out.add(&ln2(w + ebits + 4).mul_int(&BigInt::from(e)));
    }
    Ok(out)
}

/// Enclosure of the natural logarithm over a positive interval.
pub fn log(x: &Interval, bits: u32) -> Result<Interval, FpError> {
    if x.signum() != Some(1) {
        return Err(FpError::OutsideDomain("log of an interval reaching zero"));
    }
    let lo = log_point(&x.lo(), bits)?;
    if x.is_point() {
        return Ok(lo);
    }
    let hi = log_point(&x.hi(), bits)?;
    Ok(span(&lo, &hi))
}

fn sqrt_point(q: &BigRational, bits: u32) -> Interval {
    if q.is_zero() {
        return Interval::point(BigInt::zero(), 0);
    }
    let mag = q.numer().bits() as i64 - q.denom().bits() as i64;
    let w = bits as i64 + 4 - Integer::div_floor(&mag, &2);
    let (ylo, yhi) = scaled_bounds(q, 2 * w);
    let slo = ylo.sqrt();
    let mut shi = yhi.sqrt();
    if &shi * &shi < yhi {
        shi += 1;
    }
    Interval::new(slo, shi, -w).expect("ordered")
}

/// Enclosure of the square root over a nonnegative interval.
pub fn sqrt(x: &Interval, bits: u32) -> Result<Interval, FpError> {
    if x.lo_mantissa().is_negative() {
        return Err(FpError::OutsideDomain("square root of a negative number"));
    }
    let lo = sqrt_point(&x.lo(), bits);
    if x.is_point() {
        return Ok(lo);
    }
    Ok(span(&lo, &sqrt_point(&x.hi(), bits)))
}

/// `sin(r) · 2^w` for `|r| <= 2`, with error bound.
fn sin_fixed(r: &BigRational, w: u32) -> (BigInt, u64) {
    let (rf, _) = scaled_bounds(r, w as i64);
    let r2 = (&rf * &rf) >> w as usize;
    let mut term = rf.clone();
    let mut sum = rf;
    let mut k = 0u64;
    loop {
        k += 1;
        term = -(((term * &r2) >> w as usize) / ((2 * k) * (2 * k + 1)));
        if term.is_zero() {
            break;
        }
        sum += &term;
    }
    (sum, 8 * k + 4)
}

/// Nearest integer to `x / pi`, using a modest enclosure of pi.
pub fn nearest_multiple_of_pi(x: &BigRational) -> BigInt {
    let mag = (x.numer().bits() as i64 - x.denom().bits() as i64).max(0) as u32;
    let p = pi(mag + 24).mid();
    let q = x / p;
    let two = BigInt::from(2);
    (q.numer() * &two + q.denom()).div_floor(&(q.denom() * &two))
}

/// `x - n pi` for the nearest `n`, with about `bits` absolute bits.
pub fn reduce_mod_pi(x: &Interval, bits: u32) -> (Interval, BigInt) {
    let n = nearest_multiple_of_pi(&x.mid());
    let r = x.sub(&pi(bits + bit_len(&n) + 8).mul_int(&n));
    (r, n)
}

/// Enclosure of `sin` over an interval with about `bits` absolute bits.
pub fn sin(x: &Interval, bits: u32) -> Result<Interval, FpError> {
    if x.is_point() && x.lo_mantissa().is_zero() {
        return Ok(Interval::point(BigInt::zero(), 0));
    }
    let w = bits + 16;
    let (r, n) = reduce_mod_pi(x, w + 8);
    let r = r.trim(w + 40);
    let mid = r.mid();
    if rational_to_f64(&mid).abs() > 2.0 {
        return Err(FpError::ArgumentTooLarge);
    }
    let (s, err) = sin_fixed(&mid, w);
    // |sin'| <= 1: widen by the half-width of the reduced argument
    let half_width = (r.hi() - r.lo()) / BigRational::from_integer(2.into());
    let (_, hw) = scaled_bounds(&half_width, w as i64);
    let e = BigInt::from(err) + hw + 1;
    let out = Interval::new(&s - &e, &s + &e, -(w as i64))?;
    Ok(if n.is_odd() { out.neg() } else { out })
}

/// Repeats an enclosure computation with doubled internal precision until
/// its relative width is at most `2^-bits`, or gives up and returns the
/// last (too wide) result.
pub fn refine<F>(bits: u32, mut f: F) -> Result<Interval, FpError>
where
    F: FnMut(u32) -> Result<Interval, FpError>,
{
    let mut w = bits + 16;
    let cap = 8 * bits + 4096;
    loop {
        let i = f(w)?;
        match i.relative_width_log2() {
            Some(r) if r <= -(bits as f64) => return Ok(i),
            _ if w > cap => return Ok(i),
            _ => w *= 2,
        }
    }
}

/// Width of an interval relative to its midpoint as a double, for tests and
/// diagnostics.
pub fn relative_width(x: &Interval) -> f64 {
    let mid = x.mid();
    if mid.is_zero() {
        return f64::INFINITY;
    }
    let w = (x.hi() - x.lo()) / mid.abs();
    w.to_f64().unwrap_or(f64::INFINITY)
}
