use num_bigint::BigInt;
use num_integer::Integer;

use super::CatalogError;
use crate::fp::elementary::{nearest_multiple_of_pi, pi};
use crate::fp::{fp_div, fp_mul, fp_sub, round_with_retry, ExactReal, FpNumber, Interval, Precision};

/// Number of Taylor terms after the leading one needed for `|r| <= pi/2`
/// at precision `t`.
pub fn taylor_terms(p: Precision) -> u32 {
    let target = -(p.bits() as f64) - 2.0;
    let r2 = (std::f64::consts::FRAC_PI_2).powi(2);
    let mut log_term = std::f64::consts::FRAC_PI_2.log2();
    let mut k = 0u32;
    while log_term >= target {
        k += 1;
        log_term += (r2 / ((2 * k) as f64 * (2 * k + 1) as f64)).log2();
    }
    k
}

/// Sine at working precision: the argument is reduced modulo pi exactly
/// and the reduced argument rounded to `p`; the series is then evaluated in
/// `p`-bit arithmetic by Horner's rule.
pub fn sine_working(x: &FpNumber, p: Precision) -> Result<FpNumber, CatalogError> {
    let x = x.round_to(p);
    if x.is_zero() {
        return Ok(x);
    }
    let n: BigInt = nearest_multiple_of_pi(&x.to_exact());
    let point = Interval::from_fp(&x);
    let nbits = n.bits() as u32;
    let r = round_with_retry(p, |bits| {
        let reduced = point.sub(&pi(bits + nbits + 8).mul_int(&n));
        Ok(ExactReal::Enclosure(reduced))
    })?;
    let r2 = fp_mul(&r, &r, p)?;
    let one = FpNumber::one(p);
    let mut acc = one.clone();
    for k in (1..=taylor_terms(p) as i64).rev() {
        let d = FpNumber::from_i64((2 * k) * (2 * k + 1), p);
        let t = fp_div(&fp_mul(&r2, &acc, p)?, &d, p)?;
        acc = fp_sub(&one, &t, p)?;
    }
    let s = fp_mul(&r, &acc, p)?;
    Ok(if n.is_odd() { s.neg() } else { s })
}

/// Enclosure of `sin(x)` with relative width about `2^-bits`.
pub fn high_precision_sin(x: &ExactReal, bits: u32) -> Result<ExactReal, CatalogError> {
    Ok(x.sin(bits)?)
}
