use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use super::FpError;

/// Largest precision accepted. Far beyond anything the experiments use,
/// it only keeps shift amounts in a sane range.
pub const MAX_PRECISION: u32 = 1 << 20;

/// Number of significand bits `t` of a working precision. Always `t > 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Precision(u32);

impl Precision {
    pub const SINGLE: Precision = Precision(24);
    pub const DOUBLE: Precision = Precision(53);
    pub const QUAD: Precision = Precision(113);

    pub fn new(bits: u32) -> Result<Self, FpError> {
        if bits <= 2 || bits > MAX_PRECISION {
            return Err(FpError::InvalidPrecision(bits));
        }
        Ok(Precision(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    /// Unit roundoff `2^-t` as an exact rational.
    pub fn unit_roundoff(self) -> BigRational {
        BigRational::new(BigInt::one(), BigInt::one() << self.0 as usize)
    }

    /// Unit roundoff as `f64`; exact for every `t <= 1074`.
    pub fn unit_roundoff_f64(self) -> f64 {
        pow2_f64(-(self.0 as i64))
    }
}

impl std::fmt::Display for Precision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "t={}", self.0)
    }
}

/// `2^e` as an `f64`, saturating to zero or infinity outside the range.
pub fn pow2_f64(e: i64) -> f64 {
    ldexp(1.0, e)
}

/// `x * 2^e` computed by exact power-of-two steps.
pub fn ldexp(mut x: f64, mut e: i64) -> f64 {
    const STEP: i64 = 1000;
    while e > STEP {
        x *= f64::from_bits(((1023 + STEP) as u64) << 52);
        e -= STEP;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -STEP {
        x *= f64::from_bits(((1023 - STEP) as u64) << 52);
        e += STEP;
        if x == 0.0 {
            return x;
        }
    }
    if e >= -1022 {
        x * f64::from_bits(((1023 + e) as u64) << 52)
    } else {
        // two steps so that the intermediate stays normal
        let half = e / 2;
        x * f64::from_bits(((1023 + half) as u64) << 52)
            * f64::from_bits(((1023 + e - half) as u64) << 52)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_tiny_precision() {
        assert!(Precision::new(2).is_err());
        assert!(Precision::new(0).is_err());
        assert!(Precision::new(3).is_ok());
    }

    #[test]
    fn unit_roundoff_values() {
        assert_eq!(Precision::DOUBLE.unit_roundoff_f64(), f64::EPSILON / 2.0);
        assert_eq!(Precision::new(3).unwrap().unit_roundoff_f64(), 0.125);
        assert_eq!(
            Precision::new(1074).unwrap().unit_roundoff_f64(),
            f64::from_bits(1)
        );
    }

    #[test]
    fn ldexp_matches_multiplication() {
        assert_eq!(ldexp(3.0, 4), 48.0);
        assert_eq!(ldexp(1.0, -1074), f64::from_bits(1));
        assert_eq!(ldexp(1.5, 2000), f64::INFINITY);
        assert_eq!(ldexp(1.5, -2000), 0.0);
        assert_eq!(ldexp(1.0, 1023), f64::from_bits(0x7fe0_0000_0000_0000));
    }
}
