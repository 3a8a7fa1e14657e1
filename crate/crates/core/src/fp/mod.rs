//! Software binary floating point with a free precision `t` and an
//! unbounded exponent, plus exact and enclosed real numbers.

pub mod elementary;
mod interval;
mod number;
mod precision;
mod real;

use thiserror::Error;

pub use interval::Interval;
pub use number::{fp_add, fp_div, fp_mul, fp_sub, round_dyadic, round_rational, FpNumber};
pub use precision::{ldexp, pow2_f64, Precision, MAX_PRECISION};
pub use real::{round, round_with_retry, ExactReal, INITIAL_GUARD, MAX_GUARD};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FpError {
    #[error("precision must satisfy 2 < t <= 2^20, got {0}")]
    InvalidPrecision(u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("enclosure too wide to decide the rounding")]
    EnclosureTooWide,
    #[error("value is not finite")]
    NonFinite,
    #[error("mantissa is not normalized for the requested precision")]
    NotNormalized,
    #[error("exponent out of the supported range")]
    ExponentOverflow,
    #[error("argument too large for the evaluator")]
    ArgumentTooLarge,
    #[error("sign of the enclosed value is not determined")]
    SignUndetermined,
    #[error("empty interval")]
    EmptyInterval,
    #[error("outside the domain: {0}")]
    OutsideDomain(&'static str),
}
