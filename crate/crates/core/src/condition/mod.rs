//! Relative condition numbers in the coordinatewise relative metric.

mod function;
mod sampled;

use thiserror::Error;

pub use function::{strassen_g_matrix, AffineOp, CatalogFunction};
pub use sampled::{kappa_sampled, kappa_sampled_catalog, SampleOptions};

use crate::fp::FpError;
use crate::linalg::{LinalgError, Matrix};
use crate::relmetric::{MetricError, RelPoint};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConditionError {
    #[error("wrong input arity: {0}")]
    Arity(&'static str),
    #[error("point outside the domain")]
    OutsideDomain,
    #[error("function undefined inside the probe ball")]
    DomainBoundary,
    #[error("unknown function id `{0}`")]
    UnknownFunction(String),
    #[error("no closed form available for this function")]
    NoClosedForm,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Fp(#[from] FpError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// How a condition number was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    ClosedForm,
    Jacobian,
    Sampled { converged: bool, divergent: bool },
}

#[derive(Clone, Debug)]
pub struct ConditionReport {
    pub kappa: f64,
    pub kappa_tilde: f64,
    pub method: Method,
    pub at: RelPoint,
}

impl ConditionReport {
    fn new(kappa: f64, method: Method, at: &[f64]) -> Result<Self, ConditionError> {
        Ok(ConditionReport {
            kappa,
            kappa_tilde: 1.0 + kappa,
            method,
            at: RelPoint::from_f64s(at)?,
        })
    }
}

/// `‖diag(f(x))† J diag(x)‖₂`; rows with `f_i(x) = 0` are dropped.
///
/// Only valid where no output vanishes while its row of `J diag(x)` is
/// nonzero (there the condition number is infinite).
pub fn kappa_from_jacobian_f64(x: &[f64], fx: &[f64], jac: &Matrix) -> Result<f64, ConditionError> {
    if jac.rows() != fx.len() || jac.cols() != x.len() {
        return Err(ConditionError::Arity("Jacobian shape does not match the point"));
    }
    let mut r = Matrix::zeros(fx.len(), x.len());
    for i in 0..fx.len() {
        if fx[i] == 0.0 {
            continue;
        }
        for j in 0..x.len() {
            r.set(i, j, jac.get(i, j) * x[j] / fx[i]);
        }
    }
    Ok(r.spectral_norm()?)
}

pub fn kappa_from_jacobian(
    x: &RelPoint,
    fx: &RelPoint,
    jac: &Matrix,
) -> Result<ConditionReport, ConditionError> {
    let xs = x.to_f64s();
    let k = kappa_from_jacobian_f64(&xs, &fx.to_f64s(), jac)?;
    ConditionReport::new(k, Method::Jacobian, &xs)
}

/// Condition number from the catalog's hand-written Jacobian. Outputs that
/// vanish while their relative row does not give an infinite value.
pub fn kappa_via_jacobian(f: &CatalogFunction, x: &RelPoint) -> Result<ConditionReport, ConditionError> {
    let xs = x.to_f64s();
    let jac = f.jacobian(&xs)?;
    let exact_x: Vec<_> = x.coords().to_vec();
    let fx_exact = f.eval_exact(&exact_x, 96)?;
    let fx: Vec<f64> = fx_exact.iter().map(|v| v.to_f64()).collect();
    for (i, v) in fx_exact.iter().enumerate() {
        if v.is_zero() && (0..xs.len()).any(|j| jac.get(i, j) * xs[j] != 0.0) {
            return ConditionReport::new(f64::INFINITY, Method::Jacobian, &xs);
        }
    }
    let k = kappa_from_jacobian_f64(&xs, &fx, &jac)?;
    ConditionReport::new(k, Method::Jacobian, &xs)
}

/// Closed-form condition number; composites without a catalog equivalent
/// fall back to the chain-rule Jacobian.
pub fn kappa_closed_form(f: &CatalogFunction, x: &RelPoint) -> Result<ConditionReport, ConditionError> {
    let xs = x.to_f64s();
    match f.closed_form_kappa(&xs) {
        Ok(k) => ConditionReport::new(k, Method::ClosedForm, &xs),
        Err(ConditionError::NoClosedForm) => kappa_via_jacobian(f, x),
        Err(e) => Err(e),
    }
}

/// Convenience wrapper over [`kappa_closed_form`] for a point of doubles.
pub fn kappa_at(f: &CatalogFunction, x: &[f64]) -> Result<f64, ConditionError> {
    Ok(kappa_closed_form(f, &RelPoint::from_f64s(x)?)?.kappa)
}

/// Upper bound `κ̃(g, h(x)) · κ̃(h, x)` on `κ̃(g ∘ h, x)`.
pub fn composition_upper_bound(kt_g: f64, kt_h: f64) -> Result<f64, ConditionError> {
    if !(kt_g >= 1.0) || !(kt_h >= 1.0) {
        return Err(ConditionError::InvalidParameter("extended condition numbers are >= 1"));
    }
    Ok(kt_g * kt_h)
}

/// Bounds `(max κ_i, sqrt(Σ κ_i²))` on the condition number of a stacked
/// map from those of its components.
pub fn stacking_bounds(per_component: &[f64]) -> Result<(f64, f64), ConditionError> {
    if per_component.iter().any(|k| k.is_nan() || *k < 0.0) {
        return Err(ConditionError::InvalidParameter("condition numbers are nonnegative"));
    }
    let lo = per_component.iter().fold(0.0f64, |m, k| m.max(*k));
    let hi = crate::relmetric::euclid(per_component);
    Ok((lo, hi))
}
