//! Pointwise checks of amenability and compatibility, and the numerical
//! excess factor of a composition.

use num_rational::BigRational;
use num_traits::One;
use rayon::prelude::*;
use thiserror::Error;

use crate::condition::{kappa_at, CatalogFunction, ConditionError};
use crate::fp::ExactReal;
use crate::relmetric::{euclid, rel_dist_f64, sample_ball_f64, MetricError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AmenabilityError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("excess factor undefined: the composition has infinite condition number")]
    UndefinedExcess,
    #[error("no smooth formula for the gradient of the condition number")]
    NoGradient,
    #[error("condition number is infinite at the point")]
    InfiniteCondition,
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

/// Which amenability clause a witness violates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clause {
    /// The ball leaves the domain.
    Domain,
    /// The condition number grows by more than the allowed factor.
    Growth,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub clause: Clause,
    pub point: Vec<f64>,
    /// `κ̃` at the witness; infinite or NaN outside the domain.
    pub kappa_tilde: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmenabilityVerdict {
    pub a: f64,
    pub kappa_tilde: f64,
    pub radius: f64,
    pub domain_ok: bool,
    pub growth_ok: bool,
    pub witness: Option<Witness>,
    pub samples_used: usize,
}

impl AmenabilityVerdict {
    pub fn passed(&self) -> bool {
        self.domain_ok && self.growth_ok
    }
}

/// Samples `n` points of the relative ball of radius `1/(a κ̃(f, x))`, half
/// of them on its boundary, and checks that each lies in the domain with
/// `κ̃(f, y) <= a κ̃(f, x)`. Reports the first violation found in sample
/// order. Points with infinite `κ̃` pass vacuously.
pub fn amenability_probe<D, K>(
    in_domain: D,
    kappa: K,
    x: &[f64],
    a: f64,
    n: usize,
    seed: u64,
) -> Result<AmenabilityVerdict, AmenabilityError>
where
    D: Fn(&[f64]) -> bool + Sync,
    K: Fn(&[f64]) -> Result<f64, ConditionError> + Sync,
{
    if !(a >= 1.0) || !a.is_finite() {
        return Err(AmenabilityError::InvalidParameter("a must be finite and at least 1"));
    }
    let kt = 1.0 + kappa(x)?;
    if kt.is_infinite() {
        return Ok(AmenabilityVerdict {
            a,
            kappa_tilde: kt,
            radius: 0.0,
            domain_ok: true,
            growth_ok: true,
            witness: None,
            samples_used: 0,
        });
    }
    let radius = 1.0 / (a * kt);
    let points = sample_ball_f64(x, radius, n, seed, 0.5)?;
    let limit = a * kt;
    let verdicts: Vec<Option<Witness>> = points
        .into_par_iter()
        .map(|y| classify(&in_domain, &kappa, y, limit))
        .collect();
    let witness = verdicts.into_iter().flatten().next();
    Ok(AmenabilityVerdict {
        a,
        kappa_tilde: kt,
        radius,
        domain_ok: !matches!(witness, Some(Witness { clause: Clause::Domain, .. })),
        growth_ok: !matches!(witness, Some(Witness { clause: Clause::Growth, .. })),
        witness,
        samples_used: n,
    })
}

fn classify<D, K>(in_domain: &D, kappa: &K, y: Vec<f64>, limit: f64) -> Option<Witness>
where
    D: Fn(&[f64]) -> bool,
    K: Fn(&[f64]) -> Result<f64, ConditionError>,
{
    if !in_domain(&y) {
        return Some(Witness {
            clause: Clause::Domain,
            point: y,
            kappa_tilde: f64::NAN,
        });
    }
    let kt = match kappa(&y) {
        Ok(k) => 1.0 + k,
        Err(_) => {
            return Some(Witness {
                clause: Clause::Domain,
                point: y,
                kappa_tilde: f64::NAN,
            })
        }
    };
    (kt > limit).then_some(Witness {
        clause: Clause::Growth,
        point: y,
        kappa_tilde: kt,
    })
}

/// [`amenability_probe`] with the catalog's domain and closed-form `κ`.
pub fn probe_catalog(
    f: &CatalogFunction,
    x: &[f64],
    a: f64,
    n: usize,
    seed: u64,
) -> Result<AmenabilityVerdict, AmenabilityError> {
    if !f.in_domain(x) {
        return Err(ConditionError::OutsideDomain.into());
    }
    amenability_probe(|y| f.in_domain(y), |y| kappa_at(f, y), x, a, n, seed)
}

/// Re-evaluates a witness from scratch: it must lie in the probed ball and
/// violate its clause.
pub fn recheck_witness(f: &CatalogFunction, x: &[f64], verdict: &AmenabilityVerdict) -> bool {
    let Some(w) = &verdict.witness else {
        return false;
    };
    let inside = match rel_dist_f64(x, &w.point) {
        Ok(d) => d.value() <= verdict.radius * (1.0 + 1e-12),
        Err(_) => false,
    };
    let violates = match w.clause {
        Clause::Domain => !f.in_domain(&w.point) || kappa_at(f, &w.point).is_err(),
        Clause::Growth => kappa_at(f, &w.point).is_ok_and(|k| 1.0 + k > verdict.a * verdict.kappa_tilde),
    };
    inside && violates
}

/// Smallest `a` in the grid 4, 8, 16, … up to `max_a` for which the probe
/// passes at `x`.
pub fn smallest_passing_a(
    f: &CatalogFunction,
    x: &[f64],
    n: usize,
    seed: u64,
    max_a: f64,
) -> Result<Option<f64>, AmenabilityError> {
    let mut a = 4.0;
    while a <= max_a {
        if probe_catalog(f, x, a, n, seed)?.passed() {
            return Ok(Some(a));
        }
        a *= 2.0;
    }
    Ok(None)
}

/// Smooth-formula sufficient condition for growth control:
/// `‖(x_i ∂κ/∂x_i)_i‖₂ <= q κ̃(f, x)²`.
pub fn gradient_criterion(f: &CatalogFunction, x: &[f64], q: f64) -> Result<bool, AmenabilityError> {
    let k = kappa_at(f, x)?;
    if k.is_infinite() {
        return Err(AmenabilityError::InfiniteCondition);
    }
    let grad = f.kappa_log_gradient(x).ok_or(AmenabilityError::NoGradient)?;
    let kt = 1.0 + k;
    Ok(euclid(&grad) <= q * kt * kt)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExcessFactorReport {
    pub kt_g_at_hx: f64,
    pub kt_h_at_x: f64,
    pub kt_f_at_x: f64,
    pub excess: f64,
}

impl ExcessFactorReport {
    /// The composition bound: the numerator dominates `κ̃(g ∘ h, x)`.
    pub fn numerator_dominates(&self) -> bool {
        self.kt_g_at_hx * self.kt_h_at_x >= self.kt_f_at_x * (1.0 - 1e-12)
    }
}

/// `κ̃(g, h(x)) κ̃(h, x) / κ̃(g ∘ h, x)`.
pub fn excess_factor(
    g: &CatalogFunction,
    h: &CatalogFunction,
    x: &[f64],
) -> Result<ExcessFactorReport, AmenabilityError> {
    let exact: Vec<ExactReal> = x
        .iter()
        .map(|v| ExactReal::from_f64(*v))
        .collect::<Result<_, _>>()
        .map_err(ConditionError::from)?;
    let hx: Vec<f64> = h.eval_exact(&exact, 128)?.iter().map(|v| v.to_f64()).collect();
    let composite = CatalogFunction::composite(g.clone(), h.clone());
    let kt_f = 1.0 + kappa_at(&composite, x)?;
    if kt_f.is_infinite() {
        return Err(AmenabilityError::UndefinedExcess);
    }
    let kt_h = 1.0 + kappa_at(h, x)?;
    let kt_g = 1.0 + kappa_at(g, &hx)?;
    Ok(ExcessFactorReport {
        kt_g_at_hx: kt_g,
        kt_h_at_x: kt_h,
        kt_f_at_x: kt_f,
        excess: kt_g * kt_h / kt_f,
    })
}

/// `A_ε = B_ε = [[1, ε], [ε, 1]]` laid out as the input `(A, B)`.
pub fn strassen_point(eps: f64) -> Vec<f64> {
    vec![1.0, eps, eps, 1.0, 1.0, eps, eps, 1.0]
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrassenClosedForm {
    /// `κ` of the `(1, 2)` recombination at `h(A_ε, B_ε)`.
    pub kappa_g12: f64,
    /// Per-entry values for the product, row-major.
    pub kappa_entries: [f64; 4],
    /// `1/(4ε)`, exact.
    pub lower_bound: BigRational,
}

/// Closed-form quantities for the Strassen family at `ε`.
pub fn strassen_excess_closed_form(eps: f64) -> Result<StrassenClosedForm, AmenabilityError> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(AmenabilityError::InvalidParameter("epsilon must lie in (0, 1)"));
    }
    let kappa_g12 = ((1.0 - eps).powi(2) + (1.0 + eps).powi(2)).sqrt() / (2.0 * eps);
    let diag = (1.0 + eps.powi(4)).sqrt() / (1.0 + eps * eps);
    let off = 0.5f64.sqrt();
    let e = BigRational::from_float(eps).expect("finite epsilon");
    let lower_bound = BigRational::one() / (BigRational::from_integer(4.into()) * e);
    Ok(StrassenClosedForm {
        kappa_g12,
        kappa_entries: [diag, off, off, diag],
        lower_bound,
    })
}
