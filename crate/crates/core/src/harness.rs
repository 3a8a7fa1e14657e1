//! Forward-stability measurements and the two loss-of-precision
//! experiments (Strassen's product near a singular family, and the sine of
//! huge arguments).

use num_rational::BigRational;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use thiserror::Error;

use crate::amenability::strassen_point;
use crate::catalog::{high_precision_sin, naive_product, sine_working, strassen_2x2, CatalogError, NumericalAlgorithm};
use crate::condition::{kappa_closed_form, ConditionError};
use crate::fp::elementary::pi;
use crate::fp::{round, round_with_retry, ExactReal, FpError, FpNumber, Interval, Precision};
use crate::relmetric::{abs_dist, log_ratio, rel_dist, MetricError, RelPoint};
use crate::rng::{stream_id, stream_rng};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Fp(#[from] FpError),
}

/// One measured run: errors are expressed in units of `u`.
#[derive(Clone, Debug, PartialEq)]
pub struct LopRecord {
    pub input_id: usize,
    /// Experiment parameter (ε or k); NaN when there is none.
    pub parameter: f64,
    pub precision: Precision,
    pub rel_lop: f64,
    pub abs_lop: f64,
    pub kappa_tilde: f64,
    /// Whether `u <= 1/(a κ̃)` for the threshold under test.
    pub in_scope: bool,
}

impl LopRecord {
    pub fn u(&self) -> f64 {
        self.precision.unit_roundoff_f64()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunFailure {
    pub input_id: usize,
    pub precision: Precision,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityVerdict {
    pub algorithm: String,
    pub a: f64,
    /// Worst observed `dist / (κ̃ u)` over runs with finite `κ̃`.
    pub fitted_a: f64,
    pub pass: bool,
    pub runs: Vec<LopRecord>,
    /// Inputs skipped because `κ̃` is infinite there.
    pub skipped: usize,
    pub failure: Option<RunFailure>,
}

/// Guard bits for reference values at working precision `p`.
pub fn reference_bits(p: Precision) -> u32 {
    4 * p.bits() + 64
}

fn round_input(x: &RelPoint, p: Precision) -> Result<Vec<FpNumber>, FpError> {
    x.coords().iter().map(|c| round(c, p)).collect()
}

/// Runs `alg` on every input at every precision and compares with the exact
/// value. Passes when every run with `u <= 1/(a κ̃)` has error at most
/// `a κ̃ u`; inputs with infinite `κ̃` are skipped.
pub fn forward_stability_check(
    alg: &dyn NumericalAlgorithm,
    inputs: &[RelPoint],
    precisions: &[Precision],
    a: f64,
) -> Result<StabilityVerdict, HarnessError> {
    if !(a > 0.0) {
        return Err(HarnessError::InvalidConfig("stability constant must be positive"));
    }
    let f = alg.function();
    let per_input: Vec<Result<(Vec<LopRecord>, Option<RunFailure>, bool), HarnessError>> = inputs
        .par_iter()
        .enumerate()
        .map(|(id, x)| {
            let kt = 1.0 + kappa_closed_form(&f, x)?.kappa;
            if kt.is_infinite() {
                return Ok((Vec::new(), None, true));
            }
            let mut runs = Vec::new();
            for &p in precisions {
                let u = p.unit_roundoff_f64();
                let in_scope = u * a * kt <= 1.0;
                let outcome = round_input(x, p)
                    .map_err(CatalogError::from)
                    .and_then(|xr| alg.evaluate(&xr, p));
                let out = match outcome {
                    Ok(v) => v,
                    Err(e) if in_scope => {
                        let failure = RunFailure {
                            input_id: id,
                            precision: p,
                            reason: e.to_string(),
                        };
                        return Ok((runs, Some(failure), false));
                    }
                    Err(_) => continue,
                };
                let reference = alg.exact_reference(x.coords(), reference_bits(p))?;
                let reference = RelPoint::new(reference)?;
                let computed = RelPoint::from_fp(&out);
                runs.push(LopRecord {
                    input_id: id,
                    parameter: f64::NAN,
                    precision: p,
                    rel_lop: rel_dist(&computed, &reference)?.value() / u,
                    abs_lop: abs_dist(&computed, &reference)? / u,
                    kappa_tilde: kt,
                    in_scope,
                });
            }
            Ok((runs, None, false))
        })
        .collect();
    let mut runs = Vec::new();
    let mut failure = None;
    let mut skipped = 0;
    for r in per_input {
        let (rs, fail, skip) = r?;
        runs.extend(rs);
        if failure.is_none() {
            failure = fail;
        }
        skipped += usize::from(skip);
    }
    let fitted_a = runs.iter().map(|r| r.rel_lop / r.kappa_tilde).fold(0.0, f64::max);
    let pass = failure.is_none() && runs.iter().filter(|r| r.in_scope).all(|r| r.rel_lop <= a * r.kappa_tilde);
    Ok(StabilityVerdict {
        algorithm: alg.name(),
        a,
        fitted_a,
        pass,
        runs,
        skipped,
        failure,
    })
}

/// Backward witness for the left-to-right product: `y₁ = f̂(x)/(x₂⋯x_k)`
/// exactly, so the computed value is the exact product of
/// `(y₁, x₂, …, x_k)`. Returns the relative distance from `y₁` to `x₁`.
pub fn backward_check_product(x: &[FpNumber], p: Precision) -> Result<f64, HarnessError> {
    if x.is_empty() || x.iter().any(|v| v.is_zero()) {
        return Err(HarnessError::InvalidConfig("needs nonzero factors"));
    }
    let computed = naive_product(x, p)?.to_exact();
    let rounded: Vec<BigRational> = x.iter().map(|v| v.round_to(p).to_exact()).collect();
    let rest: BigRational = rounded[1..].iter().product();
    let y1 = computed / rest;
    let x1 = x[0].to_exact();
    if (y1 > BigRational::default()) != (x1 > BigRational::default()) {
        return Ok(f64::INFINITY);
    }
    Ok(log_ratio(&y1, &x1))
}

/// Nearest-rank percentile of sorted data, `q` in `(0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = (q * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

/// `n` points log-spaced between `lo` and `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Least-squares slope of `log10 y` against `log10 x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.log10()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.log10()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrassenConfig {
    pub eps: Vec<f64>,
    pub samples: usize,
    pub seed: u64,
    pub precision: Precision,
}

impl StrassenConfig {
    /// 100 values of ε in `[1e-8, 1e-2]`, 200 samples each.
    pub fn desk(seed: u64) -> Self {
        StrassenConfig {
            eps: log_grid(1e-8, 1e-2, 100),
            samples: 200,
            seed,
            precision: Precision::DOUBLE,
        }
    }

    /// 1000 values of ε in `[1e-12, 1e-1]`, 1000 samples each.
    pub fn full(seed: u64) -> Self {
        StrassenConfig {
            eps: log_grid(1e-12, 1e-1, 1000),
            samples: 1000,
            seed,
            precision: Precision::DOUBLE,
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if self.eps.is_empty() || self.eps.iter().any(|e| !(*e > 0.0 && *e < 1.0)) {
            return Err(HarnessError::InvalidConfig("epsilon values must lie in (0, 1)"));
        }
        if self.samples == 0 {
            return Err(HarnessError::InvalidConfig("need at least one sample"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PercentileRow {
    pub epsilon: f64,
    pub rel_p05: f64,
    pub rel_med: f64,
    pub rel_p95: f64,
    pub abs_p05: f64,
    pub abs_med: f64,
    pub abs_p95: f64,
}

/// Multiplies each entry by `exp` of a Gaussian perturbation scaled to
/// Frobenius norm 1/2, so the relative distance to `m` is 1/2.
fn perturb<R: Rng>(m: &[f64], rng: &mut R) -> Vec<f64> {
    let p: Vec<f64> = (0..m.len()).map(|_| rng.sample(StandardNormal)).collect();
    let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = if norm > 0.0 { 0.5 / norm } else { 0.0 };
    m.iter().zip(&p).map(|(v, d)| v * (d * scale).exp()).collect()
}

fn exact_matmul(a: &[FpNumber], b: &[FpNumber]) -> Vec<BigRational> {
    let a: Vec<BigRational> = a.iter().map(|v| v.to_exact()).collect();
    let b: Vec<BigRational> = b.iter().map(|v| v.to_exact()).collect();
    let mut c = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            c.push(&a[2 * i] * &b[j] + &a[2 * i + 1] * &b[2 + j]);
        }
    }
    c
}

/// One perturbed Strassen run: `(rel_lop, abs_lop)`.
pub fn strassen_sample(eps: f64, eps_index: usize, sample: usize, cfg: &StrassenConfig) -> Result<(f64, f64), HarnessError> {
    let mut rng = stream_rng(cfg.seed, stream_id(eps_index as u64, sample as u64));
    let base = strassen_point(eps);
    let a = perturb(&base[..4], &mut rng);
    let b = perturb(&base[4..], &mut rng);
    let to_fp = |v: &[f64]| -> Result<Vec<FpNumber>, FpError> {
        v.iter().map(|x| Ok(FpNumber::from_f64(*x)?.round_to(cfg.precision))).collect()
    };
    let (a, b) = (to_fp(&a)?, to_fp(&b)?);
    let computed = RelPoint::from_fp(&strassen_2x2(&a, &b, cfg.precision)?);
    let exact = RelPoint::from_rationals(exact_matmul(&a, &b));
    let u = cfg.precision.unit_roundoff_f64();
    Ok((
        rel_dist(&computed, &exact)?.value() / u,
        abs_dist(&computed, &exact)? / u,
    ))
}

/// Loss-of-precision percentiles of Strassen's 2x2 product on perturbations
/// of `(A_ε, B_ε)`, one row per ε in grid order.
pub fn strassen_experiment(cfg: &StrassenConfig) -> Result<Vec<PercentileRow>, HarnessError> {
    cfg.validate()?;
    cfg.eps
        .par_iter()
        .enumerate()
        .map(|(i, &eps)| {
            let mut rel = Vec::with_capacity(cfg.samples);
            let mut abs = Vec::with_capacity(cfg.samples);
            for j in 0..cfg.samples {
                let (r, a) = strassen_sample(eps, i, j, cfg)?;
                rel.push(r);
                abs.push(a);
            }
            rel.sort_by(f64::total_cmp);
            abs.sort_by(f64::total_cmp);
            Ok(PercentileRow {
                epsilon: eps,
                rel_p05: percentile(&rel, 0.05),
                rel_med: percentile(&rel, 0.5),
                rel_p95: percentile(&rel, 0.95),
                abs_p05: percentile(&abs, 0.05),
                abs_med: percentile(&abs, 0.5),
                abs_p95: percentile(&abs, 0.95),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SineConfig {
    pub k_max: u32,
    pub precision: Precision,
    /// Bits of the reference enclosure.
    pub guard: u32,
}

impl Default for SineConfig {
    fn default() -> Self {
        SineConfig {
            k_max: 100,
            precision: Precision::DOUBLE,
            guard: 512,
        }
    }
}

/// Enclosure of `π 2^k + 1` with about `bits` bits after the point.
fn sine_input(k: u32, bits: u32) -> ExactReal {
    let one = Interval::point(1.into(), 0);
    ExactReal::Enclosure(pi(bits + k).mul_pow2(i64::from(k)).add(&one))
}

/// The sine of `X_k = π 2^k + 1` (whose exact sine is `sin 1`) computed at
/// working precision after rounding `X_k`, for `k = 1..=k_max`.
pub fn sine_experiment(cfg: &SineConfig) -> Result<Vec<LopRecord>, HarnessError> {
    if cfg.k_max == 0 {
        return Err(HarnessError::InvalidConfig("k_max must be at least 1"));
    }
    if cfg.guard < cfg.precision.bits() + 64 {
        return Err(HarnessError::InvalidConfig("guard precision too small"));
    }
    let p = cfg.precision;
    let u = p.unit_roundoff_f64();
    (1..=cfg.k_max)
        .into_par_iter()
        .map(|k| {
            let x = round_with_retry(p, |bits| Ok(sine_input(k, bits + 8)))?;
            let s = sine_working(&x, p)?;
            let exact_x = sine_input(k, cfg.guard + 16);
            let reference = high_precision_sin(&exact_x, cfg.guard)?.midpoint();
            let s_exact = s.to_exact();
            let zero = BigRational::default();
            let rel = if s.is_zero() || (s_exact > zero) != (reference > zero) {
                f64::INFINITY
            } else {
                log_ratio(&s_exact, &reference) / u
            };
            let abs = round(&ExactReal::Rational(s_exact - &reference), Precision::DOUBLE)?.to_f64().abs() / u;
            let xf = exact_x.to_f64();
            Ok(LopRecord {
                input_id: k as usize,
                parameter: f64::from(k),
                precision: p,
                rel_lop: rel,
                abs_lop: abs,
                kappa_tilde: 1.0 + (xf / 1f64.tan()).abs(),
                in_scope: true,
            })
        })
        .collect()
}
