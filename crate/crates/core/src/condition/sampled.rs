//! Black-box estimate of the condition number from finite perturbations.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{CatalogFunction, ConditionError, ConditionReport, Method};
use crate::relmetric::rel_dist_f64;
use crate::rng::stream_rng;

#[derive(Clone, Debug)]
pub struct SampleOptions {
    /// Perturbation radii, largest first.
    pub radii: Vec<f64>,
    /// Random directions tried per radius.
    pub directions: usize,
    /// Power-iteration steps started from the best random direction.
    pub ascent_steps: usize,
    pub seed: u64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions {
            radii: vec![1e-5, 1e-6, 1e-7],
            directions: 64,
            ascent_steps: 30,
            seed: 0,
        }
    }
}

/// Relative agreement required between the two smallest radii.
const AGREEMENT: f64 = 0.01;

struct Probe<'a, F> {
    f: &'a F,
    x: &'a [f64],
    fx: Vec<f64>,
    support: Vec<usize>,
}

impl<F> Probe<'_, F>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, ConditionError>,
{
    /// Point `x ⊛ exp(r w)` on the support.
    fn point(&self, w: &[f64], r: f64) -> Vec<f64> {
        let mut y = self.x.to_vec();
        for (k, &j) in self.support.iter().enumerate() {
            y[j] = self.x[j] * (r * w[k]).exp();
        }
        y
    }

    /// Output distance over input distance along `w`.
    fn ratio(&self, w: &[f64], r: f64) -> Result<f64, ConditionError> {
        let y = self.point(w, r);
        let din = rel_dist_f64(self.x, &y)?.value();
        if din == 0.0 {
            return Ok(0.0);
        }
        let fy = (self.f)(&y).map_err(|e| match e {
            ConditionError::OutsideDomain => ConditionError::DomainBoundary,
            e => e,
        })?;
        Ok(rel_dist_f64(&self.fx, &fy)?.value() / din)
    }

    /// Squared output distance for an unnormalized direction, scaled so it
    /// is close to the quadratic form `‖R w‖²`.
    fn energy(&self, w: &[f64], r: f64) -> Result<f64, ConditionError> {
        let y = self.point(w, r);
        let fy = (self.f)(&y).map_err(|_| ConditionError::DomainBoundary)?;
        let d = rel_dist_f64(&self.fx, &fy)?.value() / r;
        Ok(d * d)
    }

    fn estimate(&self, r: f64, opts: &SampleOptions, level: u64) -> Result<f64, ConditionError> {
        let dim = self.support.len();
        let mut best = 0.0f64;
        let mut best_dir = vec![0.0; dim];
        best_dir[0] = 1.0;
        for i in 0..opts.directions {
            let mut rng = stream_rng(opts.seed, crate::rng::stream_id(level, i as u64));
            let mut w: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            normalize(&mut w);
            let q = self.ratio(&w, r)?;
            if q.is_infinite() {
                return Ok(q);
            }
            if q > best {
                best = q;
                best_dir = w;
            }
        }
        // power iteration on the quadratic form through central differences
        let mut w = best_dir;
        for _ in 0..opts.ascent_steps {
            let mut grad = vec![0.0; dim];
            for j in 0..dim {
                let mut up = w.clone();
                let mut down = w.clone();
                up[j] += 0.5;
                down[j] -= 0.5;
                let e_up = self.energy(&up, r)?;
                let e_down = self.energy(&down, r)?;
                if e_up.is_infinite() || e_down.is_infinite() {
                    return Ok(f64::INFINITY);
                }
                grad[j] = e_up - e_down;
            }
            if grad.iter().all(|g| *g == 0.0) {
                break;
            }
            normalize(&mut grad);
            let q = self.ratio(&grad, r)?;
            if q.is_infinite() {
                return Ok(q);
            }
            let moved = grad.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            w = grad;
            best = best.max(q);
            if moved < 1e-9 {
                break;
            }
        }
        Ok(best)
    }
}

fn normalize(w: &mut [f64]) {
    let n = w.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n > 0.0 {
        w.iter_mut().for_each(|v| *v /= n);
    } else if let Some(first) = w.first_mut() {
        *first = 1.0;
    }
}

/// Estimates `κ(f, x)` from the supremum of distance ratios over shrinking
/// relative spheres. The result is flagged as converged when the two
/// smallest radii agree to 1%, and as divergent when a perturbation changes
/// an output's sign or the estimate keeps growing.
pub fn kappa_sampled<F>(f: F, x: &[f64], opts: &SampleOptions) -> Result<ConditionReport, ConditionError>
where
    F: Fn(&[f64]) -> Result<Vec<f64>, ConditionError>,
{
    if opts.radii.is_empty() || opts.radii.iter().any(|r| !(*r > 0.0) || *r >= 1.0) {
        return Err(ConditionError::InvalidParameter("radii must lie in (0, 1)"));
    }
    let fx = f(x)?;
    let support: Vec<usize> = (0..x.len()).filter(|&i| x[i] != 0.0).collect();
    if support.is_empty() {
        return ConditionReport::new(
            0.0,
            Method::Sampled {
                converged: true,
                divergent: false,
            },
            x,
        );
    }
    let probe = Probe { f: &f, x, fx, support };
    let mut estimates = Vec::with_capacity(opts.radii.len());
    for (level, &r) in opts.radii.iter().enumerate() {
        let e = probe.estimate(r, opts, level as u64)?;
        estimates.push(e);
        if e.is_infinite() {
            break;
        }
    }
    let last = *estimates.last().expect("nonempty");
    let (kappa, converged, divergent) = if last.is_infinite() {
        (f64::INFINITY, false, true)
    } else if estimates.len() >= 2 {
        let prev = estimates[estimates.len() - 2];
        let converged = (last - prev).abs() <= AGREEMENT * last.max(f64::MIN_POSITIVE);
        let growing = estimates.windows(2).all(|w| w[1] >= 2.0 * w[0]);
        (last, converged, growing && !converged)
    } else {
        (last, false, false)
    };
    ConditionReport::new(kappa, Method::Sampled { converged, divergent }, x)
}

/// [`kappa_sampled`] for a catalog function.
pub fn kappa_sampled_catalog(
    f: &CatalogFunction,
    x: &[f64],
    opts: &SampleOptions,
) -> Result<ConditionReport, ConditionError> {
    kappa_sampled(|y: &[f64]| f.eval_f64(y), x, opts)
}
