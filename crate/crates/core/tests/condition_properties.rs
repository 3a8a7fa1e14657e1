mod common;

use common::{catalog_cases, smooth_point, spectral_norm_oracle};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stabilis::condition::{
    composition_upper_bound, kappa_at, kappa_closed_form, kappa_from_jacobian_f64, kappa_sampled,
    kappa_sampled_catalog, kappa_via_jacobian, stacking_bounds, CatalogFunction, Method, SampleOptions,
};
use stabilis::linalg::Matrix;
use stabilis::relmetric::RelPoint;

fn pt(x: &[f64]) -> RelPoint {
    RelPoint::from_f64s(x).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

#[test]
fn jacobian_path_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for f in catalog_cases() {
        for _ in 0..25 {
            let x = smooth_point(&f, &mut rng);
            let closed = kappa_closed_form(&f, &pt(&x)).unwrap().kappa;
            let jac = kappa_via_jacobian(&f, &pt(&x)).unwrap().kappa;
            assert!(close(closed, jac, 1e-12), "{} at {x:?}: {closed} vs {jac}", f.id());
        }
    }
}

/// Relative Jacobian by central differences of the double evaluator.
fn finite_difference_kappa(f: &CatalogFunction, x: &[f64]) -> f64 {
    let fx = f.eval_f64(x).unwrap();
    let mut rows = vec![vec![0.0; x.len()]; fx.len()];
    for j in 0..x.len() {
        let h = 1e-6 * x[j].abs();
        let (mut up, mut down) = (x.to_vec(), x.to_vec());
        up[j] += h;
        down[j] -= h;
        let (fu, fd) = (f.eval_f64(&up).unwrap(), f.eval_f64(&down).unwrap());
        for i in 0..fx.len() {
            rows[i][j] = (fu[i] - fd[i]) / (up[j] - down[j]) * x[j] / fx[i];
        }
    }
    spectral_norm_oracle(&rows)
}

#[test]
fn jacobians_agree_with_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for f in catalog_cases() {
        for _ in 0..10 {
            let x = smooth_point(&f, &mut rng);
            let want = finite_difference_kappa(&f, &x);
            let got = kappa_at(&f, &x).unwrap();
            assert!(close(got, want, 1e-5), "{} at {x:?}: {got} vs {want}", f.id());
        }
    }
}

#[test]
fn spectral_norm_matches_eigenvalue_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..200 {
        let (r, c) = (rng.random_range(1..=6), rng.random_range(1..=6));
        let rows: Vec<Vec<f64>> = (0..r).map(|_| (0..c).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let got = Matrix::from_rows(&rows).unwrap().spectral_norm().unwrap();
        assert!(close(got, spectral_norm_oracle(&rows), 1e-12));
    }
    // 5x5 with a known spectrum: diag(5,4,3,2,1) rotated by a Householder reflection
    let v = [1.0, 2.0, -1.0, 0.5, 3.0];
    let vv: f64 = v.iter().map(|a| a * a).sum();
    let rows: Vec<Vec<f64>> = (0..5)
        .map(|i| (0..5).map(|j| (if i == j { 1.0 } else { 0.0 } - 2.0 * v[i] * v[j] / vv) * (5 - j) as f64).collect())
        .collect();
    assert!(close(Matrix::from_rows(&rows).unwrap().spectral_norm().unwrap(), 5.0, 1e-12));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn sum_kappa_is_permutation_invariant(x in prop::collection::vec(-10.0f64..10.0, 1..10), seed in any::<u64>()) {
        let mut y = x.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..y.len()).rev() {
            y.swap(i, rng.random_range(0..=i));
        }
        let (a, b) = (kappa_at(&CatalogFunction::Sum, &x).unwrap(), kappa_at(&CatalogFunction::Sum, &y).unwrap());
        prop_assert!(a == b || close(a, b, 1e-15));
    }

    #[test]
    fn product_kappa_depends_only_on_zeros(x in prop::collection::vec(prop_oneof![-5.0f64..5.0, Just(0.0)], 1..10)) {
        let k = kappa_at(&CatalogFunction::Product, &x).unwrap();
        if x.iter().any(|v| *v == 0.0) {
            prop_assert_eq!(k, 0.0);
        } else {
            prop_assert_eq!(k, (x.len() as f64).sqrt());
        }
    }

    #[test]
    fn kappa_tilde_is_one_plus_kappa(x in prop::collection::vec(-5.0f64..5.0, 1..6)) {
        let r = kappa_closed_form(&CatalogFunction::Sum, &pt(&x)).unwrap();
        prop_assert!(r.kappa_tilde >= 1.0);
        if r.kappa.is_infinite() {
            prop_assert!(r.kappa_tilde.is_infinite());
        } else {
            prop_assert_eq!(r.kappa_tilde, 1.0 + r.kappa);
        }
    }
}

#[test]
fn closed_form_examples() {
    let identity = CatalogFunction::LinearMap(Matrix::from_rows(&[vec![1.0]]).unwrap());
    assert_eq!(kappa_at(&identity, &[4.2]).unwrap(), 1.0);
    assert!(close(kappa_at(&CatalogFunction::Sum, &[1.0, 1.0]).unwrap(), 0.5f64.sqrt(), 1e-15));
    assert_eq!(kappa_at(&CatalogFunction::Power(2), &[3.0]).unwrap(), 2.0);
    assert!(close(kappa_at(&CatalogFunction::Product, &[1.0, 2.0, 3.0]).unwrap(), 3f64.sqrt(), 1e-15));
    assert!(kappa_at(&CatalogFunction::Sum, &[1.0, -1.0]).unwrap().is_infinite());
    assert!(kappa_via_jacobian(&CatalogFunction::Sum, &pt(&[1.0, -1.0])).unwrap().kappa.is_infinite());
    assert_eq!(kappa_at(&CatalogFunction::Copy, &[2.0, -1.0]).unwrap(), 2f64.sqrt());
    assert_eq!(kappa_at(&CatalogFunction::Sqrt, &[2.0]).unwrap(), 0.5);
    let s = kappa_at(&CatalogFunction::Sin, &[1.0]).unwrap();
    assert!(close(s, 1f64.cos() / 1f64.sin(), 1e-15));
    assert!(kappa_at(&CatalogFunction::Norm2, &[3.0, -4.0, 1.0]).unwrap() <= 2.0);
    assert_eq!(kappa_at(&CatalogFunction::Sum, &[0.0, 0.0]).unwrap(), 0.0);
}

#[test]
fn sampled_estimator_examples() {
    let opts = SampleOptions {
        radii: vec![1e-3, 1e-4, 1e-5],
        directions: 200,
        ..SampleOptions::default()
    };
    let r = kappa_sampled_catalog(&CatalogFunction::Product, &[1.0, 2.0, 3.0], &opts).unwrap();
    assert!(close(r.kappa, 3f64.sqrt(), 0.02), "{}", r.kappa);

    let constant = kappa_sampled(|_: &[f64]| Ok(vec![5.0]), &[1.0, 2.0], &SampleOptions::default()).unwrap();
    assert_eq!(constant.kappa, 0.0);

    let near = kappa_sampled_catalog(&CatalogFunction::Sum, &[1.0, -1.0 + 1e-9], &SampleOptions::default()).unwrap();
    assert!(near.kappa > 1e8, "{}", near.kappa);

    let at_pole = kappa_sampled_catalog(&CatalogFunction::Sum, &[1.0, -1.0], &SampleOptions::default()).unwrap();
    assert!(at_pole.kappa.is_infinite());
    assert!(matches!(at_pole.method, Method::Sampled { divergent: true, .. }));
}

#[test]
fn sampled_estimator_is_seed_deterministic() {
    let opts = SampleOptions { seed: 77, ..SampleOptions::default() };
    let x = [0.7, -1.3, 2.2, 0.4];
    let a = kappa_sampled_catalog(&CatalogFunction::Sum, &x, &opts).unwrap().kappa;
    let b = kappa_sampled_catalog(&CatalogFunction::Sum, &x, &opts).unwrap().kappa;
    assert_eq!(a.to_bits(), b.to_bits());
}

#[test]
fn composition_bound_dominates() {
    use CatalogFunction as F;
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let pairs = [
        (F::Sum, F::Hadamard),
        (F::Sqrt, F::SquaredNorm),
        (F::InnerProduct, F::Copy),
        (F::StrassenG, F::StrassenH),
        (F::Sum, F::Copy),
        (F::Product, F::Hadamard),
    ];
    for (g, h) in pairs {
        let f = F::composite(g.clone(), h.clone());
        for _ in 0..50 {
            let x = smooth_point(&f, &mut rng);
            let hx = h.eval_f64(&x).unwrap();
            let bound = composition_upper_bound(1.0 + kappa_at(&g, &hx).unwrap(), 1.0 + kappa_at(&h, &x).unwrap()).unwrap();
            let kt = 1.0 + kappa_at(&f, &x).unwrap();
            assert!(bound >= kt * (1.0 - 1e-12), "{}: {bound} < {kt}", f.id());
        }
    }
    assert!(composition_upper_bound(0.5, 2.0).is_err());
}

#[test]
fn stacking_brackets_matmul_entries() {
    let entries: Vec<CatalogFunction> = (0..2)
        .flat_map(|row| (0..2).map(move |col| CatalogFunction::MatmulEntry { row, col }))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for i in 0..200 {
        let x: Vec<f64> = if i < 8 {
            let eps = 10f64.powi(-(i as i32) - 1);
            vec![1.0, eps, eps, 1.0, 1.0, eps, eps, 1.0]
        } else {
            (0..8).map(|_| rng.random_range(-2.0..2.0)).collect()
        };
        let per: Vec<f64> = entries.iter().map(|e| kappa_at(e, &x).unwrap()).collect();
        let (lo, hi) = stacking_bounds(&per).unwrap();
        let stacked = kappa_via_jacobian(&CatalogFunction::Matmul2x2, &pt(&x)).unwrap().kappa;
        if stacked.is_finite() {
            assert!(lo <= stacked * (1.0 + 1e-12) && stacked <= hi * (1.0 + 1e-12), "{lo} {stacked} {hi}");
        }
    }
    assert_eq!(stacking_bounds(&[2.5]).unwrap(), (2.5, 2.5));
    assert!(stacking_bounds(&[-1.0]).is_err());
}

#[test]
fn jacobian_formula_drops_vanishing_inputs() {
    // f(x, y) = x, evaluated at y = 0: only the x column contributes
    let jac = Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
    assert_eq!(kappa_from_jacobian_f64(&[3.0, 0.0], &[3.0], &jac).unwrap(), 1.0);
}
