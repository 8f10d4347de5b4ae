mod common;

use approx::assert_abs_diff_eq;
use ndarray::{array, Array1};
use proptest::prelude::*;
use regbench::penalty::{default_ratio, DEFAULT_GRID_COUNT};
use regbench::{fit_at, kkt_violation, lambda_grid, lambda_max, objective_value, soft_threshold, CdOptions, Penalty};

#[test]
fn soft_threshold_examples() {
    assert_eq!(soft_threshold(3.0, 1.0), 2.0);
    assert_eq!(soft_threshold(-0.5, 1.0), 0.0);
    assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
}

#[test]
fn objective_examples() {
    let x = array![[1.0]];
    let y = array![1.0];
    let v = objective_value(x.view(), y.view(), array![0.0].view(), &Penalty::lasso(5.0).unwrap()).unwrap();
    assert_eq!(v, 1.0);
    let spec = Penalty::new(2.0, 3.0).unwrap();
    assert_eq!(
        objective_value(x.view(), y.view(), array![1.0].view(), &spec).unwrap(),
        5.0
    );
    let (x, y) = common::instance(8, 4, 3);
    let v = objective_value(x.view(), y.view(), Array1::zeros(4).view(), &spec).unwrap();
    assert_abs_diff_eq!(v, y.dot(&y), epsilon = 1e-12);
    assert!(objective_value(x.view(), y.view(), Array1::zeros(3).view(), &spec).is_err());
}

#[test]
fn kkt_examples() {
    // orthonormal design, Xᵀy = (3, 1): lasso at λ₁ = 2 is (2, 0)
    let x = array![[0.5, 0.5], [0.5, -0.5], [-0.5, 0.5], [-0.5, -0.5]];
    let y = x.column(0).to_owned() * 3.0 + x.column(1).to_owned();
    let rep = kkt_violation(
        x.view(),
        y.view(),
        array![2.0, 0.0].view(),
        &Penalty::lasso(2.0).unwrap(),
    )
    .unwrap();
    assert!(rep.max_violation < 1e-12);
    assert_eq!(rep.active_count, 1);

    let lmax = lambda_max(x.view(), y.view());
    let rep = kkt_violation(
        x.view(),
        y.view(),
        array![0.0, 0.0].view(),
        &Penalty::lasso(lmax).unwrap(),
    )
    .unwrap();
    assert_eq!(rep.max_violation, 0.0);

    let rep = kkt_violation(
        x.view(),
        y.view(),
        array![0.0, 0.0].view(),
        &Penalty::lasso(0.0).unwrap(),
    )
    .unwrap();
    assert_abs_diff_eq!(rep.max_violation, 6.0, epsilon = 1e-12);
}

#[test]
fn lambda_max_examples() {
    assert_eq!(lambda_max(array![[1.0], [0.0]].view(), array![2.0, 0.0].view()), 4.0);
    assert_eq!(lambda_max(array![[1.0], [-1.0]].view(), array![0.0, 0.0].view()), 0.0);
    let (x, y) = common::instance(20, 50, 11);
    let lmax = lambda_max(x.view(), y.view());
    let fit = fit_at(
        x.view(),
        y.view(),
        &Penalty::lasso(lmax).unwrap(),
        None,
        &CdOptions::default(),
    )
    .unwrap();
    assert!(fit.active_set.is_empty());
}

#[test]
fn grid_examples() {
    let g = lambda_grid(100.0, 3, 0.01).unwrap();
    for (a, b) in g.iter().zip([100.0, 10.0, 1.0]) {
        assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
    }
    assert_eq!(lambda_grid(4.0, 2, 0.5).unwrap(), vec![4.0, 2.0]);
    assert!(lambda_grid(-1.0, 3, 0.5).is_err());
    let (x, y) = common::instance(20, 50, 12);
    let g = lambda_grid(
        lambda_max(x.view(), y.view()),
        DEFAULT_GRID_COUNT,
        default_ratio::<f64>(20, 50),
    )
    .unwrap();
    assert_eq!(g.len(), 100);
    assert_abs_diff_eq!(g[99] / g[0], 0.01, epsilon = 1e-12);
    assert!(g.windows(2).all(|w| w[1] < w[0]));
    let fit = fit_at(
        x.view(),
        y.view(),
        &Penalty::lasso(g[0]).unwrap(),
        None,
        &CdOptions::default(),
    )
    .unwrap();
    assert!(fit.active_set.is_empty());
    assert_eq!(default_ratio::<f64>(50, 20), 1e-4);
}

proptest! {
    #[test]
    fn soft_threshold_is_odd_and_nonexpansive(z in -50.0..50.0f64, w in -50.0..50.0f64, g in 0.0..10.0f64) {
        prop_assert_eq!(soft_threshold(-z, g), -soft_threshold(z, g));
        prop_assert!((soft_threshold(z, g) - soft_threshold(w, g)).abs() <= (z - w).abs() + 1e-14 * (1.0 + z.abs() + w.abs()));
        prop_assert_eq!(soft_threshold(z, 0.0), z);
    }

    #[test]
    fn objective_is_convex(seed in 0u64..10_000, t in 0.0..1.0f64, l1 in 0.0..5.0f64, l2 in 0.0..5.0f64) {
        let (x, y) = common::instance(10, 6, seed);
        let b1 = common::gaussian_vec(6, seed + 1);
        let b2 = common::gaussian_vec(6, seed + 2);
        let spec = Penalty::new(l1, l2).unwrap();
        let f = |b: &Array1<f64>| objective_value(x.view(), y.view(), b.view(), &spec).unwrap();
        let mix = &b1 * t + &b2 * (1.0 - t);
        prop_assert!(f(&mix) <= t * f(&b1) + (1.0 - t) * f(&b2) + 1e-9);
    }

    #[test]
    fn lasso_is_homogeneous(seed in 0u64..10_000, c in 0.2..5.0f64) {
        let (x, y) = common::instance(12, 5, seed);
        let l1 = 0.3 * lambda_max(x.view(), y.view());
        let base = common::proximal_gradient(x.view(), y.view(), l1, 0.0, 1e-12);
        let yc = &y * c;
        let fit = fit_at(x.view(), yc.view(), &Penalty::lasso(l1 * c).unwrap(), None, &CdOptions::default()).unwrap();
        prop_assert!(common::max_abs_diff(fit.beta.view(), (base * c).view()) < 1e-6 * c.max(1.0));
    }
}
