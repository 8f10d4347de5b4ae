#![allow(dead_code)]

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand_distr::{Distribution, StandardNormal};
use regbench::SeededRng;

pub fn gaussian(rows: usize, cols: usize, seed: u64) -> Array2<f64> {
    let mut rng = SeededRng::new(seed);
    Array2::from_shape_simple_fn((rows, cols), || StandardNormal.sample(rng.as_rng()))
}

pub fn gaussian_vec(len: usize, seed: u64) -> Array1<f64> {
    let mut rng = SeededRng::new(seed);
    Array1::from_shape_simple_fn(len, || StandardNormal.sample(rng.as_rng()))
}

pub fn center(mut x: Array2<f64>) -> Array2<f64> {
    let means = x.mean_axis(Axis(0)).unwrap();
    x -= &means;
    x
}

pub fn center_vec(y: Array1<f64>) -> Array1<f64> {
    let m = y.mean().unwrap();
    y - m
}

pub fn unit_norm(x: Array2<f64>) -> Array2<f64> {
    let mut x = center(x);
    for mut c in x.columns_mut() {
        let norm = c.dot(&c).sqrt();
        c /= norm;
    }
    x
}

/// Centered design and response with a sparse truth plus noise.
pub fn instance(n: usize, p: usize, seed: u64) -> (Array2<f64>, Array1<f64>) {
    let x = center(gaussian(n, p, seed));
    let mut beta = Array1::zeros(p);
    for j in 0..p.min(5) {
        beta[j * p / p.min(5)] = if j % 2 == 0 { 2.0 } else { -1.5 };
    }
    let y = center_vec(x.dot(&beta) + gaussian_vec(n, seed ^ 0xABCD));
    (x, y)
}

pub fn max_abs_diff(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Accelerated proximal gradient on `‖y − Xβ‖² + λ₂‖β‖² + λ₁‖β‖₁`, run until
/// successive iterates differ by less than `tol`.
pub fn proximal_gradient(x: ArrayView2<f64>, y: ArrayView1<f64>, l1: f64, l2: f64, tol: f64) -> Array1<f64> {
    let p = x.ncols();
    // Lipschitz constant of the smooth part: 2·σ_max² + 2λ₂, by power iteration
    let mut v = Array1::from_elem(p, 1.0);
    let mut sigma = 0.0;
    for _ in 0..500 {
        let w = x.t().dot(&x.dot(&v));
        sigma = w.dot(&w).sqrt();
        v = w / sigma;
    }
    let lip = 2.0 * sigma * 1.0001 + 2.0 * l2;
    let step = 1.0 / lip;
    let mut beta = Array1::<f64>::zeros(p);
    let mut z = beta.clone();
    let mut t = 1.0f64;
    for _ in 0..2_000_000 {
        let grad = x.t().dot(&(x.dot(&z) - y)) * 2.0 + &z * (2.0 * l2);
        let u = &z - &(grad * step);
        let next = u.mapv(|v| v.signum() * (v.abs() - l1 * step).max(0.0));
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let change = max_abs_diff(next.view(), beta.view());
        z = &next + &((&next - &beta) * ((t - 1.0) / t_next));
        beta = next;
        t = t_next;
        if change < tol {
            break;
        }
    }
    beta
}

/// Gauss–Jordan elimination with partial pivoting.
pub fn solve_dense(a: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let m = a.nrows();
    let mut aug = Array2::<f64>::zeros((m, m + 1));
    aug.slice_mut(ndarray::s![.., ..m]).assign(a);
    aug.column_mut(m).assign(b);
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&i, &j| aug[[i, col]].abs().total_cmp(&aug[[j, col]].abs()))
            .unwrap();
        for k in 0..=m {
            aug.swap([col, k], [piv, k]);
        }
        let d = aug[[col, col]];
        for k in 0..=m {
            aug[[col, k]] /= d;
        }
        for i in 0..m {
            if i != col {
                let f = aug[[i, col]];
                if f != 0.0 {
                    for k in 0..=m {
                        aug[[i, k]] -= f * aug[[col, k]];
                    }
                }
            }
        }
    }
    aug.column(m).to_owned()
}

pub fn ols(x: ArrayView2<f64>, y: ArrayView1<f64>) -> Array1<f64> {
    solve_dense(&x.t().dot(&x), &x.t().dot(&y))
}

/// Two-sided Student-t p-value by composite Simpson integration of the
/// density over `[0, |t|]`, normalized by the integral over a wide range.
pub fn t_pvalue_quadrature(t: f64, df: f64) -> f64 {
    let ln_c = statrs::function::gamma::ln_gamma((df + 1.0) / 2.0)
        - statrs::function::gamma::ln_gamma(df / 2.0)
        - 0.5 * (df * std::f64::consts::PI).ln();
    let dens = |u: f64| (ln_c - (df + 1.0) / 2.0 * (1.0 + u * u / df).ln()).exp();
    let simpson = |a: f64, b: f64, m: usize| {
        let h = (b - a) / m as f64;
        let mut s = dens(a) + dens(b);
        for i in 1..m {
            s += dens(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    1.0 - 2.0 * simpson(0.0, t.abs(), 200_000)
}

/// Empirical `prob`-quantile of the studentized range of `k` standard normals
/// over an independent `sqrt(χ²_df / df)`.
pub fn studentized_range_monte_carlo(prob: f64, k: usize, df: f64, samples: usize, seed: u64) -> f64 {
    let mut rng = SeededRng::new(seed);
    let chi = rand_distr::ChiSquared::new(df).unwrap();
    let mut draws: Vec<f64> = (0..samples)
        .map(|_| {
            let r = rng.as_rng();
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for _ in 0..k {
                let z: f64 = StandardNormal.sample(r);
                lo = lo.min(z);
                hi = hi.max(z);
            }
            let s = (chi.sample(r) / df).sqrt();
            (hi - lo) / s
        })
        .collect();
    let idx = ((prob * samples as f64).ceil() as usize).clamp(1, samples) - 1;
    let (_, q, _) = draws.select_nth_unstable_by(idx, f64::total_cmp);
    *q
}
