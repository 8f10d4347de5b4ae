//! Reference oracles used by the acceptance checks. Each is written for
//! clarity over speed and shares no numerical code with the library under test.

use ndarray::{s, Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use regbench::SeededRng;
use statrs::function::gamma::ln_gamma;

pub fn gaussian(rows: usize, cols: usize, rng: &mut SeededRng) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || StandardNormal.sample(rng.as_rng()))
}

pub fn gaussian_vec(len: usize, rng: &mut SeededRng) -> Array1<f64> {
    Array1::from_shape_simple_fn(len, || StandardNormal.sample(rng.as_rng()))
}

pub fn center(mut x: Array2<f64>) -> Array2<f64> {
    let means = x.mean_axis(Axis(0)).expect("rows");
    x -= &means;
    x
}

pub fn center_vec(y: Array1<f64>) -> Array1<f64> {
    let m = y.mean().expect("values");
    y - m
}

/// Centered columns scaled to unit Euclidean norm.
pub fn unit_norm(x: Array2<f64>) -> Array2<f64> {
    let mut x = center(x);
    for mut c in x.columns_mut() {
        let norm = c.dot(&c).sqrt();
        c /= norm;
    }
    x
}

/// Centered design with a sparse signal plus unit noise in a centered response.
pub fn instance(n: usize, p: usize, rng: &mut SeededRng) -> (Array2<f64>, Array1<f64>) {
    let x = center(gaussian(n, p, rng));
    let mut beta = Array1::zeros(p);
    let s = p.min(5);
    for k in 0..s {
        beta[k * p / s] = if k % 2 == 0 { 2.0 } else { -1.5 };
    }
    let y = center_vec(x.dot(&beta) + gaussian_vec(n, rng));
    (x, y)
}

pub fn max_abs_diff(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Gauss–Jordan elimination with partial pivoting.
pub fn solve_dense(a: &Array2<f64>, b: &Array1<f64>) -> Array1<f64> {
    let m = a.nrows();
    let mut aug = Array2::<f64>::zeros((m, m + 1));
    aug.slice_mut(s![.., ..m]).assign(a);
    aug.column_mut(m).assign(b);
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&i, &j| aug[[i, col]].abs().total_cmp(&aug[[j, col]].abs()))
            .expect("rows");
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
                for k in 0..=m {
                    aug[[i, k]] -= f * aug[[col, k]];
                }
            }
        }
    }
    aug.column(m).to_owned()
}

pub fn ols(x: ArrayView2<f64>, y: ArrayView1<f64>) -> Array1<f64> {
    solve_dense(&x.t().dot(&x), &x.t().dot(&y))
}

/// `(XᵀX + λI)⁻¹Xᵀy`.
pub fn ridge(x: ArrayView2<f64>, y: ArrayView1<f64>, lambda: f64) -> Array1<f64> {
    let mut g = x.t().dot(&x);
    g.diag_mut().mapv_inplace(|d| d + lambda);
    solve_dense(&g, &x.t().dot(&y))
}

/// Two-sided Student-t p-value from composite Simpson integration of the density.
pub fn t_pvalue_quadrature(t: f64, df: f64) -> f64 {
    let ln_c = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    let dens = |u: f64| (ln_c - (df + 1.0) / 2.0 * (1.0 + u * u / df).ln()).exp();
    let m = 200_000;
    let h = t.abs() / m as f64;
    let mut acc = dens(0.0) + dens(t.abs());
    for i in 1..m {
        acc += dens(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    1.0 - 2.0 * acc * h / 3.0
}

/// Empirical quantile of `range(z₁..z_k) / sqrt(χ²_df/df)` from `samples` draws.
pub fn studentized_range_monte_carlo(prob: f64, k: usize, df: f64, samples: usize, seed: u64) -> f64 {
    let mut rng = SeededRng::new(seed);
    let chi = ChiSquared::new(df).expect("positive df");
    let mut draws: Vec<f64> = (0..samples)
        .map(|_| {
            let r = rng.as_rng();
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for _ in 0..k {
                let z: f64 = StandardNormal.sample(r);
                lo = lo.min(z);
                hi = hi.max(z);
            }
            (hi - lo) / (chi.sample(r) / df).sqrt()
        })
        .collect();
    let idx = ((prob * samples as f64).ceil() as usize).clamp(1, samples) - 1;
    let (_, q, _) = draws.select_nth_unstable_by(idx, f64::total_cmp);
    *q
}
