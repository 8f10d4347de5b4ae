//! Penalized least-squares objective, optimality residuals and penalty grids.
//!
//! All penalties use the unnormalized convention
//! `‖y − Xβ‖² + λ₂‖β‖² + λ₁‖β‖₁`. The lasso null threshold is therefore
//! `λ_max = 2·max_j |x_jᵀy|`, and the relaxed-lasso scale (mean squared
//! error instead of residual sum of squares) maps onto it by `λ = n·λ_rel`.

use ndarray::{Array1, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Tuning parameters identifying one fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltySpec<T> {
    pub lambda1: T,
    pub lambda2: T,
    /// Relaxation parameter in `[0, 1]`; 1 for every estimator except the relaxed lasso.
    pub phi: T,
    /// Multiply the elastic-net solution by `1 + λ₂/n`.
    pub rescale_naive: bool,
}

impl<T: Scalar> PenaltySpec<T> {
    pub fn new(lambda1: T, lambda2: T) -> Result<Self> {
        if !(lambda1 >= T::zero() && lambda2 >= T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "penalties must be nonnegative (lambda1={lambda1}, lambda2={lambda2})"
            )));
        }
        Ok(Self {
            lambda1,
            lambda2,
            phi: T::one(),
            rescale_naive: false,
        })
    }

    pub fn lasso(lambda: T) -> Result<Self> {
        Self::new(lambda, T::zero())
    }

    pub fn ridge(lambda: T) -> Result<Self> {
        Self::new(T::zero(), lambda)
    }

    /// Splits `lambda` into `λ₁ = α·λ`, `λ₂ = (1 − α)·λ`.
    pub fn mixed(lambda: T, alpha: T) -> Result<Self> {
        if !(alpha >= T::zero() && alpha <= T::one()) {
            return Err(Error::InvalidArgument(format!("alpha {alpha} not in [0, 1]")));
        }
        Self::new(alpha * lambda, (T::one() - alpha) * lambda)
    }

    pub fn with_phi(mut self, phi: T) -> Result<Self> {
        if !(phi >= T::zero() && phi <= T::one()) {
            return Err(Error::InvalidArgument(format!("phi {phi} not in [0, 1]")));
        }
        self.phi = phi;
        Ok(self)
    }

    pub fn with_rescale(mut self, on: bool) -> Self {
        self.rescale_naive = on;
        self
    }

    /// Combined penalty `λ₁ + λ₂`.
    pub fn total(&self) -> T {
        self.lambda1 + self.lambda2
    }
}

/// `sign(z)·max(|z| − γ, 0)`.
#[inline]
pub fn soft_threshold<T: Scalar>(z: T, gamma: T) -> T {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        T::zero()
    }
}

fn check_dims<T>(x: &ArrayView2<'_, T>, y: &ArrayView1<'_, T>, beta: &ArrayView1<'_, T>) -> Result<()> {
    if x.nrows() != y.len() || x.ncols() != beta.len() {
        return Err(Error::DimensionMismatch(format!(
            "X is {}x{}, y has {}, beta has {}",
            x.nrows(),
            x.ncols(),
            y.len(),
            beta.len()
        )));
    }
    Ok(())
}

pub fn objective_value<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    beta: ArrayView1<'_, T>,
    spec: &PenaltySpec<T>,
) -> Result<T> {
    check_dims(&x, &y, &beta)?;
    let r = &y - &x.dot(&beta);
    let rss = r.dot(&r);
    let l2 = beta.dot(&beta);
    let l1: T = beta.iter().map(|b| b.abs()).sum();
    Ok(rss + spec.lambda2 * l2 + spec.lambda1 * l1)
}

/// Subgradient stationarity residuals of the penalized objective.
#[derive(Debug, Clone, PartialEq)]
pub struct KktReport<T> {
    pub max_violation: T,
    pub per_coordinate: Array1<T>,
    pub active_count: usize,
}

/// Residuals from an explicit residual vector `r = y − Xβ`.
pub(crate) fn kkt_from_residual<T: Scalar>(
    x: ArrayView2<'_, T>,
    r: ArrayView1<'_, T>,
    beta: ArrayView1<'_, T>,
    lambda1: T,
    lambda2: T,
) -> KktReport<T> {
    let two = T::lit(2.0);
    let mut per = Array1::zeros(beta.len());
    let mut max = T::zero();
    let mut active = 0;
    for (j, col) in x.columns().into_iter().enumerate() {
        let b = beta[j];
        if b != T::zero() {
            active += 1;
        }
        if col.iter().all(|v| *v == T::zero()) {
            continue;
        }
        let g = two * col.dot(&r) - two * lambda2 * b;
        let res = if b != T::zero() {
            g - lambda1 * b.signum()
        } else {
            (g.abs() - lambda1).max(T::zero())
        };
        per[j] = res;
        max = max.max(res.abs());
    }
    KktReport {
        max_violation: max,
        per_coordinate: per,
        active_count: active,
    }
}

pub fn kkt_violation<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    beta: ArrayView1<'_, T>,
    spec: &PenaltySpec<T>,
) -> Result<KktReport<T>> {
    check_dims(&x, &y, &beta)?;
    let r = &y - &x.dot(&beta);
    Ok(kkt_from_residual(x, r.view(), beta, spec.lambda1, spec.lambda2))
}

/// Smallest ℓ₁ penalty with an all-zero lasso solution: `2·max_j |x_jᵀy|`.
pub fn lambda_max<T: Scalar>(x: ArrayView2<'_, T>, y: ArrayView1<'_, T>) -> T {
    // same contiguous dot products as the coordinate updates, so a fit at
    // exactly this value thresholds every coordinate to zero
    let cols = x.t().as_standard_layout().into_owned();
    let y = y.as_standard_layout();
    let c = cols.rows().into_iter().map(|col| col.dot(&y));
    T::lit(2.0) * c.fold(T::zero(), |m, v| m.max(v.abs()))
}

/// Geometric sequence from `lambda_max` down to `ratio·lambda_max`.
pub fn lambda_grid<T: Scalar>(lambda_max: T, count: usize, ratio: T) -> Result<Vec<T>> {
    if !(lambda_max > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "lambda_max must be positive, got {lambda_max}"
        )));
    }
    if count < 2 || !(ratio > T::zero() && ratio < T::one()) {
        return Err(Error::InvalidArgument(format!(
            "grid needs count >= 2 and ratio in (0,1), got {count} and {ratio}"
        )));
    }
    let step = ratio.ln() / T::from_count(count - 1);
    let mut grid: Vec<T> = (0..count)
        .map(|i| lambda_max * (step * T::from_count(i)).exp())
        .collect();
    grid[0] = lambda_max;
    grid[count - 1] = lambda_max * ratio;
    Ok(grid)
}

/// Default grid length.
pub const DEFAULT_GRID_COUNT: usize = 100;

/// Default smallest-to-largest ratio: 0.01 when `p > n`, else 1e-4.
pub fn default_ratio<T: Scalar>(n: usize, p: usize) -> T {
    if p > n {
        T::lit(0.01)
    } else {
        T::lit(1e-4)
    }
}
