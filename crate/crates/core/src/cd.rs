//! Cyclical coordinate descent for the elastic-net family.
//!
//! Minimizes `‖y − Xβ‖² + λ₂‖β‖² + λ₁‖β‖₁` on centered data. Each coordinate
//! update is `β_j ← S(x_jᵀr₋ⱼ, λ₁/2) / (x_jᵀx_j + λ₂)` with the residual kept
//! up to date incrementally. Between full sweeps only the nonzero coordinates
//! are cycled; a fit is only returned after a full sweep and a KKT check on a
//! freshly computed residual.

use std::io::Write;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::dataset::Preprocessing;
use crate::error::{Error, Result};
use crate::linalg::{self, Cholesky};
use crate::penalty::{kkt_from_residual, soft_threshold, KktReport, PenaltySpec};
use crate::scalar::Scalar;

/// Outcome of one penalized fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T> {
    pub beta: Array1<T>,
    pub intercept: T,
    pub active_set: Vec<usize>,
    pub iterations: usize,
    pub final_kkt: T,
    pub spec: PenaltySpec<T>,
}

impl<T: Scalar> FitResult<T> {
    pub(crate) fn from_beta(beta: Array1<T>, iterations: usize, final_kkt: T, spec: PenaltySpec<T>) -> Self {
        Self {
            active_set: support(&beta),
            beta,
            intercept: T::zero(),
            iterations,
            final_kkt,
            spec,
        }
    }

    pub fn predict(&self, x: ArrayView2<'_, T>) -> Array1<T> {
        x.dot(&self.beta) + self.intercept
    }

    /// The residual vector `e = y − μ − Xβ`.
    pub fn residuals(&self, x: ArrayView2<'_, T>, y: ArrayView1<'_, T>) -> Array1<T> {
        &y - &self.predict(x)
    }
}

pub(crate) fn support<T: Scalar>(beta: &Array1<T>) -> Vec<usize> {
    beta.iter()
        .enumerate()
        .filter(|(_, b)| **b != T::zero())
        .map(|(j, _)| j)
        .collect()
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdOptions<T> {
    pub tol: T,
    /// `None` means `10·p + 1000`.
    pub max_sweeps: Option<usize>,
}

impl<T: Scalar> Default for CdOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-8),
            max_sweeps: None,
        }
    }
}

impl<T: Scalar> CdOptions<T> {
    pub fn sweeps_for(&self, p: usize) -> usize {
        self.max_sweeps.unwrap_or(10 * p + 1000)
    }
}

/// Solver state: coefficients and the running residual.
pub struct CoordinateDescent<T> {
    /// Columns of X stored contiguously (p × n).
    cols: Array2<T>,
    col_sq: Array1<T>,
    max_col_sq: T,
    half_l1: T,
    lambda2: T,
    beta: Array1<T>,
    resid: Array1<T>,
    y: Array1<T>,
}

impl<T: Scalar> CoordinateDescent<T> {
    pub fn new(
        x: ArrayView2<'_, T>,
        y: ArrayView1<'_, T>,
        spec: &PenaltySpec<T>,
        beta0: Option<ArrayView1<'_, T>>,
    ) -> Result<Self> {
        let (n, p) = x.dim();
        if y.len() != n {
            return Err(Error::DimensionMismatch(format!("X has {n} rows, y has {}", y.len())));
        }
        let cols = x.t().as_standard_layout().into_owned();
        let col_sq = linalg::column_sq_norms(x);
        if spec.lambda1 == T::zero() && spec.lambda2 == T::zero() && col_sq.iter().any(|c| *c == T::zero()) {
            return Err(Error::Singular("zero-norm column with no penalty".into()));
        }
        let mut beta = match beta0 {
            Some(b) if b.len() == p => b.to_owned(),
            Some(b) => {
                return Err(Error::DimensionMismatch(format!(
                    "warm start has {} entries for {p} columns",
                    b.len()
                )))
            }
            None => Array1::zeros(p),
        };
        for (b, c) in beta.iter_mut().zip(col_sq.iter()) {
            if *c == T::zero() {
                *b = T::zero();
            }
        }
        let resid = &y - &x.dot(&beta);
        Ok(Self {
            cols,
            max_col_sq: col_sq.iter().fold(T::zero(), |m, v| m.max(*v)),
            col_sq,
            half_l1: spec.lambda1 / T::lit(2.0),
            lambda2: spec.lambda2,
            beta,
            resid,
            y: y.to_owned(),
        })
    }

    #[inline]
    fn update(&mut self, j: usize) -> T {
        let cs = self.col_sq[j];
        if cs == T::zero() {
            return T::zero();
        }
        let col = self.cols.row(j);
        let old = self.beta[j];
        let z = col.dot(&self.resid) + cs * old;
        let new = soft_threshold(z, self.half_l1) / (cs + self.lambda2);
        let delta = new - old;
        if delta != T::zero() {
            self.beta[j] = new;
            self.resid.scaled_add(-delta, &col);
        }
        delta.abs()
    }

    /// One cyclic pass over every coordinate; returns the largest coefficient change.
    pub fn sweep(&mut self) -> T {
        let mut max = T::zero();
        for j in 0..self.beta.len() {
            max = max.max(self.update(j));
        }
        max
    }

    /// One pass over the listed coordinates only.
    pub fn sweep_subset(&mut self, subset: &[usize]) -> T {
        let mut max = T::zero();
        for &j in subset {
            max = max.max(self.update(j));
        }
        max
    }

    pub fn beta(&self) -> &Array1<T> {
        &self.beta
    }

    /// Recomputes the residual from scratch and reports KKT residuals.
    pub fn certify(&mut self) -> KktReport<T> {
        let fitted = self.cols.t().dot(&self.beta);
        self.resid = &self.y - &fitted;
        kkt_from_residual(
            self.cols.t(),
            self.resid.view(),
            self.beta.view(),
            self.half_l1 * T::lit(2.0),
            self.lambda2,
        )
    }

    /// Newton steps on the current support with its signs held fixed. When
    /// a step would flip a sign, moves to the best point on the segment where
    /// coefficients reach zero and drops them. Every accepted move lowers the
    /// objective. Returns `true` once a sign-consistent solve is reached.
    fn polish(&mut self) -> bool {
        let n = self.y.len();
        let l1 = self.half_l1 * T::lit(2.0);
        for _ in 0..self.beta.len() {
            let active = support(&self.beta);
            let k = active.len();
            if k == 0 {
                return false;
            }
            let mut gram = Array2::<T>::zeros((k, k));
            let mut rhs = Array1::<T>::zeros(k);
            for a in 0..k {
                let ca = self.cols.row(active[a]);
                for b in 0..a {
                    let v = ca.dot(&self.cols.row(active[b]));
                    gram[[a, b]] = v;
                    gram[[b, a]] = v;
                }
                gram[[a, a]] = self.col_sq[active[a]] + self.lambda2;
                rhs[a] = ca.dot(&self.y) - self.half_l1 * self.beta[active[a]].signum();
            }
            let solved = if k > n && self.lambda2 == T::zero() {
                None
            } else {
                linalg::spd_solve(gram.view(), rhs.view()).ok()
            };
            let Some(sol) = solved.filter(|s| s.iter().all(|v| v.is_finite())) else {
                if self.shrink_support(&active, &gram) {
                    continue;
                }
                return false;
            };
            let old: Vec<T> = active.iter().map(|&j| self.beta[j]).collect();
            let delta: Vec<T> = sol.iter().zip(&old).map(|(s, o)| *s - *o).collect();
            let mut crossings: Vec<T> = old
                .iter()
                .zip(sol.iter())
                .filter(|(o, s)| s.signum() != o.signum() || **s == T::zero())
                .map(|(o, s)| *o / (*o - *s))
                .collect();
            if crossings.is_empty() {
                for (&j, v) in active.iter().zip(sol.iter()) {
                    self.beta[j] = *v;
                }
                self.certify();
                return true;
            }
            // objective along β + tΔ: residual part is quadratic in t
            let mut u = Array1::<T>::zeros(n);
            for (&j, d) in active.iter().zip(&delta) {
                u.scaled_add(*d, &self.cols.row(j));
            }
            let (r0, ru, uu) = (self.resid.dot(&self.resid), self.resid.dot(&u), u.dot(&u));
            let objective = |t: T| {
                let mut pen = T::zero();
                for (o, d) in old.iter().zip(&delta) {
                    let v = *o + t * *d;
                    pen += l1 * v.abs() + self.lambda2 * v * v;
                }
                r0 - T::lit(2.0) * t * ru + t * t * uu + pen
            };
            crossings.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            let mut best_t = crossings[0];
            let mut best = objective(best_t);
            for &t in &crossings[1..] {
                let v = objective(t);
                if v < best {
                    best = v;
                    best_t = t;
                }
            }
            if !(best < objective(T::zero())) {
                return false;
            }
            for ((&j, o), d) in active.iter().zip(&old).zip(&delta) {
                let t_zero = *o / (*o - (*o + *d));
                let crossed = (*o + *d).signum() != o.signum() || *o + *d == T::zero();
                self.beta[j] = if crossed && t_zero <= best_t {
                    T::zero()
                } else {
                    *o + best_t * *d
                };
            }
            self.certify();
        }
        false
    }

    /// On a singular support, moves along a null direction of the support
    /// columns (fit unchanged, ℓ₁ norm not increased) until a coefficient
    /// reaches zero. Returns `false` if no such direction exists.
    fn shrink_support(&mut self, active: &[usize], gram: &Array2<T>) -> bool {
        if self.lambda2 > T::zero() {
            return false;
        }
        let Some(mut dir) = null_direction(gram) else {
            return false;
        };
        let slope: T = active
            .iter()
            .zip(dir.iter())
            .map(|(&j, d)| self.beta[j].signum() * *d)
            .sum();
        if slope > T::zero() {
            dir.mapv_inplace(|d| -d);
        }
        // first coefficient to reach zero along β + t·dir
        let mut step = T::infinity();
        let mut hit = None;
        for (a, &j) in active.iter().enumerate() {
            let (b, d) = (self.beta[j], dir[a]);
            if b * d < T::zero() && -b / d < step {
                step = -b / d;
                hit = Some(a);
            }
        }
        let Some(hit) = hit else {
            return false;
        };
        let before = self.objective();
        let saved = self.beta.clone();
        for (a, &j) in active.iter().enumerate() {
            self.beta[j] = if a == hit {
                T::zero()
            } else {
                self.beta[j] + step * dir[a]
            };
        }
        self.certify();
        if self.objective() > before {
            self.beta = saved;
            self.certify();
            return false;
        }
        true
    }

    fn objective(&self) -> T {
        let l1: T = self.beta.iter().map(|b| b.abs()).sum();
        let l2: T = self.beta.iter().map(|b| *b * *b).sum();
        self.resid.dot(&self.resid) + self.half_l1 * T::lit(2.0) * l1 + self.lambda2 * l2
    }

    /// Runs sweeps until the change criterion and KKT certificate both hold.
    /// Returns `(sweeps, final_kkt)`.
    pub fn solve(&mut self, tol: T, max_sweeps: usize) -> Result<(usize, T)> {
        let mut sweeps = 0;
        let mut last_kkt = T::infinity();
        while sweeps < max_sweeps {
            let change = self.sweep();
            sweeps += 1;
            if change * self.max_col_sq < tol {
                let rep = self.certify();
                last_kkt = rep.max_violation;
                if last_kkt <= tol {
                    return Ok((sweeps, last_kkt));
                }
            }
            let active = support(&self.beta);
            if active.is_empty() {
                continue;
            }
            let mut inner = 0;
            while sweeps < max_sweeps {
                let change = self.sweep_subset(&active);
                sweeps += 1;
                inner += 1;
                if change * self.max_col_sq < tol {
                    break;
                }
                if inner % POLISH_AFTER == 0 && self.polish() {
                    break;
                }
            }
        }
        if last_kkt.is_infinite() {
            last_kkt = self.certify().max_violation;
        }
        Err(Error::NonConvergence {
            sweeps,
            kkt: last_kkt.to_f64_lossy(),
        })
    }
}

/// A vector `v` with `G v ≈ 0` built from the first column that is linearly
/// dependent on its predecessors (incremental Cholesky), or `None` when the
/// Gram matrix `G` has full rank.
fn null_direction<T: Scalar>(gram: &Array2<T>) -> Option<Array1<T>> {
    let k = gram.nrows();
    let mut kept: Vec<usize> = Vec::new();
    // rows of the lower Cholesky factor of the kept columns
    let mut factor: Vec<Vec<T>> = Vec::new();
    for j in 0..k {
        let mut row = Vec::with_capacity(kept.len());
        for (a, &i) in kept.iter().enumerate() {
            let dot: T = (0..a).map(|b| factor[a][b] * row[b]).sum();
            row.push((gram[[i, j]] - dot) / factor[a][a]);
        }
        let pivot = gram[[j, j]] - row.iter().map(|v| *v * *v).sum::<T>();
        if pivot > gram[[j, j]] * T::lit(1e-10) {
            row.push(pivot.sqrt());
            factor.push(row);
            kept.push(j);
            continue;
        }
        // back-substitute Lᵀ c = row for the coefficients on the kept columns
        let m = kept.len();
        let mut c = vec![T::zero(); m];
        for a in (0..m).rev() {
            let tail: T = (a + 1..m).map(|b| factor[b][a] * c[b]).sum();
            c[a] = (row[a] - tail) / factor[a][a];
        }
        let mut v = Array1::zeros(k);
        for (a, &i) in kept.iter().enumerate() {
            v[i] = c[a];
        }
        v[j] = -T::one();
        return Some(v);
    }
    None
}

/// Slow active-set convergence triggers an exact solve on the support.
const POLISH_AFTER: usize = 25;

/// Minimizes the penalized objective at one penalty setting.
pub fn fit_at<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    spec: &PenaltySpec<T>,
    beta0: Option<ArrayView1<'_, T>>,
    opts: &CdOptions<T>,
) -> Result<FitResult<T>> {
    if !(opts.tol > T::zero()) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let mut cd = CoordinateDescent::new(x, y, spec, beta0)?;
    let (sweeps, kkt) = cd.solve(opts.tol, opts.sweeps_for(x.ncols()))?;
    let mut beta = cd.beta;
    if spec.rescale_naive && spec.lambda2 > T::zero() {
        let factor = T::one() + spec.lambda2 / T::from_count(x.nrows());
        beta.mapv_inplace(|b| b * factor);
    }
    Ok(FitResult::from_beta(beta, sweeps, kkt, *spec))
}

/// One point of a regularization path.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPoint<T> {
    /// The unsplit penalty `λ` (so `λ₁ = α·λ`, `λ₂ = (1−α)·λ`).
    pub lambda: T,
    pub lambda1: T,
    pub lambda2: T,
    pub beta: Array1<T>,
    pub active_count: usize,
}

/// Fits along a decreasing penalty grid with a fixed mixing parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientPath<T> {
    pub alpha: T,
    pub points: Vec<PathPoint<T>>,
}

pub(crate) fn check_decreasing<T: Scalar>(grid: &[T]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty penalty grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] < w[0])) || grid.iter().any(|v| !(*v >= T::zero())) {
        return Err(Error::InvalidArgument(
            "penalty grid must be nonnegative and strictly decreasing".into(),
        ));
    }
    Ok(())
}

pub fn fit_path<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    grid: &[T],
    alpha_mix: T,
    opts: &CdOptions<T>,
) -> Result<CoefficientPath<T>> {
    check_decreasing(grid)?;
    let mut points: Vec<PathPoint<T>> = Vec::with_capacity(grid.len());
    for (index, &lambda) in grid.iter().enumerate() {
        let spec = PenaltySpec::mixed(lambda, alpha_mix)?;
        let warm = points.last().map(|p| p.beta.view());
        let fit = fit_at(x, y, &spec, warm, opts).map_err(|e| Error::PathPoint {
            index,
            source: Box::new(e),
        })?;
        points.push(PathPoint {
            lambda,
            lambda1: spec.lambda1,
            lambda2: spec.lambda2,
            active_count: fit.active_set.len(),
            beta: fit.beta,
        });
    }
    Ok(CoefficientPath {
        alpha: alpha_mix,
        points,
    })
}

impl<T: Scalar> CoefficientPath<T> {
    /// Delimited export: `lambda,alpha,<coefficients>`, one row per grid point.
    /// Coefficients are mapped back through `prep` when given.
    pub fn write<W: Write>(
        &self,
        mut out: W,
        column_names: &[String],
        prep: Option<&Preprocessing<T>>,
    ) -> std::io::Result<()> {
        writeln!(out, "lambda,alpha,{}", column_names.join(","))?;
        for pt in &self.points {
            let beta = match prep {
                Some(p) => p.to_original(&pt.beta).0,
                None => pt.beta.clone(),
            };
            let coefs: Vec<String> = beta.iter().map(|b| format!("{b:e}")).collect();
            writeln!(out, "{:e},{:e},{}", pt.lambda, self.alpha, coefs.join(","))?;
        }
        Ok(())
    }
}

/// Solves `(XᵀX + λ₂I)β = Xᵀy` directly, using the `n × n` dual system when `p > n`.
pub fn ridge_closed_form<T: Scalar>(x: ArrayView2<'_, T>, y: ArrayView1<'_, T>, lambda2: T) -> Result<FitResult<T>> {
    let (n, p) = x.dim();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("X has {n} rows, y has {}", y.len())));
    }
    if !(lambda2 >= T::zero()) {
        return Err(Error::InvalidArgument(format!("lambda2 {lambda2} is negative")));
    }
    let beta = if p <= n || lambda2 == T::zero() {
        let mut g = x.t().dot(&x);
        for j in 0..p {
            g[[j, j]] += lambda2;
        }
        let rhs = x.t().dot(&y);
        let chol =
            Cholesky::factor(g.view()).map_err(|_| Error::Singular("ridge system is not positive definite".into()))?;
        Array1::from(chol.solve(&rhs.to_vec()))
    } else {
        let mut k = x.dot(&x.t());
        for i in 0..n {
            k[[i, i]] += lambda2;
        }
        let chol = Cholesky::factor(k.view())
            .map_err(|_| Error::Singular("ridge dual system is not positive definite".into()))?;
        let a = Array1::from(chol.solve(&y.to_vec()));
        x.t().dot(&a)
    };
    let spec = PenaltySpec::ridge(lambda2)?;
    let r = &y - &x.dot(&beta);
    let kkt = kkt_from_residual(x, r.view(), beta.view(), T::zero(), lambda2).max_violation;
    Ok(FitResult::from_beta(beta, 0, kkt, spec))
}
