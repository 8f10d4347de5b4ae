//! Least angle regression with the optional lasso modification.
//!
//! Inputs must be centered with unit-norm columns. The path is piecewise
//! linear; knots are stored where a predictor enters or leaves the active
//! set. In lasso mode the knot with maximal absolute correlation `C` solves
//! the lasso at `λ = 2C` (unnormalized objective), which is what
//! [`LarsPath::solution_at`] interpolates on.

use std::io::Write;

use ndarray::{Array1, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::linalg::Cholesky;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LarsMode {
    Lars,
    Lasso,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    FullLeastSquares,
    ZeroResidual,
    MaxSteps,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathKnot<T> {
    pub step: usize,
    pub entered: Option<usize>,
    pub dropped: Option<usize>,
    pub beta: Array1<T>,
    pub max_abs_corr: T,
    pub residual_norm: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LarsPath<T> {
    pub knots: Vec<PathKnot<T>>,
    pub mode: LarsMode,
    pub terminated_by: Termination,
}

/// Interpolated lasso solution; `saturated` marks a target below the last
/// knot of a path that stopped short of the least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSolution<T> {
    pub beta: Array1<T>,
    pub saturated: bool,
}

const REFACTOR_EVERY: usize = 50;

struct ActiveSet<'a, T> {
    x: ArrayView2<'a, T>,
    members: Vec<usize>,
    chol: Cholesky<T>,
    updates: usize,
}

impl<'a, T: Scalar> ActiveSet<'a, T> {
    fn push(&mut self, j: usize) -> Result<()> {
        let xj = self.x.column(j);
        let cross: Vec<T> = self.members.iter().map(|&k| self.x.column(k).dot(&xj)).collect();
        let mut tried = self.members.clone();
        tried.push(j);
        self.chol
            .push(&cross, xj.dot(&xj))
            .map_err(|_| Error::RankDeficient { active: tried })?;
        self.members.push(j);
        self.bump()
    }

    fn remove(&mut self, j: usize) -> Result<()> {
        let pos = self.members.iter().position(|&k| k == j).expect("member");
        self.members.remove(pos);
        self.chol.remove(pos);
        self.bump()
    }

    fn bump(&mut self) -> Result<()> {
        self.updates += 1;
        if self.updates >= REFACTOR_EVERY {
            self.updates = 0;
            let mut fresh = Cholesky::new();
            for (i, &j) in self.members.iter().enumerate() {
                let xj = self.x.column(j);
                let cross: Vec<T> = self.members[..i].iter().map(|&k| self.x.column(k).dot(&xj)).collect();
                fresh.push(&cross, xj.dot(&xj)).map_err(|_| Error::RankDeficient {
                    active: self.members.clone(),
                })?;
            }
            self.chol = fresh;
        }
        Ok(())
    }
}

fn max_abs<T: Scalar>(v: &Array1<T>) -> T {
    v.iter().fold(T::zero(), |m, c| m.max(c.abs()))
}

/// Computes the full LARS (or LARS-lasso) path. `max_steps = None` means `8·min(n, p)`.
pub fn lars_path<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    mode: LarsMode,
    max_steps: Option<usize>,
) -> Result<LarsPath<T>> {
    let (n, p) = x.dim();
    if y.len() != n {
        return Err(Error::DimensionMismatch(format!("X has {n} rows, y has {}", y.len())));
    }
    let norm_tol = T::epsilon().sqrt();
    for (j, col) in x.columns().into_iter().enumerate() {
        let norm = col.dot(&col).sqrt();
        if (norm - T::one()).abs() > norm_tol {
            return Err(Error::NotUnitNorm {
                column: j,
                norm: norm.to_f64_lossy(),
            });
        }
    }
    let max_steps = max_steps.unwrap_or(8 * n.min(p));
    let max_active = (n.saturating_sub(1)).min(p);
    let tie = T::lit(1e-12);

    let mut beta = Array1::<T>::zeros(p);
    let mut resid = y.to_owned();
    let mut corr = x.t().dot(&resid);
    let mut c_max = max_abs(&corr);
    let y_norm = y.dot(&y).sqrt();
    let done_norm = y_norm * T::lit(1e-12);
    let mut knots = Vec::new();
    let mut active = ActiveSet {
        x,
        members: Vec::new(),
        chol: Cholesky::new(),
        updates: 0,
    };
    let mut in_active = vec![false; p];

    if c_max == T::zero() || max_active == 0 {
        knots.push(PathKnot {
            step: 0,
            entered: None,
            dropped: None,
            beta,
            max_abs_corr: c_max,
            residual_norm: y_norm,
        });
        return Ok(LarsPath {
            knots,
            mode,
            terminated_by: Termination::ZeroResidual,
        });
    }

    let first = (0..p)
        .find(|&j| corr[j].abs() >= c_max * (T::one() - tie))
        .expect("a maximal correlation exists");
    active.push(first)?;
    in_active[first] = true;
    knots.push(PathKnot {
        step: 0,
        entered: Some(first),
        dropped: None,
        beta: beta.clone(),
        max_abs_corr: c_max,
        residual_norm: y_norm,
    });

    let mut step = 0;
    let mut just_dropped: Option<usize> = None;
    let terminated_by = loop {
        if step >= max_steps {
            break Termination::MaxSteps;
        }
        let signs: Vec<T> = active.members.iter().map(|&j| corr[j].signum()).collect();
        let g_inv_s = active.chol.solve(&signs);
        let s_g_s: T = signs.iter().zip(&g_inv_s).map(|(s, z)| *s * *z).sum();
        if !(s_g_s > T::zero()) {
            return Err(Error::RankDeficient {
                active: active.members.clone(),
            });
        }
        let equi = T::one() / s_g_s.sqrt();
        let w: Vec<T> = g_inv_s.iter().map(|z| *z * equi).collect();
        let mut u = Array1::<T>::zeros(n);
        for (&j, &wj) in active.members.iter().zip(&w) {
            u.scaled_add(wj, &x.column(j));
        }
        let a = x.t().dot(&u);

        let gamma_full = c_max / equi;
        let mut gamma = gamma_full;
        let mut entering: Option<usize> = None;
        if active.members.len() < max_active {
            // a just-dropped predictor sits at the boundary; only a strictly
            // positive advance can bring it back
            let floor = gamma_full * T::lit(1e-10);
            for j in 0..p {
                if in_active[j] {
                    continue;
                }
                let min_step = if Some(j) == just_dropped { floor } else { T::zero() };
                for cand in [(c_max - corr[j]) / (equi - a[j]), (c_max + corr[j]) / (equi + a[j])] {
                    if cand > min_step && cand.is_finite() && cand < gamma * (T::one() - tie) {
                        gamma = cand;
                        entering = Some(j);
                    }
                }
            }
        }
        let mut dropping: Option<usize> = None;
        if mode == LarsMode::Lasso {
            for (&j, &wj) in active.members.iter().zip(&w) {
                if wj == T::zero() {
                    continue;
                }
                let cand = -beta[j] / wj;
                if cand > T::zero() && cand < gamma {
                    gamma = cand;
                    dropping = Some(j);
                }
            }
            if dropping.is_some() {
                entering = None;
            }
        }

        for (&j, &wj) in active.members.iter().zip(&w) {
            beta[j] += gamma * wj;
        }
        if let Some(j) = dropping {
            beta[j] = T::zero();
        }
        resid = &y - &x.dot(&beta);
        corr = x.t().dot(&resid);
        c_max = max_abs(&corr);
        let r_norm = resid.dot(&resid).sqrt();
        step += 1;
        just_dropped = None;

        let mut knot = PathKnot {
            step,
            entered: None,
            dropped: None,
            beta: beta.clone(),
            max_abs_corr: c_max,
            residual_norm: r_norm,
        };
        if let Some(j) = dropping {
            active.remove(j)?;
            in_active[j] = false;
            just_dropped = Some(j);
            knot.dropped = Some(j);
            knots.push(knot);
            continue;
        }
        let finished = entering.is_none() || r_norm <= done_norm;
        if finished {
            knots.push(knot);
            break if r_norm > done_norm || (active.members.len() == x.ncols() && x.ncols() < x.nrows()) {
                Termination::FullLeastSquares
            } else {
                Termination::ZeroResidual
            };
        }
        let j = entering.expect("entry event");
        active.push(j)?;
        in_active[j] = true;
        knot.entered = Some(j);
        knots.push(knot);
        // simultaneous catch-ups enter in ascending index order at zero step length
        let level = c_max * (T::one() - tie);
        for k in 0..p {
            if !in_active[k] && corr[k].abs() >= level && active.members.len() < max_active {
                active.push(k)?;
                in_active[k] = true;
                step += 1;
                knots.push(PathKnot {
                    step,
                    entered: Some(k),
                    dropped: None,
                    beta: beta.clone(),
                    max_abs_corr: c_max,
                    residual_norm: r_norm,
                });
            }
        }
    };
    Ok(LarsPath {
        knots,
        mode,
        terminated_by,
    })
}

impl<T: Scalar> LarsPath<T> {
    /// Number of steps taken after the initial knot.
    pub fn steps(&self) -> usize {
        self.knots.len() - 1
    }

    pub fn final_beta(&self) -> &Array1<T> {
        &self.knots.last().expect("path has a knot").beta
    }

    /// Lasso solution at ℓ₁ penalty `target`, using `λ = 2C`.
    pub fn solution_at(&self, target: T) -> Result<PathSolution<T>> {
        if self.mode != LarsMode::Lasso {
            return Err(Error::InvalidArgument(
                "plain LARS knots do not correspond to lasso penalties".into(),
            ));
        }
        if !(target >= T::zero()) {
            return Err(Error::InvalidArgument(format!("penalty {target} is negative")));
        }
        let c = target / T::lit(2.0);
        let first = &self.knots[0];
        if c >= first.max_abs_corr {
            return Ok(PathSolution {
                beta: Array1::zeros(first.beta.len()),
                saturated: false,
            });
        }
        for pair in self.knots.windows(2) {
            let (hi, lo) = (&pair[0], &pair[1]);
            if c <= hi.max_abs_corr && c >= lo.max_abs_corr {
                let span = hi.max_abs_corr - lo.max_abs_corr;
                if span <= T::zero() {
                    return Ok(PathSolution {
                        beta: lo.beta.clone(),
                        saturated: false,
                    });
                }
                let t = (hi.max_abs_corr - c) / span;
                let beta = &hi.beta * (T::one() - t) + &lo.beta * t;
                return Ok(PathSolution { beta, saturated: false });
            }
        }
        Ok(PathSolution {
            beta: self.final_beta().clone(),
            saturated: self.terminated_by != Termination::FullLeastSquares,
        })
    }

    /// Delimited knot export: `step,entered,dropped,C,<coefficients>`.
    pub fn write<W: Write>(&self, mut out: W, column_names: &[String]) -> std::io::Result<()> {
        writeln!(out, "step,entered,dropped,C,{}", column_names.join(","))?;
        let label = |j: Option<usize>| j.map_or(String::new(), |j| column_names[j].clone());
        for k in &self.knots {
            let coefs: Vec<String> = k.beta.iter().map(|b| format!("{b:e}")).collect();
            writeln!(
                out,
                "{},{},{},{:e},{}",
                k.step,
                label(k.entered),
                label(k.dropped),
                k.max_abs_corr,
                coefs.join(",")
            )?;
        }
        Ok(())
    }
}

/// Free-function form of [`LarsPath::solution_at`].
pub fn path_solution_at<T: Scalar>(path: &LarsPath<T>, target: T) -> Result<PathSolution<T>> {
    path.solution_at(target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array2};

    /// Two orthonormal centered columns in R^4.
    fn ortho() -> Array2<f64> {
        array![[0.5, 0.5], [0.5, -0.5], [-0.5, 0.5], [-0.5, -0.5]]
    }

    #[test]
    fn orthonormal_two_step_path() {
        let x = ortho();
        // Xᵀy = (3, 1)
        let y = x.column(0).to_owned() * 3.0 + x.column(1).to_owned() * 1.0;
        let path = lars_path(x.view(), y.view(), LarsMode::Lars, None).unwrap();
        assert_eq!(path.knots.len(), 3);
        assert_eq!(path.knots[0].entered, Some(0));
        assert_eq!(path.knots[1].entered, Some(1));
        assert_abs_diff_eq!(path.knots[1].beta[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(path.knots[1].beta[1], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(path.knots[2].beta[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(path.knots[2].beta[1], 1.0, epsilon = 1e-12);
        assert_eq!(path.terminated_by, Termination::FullLeastSquares);
    }

    #[test]
    fn exact_fit_in_one_step() {
        let x = ortho();
        let y = x.column(0).to_owned() * 2.0;
        let path = lars_path(x.view(), y.view(), LarsMode::Lars, None).unwrap();
        assert_eq!(path.steps(), 1);
        assert!(path.knots[1].residual_norm < 1e-12);
        assert_eq!(path.terminated_by, Termination::ZeroResidual);
        assert_abs_diff_eq!(path.final_beta()[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_unscaled_columns() {
        let x = array![[1.0], [-1.0]];
        let y = array![1.0, -1.0];
        assert!(matches!(
            lars_path(x.view(), y.view(), LarsMode::Lars, None),
            Err(Error::NotUnitNorm { column: 0, .. })
        ));
    }

    #[test]
    fn solution_at_endpoints() {
        let x = ortho();
        let y = x.column(0).to_owned() * 3.0 + x.column(1).to_owned() * 1.0;
        let path = lars_path(x.view(), y.view(), LarsMode::Lasso, None).unwrap();
        let at_max = path.solution_at(6.0).unwrap();
        assert!(at_max.beta.iter().all(|b| *b == 0.0));
        let at_zero = path.solution_at(0.0).unwrap();
        assert_abs_diff_eq!(at_zero.beta[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(at_zero.beta[1], 1.0, epsilon = 1e-12);
        // orthonormal lasso: β = S(Xᵀy, λ/2)
        let mid = path.solution_at(3.0).unwrap();
        assert_abs_diff_eq!(mid.beta[0], 1.5, epsilon = 1e-12);
        assert_eq!(mid.beta[1], 0.0);
        let plain = lars_path(x.view(), y.view(), LarsMode::Lars, None).unwrap();
        assert!(plain.solution_at(1.0).is_err());
    }

    #[test]
    fn knot_export() {
        let x = ortho();
        let y = x.column(0).to_owned() * 3.0 + x.column(1).to_owned();
        let path = lars_path(x.view(), y.view(), LarsMode::Lasso, None).unwrap();
        let mut buf = Vec::new();
        path.write(&mut buf, &["a".into(), "b".into()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("step,entered,dropped,C,a,b"));
        assert!(lines.next().unwrap().starts_with("0,a,,"));
    }
}
