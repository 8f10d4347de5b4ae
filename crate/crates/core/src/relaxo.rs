//! Relaxed lasso: selection by the lasso at `λ`, then a lasso with penalty
//! `φ·λ` restricted to the selected predictors.
//!
//! `λ` here is on the mean-squared-error scale
//! `n⁻¹‖y − Xβ‖² + φλ‖β‖₁`; the core solver sees `n·φ·λ`. Predictors outside
//! the selected set stay at zero. `φ = 0` is the unpenalized least-squares
//! refit on the selected set.

use ndarray::{Array1, ArrayView1, ArrayView2, Axis};

use crate::cd::{self, CdOptions};
use crate::error::{Error, Result};
use crate::linalg;
use crate::penalty::PenaltySpec;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedFit<T> {
    pub lambda: T,
    pub phi: T,
    pub selected: Vec<usize>,
    pub beta: Array1<T>,
    pub source_lasso_beta: Array1<T>,
    /// Set when the `φ = 0` refit hit a rank-deficient selected design and
    /// returned the minimum-norm solution.
    pub rank_deficient: bool,
}

fn core_penalty<T: Scalar>(n: usize, lambda: T) -> Result<T> {
    if !(lambda >= T::zero()) {
        return Err(Error::InvalidArgument(format!("lambda {lambda} is negative")));
    }
    Ok(T::from_count(n) * lambda)
}

fn check_phi<T: Scalar>(phi: T) -> Result<()> {
    if !(phi >= T::zero() && phi <= T::one()) {
        return Err(Error::InvalidArgument(format!("phi {phi} not in [0, 1]")));
    }
    Ok(())
}

/// Selected set `M_λ` of the lasso at `λ` (mean-squared-error scale).
pub fn active_set<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    lambda: T,
    opts: &CdOptions<T>,
) -> Result<Vec<usize>> {
    let spec = PenaltySpec::lasso(core_penalty(x.nrows(), lambda)?)?;
    Ok(cd::fit_at(x, y, &spec, None, opts)?.active_set)
}

/// Second stage on a fixed selection, warm-started from `start` (full length p).
fn restricted_fit<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    selected: &[usize],
    lambda: T,
    phi: T,
    start: &Array1<T>,
    opts: &CdOptions<T>,
) -> Result<(Array1<T>, bool)> {
    let p = x.ncols();
    let mut beta = Array1::zeros(p);
    if selected.is_empty() {
        return Ok((beta, false));
    }
    let xs = x.select(Axis(1), selected);
    let (coef, deficient) = if phi == T::zero() {
        linalg::lstsq(xs.view(), y)
    } else {
        let spec = PenaltySpec::lasso(core_penalty(x.nrows(), phi * lambda)?)?;
        let warm = start.select(Axis(0), selected);
        let fit = cd::fit_at(xs.view(), y, &spec, Some(warm.view()), opts)?;
        (fit.beta, false)
    };
    for (k, &j) in selected.iter().enumerate() {
        beta[j] = coef[k];
    }
    Ok((beta, deficient))
}

pub fn relaxed_fit<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    lambda: T,
    phi: T,
    opts: &CdOptions<T>,
) -> Result<RelaxedFit<T>> {
    check_phi(phi)?;
    let spec = PenaltySpec::lasso(core_penalty(x.nrows(), lambda)?)?;
    let lasso = cd::fit_at(x, y, &spec, None, opts)?;
    finish(x, y, lambda, phi, lasso.beta, lasso.active_set, opts)
}

fn finish<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    lambda: T,
    phi: T,
    lasso_beta: Array1<T>,
    selected: Vec<usize>,
    opts: &CdOptions<T>,
) -> Result<RelaxedFit<T>> {
    let (beta, rank_deficient) = if phi == T::one() {
        (lasso_beta.clone(), false)
    } else {
        restricted_fit(x, y, &selected, lambda, phi, &lasso_beta, opts)?
    };
    Ok(RelaxedFit {
        lambda,
        phi,
        selected,
        beta,
        source_lasso_beta: lasso_beta,
        rank_deficient,
    })
}

/// All `(λ, φ)` combinations, λ-major in the order given. `lambda_grid` must be
/// strictly decreasing; one warm-started lasso path supplies every selection.
pub fn relaxed_surface<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ArrayView1<'_, T>,
    lambda_grid: &[T],
    phi_grid: &[T],
    opts: &CdOptions<T>,
) -> Result<Vec<RelaxedFit<T>>> {
    if phi_grid.is_empty() {
        return Err(Error::InvalidArgument("empty phi grid".into()));
    }
    for &phi in phi_grid {
        check_phi(phi)?;
    }
    let n = x.nrows();
    let core: Vec<T> = lambda_grid.iter().map(|&l| core_penalty(n, l)).collect::<Result<_>>()?;
    let path = cd::fit_path(x, y, &core, T::one(), opts)?;
    let mut out = Vec::with_capacity(lambda_grid.len() * phi_grid.len());
    for (&lambda, point) in lambda_grid.iter().zip(path.points) {
        let selected = cd::support(&point.beta);
        let mut warm = point.beta.clone();
        for &phi in phi_grid {
            let fit = if phi == T::one() {
                RelaxedFit {
                    lambda,
                    phi,
                    selected: selected.clone(),
                    beta: point.beta.clone(),
                    source_lasso_beta: point.beta.clone(),
                    rank_deficient: false,
                }
            } else {
                let (beta, rank_deficient) = restricted_fit(x, y, &selected, lambda, phi, &warm, opts)?;
                RelaxedFit {
                    lambda,
                    phi,
                    selected: selected.clone(),
                    beta,
                    source_lasso_beta: point.beta.clone(),
                    rank_deficient,
                }
            };
            if phi > T::zero() {
                warm = fit.beta.clone();
            }
            out.push(fit);
        }
    }
    Ok(out)
}

/// Writes `lambda,phi,active_count,cv_error,<coefficients>`; `cv_error` is
/// left empty when not supplied.
pub fn write_surface<T: Scalar, W: std::io::Write>(
    mut out: W,
    fits: &[RelaxedFit<T>],
    cv_error: Option<&[T]>,
    column_names: &[String],
) -> std::io::Result<()> {
    writeln!(out, "lambda,phi,active_count,cv_error,{}", column_names.join(","))?;
    for (i, f) in fits.iter().enumerate() {
        let err = cv_error.map_or(String::new(), |e| format!("{:e}", e[i]));
        let coefs: Vec<String> = f.beta.iter().map(|b| format!("{b:e}")).collect();
        let active = f.beta.iter().filter(|b| **b != T::zero()).count();
        writeln!(out, "{:e},{:e},{},{},{}", f.lambda, f.phi, active, err, coefs.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array2};

    fn ortho() -> Array2<f64> {
        array![[0.5, 0.5], [0.5, -0.5], [-0.5, 0.5], [-0.5, -0.5]]
    }

    fn ortho_y() -> Array1<f64> {
        // Xᵀy = (3, 1)
        ortho().column(0).to_owned() * 3.0 + ortho().column(1).to_owned()
    }

    #[test]
    fn null_and_full_selection() {
        let x = ortho();
        let y = ortho_y();
        let n = 4.0;
        let opts = CdOptions::default();
        // null threshold 2·max|Xᵀy|/n = 1.5
        assert!(active_set(x.view(), y.view(), 1.5 + 1e-9, &opts).unwrap().is_empty());
        assert_eq!(active_set(x.view(), y.view(), 0.0, &opts).unwrap(), vec![0, 1]);
        // between thresholds 2/n and 6/n only the first predictor survives
        assert_eq!(active_set(x.view(), y.view(), 4.0 / n, &opts).unwrap(), vec![0]);
    }

    #[test]
    fn hard_threshold_limit() {
        let x = ortho();
        let y = ortho_y();
        let fit = relaxed_fit(x.view(), y.view(), 1.0, 0.0, &CdOptions::default()).unwrap();
        assert_eq!(fit.selected, vec![0]);
        assert_abs_diff_eq!(fit.beta[0], 3.0, epsilon = 1e-12);
        assert_eq!(fit.beta[1], 0.0);
    }

    #[test]
    fn phi_one_is_the_lasso() {
        let x = ortho();
        let y = ortho_y();
        let opts = CdOptions::default();
        let fit = relaxed_fit(x.view(), y.view(), 0.3, 1.0, &opts).unwrap();
        let lasso = cd::fit_at(x.view(), y.view(), &PenaltySpec::lasso(4.0 * 0.3).unwrap(), None, &opts).unwrap();
        assert_eq!(fit.beta, lasso.beta);
        assert!(relaxed_fit(x.view(), y.view(), 0.3, 1.5, &opts).is_err());
    }

    #[test]
    fn surface_shape_and_export() {
        let x = ortho();
        let y = ortho_y();
        let fits = relaxed_surface(
            x.view(),
            y.view(),
            &[2.0, 1.0, 0.1],
            &[1.0, 0.5, 0.0],
            &CdOptions::default(),
        )
        .unwrap();
        assert_eq!(fits.len(), 9);
        assert!(fits[..3].iter().all(|f| f.beta.iter().all(|b| *b == 0.0)));
        let mut buf = Vec::new();
        write_surface(&mut buf, &fits, None, &["a".into(), "b".into()]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 10);
    }

    #[test]
    fn dependent_selection_gives_minimum_norm() {
        // duplicated column: minimum-norm refit splits the weight evenly
        let x = array![[1.0, 1.0, 0.0], [-1.0, -1.0, 1.0], [0.0, 0.0, -1.0]];
        let y = array![2.0, -2.0, 0.0];
        let start = Array1::zeros(3);
        let (beta, deficient) =
            restricted_fit(x.view(), y.view(), &[0, 1, 2], 0.1, 0.0, &start, &CdOptions::default()).unwrap();
        assert!(deficient);
        assert_abs_diff_eq!(beta[0], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(beta[1], 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(beta[2], 0.0, epsilon = 1e-10);
    }
}
