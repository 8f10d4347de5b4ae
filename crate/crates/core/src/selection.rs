//! Prediction metrics and k-fold cross-validation over penalty grids.

use std::io::Write;

use ndarray::{Array1, Array2, ArrayView1};
use rayon::prelude::*;

use crate::cd::FitResult;
use crate::dataset::{DescriptorTable, FoldAssignment};
use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::penalty::PenaltySpec;
use crate::scalar::Scalar;

fn check_pair<T>(a: &ArrayView1<'_, T>, b: &ArrayView1<'_, T>, min: usize) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!("{} vs {} values", a.len(), b.len())));
    }
    if a.len() < min {
        return Err(Error::InvalidArgument(format!("need at least {min} values")));
    }
    Ok(())
}

/// Root mean squared error.
pub fn rmse<T: Scalar>(y_true: ArrayView1<'_, T>, y_pred: ArrayView1<'_, T>) -> Result<T> {
    check_pair(&y_true, &y_pred, 1)?;
    let sse: T = y_true
        .iter()
        .zip(y_pred.iter())
        .map(|(a, b)| (*a - *b) * (*a - *b))
        .sum();
    Ok((sse / T::from_count(y_true.len())).sqrt())
}

/// Squared Pearson correlation between observed and predicted values.
/// A constant prediction scores 0.
pub fn r_square<T: Scalar>(y_true: ArrayView1<'_, T>, y_pred: ArrayView1<'_, T>) -> Result<T> {
    check_pair(&y_true, &y_pred, 2)?;
    let n = T::from_count(y_true.len());
    let mt = y_true.sum() / n;
    let mp = y_pred.sum() / n;
    let (mut stt, mut spp, mut stp) = (T::zero(), T::zero(), T::zero());
    for (a, b) in y_true.iter().zip(y_pred.iter()) {
        let (da, db) = (*a - mt, *b - mp);
        stt += da * da;
        spp += db * db;
        stp += da * db;
    }
    if stt == T::zero() {
        return Err(Error::InvalidArgument("observed response is constant".into()));
    }
    if spp == T::zero() {
        return Ok(T::zero());
    }
    Ok((stp * stp / (stt * spp)).min(T::one()))
}

/// `1 − SSE/SST`, reported alongside the squared correlation as a diagnostic.
pub fn coefficient_of_determination<T: Scalar>(y_true: ArrayView1<'_, T>, y_pred: ArrayView1<'_, T>) -> Result<T> {
    check_pair(&y_true, &y_pred, 2)?;
    let m = y_true.sum() / T::from_count(y_true.len());
    let sst: T = y_true.iter().map(|a| (*a - m) * (*a - m)).sum();
    if sst == T::zero() {
        return Err(Error::InvalidArgument("observed response is constant".into()));
    }
    let sse: T = y_true
        .iter()
        .zip(y_pred.iter())
        .map(|(a, b)| (*a - *b) * (*a - *b))
        .sum();
    Ok(T::one() - sse / sst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelectionRule {
    #[default]
    MinError,
    /// Largest penalty whose mean error is within one standard error of the minimum.
    OneStandardError,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvCurve<T> {
    pub grid_points: Vec<PenaltySpec<T>>,
    /// Mean validation RMSE per grid point.
    pub mean_error: Array1<T>,
    /// folds × grid points.
    pub fold_errors: Array2<T>,
    pub chosen: usize,
    pub rule: SelectionRule,
}

const TIE: f64 = 1e-12;

/// `true` when `a` is a heavier penalty than `b` (larger λ, then larger φ).
fn heavier<T: Scalar>(a: &PenaltySpec<T>, b: &PenaltySpec<T>) -> bool {
    a.total() > b.total() || (a.total() == b.total() && a.phi > b.phi)
}

fn choose<T: Scalar>(grid: &[PenaltySpec<T>], mean: &Array1<T>, folds: &Array2<T>, rule: SelectionRule) -> usize {
    let tie = T::lit(TIE);
    let mut best = 0;
    for i in 1..mean.len() {
        if mean[i] < mean[best] - tie || ((mean[i] - mean[best]).abs() <= tie && heavier(&grid[i], &grid[best])) {
            best = i;
        }
    }
    if rule == SelectionRule::MinError {
        return best;
    }
    let k = folds.nrows();
    let col = folds.column(best);
    let m = mean[best];
    let var = col.iter().map(|e| (*e - m) * (*e - m)).sum::<T>() / T::from_count(k.saturating_sub(1).max(1));
    let limit = m + (var / T::from_count(k)).sqrt();
    let mut pick = best;
    for i in 0..mean.len() {
        if mean[i] <= limit && heavier(&grid[i], &grid[pick]) {
            pick = i;
        }
    }
    pick
}

/// Fits the grid on the training part of one fold.
pub fn cv_fold<T: Scalar>(
    table: &DescriptorTable<T>,
    model: &ModelConfig<T>,
    folds: &FoldAssignment,
    fold: usize,
    grid: &[PenaltySpec<T>],
) -> Result<Vec<FitResult<T>>> {
    let train = table.select_rows(&folds.training_indices(fold));
    model.fit_grid(&train, grid)
}

pub fn cross_validate<T: Scalar>(
    table: &DescriptorTable<T>,
    model: &ModelConfig<T>,
    folds: &FoldAssignment,
    grid: &[PenaltySpec<T>],
    rule: SelectionRule,
) -> Result<CvCurve<T>> {
    if folds.n() != table.n() {
        return Err(Error::DimensionMismatch(format!(
            "fold assignment covers {} rows, table has {}",
            folds.n(),
            table.n()
        )));
    }
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty grid".into()));
    }
    let rows: Vec<Vec<T>> = (0..folds.k)
        .into_par_iter()
        .map(|fold| -> Result<Vec<T>> {
            let wrap = |e| Error::Fold {
                fold,
                source: Box::new(e),
            };
            let fits = cv_fold(table, model, folds, fold, grid).map_err(wrap)?;
            let valid = table.select_rows(&folds.validation_indices(fold));
            fits.iter()
                .map(|f| {
                    let pred = f.predict(valid.predictors.view());
                    rmse(valid.response.view(), pred.view()).map_err(wrap)
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let g = grid.len();
    let fold_errors = Array2::from_shape_fn((folds.k, g), |(f, i)| rows[f][i]);
    let mean_error = Array1::from_shape_fn(g, |i| {
        let mut s = T::zero();
        for f in 0..folds.k {
            s += fold_errors[[f, i]];
        }
        s / T::from_count(folds.k)
    });
    let chosen = choose(grid, &mean_error, &fold_errors, rule);
    Ok(CvCurve {
        grid_points: grid.to_vec(),
        mean_error,
        fold_errors,
        chosen,
        rule,
    })
}

impl<T: Scalar> CvCurve<T> {
    pub fn chosen_spec(&self) -> &PenaltySpec<T> {
        &self.grid_points[self.chosen]
    }

    /// `lambda,phi,mean_rmse,fold1..foldk,chosen`.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let k = self.fold_errors.nrows();
        let folds: Vec<String> = (1..=k).map(|f| format!("fold{f}")).collect();
        writeln!(out, "lambda,phi,mean_rmse,{},chosen", folds.join(","))?;
        for (i, spec) in self.grid_points.iter().enumerate() {
            let per: Vec<String> = self.fold_errors.column(i).iter().map(|e| format!("{e:e}")).collect();
            writeln!(
                out,
                "{:e},{:e},{:e},{},{}",
                spec.total(),
                spec.phi,
                self.mean_error[i],
                per.join(","),
                u8::from(i == self.chosen)
            )?;
        }
        Ok(())
    }
}

/// Grid from `train`, cross-validation on `train`, refit on all of `train`.
pub fn select_and_refit<T: Scalar>(
    train: &DescriptorTable<T>,
    model: &ModelConfig<T>,
    folds: &FoldAssignment,
    rule: SelectionRule,
) -> Result<(CvCurve<T>, FitResult<T>)> {
    let grid = model.grid(train)?;
    let curve = cross_validate(train, model, folds, &grid, rule)?;
    let mut fits = model.fit_grid(train, &grid)?;
    let fit = fits.swap_remove(curve.chosen);
    Ok((curve, fit))
}
