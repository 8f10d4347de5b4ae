//! The five estimators behind one interface: preprocessing, penalty grids,
//! and fitting a whole grid on a training table with coefficients mapped
//! back to the original column scale.

use std::fmt;
use std::str::FromStr;

use ndarray::ArrayView2;

use crate::cd::{self, CdOptions, FitResult};
use crate::dataset::{fit_preprocessing, DescriptorTable, Preprocessing, ScaleMode};
use crate::error::{Error, Result};
use crate::lars::{lars_path, LarsMode};
use crate::linalg;
use crate::penalty::{self, PenaltySpec};
use crate::relaxo;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelKind {
    Lasso,
    Ridge,
    ElasticNet { alpha: f64 },
    Lars,
    Relaxo,
}

/// Mixing parameter used when an elastic net is requested without one.
pub const DEFAULT_ENET_ALPHA: f64 = 0.5;

/// Smallest mixing value used to place the top of an elastic-net grid.
const GRID_ALPHA_FLOOR: f64 = 1e-3;

impl ModelKind {
    /// Lasso, ridge, elastic net, LARS and relaxed lasso, in report order.
    pub fn all() -> Vec<ModelKind> {
        vec![
            ModelKind::Lasso,
            ModelKind::Ridge,
            ModelKind::ElasticNet {
                alpha: DEFAULT_ENET_ALPHA,
            },
            ModelKind::Lars,
            ModelKind::Relaxo,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Lasso => "lasso",
            ModelKind::Ridge => "ridge",
            ModelKind::ElasticNet { .. } => "elasticnet",
            ModelKind::Lars => "lars",
            ModelKind::Relaxo => "relaxo",
        }
    }

    pub fn default_scaling(&self) -> ScaleMode {
        match self {
            ModelKind::Lars => ScaleMode::CenterAndUnitNorm,
            _ => ScaleMode::CenterOnly,
        }
    }

    fn alpha(&self) -> f64 {
        match self {
            ModelKind::Lasso | ModelKind::Lars | ModelKind::Relaxo => 1.0,
            ModelKind::Ridge => 0.0,
            ModelKind::ElasticNet { alpha } => *alpha,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lasso" => ModelKind::Lasso,
            "ridge" => ModelKind::Ridge,
            "enet" | "elasticnet" | "elastic-net" => ModelKind::ElasticNet {
                alpha: DEFAULT_ENET_ALPHA,
            },
            "lars" => ModelKind::Lars,
            "relaxo" | "relaxed-lasso" => ModelKind::Relaxo,
            _ => return Err(Error::InvalidArgument(format!("unknown model '{s}'"))),
        })
    }
}

/// Everything needed to fit one estimator family.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelConfig<T> {
    pub kind: ModelKind,
    pub scaling: ScaleMode,
    pub cd: CdOptions<T>,
    pub grid_count: usize,
    /// Relaxation values for the relaxed lasso, in evaluation order.
    pub phi_grid: Vec<T>,
}

impl<T: Scalar> ModelConfig<T> {
    pub fn new(kind: ModelKind) -> Self {
        Self {
            kind,
            scaling: kind.default_scaling(),
            cd: CdOptions::default(),
            grid_count: penalty::DEFAULT_GRID_COUNT,
            phi_grid: [1.0, 0.75, 0.5, 0.25, 0.0].iter().map(|&v| T::lit(v)).collect(),
        }
    }

    pub fn with_scaling(mut self, scaling: ScaleMode) -> Self {
        self.scaling = scaling;
        self
    }

    fn validate(&self) -> Result<()> {
        if let ModelKind::ElasticNet { alpha } = self.kind {
            if !(0.0..=1.0).contains(&alpha) {
                return Err(Error::InvalidArgument(format!("alpha {alpha} not in [0, 1]")));
            }
        }
        Ok(())
    }

    /// Penalty grid built from a (training) table, largest penalty first.
    ///
    /// Lasso and LARS use `λ₁ = λ`; ridge `λ₂ = λ` starting from the largest
    /// eigenvalue of `XᵀX`; the elastic net splits
    /// `λ` by its mixing parameter; the relaxed lasso grid is on the
    /// mean-squared-error scale crossed with `phi_grid` (λ-major).
    pub fn grid(&self, table: &DescriptorTable<T>) -> Result<Vec<PenaltySpec<T>>> {
        self.validate()?;
        let prep = fit_preprocessing(table, self.scaling)?;
        let t = prep.apply(table)?;
        let n = t.n();
        let lmax = penalty::lambda_max(t.predictors.view(), t.response.view());
        if !(lmax > T::zero()) {
            return Err(Error::InvalidArgument(
                "response is uncorrelated with every predictor".into(),
            ));
        }
        let alpha = self.kind.alpha();
        let top = match self.kind {
            // no null threshold: start where every direction is shrunk at least by half
            ModelKind::Ridge => linalg::gram_spectral_radius(t.predictors.view()),
            _ => lmax / T::lit(alpha.max(GRID_ALPHA_FLOOR)),
        };
        let ratio = penalty::default_ratio::<T>(n, t.p());
        let lambdas = penalty::lambda_grid(top, self.grid_count, ratio)?;
        let mut out = Vec::new();
        match self.kind {
            ModelKind::Relaxo => {
                for l in lambdas {
                    for &phi in &self.phi_grid {
                        out.push(PenaltySpec::lasso(l / T::from_count(n))?.with_phi(phi)?);
                    }
                }
            }
            _ => {
                for l in lambdas {
                    out.push(PenaltySpec::mixed(l, T::lit(alpha))?);
                }
            }
        }
        Ok(out)
    }

    /// Fits every grid point on `train`. Returned coefficients are on the
    /// original column scale with the intercept filled in.
    pub fn fit_grid(&self, train: &DescriptorTable<T>, grid: &[PenaltySpec<T>]) -> Result<Vec<FitResult<T>>> {
        self.validate()?;
        let prep = fit_preprocessing(train, self.scaling)?;
        let t = prep.apply(train)?;
        let x = t.predictors.view();
        let y = t.response.view();
        let scaled: Vec<FitResult<T>> = match self.kind {
            ModelKind::Lasso | ModelKind::ElasticNet { .. } => {
                let lambdas: Vec<T> = grid.iter().map(|s| s.total()).collect();
                let path = cd::fit_path(x, y, &lambdas, T::lit(self.kind.alpha()), &self.cd)?;
                path.points
                    .into_iter()
                    .zip(grid)
                    .map(|(pt, spec)| {
                        let kkt = cd_kkt(x, y, &pt.beta, spec);
                        FitResult::from_beta(pt.beta, 0, kkt, *spec)
                    })
                    .collect()
            }
            ModelKind::Ridge => grid
                .iter()
                .map(|spec| cd::ridge_closed_form(x, y, spec.lambda2).map(|f| FitResult { spec: *spec, ..f }))
                .collect::<Result<_>>()?,
            ModelKind::Lars => {
                let path = lars_path(x, y, LarsMode::Lasso, None)?;
                grid.iter()
                    .map(|spec| {
                        let sol = path.solution_at(spec.lambda1)?;
                        let kkt = cd_kkt(x, y, &sol.beta, spec);
                        Ok(FitResult::from_beta(sol.beta, path.steps(), kkt, *spec))
                    })
                    .collect::<Result<_>>()?
            }
            ModelKind::Relaxo => {
                let (lambdas, phis) = relaxo_axes(grid)?;
                let fits = relaxo::relaxed_surface(x, y, &lambdas, &phis, &self.cd)?;
                fits.into_iter()
                    .zip(grid)
                    .map(|(f, spec)| FitResult::from_beta(f.beta, 0, T::zero(), *spec))
                    .collect()
            }
        };
        Ok(scaled.into_iter().map(|f| to_original(&prep, f)).collect())
    }

    /// Single fit at one penalty setting.
    pub fn fit_one(&self, train: &DescriptorTable<T>, spec: &PenaltySpec<T>) -> Result<FitResult<T>> {
        let mut fits = self.fit_grid(train, std::slice::from_ref(spec))?;
        Ok(fits.remove(0))
    }
}

fn cd_kkt<T: Scalar>(
    x: ArrayView2<'_, T>,
    y: ndarray::ArrayView1<'_, T>,
    beta: &ndarray::Array1<T>,
    spec: &PenaltySpec<T>,
) -> T {
    penalty::kkt_violation(x, y, beta.view(), spec)
        .map(|r| r.max_violation)
        .unwrap_or(T::infinity())
}

fn to_original<T: Scalar>(prep: &Preprocessing<T>, mut fit: FitResult<T>) -> FitResult<T> {
    let (beta, intercept) = prep.to_original(&fit.beta);
    fit.beta = beta;
    fit.intercept = intercept;
    fit
}

/// Recovers the λ axis and φ axis of a λ-major relaxed-lasso grid.
fn relaxo_axes<T: Scalar>(grid: &[PenaltySpec<T>]) -> Result<(Vec<T>, Vec<T>)> {
    let first = grid
        .first()
        .ok_or_else(|| Error::InvalidArgument("empty grid".into()))?
        .lambda1;
    let phis: Vec<T> = grid.iter().take_while(|s| s.lambda1 == first).map(|s| s.phi).collect();
    let lambdas: Vec<T> = grid.iter().step_by(phis.len()).map(|s| s.lambda1).collect();
    let consistent = grid.len() == lambdas.len() * phis.len()
        && grid
            .iter()
            .enumerate()
            .all(|(i, s)| s.lambda1 == lambdas[i / phis.len()] && s.phi == phis[i % phis.len()]);
    if !consistent {
        return Err(Error::InvalidArgument(
            "relaxed lasso grid must be a lambda-major product of lambda and phi values".into(),
        ));
    }
    Ok((lambdas, phis))
}
