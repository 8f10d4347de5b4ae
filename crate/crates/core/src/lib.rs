//! Penalized linear regression for small-n, large-p descriptor tables:
//! lasso, ridge and elastic net by coordinate descent, LARS paths, the
//! relaxed lasso, cross-validated tuning and a resampling benchmark with
//! paired tests and Tukey intervals.
//!
//! Solvers are generic over [`Scalar`] (`f32` or `f64`); the aliases below
//! fix the common `f64` and `f32` instantiations.

// `!(a >= b)` comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod cd;
pub mod dataset;
pub mod error;
pub mod lars;
pub mod linalg;
pub mod model;
pub mod penalty;
pub mod relaxo;
pub mod rng;
pub mod scalar;
pub mod selection;
pub mod stats;
pub mod synth;

pub use bench::{
    align, paired_ttest_matrix, render_report, run_benchmark, summarize, tukey_intervals, Adjustment, BenchConfig,
    BenchOutcome, Metric, PairwiseTable, Partition, ReportOptions, RunMatrix, Summary, TukeyIntervals, TukeyPair,
};
pub use cd::{
    fit_at, fit_path, ridge_closed_form, CdOptions, CoefficientPath, CoordinateDescent, FitResult, PathPoint,
};
pub use dataset::{
    fit_preprocessing, kfold, load_table, train_test_split, DescriptorTable, FoldAssignment, Preprocessing, ScaleMode,
    SplitPlan,
};
pub use error::{Error, ErrorKind, Result};
pub use lars::{lars_path, path_solution_at, LarsMode, LarsPath, PathKnot, PathSolution, Termination};
pub use model::{ModelConfig, ModelKind};
pub use penalty::{kkt_violation, lambda_grid, lambda_max, objective_value, soft_threshold, KktReport, PenaltySpec};
pub use relaxo::{active_set, relaxed_fit, relaxed_surface, RelaxedFit};
pub use rng::{derive_seed, SeededRng};
pub use scalar::Scalar;
pub use selection::{cross_validate, r_square, rmse, select_and_refit, CvCurve, SelectionRule};
pub use synth::{generate, SynthSpec};

pub type Table = DescriptorTable<f64>;
pub type Fit = FitResult<f64>;
pub type Path = CoefficientPath<f64>;
pub type Lars = LarsPath<f64>;
pub type Relaxed = RelaxedFit<f64>;
pub type Penalty = PenaltySpec<f64>;
pub type Model = ModelConfig<f64>;
pub type Curve = CvCurve<f64>;

pub type Table32 = DescriptorTable<f32>;
pub type Fit32 = FitResult<f32>;
pub type Path32 = CoefficientPath<f32>;
pub type Lars32 = LarsPath<f32>;
pub type Penalty32 = PenaltySpec<f32>;
