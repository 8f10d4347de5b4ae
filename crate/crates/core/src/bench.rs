//! Repeated-resampling benchmark of several estimators on a paired design,
//! with summaries, pairwise paired t-tests and Tukey all-pair intervals.

use std::fmt::{self, Write as _};
use std::io::{BufRead, BufReader, Read, Write};

use ndarray::{Array1, Array2};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::dataset::{kfold, train_test_split, DescriptorTable};
use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::rng::derive_seed;
use crate::scalar::Scalar;
use crate::selection::{r_square, rmse, select_and_refit, SelectionRule};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Rmse,
    RSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partition {
    Train,
    Test,
}

impl Metric {
    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Rmse => "rmse",
            Metric::RSquare => "rsquare",
        }
    }
}

impl Partition {
    pub fn as_str(&self) -> &'static str {
        match self {
            Partition::Train => "train",
            Partition::Test => "test",
        }
    }
}

/// One metric for every (run, model) cell; every row comes from one shared resample.
#[derive(Debug, Clone, PartialEq)]
pub struct RunMatrix {
    pub values: Array2<f64>,
    pub model_names: Vec<String>,
    pub metric: Metric,
    pub partition: Partition,
    pub seeds: Vec<u64>,
    pub aligned: bool,
}

impl RunMatrix {
    pub fn new(
        values: Array2<f64>,
        model_names: Vec<String>,
        metric: Metric,
        partition: Partition,
        seeds: Vec<u64>,
    ) -> Result<Self> {
        if values.ncols() != model_names.len() || values.nrows() != seeds.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} values for {} models and {} seeds",
                values.nrows(),
                values.ncols(),
                model_names.len(),
                seeds.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("run matrix has non-finite entries".into()));
        }
        Ok(Self {
            values,
            model_names,
            metric,
            partition,
            seeds,
            aligned: false,
        })
    }

    pub fn runs(&self) -> usize {
        self.values.nrows()
    }

    pub fn models(&self) -> usize {
        self.values.ncols()
    }

    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# metric={} partition={} aligned={}",
            self.metric.as_str(),
            self.partition.as_str(),
            self.aligned
        )?;
        writeln!(out, "run,seed,{}", self.model_names.join(","))?;
        for (r, row) in self.values.rows().into_iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(out, "{},{},{}", r, self.seeds[r], cells.join(","))?;
        }
        Ok(())
    }

    pub fn read<R: Read>(source: R) -> Result<Self> {
        let mut metric = Metric::Rmse;
        let mut partition = Partition::Test;
        let mut aligned = false;
        let mut names: Option<Vec<String>> = None;
        let mut seeds = Vec::new();
        let mut cells = Vec::new();
        for (lineno, line) in BufReader::new(source).lines().enumerate() {
            let row = lineno + 1;
            let line = line.map_err(|e| Error::Parse {
                row,
                column: 0,
                message: e.to_string(),
            })?;
            let line = line.trim();
            if let Some(c) = line.strip_prefix('#') {
                for kv in c.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("metric", "rsquare")) => metric = Metric::RSquare,
                        Some(("metric", _)) => metric = Metric::Rmse,
                        Some(("partition", "train")) => partition = Partition::Train,
                        Some(("partition", _)) => partition = Partition::Test,
                        Some(("aligned", v)) => aligned = v == "true",
                        _ => {}
                    }
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            match &names {
                None => names = Some(fields[2..].iter().map(|s| s.to_string()).collect()),
                Some(n) => {
                    if fields.len() != n.len() + 2 {
                        return Err(Error::Ragged {
                            row,
                            expected: n.len() + 2,
                            found: fields.len(),
                        });
                    }
                    seeds.push(fields[1].parse().map_err(|_| Error::Parse {
                        row,
                        column: 2,
                        message: "bad seed".into(),
                    })?);
                    for (j, f) in fields[2..].iter().enumerate() {
                        cells.push(f.parse::<f64>().map_err(|_| Error::Parse {
                            row,
                            column: j + 3,
                            message: format!("'{f}' is not a number"),
                        })?);
                    }
                }
            }
        }
        let names = names.ok_or(Error::TooSmall { rows: 0, columns: 0 })?;
        let values = Array2::from_shape_vec((seeds.len(), names.len()), cells)
            .map_err(|e| Error::DimensionMismatch(e.to_string()))?;
        let mut m = RunMatrix::new(values, names, metric, partition, seeds)?;
        m.aligned = aligned;
        Ok(m)
    }
}

/// Benchmark protocol settings.
#[derive(Debug, Clone)]
pub struct BenchConfig<T> {
    pub models: Vec<ModelConfig<T>>,
    pub runs: usize,
    pub seed: u64,
    pub folds: usize,
    pub train_fraction: f64,
    pub rule: SelectionRule,
}

impl<T: Scalar> BenchConfig<T> {
    /// Five estimators, 25 runs, 10 folds, 76% training rows.
    pub fn standard(seed: u64) -> Self {
        Self {
            models: crate::model::ModelKind::all()
                .into_iter()
                .map(ModelConfig::new)
                .collect(),
            runs: 25,
            seed,
            folds: 10,
            train_fraction: 0.76,
            rule: SelectionRule::MinError,
        }
    }
}

/// Everything one benchmark produces.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchOutcome {
    pub train_rmse: RunMatrix,
    pub test_rmse: RunMatrix,
    pub train_r_square: RunMatrix,
    pub test_r_square: RunMatrix,
    /// runs × models: hash of the split each model was evaluated on.
    pub split_hashes: Vec<Vec<String>>,
    /// runs × models: selected `(λ, φ)`.
    pub chosen: Vec<Vec<(f64, f64)>>,
}

struct Cell {
    train_rmse: f64,
    test_rmse: f64,
    train_r2: f64,
    test_r2: f64,
    hash: String,
    chosen: (f64, f64),
}

fn split_hash<T>(train: &DescriptorTable<T>, test: &DescriptorTable<T>) -> String {
    let mut h = Sha256::new();
    for id in &train.row_ids {
        h.update(id.as_bytes());
        h.update(b",");
    }
    h.update(b"|");
    for id in &test.row_ids {
        h.update(id.as_bytes());
        h.update(b",");
    }
    h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn evaluate<T: Scalar>(
    train: &DescriptorTable<T>,
    test: &DescriptorTable<T>,
    model: &ModelConfig<T>,
    folds: &crate::dataset::FoldAssignment,
    rule: SelectionRule,
) -> Result<Cell> {
    let (curve, fit) = select_and_refit(train, model, folds, rule)?;
    let fitted = fit.predict(train.predictors.view());
    let pred = fit.predict(test.predictors.view());
    let spec = curve.chosen_spec();
    Ok(Cell {
        train_rmse: rmse(train.response.view(), fitted.view())?.to_f64_lossy(),
        test_rmse: rmse(test.response.view(), pred.view())?.to_f64_lossy(),
        train_r2: r_square(train.response.view(), fitted.view())?.to_f64_lossy(),
        test_r2: r_square(test.response.view(), pred.view())?.to_f64_lossy(),
        hash: split_hash(train, test),
        chosen: (spec.total().to_f64_lossy(), spec.phi.to_f64_lossy()),
    })
}

const FOLD_STREAM: u64 = 0xF01D;

/// Runs every model on `runs` shared random splits. Run `r` uses split seed
/// `seed ^ r`; its cross-validation folds are derived from that seed.
pub fn run_benchmark<T: Scalar>(table: &DescriptorTable<T>, cfg: &BenchConfig<T>) -> Result<BenchOutcome> {
    if cfg.runs < 2 {
        return Err(Error::InvalidArgument("benchmark needs at least 2 runs".into()));
    }
    if cfg.models.is_empty() {
        return Err(Error::InvalidArgument("no models to benchmark".into()));
    }
    let names: Vec<String> = cfg.models.iter().map(|m| m.kind.name().to_string()).collect();
    let rows: Vec<(u64, Vec<Cell>)> = (0..cfg.runs)
        .into_par_iter()
        .map(|r| -> Result<(u64, Vec<Cell>)> {
            let run_seed = cfg.seed ^ r as u64;
            let plan = train_test_split(table.n(), cfg.train_fraction, run_seed)?;
            let train = table.select_rows(&plan.train_indices);
            let test = table.select_rows(&plan.test_indices);
            let folds = kfold(train.n(), cfg.folds, derive_seed(run_seed, FOLD_STREAM))?;
            let cells = cfg
                .models
                .iter()
                .map(|m| {
                    evaluate(&train, &test, m, &folds, cfg.rule).map_err(|e| Error::Run {
                        run: r,
                        model: m.kind.name().to_string(),
                        source: Box::new(e),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((run_seed, cells))
        })
        .collect::<Result<_>>()?;

    let seeds: Vec<u64> = rows.iter().map(|(s, _)| *s).collect();
    let grab = |f: fn(&Cell) -> f64| Array2::from_shape_fn((cfg.runs, names.len()), |(r, m)| f(&rows[r].1[m]));
    let mk = |values, metric, partition| RunMatrix::new(values, names.clone(), metric, partition, seeds.clone());
    Ok(BenchOutcome {
        train_rmse: mk(grab(|c| c.train_rmse), Metric::Rmse, Partition::Train)?,
        test_rmse: mk(grab(|c| c.test_rmse), Metric::Rmse, Partition::Test)?,
        train_r_square: mk(grab(|c| c.train_r2), Metric::RSquare, Partition::Train)?,
        test_r_square: mk(grab(|c| c.test_r2), Metric::RSquare, Partition::Test)?,
        split_hashes: rows
            .iter()
            .map(|(_, c)| c.iter().map(|x| x.hash.clone()).collect())
            .collect(),
        chosen: rows.iter().map(|(_, c)| c.iter().map(|x| x.chosen).collect()).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub min: f64,
    pub median: f64,
    pub max: f64,
    pub mean: f64,
}

/// Column-wise minimum, median, maximum and mean.
pub fn summarize(rm: &RunMatrix) -> Vec<Summary> {
    rm.values
        .columns()
        .into_iter()
        .map(|col| {
            let mut v = col.to_vec();
            v.sort_by(f64::total_cmp);
            let n = v.len();
            let median = if n % 2 == 1 {
                v[n / 2]
            } else {
                0.5 * (v[n / 2 - 1] + v[n / 2])
            };
            Summary {
                min: v[0],
                median,
                max: v[n - 1],
                mean: v.iter().sum::<f64>() / n as f64,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Adjustment {
    None,
    #[default]
    Holm,
    Bonferroni,
}

impl std::str::FromStr for Adjustment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Adjustment::None),
            "holm" => Ok(Adjustment::Holm),
            "bonferroni" => Ok(Adjustment::Bonferroni),
            _ => Err(Error::InvalidArgument(format!("unknown adjustment '{s}'"))),
        }
    }
}

impl fmt::Display for Adjustment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Adjustment::None => "none",
            Adjustment::Holm => "holm",
            Adjustment::Bonferroni => "bonferroni",
        })
    }
}

/// All-pair paired t-tests. `differences` holds mean(row − column) in the
/// upper triangle and `p_values` the adjusted p-values in the lower
/// triangle (NaN elsewhere); the full matrices are kept alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseTable {
    pub model_names: Vec<String>,
    pub differences: Array2<f64>,
    pub p_values: Array2<f64>,
    pub mean_differences: Array2<f64>,
    pub t_statistics: Array2<f64>,
    pub raw_p_values: Array2<f64>,
    pub adjusted_p_values: Array2<f64>,
    pub adjustment: Adjustment,
}

/// Paired t statistic and two-sided p-value for differences `d`.
pub fn paired_t(d: &[f64]) -> (f64, f64) {
    let m = d.len() as f64;
    let mean = d.iter().sum::<f64>() / m;
    let var = d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0);
    if var == 0.0 {
        return if mean == 0.0 {
            (0.0, 1.0)
        } else {
            (mean.signum() * f64::INFINITY, stats::P_FLOOR)
        };
    }
    let t = mean / (var.sqrt() / m.sqrt());
    (t, stats::student_t_two_sided(t, m - 1.0).max(stats::P_FLOOR))
}

pub fn paired_ttest_matrix(rm: &RunMatrix, adjustment: Adjustment) -> Result<PairwiseTable> {
    if rm.runs() < 2 {
        return Err(Error::InvalidArgument("paired t-tests need at least 2 runs".into()));
    }
    let k = rm.models();
    let nan = || Array2::from_elem((k, k), f64::NAN);
    let (mut diff, mut tstat, mut raw) = (nan(), nan(), nan());
    let mut pairs = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let d: Vec<f64> = rm
                .values
                .column(i)
                .iter()
                .zip(rm.values.column(j).iter())
                .map(|(a, b)| a - b)
                .collect();
            let (t, p) = paired_t(&d);
            let mean = d.iter().sum::<f64>() / d.len() as f64;
            diff[[i, j]] = mean;
            diff[[j, i]] = -mean;
            tstat[[i, j]] = t;
            tstat[[j, i]] = -t;
            raw[[i, j]] = p;
            raw[[j, i]] = p;
            pairs.push((i, j));
        }
    }
    let flat: Vec<f64> = pairs.iter().map(|&(i, j)| raw[[i, j]]).collect();
    let adj_flat = match adjustment {
        Adjustment::None => flat,
        Adjustment::Holm => stats::holm(&flat),
        Adjustment::Bonferroni => stats::bonferroni(&flat),
    };
    let mut adj = nan();
    let (mut upper, mut lower) = (nan(), nan());
    for (&(i, j), &p) in pairs.iter().zip(&adj_flat) {
        adj[[i, j]] = p;
        adj[[j, i]] = p;
        upper[[i, j]] = diff[[i, j]];
        lower[[j, i]] = p;
    }
    Ok(PairwiseTable {
        model_names: rm.model_names.clone(),
        differences: upper,
        p_values: lower,
        mean_differences: diff,
        t_statistics: tstat,
        raw_p_values: raw,
        adjusted_p_values: adj,
        adjustment,
    })
}

impl PairwiseTable {
    /// One row per pair `i < j`: `first,second,mean_difference,t,p_raw,p_adjusted`.
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# models={} adjustment={}",
            self.model_names.join(";"),
            self.adjustment
        )?;
        writeln!(out, "first,second,mean_difference,t,p_raw,p_adjusted")?;
        let k = self.model_names.len();
        for i in 0..k {
            for j in i + 1..k {
                writeln!(
                    out,
                    "{},{},{:e},{:e},{:e},{:e}",
                    self.model_names[i],
                    self.model_names[j],
                    self.mean_differences[[i, j]],
                    self.t_statistics[[i, j]],
                    self.raw_p_values[[i, j]],
                    self.adjusted_p_values[[i, j]]
                )?;
            }
        }
        Ok(())
    }

    pub fn read<R: Read>(source: R) -> Result<Self> {
        let mut names: Vec<String> = Vec::new();
        let mut adjustment = Adjustment::Holm;
        let mut rows: Vec<(usize, [f64; 4])> = Vec::new();
        for (lineno, line) in BufReader::new(source).lines().enumerate() {
            let row = lineno + 1;
            let line = line.map_err(|e| Error::Parse {
                row,
                column: 0,
                message: e.to_string(),
            })?;
            if let Some(c) = line.strip_prefix('#') {
                for kv in c.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("models", v)) => names = v.split(';').map(String::from).collect(),
                        Some(("adjustment", v)) => adjustment = v.parse()?,
                        _ => {}
                    }
                }
                continue;
            }
            if line.is_empty() || line.starts_with("first,") {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(Error::Ragged {
                    row,
                    expected: 6,
                    found: f.len(),
                });
            }
            let mut v = [0.0; 4];
            for (c, slot) in v.iter_mut().enumerate() {
                *slot = f[c + 2].parse().map_err(|_| Error::Parse {
                    row,
                    column: c + 3,
                    message: format!("'{}' is not a number", f[c + 2]),
                })?;
            }
            rows.push((row, v));
        }
        let k = names.len();
        if rows.len() != k * k.saturating_sub(1) / 2 {
            return Err(Error::DimensionMismatch(format!("{} pairs for {k} models", rows.len())));
        }
        let nan = || Array2::from_elem((k, k), f64::NAN);
        let (mut diff, mut tstat, mut raw, mut adj, mut upper, mut lower) = (nan(), nan(), nan(), nan(), nan(), nan());
        let mut it = rows.iter();
        for i in 0..k {
            for j in i + 1..k {
                let (_, [d, t, pr, pa]) = *it.next().expect("counted");
                diff[[i, j]] = d;
                diff[[j, i]] = -d;
                tstat[[i, j]] = t;
                tstat[[j, i]] = -t;
                raw[[i, j]] = pr;
                raw[[j, i]] = pr;
                adj[[i, j]] = pa;
                adj[[j, i]] = pa;
                upper[[i, j]] = d;
                lower[[j, i]] = pa;
            }
        }
        Ok(Self {
            model_names: names,
            differences: upper,
            p_values: lower,
            mean_differences: diff,
            t_statistics: tstat,
            raw_p_values: raw,
            adjusted_p_values: adj,
            adjustment,
        })
    }

    /// Number of populated cells in the upper and lower triangles.
    pub fn populated(&self) -> (usize, usize) {
        (
            self.differences.iter().filter(|v| !v.is_nan()).count(),
            self.p_values.iter().filter(|v| !v.is_nan()).count(),
        )
    }
}

/// Subtracts each run's cross-model mean from that run.
pub fn align(rm: &RunMatrix) -> RunMatrix {
    let k = rm.models() as f64;
    let mut out = rm.clone();
    for mut row in out.values.rows_mut() {
        let m = row.sum() / k;
        row.mapv_inplace(|v| v - m);
    }
    out.aligned = true;
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct TukeyPair {
    pub first: String,
    pub second: String,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

impl TukeyPair {
    pub fn significant(&self) -> bool {
        self.lower > 0.0 || self.upper < 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TukeyIntervals {
    pub pairs: Vec<TukeyPair>,
    pub confidence: f64,
    pub aligned: bool,
    pub df: f64,
    pub quantile: f64,
    pub pooled_sd: f64,
    /// Zero pooled variance: every interval collapsed to its estimate.
    pub degenerate: bool,
}

/// Tukey simultaneous intervals for all pairwise mean differences in a
/// one-way layout with equal group sizes (`ν = k·(m − 1)`).
pub fn tukey_intervals(rm: &RunMatrix, confidence: f64) -> Result<TukeyIntervals> {
    let (m, k) = (rm.runs(), rm.models());
    if m < 2 || k < 2 {
        return Err(Error::InvalidArgument(
            "Tukey intervals need at least 2 runs and 2 models".into(),
        ));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidArgument(format!("confidence {confidence} not in (0, 1)")));
    }
    let means: Array1<f64> = rm.values.mean_axis(ndarray::Axis(0)).expect("nonempty");
    let mut ss = 0.0;
    for row in rm.values.rows() {
        for (j, v) in row.iter().enumerate() {
            ss += (v - means[j]) * (v - means[j]);
        }
    }
    let df = (k * (m - 1)) as f64;
    let pooled_sd = (ss / df).sqrt();
    let quantile = stats::studentized_range_quantile(confidence, k, df);
    let half = quantile * pooled_sd / (m as f64).sqrt();
    let mut pairs = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let est = means[i] - means[j];
            pairs.push(TukeyPair {
                first: rm.model_names[i].clone(),
                second: rm.model_names[j].clone(),
                estimate: est,
                lower: est - half,
                upper: est + half,
            });
        }
    }
    Ok(TukeyIntervals {
        pairs,
        confidence,
        aligned: rm.aligned,
        df,
        quantile,
        pooled_sd,
        degenerate: pooled_sd == 0.0,
    })
}

impl TukeyIntervals {
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# confidence={} aligned={} df={} quantile={:e} pooled_sd={:e}",
            self.confidence, self.aligned, self.df, self.quantile, self.pooled_sd
        )?;
        writeln!(out, "first,second,estimate,lower,upper,significant")?;
        for p in &self.pairs {
            writeln!(
                out,
                "{},{},{:e},{:e},{:e},{}",
                p.first,
                p.second,
                p.estimate,
                p.lower,
                p.upper,
                p.significant()
            )?;
        }
        Ok(())
    }

    pub fn read<R: Read>(source: R) -> Result<Self> {
        let mut iv = TukeyIntervals {
            pairs: Vec::new(),
            confidence: f64::NAN,
            aligned: false,
            df: f64::NAN,
            quantile: f64::NAN,
            pooled_sd: f64::NAN,
            degenerate: false,
        };
        for (lineno, line) in BufReader::new(source).lines().enumerate() {
            let row = lineno + 1;
            let line = line.map_err(|e| Error::Parse {
                row,
                column: 0,
                message: e.to_string(),
            })?;
            let num = |s: &str, column| {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    row,
                    column,
                    message: format!("'{s}' is not a number"),
                })
            };
            if let Some(c) = line.strip_prefix('#') {
                for kv in c.split_whitespace() {
                    match kv.split_once('=') {
                        Some(("confidence", v)) => iv.confidence = num(v, 0)?,
                        Some(("aligned", v)) => iv.aligned = v == "true",
                        Some(("df", v)) => iv.df = num(v, 0)?,
                        Some(("quantile", v)) => iv.quantile = num(v, 0)?,
                        Some(("pooled_sd", v)) => iv.pooled_sd = num(v, 0)?,
                        _ => {}
                    }
                }
                continue;
            }
            if line.is_empty() || line.starts_with("first,") {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 6 {
                return Err(Error::Ragged {
                    row,
                    expected: 6,
                    found: f.len(),
                });
            }
            iv.pairs.push(TukeyPair {
                first: f[0].into(),
                second: f[1].into(),
                estimate: num(f[2], 3)?,
                lower: num(f[3], 4)?,
                upper: num(f[4], 5)?,
            });
        }
        iv.degenerate = iv.pooled_sd == 0.0;
        Ok(iv)
    }
}

/// Settings for the human-readable report.
#[derive(Debug, Clone, Copy)]
pub struct ReportOptions {
    pub confidence: f64,
    pub adjustment: Adjustment,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            confidence: 0.99,
            adjustment: Adjustment::Holm,
        }
    }
}

fn pairwise_block(out: &mut String, title: &str, t: &PairwiseTable) {
    let k = t.model_names.len();
    let _ = writeln!(out, "{title}");
    let _ = writeln!(
        out,
        "  (upper: mean difference row - column; lower: {}-adjusted p-value)",
        t.adjustment
    );
    let _ = write!(out, "  {:<12}", "");
    for n in &t.model_names {
        let _ = write!(out, "{n:>13}");
    }
    let _ = writeln!(out);
    for i in 0..k {
        let _ = write!(out, "  {:<12}", t.model_names[i]);
        for j in 0..k {
            let cell = if i < j {
                format!("{:.5}", t.differences[[i, j]])
            } else if i > j {
                format!("{:.4e}", t.p_values[[i, j]])
            } else {
                String::new()
            };
            let _ = write!(out, "{cell:>13}");
        }
        let _ = writeln!(out);
    }
    let _ = writeln!(out, "  unadjusted p-values:");
    for i in 0..k {
        for j in i + 1..k {
            let _ = writeln!(
                out,
                "    {} vs {}: t = {:.4}, p = {:.4e}",
                t.model_names[i],
                t.model_names[j],
                t.t_statistics[[i, j]],
                t.raw_p_values[[i, j]]
            );
        }
    }
}

fn summary_block(out: &mut String, title: &str, rm: &RunMatrix) {
    let _ = writeln!(out, "{title}");
    let _ = writeln!(
        out,
        "  {:<12}{:>12}{:>12}{:>12}{:>12}",
        "model", "min", "median", "max", "mean"
    );
    for (name, s) in rm.model_names.iter().zip(summarize(rm)) {
        let _ = writeln!(
            out,
            "  {:<12}{:>12.6}{:>12.6}{:>12.6}{:>12.6}",
            name, s.min, s.median, s.max, s.mean
        );
    }
}

/// Renders the full text report from the four run matrices.
pub fn render_report(outcome: &BenchOutcome, opts: &ReportOptions) -> Result<String> {
    let mut out = String::new();
    let rm = &outcome.test_rmse;
    let _ = writeln!(out, "Regularized regression benchmark");
    let _ = writeln!(out, "runs: {}  models: {}", rm.runs(), rm.models());
    let _ = writeln!(out);

    let _ = writeln!(out, "Train/test accuracy (mean over runs)");
    let _ = writeln!(
        out,
        "  {:<12}{:>12}{:>12}{:>12}{:>12}",
        "model", "train RMSE", "test RMSE", "train R2", "test R2"
    );
    let means = |m: &RunMatrix| m.values.mean_axis(ndarray::Axis(0)).expect("nonempty");
    let (a, b, c, d) = (
        means(&outcome.train_rmse),
        means(&outcome.test_rmse),
        means(&outcome.train_r_square),
        means(&outcome.test_r_square),
    );
    for (j, name) in rm.model_names.iter().enumerate() {
        let _ = writeln!(
            out,
            "  {:<12}{:>12.6}{:>12.6}{:>12.6}{:>12.6}",
            name, a[j], b[j], c[j], d[j]
        );
    }
    let _ = writeln!(out);

    if rm.models() < 2 {
        summary_block(&mut out, "Resampling summary, test RMSE", &outcome.test_rmse);
        let _ = writeln!(out);
        summary_block(&mut out, "Resampling summary, test R2", &outcome.test_r_square);
        return Ok(out);
    }
    pairwise_block(
        &mut out,
        "Pairwise paired t-tests, test RMSE",
        &paired_ttest_matrix(&outcome.test_rmse, opts.adjustment)?,
    );
    let _ = writeln!(out);
    pairwise_block(
        &mut out,
        "Pairwise paired t-tests, test R2",
        &paired_ttest_matrix(&outcome.test_r_square, opts.adjustment)?,
    );
    let _ = writeln!(out);

    summary_block(&mut out, "Resampling summary, test RMSE", &outcome.test_rmse);
    let _ = writeln!(out);
    summary_block(&mut out, "Resampling summary, test R2", &outcome.test_r_square);
    let _ = writeln!(out);

    let tk = tukey_intervals(&align(&outcome.test_rmse), opts.confidence)?;
    let _ = writeln!(
        out,
        "Tukey all-pair {}% simultaneous intervals, aligned test RMSE (df = {}, q = {:.4})",
        opts.confidence * 100.0,
        tk.df,
        tk.quantile
    );
    if tk.degenerate {
        let _ = writeln!(out, "  pooled variance is zero; intervals are degenerate");
    }
    for p in &tk.pairs {
        let _ = writeln!(
            out,
            "  {:<24}{:>12.6}  [{:>10.6}, {:>10.6}]{}",
            format!("{} - {}", p.first, p.second),
            p.estimate,
            p.lower,
            p.upper,
            if p.significant() { "  *" } else { "" }
        );
    }
    Ok(out)
}
