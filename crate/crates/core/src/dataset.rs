//! Descriptor tables, centering/scaling, and seeded resampling plans.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};

use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::scalar::Scalar;

/// Predictor matrix (observations in rows) with its response vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorTable<T> {
    pub predictors: Array2<T>,
    pub response: Array1<T>,
    pub column_names: Vec<String>,
    pub response_name: String,
    pub row_ids: Vec<String>,
}

impl<T: Scalar> DescriptorTable<T> {
    /// Builds a table with generated labels (`x1..xp`, `y`, row numbers).
    pub fn new(predictors: Array2<T>, response: Array1<T>) -> Result<Self> {
        let p = predictors.ncols();
        let n = predictors.nrows();
        Self::with_labels(
            predictors,
            response,
            (1..=p).map(|j| format!("x{j}")).collect(),
            "y".to_string(),
            (1..=n).map(|i| i.to_string()).collect(),
        )
    }

    pub fn with_labels(
        predictors: Array2<T>,
        response: Array1<T>,
        column_names: Vec<String>,
        response_name: String,
        row_ids: Vec<String>,
    ) -> Result<Self> {
        let (n, p) = predictors.dim();
        if n < 2 || p < 1 {
            return Err(Error::TooSmall {
                rows: n,
                columns: p + 1,
            });
        }
        if response.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "response length {} vs {} rows",
                response.len(),
                n
            )));
        }
        if column_names.len() != p || row_ids.len() != n {
            return Err(Error::DimensionMismatch("label count".into()));
        }
        for ((i, j), v) in predictors.indexed_iter() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i, column: j });
            }
        }
        if let Some(i) = response.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: i, column: p });
        }
        Ok(Self {
            predictors,
            response,
            column_names,
            response_name,
            row_ids,
        })
    }

    pub fn n(&self) -> usize {
        self.predictors.nrows()
    }

    pub fn p(&self) -> usize {
        self.predictors.ncols()
    }

    /// Rows selected by `idx`, in that order. Labels are carried along.
    pub fn select_rows(&self, idx: &[usize]) -> Self {
        Self {
            predictors: self.predictors.select(Axis(0), idx),
            response: self.response.select(Axis(0), idx),
            column_names: self.column_names.clone(),
            response_name: self.response_name.clone(),
            row_ids: idx.iter().map(|&i| self.row_ids[i].clone()).collect(),
        }
    }

    /// Writes comma-separated text with a header row; the response is last.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = self.column_names.join(",");
        header.push(',');
        header.push_str(&self.response_name);
        writeln!(out, "{header}")?;
        let mut line = String::new();
        for (row, y) in self.predictors.rows().into_iter().zip(self.response.iter()) {
            line.clear();
            for v in row.iter() {
                let _ = write!(line, "{v:e},");
            }
            let _ = write!(line, "{y:e}");
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Parses comma-separated text whose last column is the response.
/// Row and column positions in errors are 1-based line and field numbers.
pub fn load_table<T: Scalar, R: Read>(source: R, has_header: bool) -> Result<DescriptorTable<T>> {
    let reader = BufReader::new(source);
    let mut header: Option<Vec<String>> = None;
    let mut width: Option<usize> = None;
    let mut values: Vec<T> = Vec::new();
    let mut rows = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            row: lineno + 1,
            column: 0,
            message: e.to_string(),
        })?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if has_header && header.is_none() {
            width = Some(fields.len());
            header = Some(fields.iter().map(|s| s.to_string()).collect());
            continue;
        }
        let expected = *width.get_or_insert(fields.len());
        if fields.len() != expected {
            return Err(Error::Ragged {
                row: lineno + 1,
                expected,
                found: fields.len(),
            });
        }
        for (j, f) in fields.iter().enumerate() {
            let v: T = f.parse().map_err(|_| Error::Parse {
                row: lineno + 1,
                column: j + 1,
                message: format!("'{f}' is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: lineno + 1,
                    column: j + 1,
                });
            }
            values.push(v);
        }
        rows += 1;
    }
    let width = width.unwrap_or(0);
    if rows < 2 || width < 2 {
        return Err(Error::TooSmall { rows, columns: width });
    }
    let all = Array2::from_shape_vec((rows, width), values).map_err(|e| Error::DimensionMismatch(e.to_string()))?;
    let p = width - 1;
    let predictors = all.slice(ndarray::s![.., ..p]).to_owned();
    let response = all.column(p).to_owned();
    let (column_names, response_name) = match header {
        Some(mut h) => {
            let y = h.pop().unwrap_or_else(|| "y".into());
            (h, y)
        }
        None => ((1..=p).map(|j| format!("x{j}")).collect(), "y".into()),
    };
    DescriptorTable::with_labels(
        predictors,
        response,
        column_names,
        response_name,
        (1..=rows).map(|i| i.to_string()).collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScaleMode {
    #[default]
    CenterOnly,
    CenterAndUnitNorm,
}

impl std::str::FromStr for ScaleMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "center" | "center-only" | "center_only" => Ok(Self::CenterOnly),
            "unit-norm" | "unit_norm" | "center-and-unit-norm" => Ok(Self::CenterAndUnitNorm),
            _ => Err(Error::InvalidArgument(format!("unknown scaling mode '{s}'"))),
        }
    }
}

impl std::fmt::Display for ScaleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::CenterOnly => "center-only",
            Self::CenterAndUnitNorm => "unit-norm",
        })
    }
}

/// Column statistics learned on a fitting table and reused on held-out rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessing<T> {
    pub column_means: Array1<T>,
    pub column_scales: Array1<T>,
    pub response_mean: T,
    pub mode: ScaleMode,
}

pub fn fit_preprocessing<T: Scalar>(table: &DescriptorTable<T>, mode: ScaleMode) -> Result<Preprocessing<T>> {
    let x = &table.predictors;
    let n = T::from_count(x.nrows());
    let column_means = x.sum_axis(Axis(0)) / n;
    let response_mean = table.response.sum() / n;
    let column_scales = match mode {
        ScaleMode::CenterOnly => Array1::ones(x.ncols()),
        ScaleMode::CenterAndUnitNorm => {
            let mut scales = Array1::zeros(x.ncols());
            for (j, col) in x.columns().into_iter().enumerate() {
                let m = column_means[j];
                let norm = col.iter().map(|v| (*v - m) * (*v - m)).sum::<T>().sqrt();
                let spread = col.iter().fold(T::zero(), |a, v| a.max((*v - m).abs()));
                if !(norm > T::zero()) || spread <= m.abs() * T::epsilon() * T::lit(16.0) {
                    return Err(Error::ConstantColumn {
                        name: table.column_names[j].clone(),
                    });
                }
                scales[j] = norm;
            }
            scales
        }
    };
    Ok(Preprocessing {
        column_means,
        column_scales,
        response_mean,
        mode,
    })
}

impl<T: Scalar> Preprocessing<T> {
    /// Identity transform for `p` columns.
    pub fn identity(p: usize) -> Self {
        Self {
            column_means: Array1::zeros(p),
            column_scales: Array1::ones(p),
            response_mean: T::zero(),
            mode: ScaleMode::CenterOnly,
        }
    }

    fn check(&self, p: usize) -> Result<()> {
        if self.column_means.len() != p || self.column_scales.len() != p {
            return Err(Error::DimensionMismatch(format!(
                "preprocessing for {} columns applied to {}",
                self.column_means.len(),
                p
            )));
        }
        Ok(())
    }

    pub fn transform_predictors(&self, x: &Array2<T>) -> Result<Array2<T>> {
        self.check(x.ncols())?;
        Ok((x - &self.column_means) / &self.column_scales)
    }

    pub fn apply(&self, table: &DescriptorTable<T>) -> Result<DescriptorTable<T>> {
        let predictors = self.transform_predictors(&table.predictors)?;
        Ok(DescriptorTable {
            predictors,
            response: table.response.mapv(|v| v - self.response_mean),
            ..table.clone()
        })
    }

    pub fn invert(&self, table: &DescriptorTable<T>) -> Result<DescriptorTable<T>> {
        self.check(table.p())?;
        Ok(DescriptorTable {
            predictors: &table.predictors * &self.column_scales + &self.column_means,
            response: table.response.mapv(|v| v + self.response_mean),
            ..table.clone()
        })
    }

    /// Maps coefficients fitted on transformed columns back to the original
    /// scale, returning `(beta, intercept)`.
    pub fn to_original(&self, beta: &Array1<T>) -> (Array1<T>, T) {
        let b = beta / &self.column_scales;
        let intercept = self.response_mean - self.column_means.dot(&b);
        (b, intercept)
    }
}

/// Train/test partition of `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitPlan {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
    pub seed: u64,
}

pub fn train_test_split(n: usize, train_fraction: f64, seed: u64) -> Result<SplitPlan> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction {train_fraction} not in (0, 1)"
        )));
    }
    let n_train = (train_fraction * n as f64).round() as usize;
    if n_train < 1 || n_train + 1 > n {
        return Err(Error::InvalidArgument(format!(
            "train size {n_train} of {n} leaves an empty side"
        )));
    }
    let perm = SeededRng::new(seed).permutation(n);
    Ok(SplitPlan {
        train_indices: perm[..n_train].to_vec(),
        test_indices: perm[n_train..].to_vec(),
        seed,
    })
}

/// Fold membership for k-fold cross-validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub fold_of: Vec<usize>,
    pub k: usize,
    pub seed: u64,
}

/// Shuffles `0..n` and deals the shuffled indices round-robin into `k` folds.
pub fn kfold(n: usize, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 || k > n {
        return Err(Error::InvalidArgument(format!("fold count {k} outside [2, {n}]")));
    }
    let perm = SeededRng::new(seed).permutation(n);
    let mut fold_of = vec![0; n];
    for (pos, &i) in perm.iter().enumerate() {
        fold_of[i] = pos % k;
    }
    Ok(FoldAssignment { fold_of, k, seed })
}

impl FoldAssignment {
    pub fn n(&self) -> usize {
        self.fold_of.len()
    }

    pub fn validation_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.fold_of[i] == fold).collect()
    }

    pub fn training_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.fold_of[i] != fold).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &f in &self.fold_of {
            s[f] += 1;
        }
        s
    }
}

const PLAN_GENERATOR: &str = "xoshiro256** seeded by splitmix64; descending fisher-yates";

impl SplitPlan {
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# split seed={} generator={}", self.seed, PLAN_GENERATOR)?;
        writeln!(out, "row_id,assignment")?;
        let mut rows: Vec<(usize, &str)> = self
            .train_indices
            .iter()
            .map(|&i| (i, "train"))
            .chain(self.test_indices.iter().map(|&i| (i, "test")))
            .collect();
        rows.sort_unstable();
        for (i, a) in rows {
            writeln!(out, "{i},{a}")?;
        }
        Ok(())
    }

    /// Reads what [`SplitPlan::write`] emits. Index order within each side is ascending.
    pub fn read<R: Read>(source: R) -> Result<Self> {
        let (seed, rows) = read_plan_rows(source)?;
        let mut plan = SplitPlan {
            train_indices: Vec::new(),
            test_indices: Vec::new(),
            seed,
        };
        for (row, i, a) in rows {
            match a.as_str() {
                "train" => plan.train_indices.push(i),
                "test" => plan.test_indices.push(i),
                _ => {
                    return Err(Error::Parse {
                        row,
                        column: 2,
                        message: format!("unknown assignment '{a}'"),
                    })
                }
            }
        }
        Ok(plan)
    }
}

impl FoldAssignment {
    pub fn write<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "# folds k={} seed={} generator={}",
            self.k, self.seed, PLAN_GENERATOR
        )?;
        writeln!(out, "row_id,assignment")?;
        for (i, f) in self.fold_of.iter().enumerate() {
            writeln!(out, "{i},{f}")?;
        }
        Ok(())
    }

    pub fn read<R: Read>(source: R) -> Result<Self> {
        let (seed, rows) = read_plan_rows(source)?;
        let mut fold_of = vec![usize::MAX; rows.len()];
        for (row, i, a) in rows {
            let f: usize = a.parse().map_err(|_| Error::Parse {
                row,
                column: 2,
                message: format!("'{a}' is not a fold id"),
            })?;
            if i >= fold_of.len() {
                return Err(Error::Parse {
                    row,
                    column: 1,
                    message: format!("row id {i} out of range"),
                });
            }
            fold_of[i] = f;
        }
        let k = fold_of.iter().max().map_or(0, |m| m + 1);
        Ok(FoldAssignment { fold_of, k, seed })
    }
}

/// `(line number, row id, assignment)` read from a plan file.
type PlanRow = (usize, usize, String);

fn read_plan_rows<R: Read>(source: R) -> Result<(u64, Vec<PlanRow>)> {
    let mut seed = 0;
    let mut rows = Vec::new();
    for (lineno, line) in BufReader::new(source).lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            row: lineno + 1,
            column: 0,
            message: e.to_string(),
        })?;
        let line = line.trim();
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(s) = comment.split_whitespace().find_map(|kv| kv.strip_prefix("seed=")) {
                seed = s.parse().unwrap_or(0);
            }
            continue;
        }
        if line.is_empty() || line.starts_with("row_id") {
            continue;
        }
        let (id, a) = line.split_once(',').ok_or_else(|| Error::Parse {
            row: lineno + 1,
            column: 1,
            message: "expected two fields".into(),
        })?;
        let id: usize = id.trim().parse().map_err(|_| Error::Parse {
            row: lineno + 1,
            column: 1,
            message: format!("'{id}' is not a row index"),
        })?;
        rows.push((lineno + 1, id, a.trim().to_string()));
    }
    Ok((seed, rows))
}
