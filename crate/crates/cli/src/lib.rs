//! Command-line driver: argument parsing, config files and the six commands.

use std::fs::{self, File};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use regbench::bench::{self, BenchConfig, BenchOutcome, Metric, Partition, ReportOptions, RunMatrix};
use regbench::{
    fit_preprocessing, kfold, lars_path, load_table, select_and_refit, Error, ErrorKind, LarsMode, Model, ModelKind,
    Penalty, ScaleMode, SelectionRule, SynthSpec, Table,
};

/// Environment variable consulted for the default worker count.
pub const THREADS_ENV: &str = "REGBENCH_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "regbench",
    version,
    about = "Penalized linear regression fits, paths, cross-validation and benchmarks",
    args_override_self = true
)]
pub struct Cli {
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    /// key=value file supplying defaults for any long flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit one model and list its coefficients.
    Fit(FitArgs),
    /// Export a coefficient path over the penalty grid (or LARS knots).
    Path(PathArgs),
    /// Cross-validate a model over its grid and report the chosen parameters.
    Cv(CvArgs),
    /// Repeated train/test benchmark of all models.
    Bench(BenchArgs),
    /// Write a synthetic descriptor table.
    Synth(SynthArgs),
    /// Re-render a benchmark report from stored run matrices.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Comma-separated table; the last column is the response.
    #[arg(long)]
    pub input: PathBuf,
    /// The input has no header row.
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// lasso, ridge, enet, lars or relaxo.
    #[arg(long, default_value = "lasso")]
    pub model: String,
    /// Elastic net mixing parameter (1 = lasso, 0 = ridge).
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Column preprocessing: center or unit-norm (default depends on the model).
    #[arg(long)]
    pub standardize: Option<String>,
}

impl ModelArgs {
    pub fn build(&self) -> Result<Model, Error> {
        let mut kind: ModelKind = self.model.parse()?;
        if let Some(a) = self.alpha {
            match kind {
                ModelKind::ElasticNet { .. } => kind = ModelKind::ElasticNet { alpha: a },
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "--alpha applies to the elastic net only, not {kind}"
                    )))
                }
            }
        }
        let mut model = Model::new(kind);
        if let Some(s) = &self.standardize {
            model = model.with_scaling(s.parse::<ScaleMode>()?);
        }
        Ok(model)
    }
}

#[derive(Debug, Args)]
pub struct CvOptions {
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Pick the heaviest penalty within one standard error of the minimum.
    #[arg(long)]
    pub one_se: bool,
}

impl CvOptions {
    fn rule(&self) -> SelectionRule {
        if self.one_se {
            SelectionRule::OneStandardError
        } else {
            SelectionRule::MinError
        }
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Penalty; chosen by cross-validation when omitted.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Relaxation for the relaxed lasso.
    #[arg(long, default_value_t = 1.0)]
    pub phi: f64,
    #[command(flatten)]
    pub cv: CvOptions,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PathArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CvArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub cv: CvOptions,
    /// Also write the fold assignment here.
    #[arg(long)]
    pub folds_output: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = 25)]
    pub runs: usize,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, default_value_t = 0.76)]
    pub train_fraction: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.99)]
    pub confidence: f64,
    /// none, holm or bonferroni.
    #[arg(long, default_value = "holm")]
    pub adjustment: String,
    /// Comma-separated model list.
    #[arg(long, default_value = "lasso,ridge,enet,lars,relaxo")]
    pub models: String,
    /// Elastic net mixing parameter.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub one_se: bool,
    /// Directory receiving the report and data files.
    #[arg(long)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 234)]
    pub p: usize,
    #[arg(long, default_value_t = 10)]
    pub sparsity: usize,
    #[arg(long, default_value_t = 0.5)]
    pub correlation: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise_sd: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Also write the true coefficients here.
    #[arg(long)]
    pub beta_output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory written by `bench`.
    #[arg(long)]
    pub input_dir: PathBuf,
    #[arg(long, default_value_t = 0.99)]
    pub confidence: f64,
    #[arg(long, default_value = "holm")]
    pub adjustment: String,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Failure of a command, carrying its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, label) = match e.kind() {
            ErrorKind::Usage => (2, "usage error"),
            ErrorKind::Data => (3, "data error"),
            ErrorKind::Numerical => (4, "numerical error"),
        };
        Self {
            code,
            message: format!("{label}: {e}"),
        }
    }
}

/// File names inside a benchmark output directory.
pub mod files {
    pub const REPORT: &str = "report.txt";
    pub const TRAIN_RMSE: &str = "runs_train_rmse.csv";
    pub const TEST_RMSE: &str = "runs_test_rmse.csv";
    pub const TRAIN_R2: &str = "runs_train_rsquare.csv";
    pub const TEST_R2: &str = "runs_test_rsquare.csv";
    pub const PAIRWISE_RMSE: &str = "pairwise_rmse.csv";
    pub const PAIRWISE_R2: &str = "pairwise_rsquare.csv";
    pub const TUKEY: &str = "tukey_rmse.csv";
    pub const SPLITS: &str = "splits.csv";

    /// Machine-readable outputs, excluding the text report.
    pub const DATA: [&str; 8] = [
        TRAIN_RMSE,
        TEST_RMSE,
        TRAIN_R2,
        TEST_R2,
        PAIRWISE_RMSE,
        PAIRWISE_R2,
        TUKEY,
        SPLITS,
    ];
}

/// Expands `--config FILE` into flags placed directly after the subcommand,
/// so flags given on the command line take precedence.
pub fn expand_config(args: Vec<String>) -> Result<Vec<String>, Failure> {
    let pos = args.iter().position(|a| a == "--config" || a.starts_with("--config="));
    let Some(pos) = pos else {
        return Ok(args);
    };
    let (path, consumed) = match args[pos].split_once('=') {
        Some((_, p)) => (p.to_string(), 1),
        None => match args.get(pos + 1) {
            Some(p) => (p.clone(), 2),
            None => return Err(Failure::usage("--config needs a file")),
        },
    };
    let text = fs::read_to_string(&path).map_err(|e| Failure::from(Error::io(&path, e)))?;
    let mut injected = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Failure::usage(format!("{path}:{}: expected key=value", i + 1)));
        };
        let (k, v) = (k.trim().replace('_', "-"), v.trim());
        match v {
            "true" => injected.push(format!("--{k}")),
            "false" => {}
            _ => injected.push(format!("--{k}={v}")),
        }
    }
    let mut rest: Vec<String> = args[..pos].to_vec();
    rest.extend_from_slice(&args[pos + consumed..]);
    const COMMANDS: [&str; 6] = ["fit", "path", "cv", "bench", "synth", "report"];
    let Some(cmd) = rest.iter().position(|a| COMMANDS.contains(&a.as_str())) else {
        return Ok(rest);
    };
    let mut out = rest[..=cmd].to_vec();
    out.extend(injected);
    out.extend_from_slice(&rest[cmd + 1..]);
    Ok(out)
}

fn read_input(input: &InputArgs) -> Result<Table, Error> {
    let file = File::open(&input.input).map_err(|e| Error::io(input.input.display().to_string(), e))?;
    load_table(file, !input.no_header)
}

fn create(path: &Path) -> Result<BufWriter<File>, Error> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path.display().to_string(), e))
}

fn with_output(output: &Option<PathBuf>, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), Error> {
    let name = output
        .as_ref()
        .map_or("<stdout>".to_string(), |p| p.display().to_string());
    let res = match output {
        Some(p) => {
            let mut w = create(p)?;
            body(&mut w).and_then(|_| w.flush())
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            // a reader that stops early (e.g. `head`) is not an error
            match body(&mut w).and_then(|_| w.flush()) {
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                other => other,
            }
        }
    };
    res.map_err(|e| Error::io(name, e))
}

/// Coefficient listing of one fit: header comments, then `term,estimate`.
pub fn write_coefficients<W: Write + ?Sized>(
    out: &mut W,
    model: &Model,
    table: &Table,
    fit: &regbench::Fit,
) -> io::Result<()> {
    let fitted = fit.predict(table.predictors.view());
    let rmse = regbench::rmse(table.response.view(), fitted.view()).unwrap_or(f64::NAN);
    let r2 = regbench::r_square(table.response.view(), fitted.view()).unwrap_or(f64::NAN);
    writeln!(
        out,
        "# model={} scaling={} lambda={:e} phi={:e} active={} train_rmse={:e} train_r2={:e}",
        model.kind,
        model.scaling,
        fit.spec.total(),
        fit.spec.phi,
        fit.active_set.len(),
        rmse,
        r2
    )?;
    writeln!(out, "term,estimate")?;
    writeln!(out, "(intercept),{:e}", fit.intercept)?;
    for (name, b) in table.column_names.iter().zip(fit.beta.iter()) {
        writeln!(out, "{name},{b:e}")?;
    }
    Ok(())
}

/// Reads a coefficient listing back as `(intercept, [(term, estimate)])`.
pub fn read_coefficients<R: Read>(mut source: R) -> Result<(f64, Vec<(String, f64)>), Error> {
    let mut text = String::new();
    source
        .read_to_string(&mut text)
        .map_err(|e| Error::io("<coefficients>", e))?;
    let mut intercept = None;
    let mut terms = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with('#') || line == "term,estimate" || line.is_empty() {
            continue;
        }
        let (name, v) = line.rsplit_once(',').ok_or(Error::Parse {
            row: i + 1,
            column: 1,
            message: "expected term,estimate".into(),
        })?;
        let v: f64 = v.parse().map_err(|_| Error::Parse {
            row: i + 1,
            column: 2,
            message: format!("'{v}' is not a number"),
        })?;
        if name == "(intercept)" {
            intercept = Some(v);
        } else {
            terms.push((name.to_string(), v));
        }
    }
    let intercept = intercept.ok_or(Error::Parse {
        row: 0,
        column: 0,
        message: "no intercept row".into(),
    })?;
    Ok((intercept, terms))
}

fn fit_cmd(a: &FitArgs) -> Result<(), Error> {
    let table = read_input(&a.input)?;
    let model = a.model.build()?;
    let fit = match a.lambda {
        Some(l) => {
            let spec = match model.kind {
                ModelKind::Ridge => Penalty::ridge(l)?,
                ModelKind::ElasticNet { alpha } => Penalty::mixed(l, alpha)?,
                ModelKind::Relaxo => Penalty::lasso(l)?.with_phi(a.phi)?,
                ModelKind::Lasso | ModelKind::Lars => Penalty::lasso(l)?,
            };
            model.fit_one(&table, &spec)?
        }
        None => {
            let folds = kfold(table.n(), a.cv.folds, a.cv.seed)?;
            select_and_refit(&table, &model, &folds, a.cv.rule())?.1
        }
    };
    with_output(&a.output, |w| write_coefficients(w, &model, &table, &fit))
}

fn path_cmd(a: &PathArgs) -> Result<(), Error> {
    let table = read_input(&a.input)?;
    let model = a.model.build()?;
    if model.kind == ModelKind::Lars {
        let prep = fit_preprocessing(&table, model.scaling)?;
        let t = prep.apply(&table)?;
        let path = lars_path(t.predictors.view(), t.response.view(), LarsMode::Lasso, None)?;
        return with_output(&a.output, |w| {
            writeln!(
                w,
                "# model=lars scaling={} terminated={:?}",
                model.scaling, path.terminated_by
            )?;
            path.write(w, &table.column_names)
        });
    }
    let grid = model.grid(&table)?;
    let fits = model.fit_grid(&table, &grid)?;
    with_output(&a.output, |w| {
        writeln!(w, "# model={} scaling={}", model.kind, model.scaling)?;
        writeln!(w, "lambda,phi,active_count,intercept,{}", table.column_names.join(","))?;
        for f in &fits {
            let coefs: Vec<String> = f.beta.iter().map(|b| format!("{b:e}")).collect();
            writeln!(
                w,
                "{:e},{:e},{},{:e},{}",
                f.spec.total(),
                f.spec.phi,
                f.active_set.len(),
                f.intercept,
                coefs.join(",")
            )?;
        }
        Ok(())
    })
}

fn cv_cmd(a: &CvArgs) -> Result<(), Error> {
    let table = read_input(&a.input)?;
    let model = a.model.build()?;
    let folds = kfold(table.n(), a.cv.folds, a.cv.seed)?;
    let (curve, fit) = select_and_refit(&table, &model, &folds, a.cv.rule())?;
    if let Some(p) = &a.folds_output {
        let mut w = create(p)?;
        folds
            .write(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(p.display().to_string(), e))?;
    }
    let spec = curve.chosen_spec();
    let err = curve.mean_error[curve.chosen];
    eprintln!(
        "{}: chosen lambda = {:e}, phi = {:e}, cv rmse = {:e}, active = {}",
        model.kind,
        spec.total(),
        spec.phi,
        err,
        fit.active_set.len()
    );
    with_output(&a.output, |w| {
        writeln!(
            w,
            "# model={} folds={} seed={} chosen_lambda={:e} chosen_phi={:e} cv_rmse={:e}",
            model.kind,
            a.cv.folds,
            a.cv.seed,
            spec.total(),
            spec.phi,
            err
        )?;
        curve.write(w)
    })
}

fn parse_models(list: &str, alpha: Option<f64>) -> Result<Vec<Model>, Error> {
    list.split(',')
        .map(|name| {
            ModelArgs {
                model: name.trim().to_string(),
                alpha: alpha.filter(|_| matches!(name.trim().parse(), Ok(ModelKind::ElasticNet { .. }))),
                standardize: None,
            }
            .build()
        })
        .collect()
}

fn write_to(dir: &Path, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), Error> {
    let path = dir.join(name);
    let mut w = create(&path)?;
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path.display().to_string(), e))
}

/// Writes every benchmark artifact into `dir`.
pub fn write_bench_outputs(dir: &Path, outcome: &BenchOutcome, opts: &ReportOptions) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))?;
    write_to(dir, files::TRAIN_RMSE, |w| outcome.train_rmse.write(w))?;
    write_to(dir, files::TEST_RMSE, |w| outcome.test_rmse.write(w))?;
    write_to(dir, files::TRAIN_R2, |w| outcome.train_r_square.write(w))?;
    write_to(dir, files::TEST_R2, |w| outcome.test_r_square.write(w))?;
    if outcome.test_rmse.models() < 2 {
        let report = bench::render_report(outcome, opts)?;
        return write_to(dir, files::REPORT, |w| w.write_all(report.as_bytes()));
    }
    let pw_rmse = bench::paired_ttest_matrix(&outcome.test_rmse, opts.adjustment)?;
    let pw_r2 = bench::paired_ttest_matrix(&outcome.test_r_square, opts.adjustment)?;
    write_to(dir, files::PAIRWISE_RMSE, |w| pw_rmse.write(w))?;
    write_to(dir, files::PAIRWISE_R2, |w| pw_r2.write(w))?;
    let tukey = bench::tukey_intervals(&bench::align(&outcome.test_rmse), opts.confidence)?;
    write_to(dir, files::TUKEY, |w| tukey.write(w))?;
    write_to(dir, files::SPLITS, |w| {
        writeln!(w, "run,model,split_hash,lambda,phi")?;
        for (r, (hashes, chosen)) in outcome.split_hashes.iter().zip(&outcome.chosen).enumerate() {
            for (m, (h, (l, phi))) in hashes.iter().zip(chosen).enumerate() {
                writeln!(w, "{r},{},{h},{l:e},{phi:e}", outcome.test_rmse.model_names[m])?;
            }
        }
        Ok(())
    })?;
    let report = bench::render_report(outcome, opts)?;
    write_to(dir, files::REPORT, |w| w.write_all(report.as_bytes()))
}

fn bench_cmd(a: &BenchArgs) -> Result<(), Error> {
    let table = read_input(&a.input)?;
    let mut cfg = BenchConfig::<f64>::standard(a.seed);
    cfg.models = parse_models(&a.models, a.alpha)?;
    cfg.runs = a.runs;
    cfg.folds = a.folds;
    cfg.train_fraction = a.train_fraction;
    if a.one_se {
        cfg.rule = SelectionRule::OneStandardError;
    }
    let opts = ReportOptions {
        confidence: a.confidence,
        adjustment: a.adjustment.parse()?,
    };
    let outcome = bench::run_benchmark(&table, &cfg)?;
    write_bench_outputs(&a.output_dir, &outcome, &opts)?;
    eprintln!(
        "wrote {} runs x {} models to {}",
        outcome.test_rmse.runs(),
        outcome.test_rmse.models(),
        a.output_dir.display()
    );
    Ok(())
}

fn synth_cmd(a: &SynthArgs) -> Result<(), Error> {
    let spec = SynthSpec::new(a.n, a.p, a.sparsity, a.correlation, a.noise_sd, a.seed);
    let (table, beta) = regbench::generate::<f64>(&spec)?;
    with_output(&a.output, |w| table.write_csv(w))?;
    if let Some(p) = &a.beta_output {
        let p = Some(p.clone());
        with_output(&p, |w| {
            writeln!(w, "term,estimate")?;
            for (name, b) in table.column_names.iter().zip(beta.iter()) {
                writeln!(w, "{name},{b:e}")?;
            }
            Ok(())
        })?;
    }
    Ok(())
}

fn read_matrix(dir: &Path, name: &str, metric: Metric, partition: Partition) -> Result<RunMatrix, Error> {
    let path = dir.join(name);
    let file = File::open(&path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let rm = RunMatrix::read(file)?;
    if rm.metric != metric || rm.partition != partition {
        return Err(Error::InvalidArgument(format!(
            "{} holds {} {} values",
            path.display(),
            rm.partition.as_str(),
            rm.metric.as_str()
        )));
    }
    Ok(rm)
}

/// Loads the four run matrices written by `bench`.
pub fn read_bench_outputs(dir: &Path) -> Result<BenchOutcome, Error> {
    Ok(BenchOutcome {
        train_rmse: read_matrix(dir, files::TRAIN_RMSE, Metric::Rmse, Partition::Train)?,
        test_rmse: read_matrix(dir, files::TEST_RMSE, Metric::Rmse, Partition::Test)?,
        train_r_square: read_matrix(dir, files::TRAIN_R2, Metric::RSquare, Partition::Train)?,
        test_r_square: read_matrix(dir, files::TEST_R2, Metric::RSquare, Partition::Test)?,
        split_hashes: Vec::new(),
        chosen: Vec::new(),
    })
}

fn report_cmd(a: &ReportArgs) -> Result<(), Error> {
    let outcome = read_bench_outputs(&a.input_dir)?;
    let opts = ReportOptions {
        confidence: a.confidence,
        adjustment: a.adjustment.parse()?,
    };
    let text = bench::render_report(&outcome, &opts)?;
    with_output(&a.output, |w| w.write_all(text.as_bytes()))
}

/// Runs a parsed command inside a pool of the requested size.
pub fn execute(cli: &Cli) -> Result<(), Failure> {
    let threads = match cli.threads {
        Some(0) => return Err(Failure::usage("--threads must be at least 1")),
        Some(t) => t,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::usage(e.to_string()))?;
    pool.install(|| match &cli.command {
        Command::Fit(a) => fit_cmd(a),
        Command::Path(a) => path_cmd(a),
        Command::Cv(a) => cv_cmd(a),
        Command::Bench(a) => bench_cmd(a),
        Command::Synth(a) => synth_cmd(a),
        Command::Report(a) => report_cmd(a),
    })
    .map_err(Failure::from)
}

/// Full entry point: config expansion, parsing and execution. Returns the exit status.
pub fn run<I: IntoIterator<Item = String>>(args: I) -> i32 {
    let args = match expand_config(args.into_iter().collect()) {
        Ok(a) => a,
        Err(f) => {
            eprintln!("regbench: {}", f.message);
            return f.code;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("regbench: {}", f.message);
            f.code
        }
    }
}
