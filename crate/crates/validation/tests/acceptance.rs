//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use ndarray::{Array1, Array2, Axis};
use regbench::bench::paired_t;
use regbench::stats::studentized_range_quantile;
use regbench::{
    align, fit_at, kkt_violation, lambda_max, lars_path, path_solution_at, relaxed_fit, ridge_closed_form, summarize,
    CdOptions, LarsMode, Metric, PairwiseTable, Partition, Penalty, RunMatrix, SeededRng, Termination, TukeyIntervals,
};
use regbench_cli::{files, read_bench_outputs};
use regbench_validation as oracle;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn opts() -> CdOptions<f64> {
    CdOptions::default()
}

fn range(rng: &mut SeededRng, lo: usize, hi: usize) -> usize {
    lo + rng.below((hi - lo + 1) as u64) as usize
}

fn kkt_optimality() -> Outcome {
    let start = Instant::now();
    let mut rng = SeededRng::new(1);
    let mut worst = 0.0f64;
    let mut fits = 0;
    for i in 0..50 {
        let n = range(&mut rng, 10, 50);
        let p = range(&mut rng, 2, 300);
        let alpha = [0.0, 0.5, 1.0][i % 3];
        let (x, y) = oracle::instance(n, p, &mut rng);
        let top = if alpha > 0.0 {
            lambda_max(x.view(), y.view()) / alpha
        } else {
            x.iter().map(|v| v * v).sum::<f64>()
        };
        for frac in [0.9, 0.3, 0.1, 0.03, 0.01] {
            let spec = Penalty::mixed(frac * top, alpha).unwrap();
            let fit = fit_at(x.view(), y.view(), &spec, None, &opts()).map_err(|e| format!("instance {i}: {e}"))?;
            let v = kkt_violation(x.view(), y.view(), fit.beta.view(), &spec)
                .unwrap()
                .max_violation;
            worst = worst.max(v);
            fits += 1;
        }
    }
    let took = start.elapsed();
    check(
        worst <= 1e-6 && took < Duration::from_secs(10),
        format!("{fits} fits, max violation {worst:.2e}, {took:.2?}"),
    )
}

fn ridge_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = SeededRng::new(2);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = range(&mut rng, 10, 50);
        let p = range(&mut rng, 2, 80);
        let (x, y) = oracle::instance(n, p, &mut rng);
        let l2 = 10f64.powf(rng.below(3001) as f64 / 1000.0 - 1.0);
        let cd = fit_at(x.view(), y.view(), &Penalty::ridge(l2).unwrap(), None, &opts()).map_err(|e| e.to_string())?;
        let closed = ridge_closed_form(x.view(), y.view(), l2).map_err(|e| e.to_string())?;
        let exact = oracle::ridge(x.view(), y.view(), l2);
        worst = worst
            .max(oracle::max_abs_diff(cd.beta.view(), exact.view()))
            .max(oracle::max_abs_diff(closed.beta.view(), exact.view()));
    }
    let took = start.elapsed();
    check(
        worst <= 1e-8 && took < Duration::from_secs(1),
        format!("max |Δβ| {worst:.2e}, {took:.2?}"),
    )
}

fn lars_lasso_equivalence() -> Outcome {
    let mut rng = SeededRng::new(3);
    let (mut worst, mut worst_kkt) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let n = range(&mut rng, 10, 40);
        let p = range(&mut rng, 2, 30);
        let (x, y) = oracle::instance(n, p, &mut rng);
        let x = oracle::unit_norm(x);
        let path = lars_path(x.view(), y.view(), LarsMode::Lasso, None).map_err(|e| e.to_string())?;
        for knot in &path.knots {
            let spec = Penalty::lasso(2.0 * knot.max_abs_corr).unwrap();
            let v = kkt_violation(x.view(), y.view(), knot.beta.view(), &spec)
                .unwrap()
                .max_violation;
            worst_kkt = worst_kkt.max(v);
        }
        let top = lambda_max(x.view(), y.view());
        let bottom = 2.0 * path.knots.last().unwrap().max_abs_corr;
        for i in 1..=10 {
            // interior points between the null threshold and the last knot
            let l = bottom + (top - bottom) * i as f64 / 11.0;
            let sol = path_solution_at(&path, l).map_err(|e| e.to_string())?;
            let cd =
                fit_at(x.view(), y.view(), &Penalty::lasso(l).unwrap(), None, &opts()).map_err(|e| e.to_string())?;
            worst = worst.max(oracle::max_abs_diff(sol.beta.view(), cd.beta.view()));
        }
    }
    check(
        worst <= 1e-5 && worst_kkt <= 1e-8,
        format!("max |Δβ| {worst:.2e}, max knot KKT {worst_kkt:.2e}"),
    )
}

fn lars_terminal() -> Outcome {
    let mut rng = SeededRng::new(4);
    let (mut ols_gap, mut resid, mut steps_ok) = (0.0f64, 0.0f64, true);
    for i in 0..20 {
        let n = range(&mut rng, 10, 40);
        let narrow = i % 2 == 0;
        let p = if narrow {
            range(&mut rng, 2, n - 2)
        } else {
            range(&mut rng, n, 2 * n)
        };
        let x = oracle::unit_norm(oracle::gaussian(n, p, &mut rng));
        let y = oracle::center_vec(oracle::gaussian_vec(n, &mut rng));
        for mode in [LarsMode::Lars, LarsMode::Lasso] {
            let path = lars_path(x.view(), y.view(), mode, None).map_err(|e| e.to_string())?;
            let last = path.knots.last().unwrap();
            if narrow {
                let b = oracle::ols(x.view(), y.view());
                ols_gap = ols_gap.max(oracle::max_abs_diff(last.beta.view(), b.view()));
                steps_ok &= path.terminated_by == Termination::FullLeastSquares;
            } else {
                resid = resid.max(last.residual_norm);
                steps_ok &= path.terminated_by == Termination::ZeroResidual;
                if mode == LarsMode::Lars {
                    steps_ok &= path.steps() < n;
                }
            }
        }
    }
    check(
        ols_gap <= 1e-6 && resid <= 1e-8 && steps_ok,
        format!("p<n: max |β−OLS| {ols_gap:.2e}; p>=n: max residual {resid:.2e}, step bound held: {steps_ok}"),
    )
}

/// Orthonormal columns by modified Gram–Schmidt.
fn orthonormal(n: usize, p: usize, rng: &mut SeededRng) -> Array2<f64> {
    let mut q = oracle::gaussian(n, p, rng);
    for j in 0..p {
        for k in 0..j {
            let proj = q.column(k).dot(&q.column(j));
            let qk = q.column(k).to_owned();
            q.column_mut(j).scaled_add(-proj, &qk);
        }
        let norm = q.column(j).dot(&q.column(j)).sqrt();
        q.column_mut(j).mapv_inplace(|v| v / norm);
    }
    q
}

fn relaxed_identities() -> Outcome {
    let mut rng = SeededRng::new(5);
    let mut bit_equal = true;
    let mut empty_ok = true;
    let mut hard = 0.0f64;
    for _ in 0..20 {
        let n = range(&mut rng, 10, 40);
        let p = range(&mut rng, 2, 60);
        let (x, y) = oracle::instance(n, p, &mut rng);
        let null = lambda_max(x.view(), y.view()) / n as f64;
        for frac in [0.5, 0.2, 0.05] {
            let l = frac * null;
            let r = relaxed_fit(x.view(), y.view(), l, 1.0, &opts()).map_err(|e| e.to_string())?;
            let lasso = fit_at(
                x.view(),
                y.view(),
                &Penalty::lasso(n as f64 * l).unwrap(),
                None,
                &opts(),
            )
            .map_err(|e| e.to_string())?;
            bit_equal &= r.beta == lasso.beta;
        }
        for phi in [0.0, 0.5, 1.0] {
            let r = relaxed_fit(x.view(), y.view(), null * 1.000001, phi, &opts()).map_err(|e| e.to_string())?;
            empty_ok &= r.selected.is_empty() && r.beta.iter().all(|b| *b == 0.0);
        }
        let q = orthonormal(n, n.min(p).min(8), &mut rng);
        let yq = oracle::gaussian_vec(n, &mut rng);
        let corr = q.t().dot(&yq);
        let null_q = 2.0 * corr.iter().fold(0.0f64, |m, v| m.max(v.abs())) / n as f64;
        let l = 0.5 * null_q;
        let r = relaxed_fit(q.view(), yq.view(), l, 0.0, &opts()).map_err(|e| e.to_string())?;
        let expected = corr.mapv(|c| if 2.0 * c.abs() > n as f64 * l { c } else { 0.0 });
        hard = hard.max(oracle::max_abs_diff(r.beta.view(), expected.view()));
    }
    check(
        bit_equal && empty_ok && hard <= 1e-8,
        format!("phi=1 bit-equal: {bit_equal}; empty above threshold: {empty_ok}; hard-threshold gap {hard:.2e}"),
    )
}

fn enet_endpoints() -> Outcome {
    let mut rng = SeededRng::new(6);
    let (mut lasso_gap, mut ridge_gap, mut group_gap) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..20 {
        let n = range(&mut rng, 10, 40);
        let p = range(&mut rng, 2, 60);
        let (x, y) = oracle::instance(n, p, &mut rng);
        let l = 0.2 * lambda_max(x.view(), y.view());
        let enet =
            fit_at(x.view(), y.view(), &Penalty::mixed(l, 1.0).unwrap(), None, &opts()).map_err(|e| e.to_string())?;
        let lasso =
            fit_at(x.view(), y.view(), &Penalty::lasso(l).unwrap(), None, &opts()).map_err(|e| e.to_string())?;
        lasso_gap = lasso_gap.max(oracle::max_abs_diff(enet.beta.view(), lasso.beta.view()));

        let l2 = 5.0;
        let spec = Penalty::mixed(l2, 0.0).unwrap().with_rescale(false);
        let enet = fit_at(x.view(), y.view(), &spec, None, &opts()).map_err(|e| e.to_string())?;
        let closed = oracle::ridge(x.view(), y.view(), l2);
        ridge_gap = ridge_gap.max(oracle::max_abs_diff(enet.beta.view(), closed.view()));

        let j = rng.below(p as u64) as usize;
        let mut dup = Array2::zeros((n, p + 1));
        dup.slice_mut(ndarray::s![.., ..p]).assign(&x);
        dup.column_mut(p).assign(&x.column(j));
        let spec = Penalty::mixed(0.1 * lambda_max(dup.view(), y.view()), 0.5).unwrap();
        let fit = fit_at(dup.view(), y.view(), &spec, None, &opts()).map_err(|e| e.to_string())?;
        group_gap = group_gap.max((fit.beta[j] - fit.beta[p]).abs());
    }
    check(
        lasso_gap <= 1e-8 && ridge_gap <= 1e-8 && group_gap <= 1e-8,
        format!(
            "alpha=1 vs lasso {lasso_gap:.2e}; alpha=0 vs ridge {ridge_gap:.2e}; duplicate columns {group_gap:.2e}"
        ),
    )
}

fn statistics_oracles() -> Outcome {
    let (t, p) = paired_t(&[1.0, 2.0, 3.0, 4.0, 5.0]);
    let quad = oracle::t_pvalue_quadrature(t, 4.0);
    let q = studentized_range_quantile(0.95, 3, 10.0);
    let mc = oracle::studentized_range_monte_carlo(0.95, 3, 10.0, 10_000_000, 7);
    let mut rng = SeededRng::new(8);
    let mut idem = 0.0f64;
    for _ in 0..50 {
        let runs = range(&mut rng, 2, 30);
        let models = range(&mut rng, 2, 8);
        let v = oracle::gaussian(runs, models, &mut rng) * 10.0;
        let rm = RunMatrix::new(
            v,
            (0..models).map(|m| format!("m{m}")).collect(),
            Metric::Rmse,
            Partition::Test,
            (0..runs as u64).collect(),
        )
        .unwrap();
        let a = align(&rm);
        let aa = align(&a);
        idem = idem.max(
            a.values
                .iter()
                .zip(aa.values.iter())
                .fold(0.0, |m, (x, y)| m.max((x - y).abs())),
        );
    }
    let rel = (q - mc).abs() / mc;
    check(
        (p - quad).abs() <= 5e-4 && (p - 0.0132).abs() <= 5e-4 && rel <= 0.01 && idem <= 1e-12,
        format!(
            "p = {p:.6} (quadrature {quad:.6}); q(0.95;3,10) = {q:.4} vs Monte Carlo {mc:.4} ({:.3}%); align idempotence {idem:.1e}",
            100.0 * rel
        ),
    )
}

fn cli(args: &[&str]) -> Result<(), String> {
    let argv = std::iter::once("regbench")
        .chain(args.iter().copied())
        .map(String::from);
    match regbench_cli::run(argv) {
        0 => Ok(()),
        code => Err(format!("regbench {} exited with {code}", args.join(" "))),
    }
}

struct BenchRuns {
    data: PathBuf,
    root: tempfile::TempDir,
}

impl BenchRuns {
    fn new() -> Result<Self, String> {
        let root = tempfile::tempdir().map_err(|e| e.to_string())?;
        let data = root.path().join("synthetic.csv");
        cli(&["synth", "--seed", "1", "--output", data.to_str().unwrap()])?;
        Ok(Self { data, root })
    }

    fn bench(&self, name: &str, threads: usize) -> Result<(PathBuf, Duration), String> {
        let dir = self.root.path().join(name);
        let start = Instant::now();
        cli(&[
            "bench",
            "--input",
            self.data.to_str().unwrap(),
            "--seed",
            "1",
            "--threads",
            &threads.to_string(),
            "--output-dir",
            dir.to_str().unwrap(),
        ])?;
        Ok((dir, start.elapsed()))
    }
}

fn protocol_shape(dir: &Path, took: Duration) -> Outcome {
    let outcome = read_bench_outputs(dir).map_err(|e| e.to_string())?;
    let shapes_ok = [
        &outcome.train_rmse,
        &outcome.test_rmse,
        &outcome.train_r_square,
        &outcome.test_r_square,
    ]
    .iter()
    .all(|m| m.values.dim() == (25, 5));
    let open = |name: &str| fs::File::open(dir.join(name)).map_err(|e| e.to_string());
    let rmse_table = PairwiseTable::read(open(files::PAIRWISE_RMSE)?).map_err(|e| e.to_string())?;
    let r2_table = PairwiseTable::read(open(files::PAIRWISE_R2)?).map_err(|e| e.to_string())?;
    let pairwise_ok = rmse_table.differences.dim() == (5, 5)
        && rmse_table.populated() == (10, 10)
        && r2_table.populated() == (10, 10);
    let summaries = summarize(&outcome.test_rmse);
    let summary_ok = summaries.len() == 5
        && summaries
            .iter()
            .all(|s| s.min <= s.median && s.median <= s.max && s.min <= s.mean && s.mean <= s.max);
    let report = fs::read_to_string(dir.join(files::REPORT)).map_err(|e| e.to_string())?;
    let report_ok =
        report.contains("min") && report.contains("median") && report.contains("max") && report.contains("mean");
    let tukey = TukeyIntervals::read(open(files::TUKEY)?).map_err(|e| e.to_string())?;
    let tukey_ok = tukey.pairs.len() == 10 && tukey.confidence == 0.99 && tukey.aligned;
    check(
        shapes_ok && pairwise_ok && summary_ok && report_ok && tukey_ok && took < Duration::from_secs(60),
        format!(
            "25x5 matrices: {shapes_ok}; pairwise 10+10: {pairwise_ok}; summaries: {}; Tukey 10 at 99%: {tukey_ok}; bench {took:.1?}",
            summary_ok && report_ok
        ),
    )
}

fn statistical_sanity(dir: &Path) -> Outcome {
    let outcome = read_bench_outputs(dir).map_err(|e| e.to_string())?;
    let means: Array1<f64> = outcome.test_r_square.values.mean_axis(Axis(0)).unwrap();
    let splits = fs::read_to_string(dir.join(files::SPLITS)).map_err(|e| e.to_string())?;
    let mut per_run: Vec<Vec<String>> = vec![Vec::new(); 25];
    for line in splits.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        per_run[f[0].parse::<usize>().map_err(|e| e.to_string())?].push(f[2].to_string());
    }
    let paired = per_run.iter().all(|h| h.len() == 5 && h.iter().all(|x| *x == h[0]));
    let listing: Vec<String> = outcome
        .test_r_square
        .model_names
        .iter()
        .zip(means.iter())
        .map(|(n, m)| format!("{n} {m:.3}"))
        .collect();
    check(
        means.iter().all(|m| *m > 0.5) && paired,
        format!(
            "mean test R2: {}; identical splits per run: {paired}",
            listing.join(", ")
        ),
    )
}

fn determinism(runs: &BenchRuns, eight: &Path) -> Outcome {
    let (eight_again, _) = runs.bench("eight_again", 8)?;
    let (one, _) = runs.bench("one", 1)?;
    let (one_again, _) = runs.bench("one_again", 1)?;
    let mut mismatches = Vec::new();
    for name in files::DATA {
        let read = |d: &Path| fs::read(d.join(name)).map_err(|e| e.to_string());
        let reference = read(eight)?;
        for (label, d) in [
            ("8 threads, repeat", &eight_again),
            ("1 thread", &one),
            ("1 thread, repeat", &one_again),
        ] {
            if read(d)? != reference {
                mismatches.push(format!("{name} ({label})"));
            }
        }
    }
    check(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!(
                "{} files byte-identical across 4 runs at 1 and 8 threads",
                files::DATA.len()
            )
        } else {
            format!("differs: {}", mismatches.join(", "))
        },
    )
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    })
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = vec![
        (1, "KKT optimality", guarded(kkt_optimality)),
        (2, "ridge oracle equivalence", guarded(ridge_oracle)),
        (3, "LARS-lasso equivalence", guarded(lars_lasso_equivalence)),
        (4, "LARS terminal behavior", guarded(lars_terminal)),
        (5, "relaxed lasso identities", guarded(relaxed_identities)),
        (6, "elastic net endpoints and grouping", guarded(enet_endpoints)),
        (7, "statistics oracles", guarded(statistics_oracles)),
    ];
    let runs = BenchRuns::new();
    let first = runs.as_ref().map_err(Clone::clone).and_then(|r| r.bench("eight", 8));
    match (&runs, &first) {
        (Ok(runs), Ok((dir, took))) => {
            results.push((8, "protocol shape", guarded(|| protocol_shape(dir, *took))));
            results.push((9, "statistical sanity", guarded(|| statistical_sanity(dir))));
            results.push((10, "determinism", guarded(|| determinism(runs, dir))));
        }
        _ => {
            let e = first.err().unwrap_or_default();
            for (i, name) in [(8, "protocol shape"), (9, "statistical sanity"), (10, "determinism")] {
                results.push((i, name, Err(format!("benchmark did not run: {e}"))));
            }
        }
    }
    let mut failed = 0;
    for (i, name, outcome) in &results {
        match outcome {
            Ok(d) => println!("PASS {i:>2} {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL {i:>2} {name}: {d}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
