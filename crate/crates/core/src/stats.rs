//! Distribution functions for the benchmark statistics: Student t via the
//! regularized incomplete beta function, and the studentized range by
//! two-level Gauss–Legendre quadrature with bisection for quantiles.

use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

/// Smallest p-value ever reported.
pub const P_FLOOR: f64 = 1e-300;

/// `P(T ≤ t)` for Student's t with `df` degrees of freedom.
pub fn student_t_cdf(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let tail = 0.5 * beta_reg(df / 2.0, 0.5, df / (df + t * t));
    if t > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Two-sided p-value `P(|T| ≥ |t|)`.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    beta_reg(df / 2.0, 0.5, df / (df + t * t))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, 0.0);
            for k in 0..m {
                let p2 = p1;
                p1 = p0;
                p0 = ((2 * k + 1) as f64 * z * p1 - k as f64 * p2) / (k + 1) as f64;
            }
            dp = m as f64 * (z * p0 - p1) / (z * z - 1.0);
            let dz = p0 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[m - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[m - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule over `[a, b]` split into `panels` pieces.
struct Rule {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    fn new(a: f64, b: f64, panels: usize, order: usize) -> Self {
        let (x, w) = gauss_legendre(order);
        let h = (b - a) / panels as f64;
        let mut points = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for k in 0..panels {
            let lo = a + k as f64 * h;
            for (xi, wi) in x.iter().zip(&w) {
                points.push(lo + 0.5 * h * (xi + 1.0));
                weights.push(0.5 * h * wi);
            }
        }
        Self { points, weights }
    }
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Distribution of the range of `k` independent standard normals.
fn range_cdf(w: f64, k: usize, inner: &Rule) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let mut total = 0.0;
    for (&z, &wt) in inner.points.iter().zip(&inner.weights) {
        let band = normal_cdf(z + w) - normal_cdf(z);
        if band > 0.0 {
            total += wt * normal_pdf(z) * band.powi(k as i32 - 1);
        }
    }
    (k as f64 * total).min(1.0)
}

/// Studentized range distribution function `P(Q ≤ q)` for `k` groups and `df`
/// error degrees of freedom (`df = ∞` gives the plain range of normals).
pub fn studentized_range_cdf(q: f64, k: usize, df: f64) -> f64 {
    assert!(k >= 2, "studentized range needs k >= 2");
    if q <= 0.0 {
        return 0.0;
    }
    let inner = Rule::new(-8.5, 8.5, 34, 12);
    if df.is_infinite() {
        return range_cdf(q, k, &inner);
    }
    // s = sqrt(χ²_df / df) has density
    // 2 (df/2)^{df/2} / Γ(df/2) · s^{df−1} exp(−df s²/2)
    let spread = 12.0 / (2.0 * df).sqrt();
    let lo = (1.0 - spread).max(0.0);
    let hi = 1.0 + spread;
    let outer = Rule::new(lo, hi, 40, 12);
    let log_c = std::f64::consts::LN_2 + 0.5 * df * (0.5 * df).ln() - ln_gamma(0.5 * df);
    let mut total = 0.0;
    for (&s, &wt) in outer.points.iter().zip(&outer.weights) {
        let log_f = log_c + (df - 1.0) * s.ln() - 0.5 * df * s * s;
        total += wt * log_f.exp() * range_cdf(q * s, k, &inner);
    }
    total.clamp(0.0, 1.0)
}

/// Quantile of the studentized range by bisection on [`studentized_range_cdf`].
pub fn studentized_range_quantile(prob: f64, k: usize, df: f64) -> f64 {
    assert!(prob > 0.0 && prob < 1.0, "probability must be in (0, 1)");
    let mut lo = 0.0;
    let mut hi = 4.0;
    while studentized_range_cdf(hi, k, df) < prob {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if studentized_range_cdf(mid, k, df) < prob {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Holm step-down adjustment; adjusted values are monotone and capped at 1.
pub fn holm(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));
    let mut out = vec![0.0; m];
    let mut running: f64 = 0.0;
    for (rank, &i) in order.iter().enumerate() {
        running = running.max(((m - rank) as f64 * p[i]).min(1.0));
        out[i] = running;
    }
    out
}

pub fn bonferroni(p: &[f64]) -> Vec<f64> {
    let m = p.len() as f64;
    p.iter().map(|v| (v * m).min(1.0)).collect()
}
