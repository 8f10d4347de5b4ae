//! Small dense linear algebra: Cholesky with row insertion/deletion, SPD solves,
//! Jacobi eigendecomposition and minimum-norm least squares.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn pivot_floor<T: Scalar>(max_diag: T, m: usize) -> T {
    max_diag * T::epsilon() * T::lit(1e3) * T::from_count(m.max(1))
}

/// Lower Cholesky factor of a symmetric positive definite matrix that can grow
/// and shrink one index at a time.
#[derive(Debug, Clone, Default)]
pub struct Cholesky<T> {
    rows: Vec<Vec<T>>,
    max_diag: T,
}

impl<T: Scalar> Cholesky<T> {
    pub fn new() -> Self {
        Self {
            rows: Vec::new(),
            max_diag: T::zero(),
        }
    }

    pub fn factor(a: ArrayView2<'_, T>) -> Result<Self> {
        let m = a.nrows();
        if a.ncols() != m {
            return Err(Error::DimensionMismatch(format!(
                "cholesky of {}x{} matrix",
                m,
                a.ncols()
            )));
        }
        let mut chol = Self::new();
        for k in 0..m {
            let col: Vec<T> = (0..=k).map(|i| a[[k, i]]).collect();
            chol.push(&col[..k], col[k])
                .map_err(|_| Error::Singular(format!("matrix not positive definite at pivot {k}")))?;
        }
        Ok(chol)
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    /// Appends an index whose cross products with the existing indices are
    /// `cross` and whose diagonal entry is `diag`.
    pub fn push(&mut self, cross: &[T], diag: T) -> Result<()> {
        let m = self.rows.len();
        assert_eq!(cross.len(), m);
        let mut l = vec![T::zero(); m + 1];
        for i in 0..m {
            let mut s = cross[i];
            for (k, lk) in l.iter().enumerate().take(i) {
                s -= self.rows[i][k] * *lk;
            }
            l[i] = s / self.rows[i][i];
        }
        let d2 = diag - l[..m].iter().map(|v| *v * *v).sum::<T>();
        let max_diag = self.max_diag.max(diag.abs());
        if !(d2 > pivot_floor(max_diag, m + 1)) {
            return Err(Error::Singular(format!("pivot {d2:e} at position {m} is not positive")));
        }
        l[m] = d2.sqrt();
        for row in &mut self.rows {
            row.push(T::zero());
        }
        self.rows.push(l);
        self.max_diag = max_diag;
        Ok(())
    }

    /// Removes index `k`, restoring triangularity with Givens rotations.
    pub fn remove(&mut self, k: usize) {
        let m = self.rows.len();
        assert!(k < m);
        self.rows.remove(k);
        for j in k..m - 1 {
            let a = self.rows[j][j];
            let b = self.rows[j][j + 1];
            let r = a.hypot(b);
            let (c, s) = if r == T::zero() {
                (T::one(), T::zero())
            } else {
                (a / r, b / r)
            };
            for row in self.rows.iter_mut().skip(j) {
                let x = row[j];
                let y = row[j + 1];
                row[j] = c * x + s * y;
                row[j + 1] = -s * x + c * y;
            }
        }
        for row in &mut self.rows {
            row.truncate(m - 1);
        }
    }

    /// Solves `L Lᵀ x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let m = self.rows.len();
        assert_eq!(b.len(), m);
        let mut z = b.to_vec();
        for i in 0..m {
            let mut s = z[i];
            for (r, zk) in self.rows[i][..i].iter().zip(&z[..i]) {
                s -= *r * *zk;
            }
            z[i] = s / self.rows[i][i];
        }
        for i in (0..m).rev() {
            let mut s = z[i];
            for (row, zk) in self.rows[i + 1..].iter().zip(&z[i + 1..]) {
                s -= row[i] * *zk;
            }
            z[i] = s / self.rows[i][i];
        }
        z
    }

    /// Reconstructs `L Lᵀ` (used to check drift).
    pub fn reconstruct(&self) -> Array2<T> {
        let m = self.rows.len();
        Array2::from_shape_fn((m, m), |(i, j)| {
            (0..=i.min(j)).map(|k| self.rows[i][k] * self.rows[j][k]).sum()
        })
    }
}

/// Solves the SPD system `a x = b`.
pub fn spd_solve<T: Scalar>(a: ArrayView2<'_, T>, b: ArrayView1<'_, T>) -> Result<Array1<T>> {
    let chol = Cholesky::factor(a)?;
    Ok(Array1::from(chol.solve(&b.to_vec())))
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
/// Returns eigenvalues and the matrix whose columns are eigenvectors.
pub fn sym_eigen<T: Scalar>(a: ArrayView2<'_, T>) -> (Array1<T>, Array2<T>) {
    let m = a.nrows();
    let mut a = a.to_owned();
    let mut v = Array2::<T>::eye(m);
    let two = T::lit(2.0);
    for _sweep in 0..100 {
        let off: T = (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[[i, j]] * a[[i, j]])
            .sum();
        let scale: T = a.iter().map(|x| *x * *x).sum();
        if off <= scale * T::epsilon() * T::epsilon() {
            break;
        }
        for p in 0..m {
            for q in p + 1..m {
                let apq = a[[p, q]];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (two * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..m {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..m {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..m {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    (a.diag().to_owned(), v)
}

/// Least-squares solution of `x β ≈ y`. Returns `(β, rank_deficient)`; in the
/// rank-deficient case β is the minimum-norm solution.
pub fn lstsq<T: Scalar>(x: ArrayView2<'_, T>, y: ArrayView1<'_, T>) -> (Array1<T>, bool) {
    let k = x.ncols();
    if k == 0 {
        return (Array1::zeros(0), false);
    }
    let gram = x.t().dot(&x);
    let rhs = x.t().dot(&y);
    if let Ok(beta) = spd_solve(gram.view(), rhs.view()) {
        return (beta, false);
    }
    let (vals, vecs) = sym_eigen(gram.view());
    let top = vals.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let cut = top * T::epsilon() * T::lit(1e3) * T::from_count(k);
    let proj = vecs.t().dot(&rhs);
    let mut coef = Array1::zeros(k);
    for (i, (&lam, &pr)) in vals.iter().zip(proj.iter()).enumerate() {
        if lam > cut {
            coef[i] = pr / lam;
        }
    }
    (vecs.dot(&coef), true)
}

/// `Xᵀ v` column dot products.
pub fn xt_dot<T: Scalar>(x: ArrayView2<'_, T>, v: ArrayView1<'_, T>) -> Array1<T> {
    x.t().dot(&v)
}

/// Largest eigenvalue of `XᵀX` by power iteration from the all-ones vector.
pub fn gram_spectral_radius<T: Scalar>(x: ArrayView2<'_, T>) -> T {
    let p = x.ncols();
    if p == 0 {
        return T::zero();
    }
    let mut v = Array1::<T>::from_elem(p, T::one() / T::from_count(p).sqrt());
    let mut est = T::zero();
    for _ in 0..1000 {
        let w = x.t().dot(&x.dot(&v));
        let norm = w.dot(&w).sqrt();
        if norm == T::zero() {
            return T::zero();
        }
        let done = (norm - est).abs() <= norm * T::lit(1e-10);
        est = norm;
        v = w / norm;
        if done {
            break;
        }
    }
    est
}

/// Squared Euclidean norms of the columns.
pub fn column_sq_norms<T: Scalar>(x: ArrayView2<'_, T>) -> Array1<T> {
    x.map_axis(Axis(0), |c| c.dot(&c))
}
