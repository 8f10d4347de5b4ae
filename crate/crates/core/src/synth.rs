//! Synthetic descriptor tables with block-correlated Gaussian predictors.

use ndarray::{Array1, Array2};
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::DescriptorTable;
use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::scalar::Scalar;

/// Columns are grouped in consecutive blocks of this size.
pub const BLOCK_SIZE: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthSpec {
    pub n: usize,
    pub p: usize,
    pub sparsity: usize,
    pub correlation: f64,
    pub noise_sd: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(n: usize, p: usize, sparsity: usize, correlation: f64, noise_sd: f64, seed: u64) -> Self {
        Self {
            n,
            p,
            sparsity,
            correlation,
            noise_sd,
            seed,
        }
    }

    /// 100 observations of 234 descriptors, 10 true effects.
    pub fn reference(seed: u64) -> Self {
        Self::new(100, 234, 10, 0.5, 1.0, seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.p < 1 {
            return Err(Error::TooSmall {
                rows: self.n,
                columns: self.p,
            });
        }
        if self.sparsity > self.p {
            return Err(Error::InvalidArgument(format!(
                "sparsity {} exceeds p = {}",
                self.sparsity, self.p
            )));
        }
        if !(0.0..1.0).contains(&self.correlation) {
            return Err(Error::InvalidArgument(format!(
                "correlation {} not in [0, 1)",
                self.correlation
            )));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::InvalidArgument(format!("noise_sd {} is invalid", self.noise_sd)));
        }
        Ok(())
    }

    /// Coefficients: `sparsity` entries spread evenly over the columns,
    /// magnitude 1, signs alternating starting with +1.
    pub fn true_beta(&self) -> Array1<f64> {
        let mut beta = Array1::zeros(self.p);
        for i in 0..self.sparsity {
            let j = i * self.p / self.sparsity;
            beta[j] = if i % 2 == 0 { 1.0 } else { -1.0 };
        }
        beta
    }
}

/// Draws a table and returns it with the true coefficients. Within a block,
/// `x_j = √ρ·z_block + √(1−ρ)·e_j`, so columns share correlation `ρ`.
pub fn generate<T: Scalar>(spec: &SynthSpec) -> Result<(DescriptorTable<T>, Array1<T>)> {
    spec.validate()?;
    let mut rng = SeededRng::new(spec.seed);
    let shared = spec.correlation.sqrt();
    let own = (1.0 - spec.correlation).sqrt();
    let beta = spec.true_beta();
    let mut x = Array2::<f64>::zeros((spec.n, spec.p));
    let mut y = Array1::<f64>::zeros(spec.n);
    let blocks = spec.p.div_ceil(BLOCK_SIZE);
    for i in 0..spec.n {
        let r = rng.as_rng();
        for b in 0..blocks {
            let z: f64 = StandardNormal.sample(r);
            for j in b * BLOCK_SIZE..((b + 1) * BLOCK_SIZE).min(spec.p) {
                let e: f64 = StandardNormal.sample(r);
                x[[i, j]] = shared * z + own * e;
            }
        }
        let noise: f64 = StandardNormal.sample(r);
        y[i] = x.row(i).dot(&beta) + spec.noise_sd * noise;
    }
    let table = DescriptorTable::new(x.mapv(T::lit), y.mapv(T::lit))?;
    Ok((table, beta.mapv(T::lit)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_shape() {
        let (t, b) = generate::<f64>(&SynthSpec::reference(7)).unwrap();
        assert_eq!((t.n(), t.p()), (100, 234));
        assert_eq!(b.iter().filter(|v| **v != 0.0).count(), 10);
    }

    #[test]
    fn deterministic() {
        let s = SynthSpec::new(20, 15, 3, 0.3, 0.5, 99);
        let (a, _) = generate::<f64>(&s).unwrap();
        let (b, _) = generate::<f64>(&s).unwrap();
        assert_eq!(a.predictors, b.predictors);
        assert_eq!(a.response, b.response);
    }

    #[test]
    fn alternating_signs() {
        let b = SynthSpec::new(10, 9, 3, 0.0, 0.0, 0).true_beta();
        assert_eq!(b.to_vec(), vec![1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(generate::<f64>(&SynthSpec::new(10, 3, 4, 0.0, 0.0, 0)).is_err());
        assert!(generate::<f64>(&SynthSpec::new(10, 3, 1, 1.0, 0.0, 0)).is_err());
        assert!(generate::<f64>(&SynthSpec::new(10, 3, 1, 0.0, -1.0, 0)).is_err());
    }
}
