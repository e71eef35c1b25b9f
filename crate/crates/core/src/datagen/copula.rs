//! Gaussian copula (NORTA) coupling of fixed marginals.
//!
//! The target correlation matrix is applied in the latent Gaussian space:
//! draw `Z ~ N(0, R)` via the Cholesky factor of `R`, push each coordinate
//! through the standard normal CDF, and map the resulting uniforms through
//! the marginal quantile functions. Rank correlations are preserved up to
//! the usual small NORTA discrepancy between latent and realized
//! product-moment correlation.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{quantile, DatagenError, DistributionSpec};

pub(super) struct GaussianCopula {
    factor: DMatrix<f64>,
    marginals: Vec<DistributionSpec>,
}

impl GaussianCopula {
    pub(super) fn new(
        correlation: DMatrix<f64>,
        marginals: &[DistributionSpec],
    ) -> Result<Self, DatagenError> {
        let chol = Cholesky::new(correlation)
            .ok_or_else(|| DatagenError::Correlation(": Cholesky factorization failed".into()))?;
        Ok(Self { factor: chol.unpack(), marginals: marginals.to_vec() })
    }

    pub(super) fn dim(&self) -> usize {
        self.marginals.len()
    }

    /// Fills `row` with one correlated covariate draw.
    pub(super) fn draw_row(&self, row: &mut [f64], rng: &mut ChaCha8Rng) {
        let j = self.dim();
        let z = DVector::from_fn(j, |_, _| StandardNormal.sample(rng));
        let latent = &self.factor * z;
        let std = Normal::standard();
        for (slot, (w, marginal)) in row.iter_mut().zip(latent.iter().zip(&self.marginals)) {
            // Clamp away from {0, 1} so extreme latent draws cannot produce
            // infinite quantiles.
            let u = std.cdf(*w).clamp(1e-15, 1.0 - 1e-15);
            *slot = quantile(marginal, u);
        }
    }
}
