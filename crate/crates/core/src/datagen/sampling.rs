//! Random variate generation for the scenario distributions.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Normal, StandardNormal, StudentT};

use super::{DatagenError, DistributionSpec};

/// A compiled sampler for one [`DistributionSpec`].
pub(super) enum Sampler {
    Normal(Normal<f64>),
    Beta(Beta<f64>),
    StudentT(StudentT<f64>),
    SkewNormal { location: f64, scale: f64, delta: f64 },
    Mixture { cumulative: Vec<f64>, components: Vec<Normal<f64>> },
}

impl Sampler {
    pub(super) fn from_spec(spec: &DistributionSpec) -> Result<Self, DatagenError> {
        let bad = |e: &dyn std::fmt::Display| DatagenError::Parameter(e.to_string());
        match spec {
            DistributionSpec::Normal { mean, variance } => {
                Ok(Sampler::Normal(Normal::new(*mean, variance.sqrt()).map_err(|e| bad(&e))?))
            }
            DistributionSpec::Beta { a, b } => {
                Ok(Sampler::Beta(Beta::new(*a, *b).map_err(|e| bad(&e))?))
            }
            DistributionSpec::StudentT { dof } => {
                Ok(Sampler::StudentT(StudentT::new(*dof).map_err(|e| bad(&e))?))
            }
            DistributionSpec::SkewNormal { location, scale, shape } => Ok(Sampler::SkewNormal {
                location: *location,
                scale: *scale,
                delta: shape / (1.0 + shape * shape).sqrt(),
            }),
            DistributionSpec::GaussianMixture { weights, means, sds } => {
                let mut cumulative = Vec::with_capacity(weights.len());
                let mut total = 0.0;
                for w in weights {
                    total += w;
                    cumulative.push(total);
                }
                // Guard the last edge against rounding in the partial sums.
                if let Some(last) = cumulative.last_mut() {
                    *last = f64::INFINITY;
                }
                let components = means
                    .iter()
                    .zip(sds)
                    .map(|(m, s)| Normal::new(*m, *s).map_err(|e| bad(&e)))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Sampler::Mixture { cumulative, components })
            }
        }
    }

    pub(super) fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Sampler::Normal(d) => d.sample(rng),
            Sampler::Beta(d) => d.sample(rng),
            Sampler::StudentT(d) => d.sample(rng),
            // Z = delta |U0| + sqrt(1 - delta^2) U1 with U0, U1 standard
            // normal, shifted and scaled to (location, scale).
            Sampler::SkewNormal { location, scale, delta } => {
                let u0: f64 = StandardNormal.sample(rng);
                let u1: f64 = StandardNormal.sample(rng);
                let z = delta * u0.abs() + (1.0 - delta * delta).sqrt() * u1;
                location + scale * z
            }
            Sampler::Mixture { cumulative, components } => {
                let u: f64 = rng.random();
                let idx = cumulative.iter().position(|edge| u < *edge).unwrap_or(0);
                components[idx].sample(rng)
            }
        }
    }
}
