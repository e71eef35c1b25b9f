//! Seeded generation of synthetic regression scenarios.
//!
//! A [`ScenarioSpec`] fully parameterizes a data-generating process
//! `Y = X^T alpha + eps`: the coefficient vector, one marginal distribution
//! per covariate, an optional correlation matrix tying the covariates
//! together through a Gaussian copula, and the error distribution. Three
//! named presets cover the standard benchmark scenarios (see [`Preset`]).
//!
//! Generation is deterministic: the same `(spec, sizes, seed)` always yields
//! bit-identical samples, and auxiliary rows are drawn after the complete
//! sample so that enlarging the auxiliary sample never perturbs the complete
//! one.

mod cdf;
mod copula;
mod sampling;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::seeds;
pub(crate) use cdf::{cdf, quantile};
use copula::GaussianCopula;
use sampling::Sampler;

/// Errors from scenario validation and sample generation.
#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("invalid distribution parameter: {0}")]
    Parameter(String),
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error("correlation matrix is not symmetric positive-definite{0}")]
    Correlation(String),
    #[error("sample shape: {0}")]
    Shape(String),
}

/// A univariate distribution, parameterized as it appears in scenario
/// configuration files.
///
/// `Normal` is parameterized by mean and *variance*. Configurations written
/// in terms of standard deviations can set
/// [`ScenarioSpec::normal_param`] to [`NormalParam::StdDev`] instead of
/// editing every entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionSpec {
    Normal { mean: f64, variance: f64 },
    Beta { a: f64, b: f64 },
    StudentT { dof: f64 },
    SkewNormal { location: f64, scale: f64, shape: f64 },
    GaussianMixture { weights: Vec<f64>, means: Vec<f64>, sds: Vec<f64> },
}

impl DistributionSpec {
    /// Validates the parameters, interpreting `Normal`'s second parameter as
    /// a variance.
    pub fn validate(&self) -> Result<(), DatagenError> {
        let err = |m: String| Err(DatagenError::Parameter(m));
        match self {
            DistributionSpec::Normal { mean, variance } => {
                if !mean.is_finite() || !variance.is_finite() || *variance < 0.0 {
                    return err(format!("normal(mean={mean}, variance={variance})"));
                }
            }
            DistributionSpec::Beta { a, b } => {
                if !(a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0) {
                    return err(format!("beta requires a, b > 0, got ({a}, {b})"));
                }
            }
            DistributionSpec::StudentT { dof } => {
                // dof > 2 keeps the variance finite, which the regression
                // moment conditions require.
                if !(dof.is_finite() && *dof > 2.0) {
                    return err(format!("student_t requires dof > 2, got {dof}"));
                }
            }
            DistributionSpec::SkewNormal { location, scale, shape } => {
                if !(location.is_finite() && shape.is_finite() && scale.is_finite() && *scale > 0.0) {
                    return err(format!(
                        "skew_normal(location={location}, scale={scale}, shape={shape})"
                    ));
                }
            }
            DistributionSpec::GaussianMixture { weights, means, sds } => {
                if weights.is_empty() || weights.len() != means.len() || means.len() != sds.len() {
                    return err("gaussian_mixture component lists must match and be non-empty"
                        .to_string());
                }
                if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                    return err("gaussian_mixture weights must be nonnegative".to_string());
                }
                let total: f64 = weights.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return err(format!("gaussian_mixture weights sum to {total}, expected 1"));
                }
                if sds.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                    return err("gaussian_mixture sds must be > 0".to_string());
                }
                if means.iter().any(|m| !m.is_finite()) {
                    return err("gaussian_mixture means must be finite".to_string());
                }
            }
        }
        Ok(())
    }

    /// Population mean of the distribution.
    pub fn mean(&self) -> f64 {
        match self {
            DistributionSpec::Normal { mean, .. } => *mean,
            DistributionSpec::Beta { a, b } => a / (a + b),
            DistributionSpec::StudentT { .. } => 0.0,
            DistributionSpec::SkewNormal { location, scale, shape } => {
                let delta = shape / (1.0 + shape * shape).sqrt();
                location + scale * delta * (2.0 / std::f64::consts::PI).sqrt()
            }
            DistributionSpec::GaussianMixture { weights, means, .. } => {
                weights.iter().zip(means).map(|(w, m)| w * m).sum()
            }
        }
    }
}

/// Interpretation of the second parameter of `Normal` entries in a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalParam {
    #[default]
    Variance,
    StdDev,
}

/// A fully parameterized synthetic data-generating process
/// `Y = alpha_0 + alpha_1 X_1 + ... + alpha_J X_J + eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    /// Regression coefficients, intercept first (length J+1).
    pub coefficients: Vec<f64>,
    /// Marginal distribution of each covariate (length J).
    pub covariates: Vec<DistributionSpec>,
    /// Optional J x J correlation matrix applied in the latent Gaussian
    /// space of a copula over the covariates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<Vec<Vec<f64>>>,
    /// Error distribution.
    pub error: DistributionSpec,
    /// How `Normal` entries are parameterized. Defaults to variance.
    #[serde(default)]
    pub normal_param: NormalParam,
}

/// The named benchmark scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// Single-peaked, negatively skewed response: a Beta(5,1) covariate plus
    /// a tight normal covariate with small normal noise.
    Skewed,
    /// Multimodal response driven by a four-component Gaussian mixture
    /// covariate.
    Multimodal,
    /// Three correlated covariates (beta, normal, Student t) with a
    /// mean-zero skew-normal error.
    Correlated,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::Skewed, Preset::Multimodal, Preset::Correlated];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Skewed => "skewed",
            Preset::Multimodal => "multimodal",
            Preset::Correlated => "correlated",
        }
    }

    pub fn spec(self) -> ScenarioSpec {
        match self {
            Preset::Skewed => ScenarioSpec {
                coefficients: vec![1.0, 3.0, 3.0],
                covariates: vec![
                    DistributionSpec::Beta { a: 5.0, b: 1.0 },
                    DistributionSpec::Normal { mean: 7.0, variance: 0.05 },
                ],
                correlation: None,
                error: DistributionSpec::Normal { mean: 0.0, variance: 0.1 },
                normal_param: NormalParam::Variance,
            },
            Preset::Multimodal => ScenarioSpec {
                coefficients: vec![4.0, 1.5],
                covariates: vec![DistributionSpec::GaussianMixture {
                    weights: vec![0.2, 0.2, 0.4, 0.2],
                    means: vec![-4.0, 4.0, 14.0, 21.0],
                    sds: vec![3.0, 2.0, 2.0, 2.0],
                }],
                correlation: None,
                error: DistributionSpec::Normal { mean: 0.0, variance: 4.0 },
                normal_param: NormalParam::Variance,
            },
            Preset::Correlated => {
                // Skew-normal location chosen so the error has mean zero:
                // -omega * delta * sqrt(2/pi) with delta = alpha/sqrt(1+alpha^2).
                let shape = 3.0f64;
                let scale = 1.0f64;
                let location =
                    -scale * (2.0 * shape * shape / ((1.0 + shape * shape) * std::f64::consts::PI))
                        .sqrt();
                ScenarioSpec {
                    coefficients: vec![1.0, 1.0, 2.0, 0.5],
                    covariates: vec![
                        DistributionSpec::Beta { a: 2.0, b: 5.0 },
                        DistributionSpec::Normal { mean: 6.0, variance: 4.0 },
                        DistributionSpec::StudentT { dof: 6.0 },
                    ],
                    correlation: Some(vec![
                        vec![1.0, 0.2, 0.5],
                        vec![0.2, 1.0, 0.3],
                        vec![0.5, 0.3, 1.0],
                    ]),
                    error: DistributionSpec::SkewNormal { location, scale, shape },
                    normal_param: NormalParam::Variance,
                }
            }
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "skewed" => Ok(Preset::Skewed),
            "multimodal" => Ok(Preset::Multimodal),
            "correlated" => Ok(Preset::Correlated),
            other => Err(format!(
                "unknown preset `{other}` (expected skewed, multimodal, or correlated)"
            )),
        }
    }
}

impl ScenarioSpec {
    /// Number of covariates J.
    pub fn n_covariates(&self) -> usize {
        self.covariates.len()
    }

    /// Population mean of the response, `alpha_0 + sum alpha_j E[X_j] + E[eps]`.
    pub fn response_mean(&self) -> f64 {
        let spec = self.resolved();
        let mut mean = spec.coefficients[0] + spec.error.mean();
        for (alpha, cov) in spec.coefficients[1..].iter().zip(&spec.covariates) {
            mean += alpha * cov.mean();
        }
        mean
    }

    /// Copy with every `Normal` entry rewritten to variance parameterization.
    pub fn resolved(&self) -> ScenarioSpec {
        let mut spec = self.clone();
        if spec.normal_param == NormalParam::StdDev {
            let fix = |d: &mut DistributionSpec| {
                if let DistributionSpec::Normal { variance, .. } = d {
                    *variance *= *variance;
                }
            };
            spec.covariates.iter_mut().for_each(fix);
            fix(&mut spec.error);
            spec.normal_param = NormalParam::Variance;
        }
        spec
    }

    pub fn validate(&self) -> Result<(), DatagenError> {
        let j = self.covariates.len();
        if self.coefficients.len() != j + 1 {
            return Err(DatagenError::Scenario(format!(
                "expected {} coefficients for {} covariates, got {}",
                j + 1,
                j,
                self.coefficients.len()
            )));
        }
        if self.coefficients[0] == 0.0 {
            return Err(DatagenError::Scenario("intercept alpha_0 must be nonzero".into()));
        }
        if self.coefficients.iter().any(|c| !c.is_finite()) {
            return Err(DatagenError::Scenario("coefficients must be finite".into()));
        }
        let resolved = self.resolved();
        for cov in &resolved.covariates {
            cov.validate()?;
        }
        resolved.error.validate()?;
        if let Some(rows) = &self.correlation {
            self.correlation_matrix()?;
            if rows.len() != j {
                return Err(DatagenError::Scenario(format!(
                    "correlation matrix is {}x{} but there are {} covariates",
                    rows.len(),
                    rows.first().map_or(0, Vec::len),
                    j
                )));
            }
        }
        Ok(())
    }

    /// The correlation matrix as a checked dense matrix, if present.
    pub fn correlation_matrix(&self) -> Result<Option<DMatrix<f64>>, DatagenError> {
        let Some(rows) = &self.correlation else {
            return Ok(None);
        };
        let j = rows.len();
        if rows.iter().any(|r| r.len() != j) {
            return Err(DatagenError::Correlation(": matrix is not square".into()));
        }
        let m = DMatrix::from_fn(j, j, |r, c| rows[r][c]);
        for r in 0..j {
            if (m[(r, r)] - 1.0).abs() > 1e-12 {
                return Err(DatagenError::Correlation(format!(
                    ": diagonal entry ({r},{r}) = {} is not 1",
                    m[(r, r)]
                )));
            }
            for c in 0..r {
                if (m[(r, c)] - m[(c, r)]).abs() > 1e-12 {
                    return Err(DatagenError::Correlation(format!(
                        ": entries ({r},{c}) and ({c},{r}) differ"
                    )));
                }
            }
        }
        if Cholesky::new(m.clone()).is_none() {
            return Err(DatagenError::Correlation(": Cholesky factorization failed".into()));
        }
        Ok(Some(m))
    }
}

/// The N paired observations (response, covariate row) defining the
/// regression. The design matrix carries an all-ones intercept column first.
#[derive(Debug, Clone, PartialEq)]
pub struct CompleteSample {
    responses: DVector<f64>,
    design: DMatrix<f64>,
}

impl CompleteSample {
    pub fn new(responses: DVector<f64>, design: DMatrix<f64>) -> Result<Self, DatagenError> {
        if responses.len() != design.nrows() {
            return Err(DatagenError::Shape(format!(
                "{} responses but {} design rows",
                responses.len(),
                design.nrows()
            )));
        }
        let n = design.nrows();
        let j = design.ncols().saturating_sub(1);
        // J+1 rows make the fit determined; scenario generation demands the
        // stricter J+2 so residual degrees of freedom exist.
        if design.ncols() < 1 || n < j + 1 {
            return Err(DatagenError::Shape(format!(
                "need at least J+1 = {} rows for {} covariates, got {n}",
                j + 1,
                j
            )));
        }
        if (0..n).any(|i| design[(i, 0)] != 1.0) {
            return Err(DatagenError::Shape("first design column must be all ones".into()));
        }
        Ok(Self { responses, design })
    }

    pub fn responses(&self) -> &DVector<f64> {
        &self.responses
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    /// Number of complete-case observations N.
    pub fn n(&self) -> usize {
        self.design.nrows()
    }

    /// Number of covariates J (excluding the intercept column).
    pub fn n_covariates(&self) -> usize {
        self.design.ncols() - 1
    }
}

/// M covariate-only rows appended to the estimation, same layout as the
/// complete design (intercept column first). M may be zero.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliarySample {
    design: DMatrix<f64>,
}

impl AuxiliarySample {
    pub fn new(design: DMatrix<f64>) -> Result<Self, DatagenError> {
        if design.ncols() < 1 {
            return Err(DatagenError::Shape("auxiliary design needs an intercept column".into()));
        }
        if (0..design.nrows()).any(|i| design[(i, 0)] != 1.0) {
            return Err(DatagenError::Shape("first design column must be all ones".into()));
        }
        Ok(Self { design })
    }

    /// An empty auxiliary sample matching a J-covariate design.
    pub fn empty(n_covariates: usize) -> Self {
        Self { design: DMatrix::zeros(0, n_covariates + 1) }
    }

    pub fn design(&self) -> &DMatrix<f64> {
        &self.design
    }

    /// Number of auxiliary rows M.
    pub fn m(&self) -> usize {
        self.design.nrows()
    }
}

/// Draws `n` i.i.d. values from `spec`, deterministically in `seed`.
pub fn sample_distribution(
    spec: &DistributionSpec,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>, DatagenError> {
    let mut rng = seeds::master_rng(seed);
    sample_distribution_with(spec, n, &mut rng)
}

/// As [`sample_distribution`], drawing from a caller-managed stream.
pub fn sample_distribution_with(
    spec: &DistributionSpec,
    n: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<f64>, DatagenError> {
    if n == 0 {
        return Err(DatagenError::Parameter("sample size must be >= 1".into()));
    }
    spec.validate()?;
    let sampler = Sampler::from_spec(spec)?;
    Ok((0..n).map(|_| sampler.sample(rng)).collect())
}

/// Cumulative distribution function of `spec` at `x`.
pub fn distribution_cdf(spec: &DistributionSpec, x: f64) -> Result<f64, DatagenError> {
    spec.validate()?;
    Ok(cdf(spec, x))
}

/// Generates a complete sample of size `n_complete` and an auxiliary sample
/// of size `n_auxiliary` from the scenario, deterministically in `seed`.
pub fn generate_scenario(
    spec: &ScenarioSpec,
    n_complete: usize,
    n_auxiliary: usize,
    seed: u64,
) -> Result<(CompleteSample, AuxiliarySample), DatagenError> {
    let mut rng = seeds::master_rng(seed);
    generate_scenario_with(spec, n_complete, n_auxiliary, &mut rng)
}

/// As [`generate_scenario`], drawing from a caller-managed stream.
///
/// Draw order is fixed: complete covariate rows, then errors, then auxiliary
/// rows. Extending `n_auxiliary` therefore reuses the identical complete
/// sample, which simulation studies exploit as common random numbers across
/// the auxiliary-ratio axis.
pub fn generate_scenario_with(
    spec: &ScenarioSpec,
    n_complete: usize,
    n_auxiliary: usize,
    rng: &mut ChaCha8Rng,
) -> Result<(CompleteSample, AuxiliarySample), DatagenError> {
    spec.validate()?;
    let spec = spec.resolved();
    let j = spec.covariates.len();
    if n_complete < j + 2 {
        return Err(DatagenError::Shape(format!(
            "n_complete = {n_complete} is below the minimum J+2 = {}",
            j + 2
        )));
    }

    let row_gen = RowGenerator::new(&spec)?;
    let error_sampler = Sampler::from_spec(&spec.error)?;
    let alpha = DVector::from_column_slice(&spec.coefficients);

    let design = row_gen.draw_design(n_complete, rng);
    let errors = DVector::from_fn(n_complete, |_, _| error_sampler.sample(rng));
    let responses = &design * &alpha + errors;
    let complete = CompleteSample::new(responses, design)?;

    let aux_design = row_gen.draw_design(n_auxiliary, rng);
    let auxiliary = AuxiliarySample::new(aux_design)?;
    Ok((complete, auxiliary))
}

/// Covariate-row generator: independent marginals, or marginals coupled by a
/// Gaussian copula when a correlation matrix is present.
enum RowGenerator {
    Independent(Vec<Sampler>),
    Copula(GaussianCopula),
}

impl RowGenerator {
    fn new(spec: &ScenarioSpec) -> Result<Self, DatagenError> {
        match spec.correlation_matrix()? {
            Some(corr) => Ok(RowGenerator::Copula(GaussianCopula::new(corr, &spec.covariates)?)),
            None => {
                let samplers = spec
                    .covariates
                    .iter()
                    .map(Sampler::from_spec)
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(RowGenerator::Independent(samplers))
            }
        }
    }

    /// Draws `rows` covariate rows into a design matrix with a leading
    /// intercept column.
    fn draw_design(&self, rows: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
        let j = match self {
            RowGenerator::Independent(s) => s.len(),
            RowGenerator::Copula(c) => c.dim(),
        };
        let mut design = DMatrix::zeros(rows, j + 1);
        let mut row = vec![0.0; j];
        for i in 0..rows {
            design[(i, 0)] = 1.0;
            match self {
                RowGenerator::Independent(samplers) => {
                    for (slot, sampler) in row.iter_mut().zip(samplers) {
                        *slot = sampler.sample(rng);
                    }
                }
                RowGenerator::Copula(copula) => copula.draw_row(&mut row, rng),
            }
            for (c, value) in row.iter().enumerate() {
                design[(i, c + 1)] = *value;
            }
        }
        design
    }
}

#[cfg(test)]
mod tests;
