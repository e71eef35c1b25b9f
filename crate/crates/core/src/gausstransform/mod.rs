//! Three interchangeable evaluators of the discrete Gauss transform
//! `G(y_v) = sum_i q_i exp(-((y_v - x_i)/h)^2)`.
//!
//! * [`gt_exact`] — the O(VL) double loop; the accuracy oracle for the rest.
//! * [`gt_fft`] — linear binning plus circular FFT convolution; fast, with
//!   documented (not certified) accuracy.
//! * [`gt_ifgt`] — improved fast Gauss transform with a certified absolute
//!   error of at most `accuracy * sum |q_i|` per target and near-linear
//!   cost in sources plus targets.
//!
//! Note the exponent convention: the `h` here satisfies
//! `exp(-(d/h)^2)`, which is sqrt(2) times the bandwidth of a standard
//! Gaussian kernel `exp(-d^2 / (2 h_K^2))`. Density estimators in this crate
//! perform that conversion internally.

mod cluster;
mod fft;
mod ifgt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ifgt::{DEFAULT_MAX_CLUSTERS, MAX_ORDER};

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("invalid gauss transform problem: {0}")]
    InvalidProblem(String),
    #[error(
        "accuracy {accuracy:.1e} unattainable within expansion order {max_order}; \
         request a larger accuracy"
    )]
    AccuracyUnattainable { accuracy: f64, max_order: usize },
}

/// One Gauss transform instance: weighted sources, targets, bandwidth in the
/// `exp(-(d/h)^2)` convention, and the per-target accuracy honored by the
/// certified backend (absolute, relative to the total weight mass).
#[derive(Debug, Clone)]
pub struct GaussTransformProblem {
    pub sources: Vec<f64>,
    pub weights: Vec<f64>,
    pub targets: Vec<f64>,
    pub gauss_bandwidth: f64,
    pub accuracy: f64,
}

impl GaussTransformProblem {
    pub fn new(
        sources: Vec<f64>,
        weights: Vec<f64>,
        targets: Vec<f64>,
        gauss_bandwidth: f64,
        accuracy: f64,
    ) -> Result<Self, TransformError> {
        let problem = Self { sources, weights, targets, gauss_bandwidth, accuracy };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<(), TransformError> {
        if self.sources.len() != self.weights.len() {
            return Err(TransformError::InvalidProblem(format!(
                "{} sources but {} weights",
                self.sources.len(),
                self.weights.len()
            )));
        }
        if !(self.gauss_bandwidth.is_finite() && self.gauss_bandwidth > 0.0) {
            return Err(TransformError::InvalidProblem(format!(
                "gauss_bandwidth {} must be positive and finite",
                self.gauss_bandwidth
            )));
        }
        if !(self.accuracy > 0.0 && self.accuracy < 1.0) {
            return Err(TransformError::InvalidProblem(format!(
                "accuracy {} must lie in (0, 1)",
                self.accuracy
            )));
        }
        let finite = |name: &str, xs: &[f64]| {
            if xs.iter().any(|x| !x.is_finite()) {
                Err(TransformError::InvalidProblem(format!("non-finite {name}")))
            } else {
                Ok(())
            }
        };
        finite("source", &self.sources)?;
        finite("weight", &self.weights)?;
        finite("target", &self.targets)
    }

    /// Total weight mass `sum |q_i|`, the scale of the accuracy contract.
    pub fn total_weight(&self) -> f64 {
        self.weights.iter().map(|q| q.abs()).sum()
    }
}

/// Parameters of the certified fast backend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IfgtParams {
    /// Per-target absolute error budget, relative to the total weight mass.
    pub accuracy: f64,
    /// Cap on the cluster count (the count itself grows like sqrt(L)).
    pub max_clusters: usize,
}

impl Default for IfgtParams {
    fn default() -> Self {
        Self { accuracy: 1e-6, max_clusters: DEFAULT_MAX_CLUSTERS }
    }
}

impl IfgtParams {
    pub fn validate(&self) -> Result<(), TransformError> {
        if !(self.accuracy > 0.0 && self.accuracy < 1.0) {
            return Err(TransformError::InvalidProblem(format!(
                "ifgt accuracy {} must lie in (0, 1)",
                self.accuracy
            )));
        }
        if self.max_clusters == 0 {
            return Err(TransformError::InvalidProblem("ifgt needs at least one cluster".into()));
        }
        Ok(())
    }
}

/// Which evaluator carries out a Gauss transform (and, downstream, a density
/// estimate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case")]
pub enum Backend {
    Naive,
    FftBinned { bins: usize },
    Ifgt(IfgtParams),
}

impl Backend {
    /// FFT backend with the default 4096-bin grid.
    pub fn fft() -> Self {
        Backend::FftBinned { bins: 4096 }
    }

    /// Certified fast backend with default parameters.
    pub fn fgt() -> Self {
        Backend::Ifgt(IfgtParams::default())
    }

    pub fn validate(&self) -> Result<(), TransformError> {
        match self {
            Backend::Naive => Ok(()),
            Backend::FftBinned { bins } => {
                if *bins < 256 || !bins.is_power_of_two() {
                    Err(TransformError::InvalidProblem(format!(
                        "bin count {bins} must be a power of two >= 256"
                    )))
                } else {
                    Ok(())
                }
            }
            Backend::Ifgt(params) => params.validate(),
        }
    }

    /// Short name used in CLI flags and CSV output.
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Naive => "naive",
            Backend::FftBinned { .. } => "fft",
            Backend::Ifgt(_) => "fgt",
        }
    }
}

impl std::str::FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "naive" => Ok(Backend::Naive),
            "fft" => Ok(Backend::fft()),
            "fgt" => Ok(Backend::fgt()),
            other => Err(format!("unknown backend `{other}` (expected naive, fft, or fgt)")),
        }
    }
}

/// Direct O(VL) evaluation; the oracle for the accelerated backends.
pub fn gt_exact(problem: &GaussTransformProblem) -> Vec<f64> {
    let g = problem.gauss_bandwidth;
    problem
        .targets
        .par_iter()
        .map(|&t| {
            problem
                .sources
                .iter()
                .zip(&problem.weights)
                .map(|(&x, &q)| {
                    let d = (t - x) / g;
                    q * (-d * d).exp()
                })
                .sum()
        })
        .collect()
}

/// FFT-binned evaluation on `bins` grid points.
pub fn gt_fft(problem: &GaussTransformProblem, bins: usize) -> Result<Vec<f64>, TransformError> {
    problem.validate()?;
    fft::evaluate(problem, bins)
}

/// Improved fast Gauss transform honoring `problem.accuracy`.
pub fn gt_ifgt(problem: &GaussTransformProblem) -> Result<Vec<f64>, TransformError> {
    gt_ifgt_with(problem, DEFAULT_MAX_CLUSTERS)
}

/// As [`gt_ifgt`] with an explicit cluster cap.
pub fn gt_ifgt_with(
    problem: &GaussTransformProblem,
    max_clusters: usize,
) -> Result<Vec<f64>, TransformError> {
    problem.validate()?;
    if max_clusters == 0 {
        return Err(TransformError::InvalidProblem("ifgt needs at least one cluster".into()));
    }
    ifgt::evaluate(problem, max_clusters)
}

/// Evaluates the transform with the chosen backend. For `Ifgt` the
/// problem's own accuracy field governs certification.
pub fn gauss_transform(
    problem: &GaussTransformProblem,
    backend: &Backend,
) -> Result<Vec<f64>, TransformError> {
    backend.validate()?;
    match backend {
        Backend::Naive => {
            problem.validate()?;
            Ok(gt_exact(problem))
        }
        Backend::FftBinned { bins } => gt_fft(problem, *bins),
        Backend::Ifgt(params) => gt_ifgt_with(problem, params.max_clusters),
    }
}
