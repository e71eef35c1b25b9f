//! Density estimation for a response variable that is linked to a set of
//! covariates through a linear regression model.
//!
//! The central object is a convolution density estimator: fit the regression
//! by ordinary least squares, smooth the residuals with a Gaussian kernel,
//! and average the smoothed residual density over fitted values computed from
//! *every* available covariate row — including auxiliary rows for which no
//! response was observed. Supplying extra covariate-only observations tightens
//! the estimate well beyond what the classical Rosenblatt–Parzen estimator on
//! the response sample alone can achieve.
//!
//! The crate is organised around the stages of that pipeline:
//!
//! * [`datagen`] — seeded synthetic scenarios (skewed, multimodal, correlated
//!   presets) and the primitive distributions they need.
//! * [`regression`] — QR-based ordinary least squares with the diagnostics the
//!   estimator consumes.
//! * [`bandwidth`] — Silverman and Sheather–Jones selection plus the
//!   `L^(-1/5)` rescaling used by the convolution estimator.
//! * [`gausstransform`] — naive, FFT-binned, and improved fast Gauss
//!   transform evaluation of weighted Gaussian sums.
//! * [`estimators`] — the Rosenblatt–Parzen baseline and the convolution
//!   estimator, evaluated on a grid through any transform backend.
//! * [`harness`] — Monte Carlo machinery: reference densities, ISE/MISE
//!   studies, convergence slopes, and wall-clock benchmarks.
//!
//! # Quick start
//!
//! ```
//! use regconv::bandwidth::{bandwidth_conv, bandwidth_rp, BandwidthRule};
//! use regconv::{estimate_conv, fit_ols, generate_scenario, Backend, Grid, Preset};
//!
//! // 100 complete observations plus 1600 covariate-only rows.
//! let scenario = Preset::Skewed.spec();
//! let (complete, aux) = generate_scenario(&scenario, 100, 1600, 7).unwrap();
//! let fit = fit_ols(&complete).unwrap();
//!
//! // Select the kernel bandwidth on the residuals, rescaled for L = N + M.
//! let residuals: Vec<f64> = fit.residuals().iter().cloned().collect();
//! let h_rp = bandwidth_rp(&residuals, &BandwidthRule::SheatherJones).unwrap();
//! let h = bandwidth_conv(h_rp, complete.n() + aux.m()).unwrap();
//!
//! let grid = Grid::linspace(22.0, 26.5, 128).unwrap();
//! let density = estimate_conv(&fit, &complete, &aux, &grid, h, &Backend::fgt()).unwrap();
//! assert!(density.mass() > 0.9 && density.mass() <= 1.05);
//! ```

pub mod bandwidth;
pub mod datagen;
pub mod estimators;
pub mod gausstransform;
pub mod harness;
pub mod regression;
pub mod seeds;

pub use bandwidth::{bandwidth_conv, bandwidth_rp, BandwidthRule};
pub use datagen::{
    generate_scenario, sample_distribution, AuxiliarySample, CompleteSample, DistributionSpec,
    Preset, ScenarioSpec,
};
pub use estimators::{estimate_conv, estimate_rp, DensityEstimate, EstimatorKind, Grid};
pub use gausstransform::{Backend, GaussTransformProblem, IfgtParams};
pub use regression::{fit_ols, predict, RegressionFit};
