//! Monte Carlo evaluation of the estimators.
//!
//! The workflow mirrors the standard simulation protocol for density
//! estimators: build a reference density once from a very large sample,
//! then for each `(N, tau)` cell draw fresh samples per replication, run
//! both estimators on the reference grid, and average integrated squared
//! errors. Replications run in parallel on deterministic per-replication
//! streams; cells that share `N` reuse the same complete-sample draws across
//! the `tau` axis (common random numbers), which stabilizes saturation and
//! monotonicity comparisons.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bandwidth::{bandwidth_conv, bandwidth_rp, BandwidthError, BandwidthRule};
use crate::datagen::{
    generate_scenario_with, AuxiliarySample, CompleteSample, DatagenError, ScenarioSpec,
};
use crate::estimators::{
    estimate_conv, estimate_rp, DensityEstimate, EstimatorError, EstimatorKind, Grid,
};
use crate::gausstransform::Backend;
use crate::regression::{fit_ols, RegressionError};
use crate::seeds;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Datagen(#[from] DatagenError),
    #[error(transparent)]
    Regression(#[from] RegressionError),
    #[error(transparent)]
    Bandwidth(#[from] BandwidthError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error("grid mismatch: estimate and reference were built on different grids")]
    GridMismatch,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid study configuration: {0}")]
    Config(String),
}

/// Which data vector the convolution estimator's bandwidth is selected on
/// before the `L^(-1/5)` rescaling. The kernel smooths the residual density,
/// so residuals are the default; selecting on the response sample instead is
/// exposed for sensitivity analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectOn {
    #[default]
    Residuals,
    Response,
}

/// Bandwidth and backend choices shared by every estimation in a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineOptions {
    pub rule: BandwidthRule,
    pub select_on: SelectOn,
    pub backend: Backend,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            rule: BandwidthRule::SheatherJones,
            select_on: SelectOn::Residuals,
            backend: Backend::fgt(),
        }
    }
}

/// Both estimates of one sample on a shared grid.
pub struct EstimatePair {
    pub rp: DensityEstimate,
    pub conv: DensityEstimate,
}

/// Runs the full estimation pipeline on one sample: OLS fit, bandwidth
/// selection (response-sample bandwidth for the baseline, rescaled
/// `select_on` bandwidth for the convolution estimator), then both
/// estimators on `grid`.
pub fn estimate_pair(
    complete: &CompleteSample,
    aux: &AuxiliarySample,
    grid: &Grid,
    opts: &PipelineOptions,
) -> Result<EstimatePair, HarnessError> {
    let responses: Vec<f64> = complete.responses().iter().cloned().collect();
    let fit = fit_ols(complete)?;
    let h_rp = bandwidth_rp(&responses, &opts.rule)?;
    let h_select = match opts.select_on {
        SelectOn::Residuals => {
            let residuals: Vec<f64> = fit.residuals().iter().cloned().collect();
            bandwidth_rp(&residuals, &opts.rule)?
        }
        SelectOn::Response => h_rp,
    };
    let h_conv = bandwidth_conv(h_select, complete.n() + aux.m())?;
    let rp = estimate_rp(&responses, grid, h_rp, &opts.backend)?;
    let conv = estimate_conv(&fit, complete, aux, grid, h_conv, &opts.backend)?;
    Ok(EstimatePair { rp, conv })
}

/// A large-sample Rosenblatt–Parzen solution serving as the ground truth for
/// ISE computations.
#[derive(Debug, Clone)]
pub struct ReferenceDensity {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub bandwidth: f64,
    pub source_size: usize,
    pub scenario: ScenarioSpec,
    pub seed: u64,
}

/// How the reference solution is built.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceConfig {
    pub source_size: usize,
    pub grid_size: usize,
    pub rule: BandwidthRule,
    pub backend: Backend,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        Self {
            source_size: 1_000_000,
            grid_size: 128,
            rule: BandwidthRule::SheatherJones,
            backend: Backend::fgt(),
        }
    }
}

impl ReferenceDensity {
    /// Draws `source_size` responses on the reference stream of `seed` and
    /// smooths them on a fresh grid spanning the bulk of the sample.
    pub fn build(
        scenario: &ScenarioSpec,
        cfg: &ReferenceConfig,
        seed: u64,
    ) -> Result<Self, HarnessError> {
        let mut rng = seeds::stream_rng(seed, seeds::REFERENCE_STREAM);
        let j = scenario.n_covariates();
        let min_rows = j + 2;
        let (complete, _) =
            generate_scenario_with(scenario, cfg.source_size.max(min_rows), 0, &mut rng)?;
        let responses: Vec<f64> = complete.responses().iter().cloned().collect();
        let bandwidth = bandwidth_rp(&responses, &cfg.rule)?;
        let grid = Grid::from_sample(&responses, bandwidth, cfg.grid_size)?;
        let estimate = estimate_rp(&responses, &grid, bandwidth, &cfg.backend)?;
        Ok(Self {
            grid,
            values: estimate.values,
            bandwidth,
            source_size: cfg.source_size,
            scenario: scenario.clone(),
            seed,
        })
    }
}

fn grids_match(a: &Grid, b: &Grid) -> bool {
    a.len() == b.len()
        && a.points()
            .iter()
            .zip(b.points())
            .all(|(x, y)| (x - y).abs() <= 1e-12 * x.abs().max(1.0))
}

/// Integrated squared error against the reference:
/// `spacing * sum_{v=2}^{V} (f_hat(y_v) - f_ref(y_v))^2`.
///
/// The sum starts at the second grid point, matching the convention the
/// benchmark MISE tables are computed with.
pub fn ise(estimate: &DensityEstimate, reference: &ReferenceDensity) -> Result<f64, HarnessError> {
    if !grids_match(&estimate.grid, &reference.grid) {
        return Err(HarnessError::GridMismatch);
    }
    let sum: f64 = estimate
        .values
        .iter()
        .zip(&reference.values)
        .skip(1)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(reference.grid.spacing() * sum)
}

/// One estimator's Monte Carlo MISE at one `(N, tau)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiseCell {
    pub estimator: EstimatorKind,
    pub n_complete: usize,
    pub tau: usize,
    pub mise: f64,
    pub std_error: f64,
    pub replications: usize,
}

/// A cell whose replications failed, with the first error message.
#[derive(Debug, Clone, Serialize)]
pub struct CellFailure {
    pub n_complete: usize,
    pub tau: usize,
    pub message: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MiseStudyConfig {
    pub scenario: ScenarioSpec,
    pub n_values: Vec<usize>,
    pub tau_values: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    pub reference: ReferenceConfig,
    pub pipeline: PipelineOptions,
}

pub struct MiseStudy {
    pub reference: ReferenceDensity,
    pub cells: Vec<MiseCell>,
    pub failures: Vec<CellFailure>,
}

/// Runs the full MISE study: for each `(N, tau)` cell, `replications`
/// parallel independent draws, both estimators, ISE against the shared
/// reference. Cells appear in `(N, tau)` request order, baseline estimator
/// first; failed cells are reported rather than aborting the study.
pub fn mise_study(cfg: &MiseStudyConfig) -> Result<MiseStudy, HarnessError> {
    if cfg.replications < 2 {
        return Err(HarnessError::Config(format!(
            "need at least 2 replications, got {}",
            cfg.replications
        )));
    }
    if cfg.n_values.is_empty() || cfg.tau_values.is_empty() {
        return Err(HarnessError::Config("empty N or tau grid".into()));
    }
    let reference = ReferenceDensity::build(&cfg.scenario, &cfg.reference, cfg.seed)?;
    let mut cells = Vec::new();
    let mut failures = Vec::new();
    for &n in &cfg.n_values {
        for &tau in &cfg.tau_values {
            match run_cell(cfg, &reference, n, tau) {
                Ok([rp, conv]) => cells.extend([rp, conv]),
                Err(e) => failures.push(CellFailure {
                    n_complete: n,
                    tau,
                    message: e.to_string(),
                }),
            }
        }
    }
    Ok(MiseStudy { reference, cells, failures })
}

fn run_cell(
    cfg: &MiseStudyConfig,
    reference: &ReferenceDensity,
    n: usize,
    tau: usize,
) -> Result<[MiseCell; 2], HarnessError> {
    let ises: Vec<(f64, f64)> = (0..cfg.replications)
        .into_par_iter()
        .map(|rep| -> Result<(f64, f64), HarnessError> {
            let mut rng = seeds::stream_rng(cfg.seed, seeds::replication_stream(n, rep));
            let (complete, aux) =
                generate_scenario_with(&cfg.scenario, n, tau * n, &mut rng)?;
            let pair = estimate_pair(&complete, &aux, &reference.grid, &cfg.pipeline)?;
            Ok((ise(&pair.rp, reference)?, ise(&pair.conv, reference)?))
        })
        .collect::<Result<_, _>>()?;
    let summarize = |kind: EstimatorKind, values: Vec<f64>| {
        let p = values.len() as f64;
        let mise = values.iter().sum::<f64>() / p;
        let var = values.iter().map(|v| (v - mise) * (v - mise)).sum::<f64>() / (p - 1.0);
        MiseCell {
            estimator: kind,
            n_complete: n,
            tau,
            mise,
            std_error: (var / p).sqrt(),
            replications: values.len(),
        }
    };
    let rp = summarize(EstimatorKind::RosenblattParzen, ises.iter().map(|i| i.0).collect());
    let conv = summarize(EstimatorKind::ConvolutionMR, ises.iter().map(|i| i.1).collect());
    Ok([rp, conv])
}

/// Least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Convergence slopes extracted from a study's convolution-estimator cells.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Slopes {
    pub slope_in_n: Option<f64>,
    pub slope_in_m: Option<f64>,
}

/// Both slopes, each present when its axis carries enough cells.
pub fn convergence_slopes(cells: &[MiseCell]) -> Slopes {
    Slopes { slope_in_n: slope_in_n(cells).ok(), slope_in_m: slope_in_m(cells).ok() }
}

fn mr_cells(cells: &[MiseCell]) -> Vec<&MiseCell> {
    cells.iter().filter(|c| c.estimator == EstimatorKind::ConvolutionMR).collect()
}

/// Slope of `log MISE` against `log N` at fixed tau (the tau carrying the
/// most distinct N values; at least four are required).
pub fn slope_in_n(cells: &[MiseCell]) -> Result<f64, HarnessError> {
    let mr = mr_cells(cells);
    let mut taus: Vec<usize> = mr.iter().map(|c| c.tau).collect();
    taus.sort_unstable();
    taus.dedup();
    let best = taus
        .into_iter()
        .map(|tau| {
            let mut ns: Vec<usize> =
                mr.iter().filter(|c| c.tau == tau).map(|c| c.n_complete).collect();
            ns.sort_unstable();
            ns.dedup();
            (tau, ns.len())
        })
        .max_by_key(|(tau, count)| (*count, usize::MAX - tau));
    let Some((tau, count)) = best else {
        return Err(HarnessError::InsufficientData("no convolution cells".into()));
    };
    if count < 4 {
        return Err(HarnessError::InsufficientData(format!(
            "need >= 4 N values along tau = {tau}, found {count}"
        )));
    }
    let mut pts: Vec<(f64, f64)> = mr
        .iter()
        .filter(|c| c.tau == tau)
        .map(|c| ((c.n_complete as f64).ln(), c.mise.ln()))
        .collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    Ok(least_squares_slope(&xs, &ys))
}

/// Slope of `log(MISE - plateau)` against `log M` at fixed N over the
/// pre-saturation range.
///
/// The plateau is the MISE of the largest-tau cell. Pre-saturation cells are
/// those with `0 < tau < tau_max` whose MISE clears the plateau by at least
/// 25%, which keeps plateau-dominated (and hence noise-dominated)
/// differences out of the fit; at least three must remain.
pub fn slope_in_m(cells: &[MiseCell]) -> Result<f64, HarnessError> {
    let mr = mr_cells(cells);
    let mut counts: Vec<(usize, usize)> = Vec::new();
    for cell in mr.iter().filter(|c| c.tau > 0) {
        match counts.iter_mut().find(|(n, _)| *n == cell.n_complete) {
            Some((_, k)) => *k += 1,
            None => counts.push((cell.n_complete, 1)),
        }
    }
    let Some(&(n, count)) = counts.iter().max_by_key(|(n, k)| (*k, usize::MAX - n)) else {
        return Err(HarnessError::InsufficientData("no positive-tau convolution cells".into()));
    };
    if count < 4 {
        return Err(HarnessError::InsufficientData(format!(
            "need >= 4 tau values at N = {n}, found {count}"
        )));
    }
    let mut series: Vec<(usize, f64)> = mr
        .iter()
        .filter(|c| c.n_complete == n && c.tau > 0)
        .map(|c| (c.tau, c.mise))
        .collect();
    series.sort_by_key(|(tau, _)| *tau);
    let (tau_max, plateau) = *series.last().unwrap();
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(tau, mise)| *tau < tau_max && *mise > 1.25 * plateau)
        .map(|(tau, mise)| (((tau * n) as f64).ln(), (mise - plateau).ln()))
        .collect();
    if pts.len() < 3 {
        return Err(HarnessError::InsufficientData(format!(
            "only {} usable pre-saturation points at N = {n}",
            pts.len()
        )));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    Ok(least_squares_slope(&xs, &ys))
}

/// One wall-clock measurement of a backend's convolution-estimator
/// evaluation.
#[derive(Debug, Clone, Serialize)]
pub struct TimingRow {
    pub backend: Backend,
    pub m: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimingConfig {
    pub scenario: ScenarioSpec,
    pub n_complete: usize,
    pub grid_size: usize,
    pub m_values: Vec<usize>,
    pub backends: Vec<Backend>,
    pub seed: u64,
    /// Timed runs per row (the median is reported); a warm-up run is
    /// excluded.
    pub runs: usize,
    pub rule: BandwidthRule,
    pub select_on: SelectOn,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            scenario: crate::datagen::Preset::Skewed.spec(),
            n_complete: 100,
            grid_size: 50,
            m_values: vec![0, 100, 200, 400, 800, 1600, 3200, 6400, 12800],
            backends: vec![Backend::Naive, Backend::fft(), Backend::fgt()],
            seed: 0,
            runs: 5,
            rule: BandwidthRule::SheatherJones,
            select_on: SelectOn::Residuals,
        }
    }
}

/// Times the evaluation stage of the convolution estimator (transform plus
/// recovery; sample generation, fitting, and bandwidth selection happen once
/// outside the clock) for every `(backend, M)` combination. Rows are sorted
/// by backend name, then M.
pub fn timing_bench(cfg: &TimingConfig) -> Result<Vec<TimingRow>, HarnessError> {
    if cfg.runs == 0 {
        return Err(HarnessError::Config("need at least one timed run".into()));
    }
    let mut rows = Vec::new();
    for &m in &cfg.m_values {
        let mut rng = seeds::stream_rng(cfg.seed, seeds::replication_stream(cfg.n_complete, 0));
        let (complete, aux) = generate_scenario_with(&cfg.scenario, cfg.n_complete, m, &mut rng)?;
        let fit = fit_ols(&complete)?;
        let responses: Vec<f64> = complete.responses().iter().cloned().collect();
        let h_rp = bandwidth_rp(&responses, &cfg.rule)?;
        let select: Vec<f64> = match cfg.select_on {
            SelectOn::Residuals => fit.residuals().iter().cloned().collect(),
            SelectOn::Response => responses.clone(),
        };
        let h_conv =
            bandwidth_conv(bandwidth_rp(&select, &cfg.rule)?, complete.n() + aux.m())?;
        let grid = Grid::from_sample(&responses, h_rp, cfg.grid_size)?;
        for backend in &cfg.backends {
            let mut samples = Vec::with_capacity(cfg.runs);
            for run in 0..=cfg.runs {
                let start = Instant::now();
                let est = estimate_conv(&fit, &complete, &aux, &grid, h_conv, backend)?;
                let elapsed = start.elapsed().as_secs_f64();
                std::hint::black_box(est.values.first().copied());
                if run > 0 {
                    samples.push(elapsed);
                }
            }
            rows.push(TimingRow { backend: *backend, m, seconds: median(&mut samples) });
        }
    }
    rows.sort_by(|a, b| a.backend.name().cmp(b.backend.name()).then(a.m.cmp(&b.m)));
    Ok(rows)
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = samples.len() / 2;
    if samples.len() % 2 == 1 {
        samples[mid]
    } else {
        0.5 * (samples[mid - 1] + samples[mid])
    }
}

/// Writes cells in the `mise_table.csv` layout.
pub fn write_mise_csv(cells: &[MiseCell], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "estimator,N,tau,mise,stderr,replications")?;
    for c in cells {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            c.estimator.name(),
            c.n_complete,
            c.tau,
            c.mise,
            c.std_error,
            c.replications
        )?;
    }
    Ok(())
}

/// Writes timing rows in the `timing.csv` layout.
pub fn write_timing_csv(rows: &[TimingRow], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "backend,M,seconds")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.backend.name(), r.m, r.seconds)?;
    }
    Ok(())
}
