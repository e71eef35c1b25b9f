//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured quantity (run with `--nocapture` to see the
//! lines for passing tests).
//!
//! The tests share a lock so they run one at a time regardless of the
//! harness thread count; several criteria are wall-clock or
//! replication-count sensitive and must not contend for cores.

use std::sync::Mutex;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;

use regconv::bandwidth::{bandwidth_conv, bandwidth_rp, BandwidthRule};
use regconv::datagen::{generate_scenario_with, AuxiliarySample, Preset};
use regconv::estimators::{estimate_conv, estimate_rp, Grid};
use regconv::gausstransform::{gt_exact, gt_ifgt, GaussTransformProblem};
use regconv::harness::{
    least_squares_slope, mise_study, slope_in_m, slope_in_n, timing_bench, MiseStudyConfig,
    PipelineOptions, ReferenceConfig, SelectOn, TimingConfig,
};
use regconv::regression::{fit_ols, phi_inv_row_moment};
use regconv::seeds;
use regconv::{Backend, EstimatorKind, IfgtParams};

static GATE: Mutex<()> = Mutex::new(());

fn serialized() -> std::sync::MutexGuard<'static, ()> {
    GATE.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

fn pass(number: u32, name: &str, detail: String, started: Instant) {
    println!(
        "criterion {number} ({name}): PASS - {detail} [{:.1}s]",
        started.elapsed().as_secs_f64()
    );
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// 1. The accelerated path of the convolution estimator matches the naive
///    double loop within 1e-7 pointwise over 50 random instances.
#[test]
fn criterion_1_algorithm_correctness() {
    let _gate = serialized();
    let started = Instant::now();
    let fgt = Backend::Ifgt(IfgtParams { accuracy: 1e-8, max_clusters: 1024 });
    let mut worst = 0.0f64;
    let mut rng = seeds::master_rng(0xA1);
    for instance in 0..50 {
        let preset = Preset::ALL[rng.random_range(0..3)];
        let n = rng.random_range(50..=200);
        let m = rng.random_range(0..=1600);
        let seed = rng.random_range(0..u64::MAX / 2);
        let (complete, aux) =
            generate_scenario_with(&preset.spec(), n, m, &mut seeds::master_rng(seed)).unwrap();
        let fit = fit_ols(&complete).unwrap();
        let residuals: Vec<f64> = fit.residuals().iter().cloned().collect();
        let h = bandwidth_conv(
            bandwidth_rp(&residuals, &BandwidthRule::SheatherJones).unwrap(),
            n + m,
        )
        .unwrap();
        let responses: Vec<f64> = complete.responses().iter().cloned().collect();
        let grid = Grid::from_sample(&responses, h, 50).unwrap();
        let naive = estimate_conv(&fit, &complete, &aux, &grid, h, &Backend::Naive).unwrap();
        let fast = estimate_conv(&fit, &complete, &aux, &grid, h, &fgt).unwrap();
        let diff = max_abs_diff(&naive.values, &fast.values);
        assert!(
            diff <= 1e-7,
            "instance {instance} ({}, N={n}, M={m}): |fgt - naive| = {diff:.3e} > 1e-7",
            preset.name()
        );
        worst = worst.max(diff);
    }
    pass(1, "algorithm correctness", format!("worst |fgt - naive| = {worst:.3e}"), started);
}

/// 2. With no auxiliary rows the convolution estimator reduces to the
///    Rosenblatt-Parzen estimator of the N*N pseudo-sample, within 1e-9.
#[test]
fn criterion_2_m0_reduction() {
    let _gate = serialized();
    let started = Instant::now();
    let mut rng = seeds::master_rng(0xB2);
    let mut worst = 0.0f64;
    for _ in 0..30 {
        let preset = Preset::ALL[rng.random_range(0..3)];
        let n = rng.random_range(20..=80);
        let spec = preset.spec();
        let (complete, _) = generate_scenario_with(&spec, n, 0, &mut rng).unwrap();
        let fit = fit_ols(&complete).unwrap();
        let responses: Vec<f64> = complete.responses().iter().cloned().collect();
        let h = bandwidth_rp(&responses, &BandwidthRule::Silverman).unwrap();
        let grid = Grid::from_sample(&responses, h, 64).unwrap();
        let conv = estimate_conv(
            &fit,
            &complete,
            &AuxiliarySample::empty(spec.n_covariates()),
            &grid,
            h,
            &Backend::Naive,
        )
        .unwrap();
        let mut pseudo = Vec::with_capacity(n * n);
        for p in fit.fitted().iter() {
            for e in fit.residuals().iter() {
                pseudo.push(p + e);
            }
        }
        let rp = estimate_rp(&pseudo, &grid, h, &Backend::Naive).unwrap();
        let diff = max_abs_diff(&conv.values, &rp.values);
        assert!(diff <= 1e-9, "{}, N={n}: diff {diff:.3e} > 1e-9", preset.name());
        worst = worst.max(diff);
    }
    pass(2, "M=0 reduction", format!("worst pointwise diff = {worst:.3e}"), started);
}

fn skewed_study(n_values: Vec<usize>, tau_values: Vec<usize>, seed: u64) -> MiseStudyConfig {
    MiseStudyConfig {
        scenario: Preset::Skewed.spec(),
        n_values,
        tau_values,
        replications: 100,
        seed,
        reference: ReferenceConfig::default(),
        pipeline: PipelineOptions::default(),
    }
}

/// 3. Auxiliary data cuts the MISE by at least 10x at N = 200, tau = 128.
#[test]
fn criterion_3_mise_reduction() {
    let _gate = serialized();
    let started = Instant::now();
    let study = mise_study(&skewed_study(vec![200], vec![0, 128], 0xC3)).unwrap();
    assert!(study.failures.is_empty(), "cells failed: {:?}", study.failures);
    let find = |kind: EstimatorKind, tau: usize| {
        study
            .cells
            .iter()
            .find(|c| c.estimator == kind && c.tau == tau)
            .map(|c| c.mise)
            .unwrap()
    };
    let rp = find(EstimatorKind::RosenblattParzen, 0);
    let mr = find(EstimatorKind::ConvolutionMR, 128);
    let ratio = mr / rp;
    assert!(
        ratio <= 0.1,
        "MISE(MR, tau=128) / MISE(RP) = {mr:.3e} / {rp:.3e} = {ratio:.3} > 1/10"
    );
    pass(
        3,
        "MISE reduction",
        format!("MISE(RP) = {rp:.3e}, MISE(MR, tau=128) = {mr:.3e}, ratio = 1/{:.1}", 1.0 / ratio),
        started,
    );
}

/// 4. Empirical convergence slopes sit in the theoretical bands: MISE decays
///    like M^(-4/5) toward the floor along the tau axis, and like N^(-1) along
///    the complete-case axis.
#[test]
fn criterion_4_convergence_slopes() {
    let _gate = serialized();
    let started = Instant::now();
    let tau_study =
        mise_study(&skewed_study(vec![50], vec![2, 4, 8, 16, 32, 64, 128, 256], 0xD4)).unwrap();
    assert!(tau_study.failures.is_empty(), "cells failed: {:?}", tau_study.failures);
    let m_slope = slope_in_m(&tau_study.cells).unwrap();
    assert!(
        (-1.0..=-0.6).contains(&m_slope),
        "slope in M = {m_slope:.3} outside [-1.0, -0.6]"
    );

    let n_study = mise_study(&skewed_study(vec![50, 100, 200, 400], vec![0], 0xD5)).unwrap();
    assert!(n_study.failures.is_empty(), "cells failed: {:?}", n_study.failures);
    let n_slope = slope_in_n(&n_study.cells).unwrap();
    assert!(
        (-1.3..=-0.7).contains(&n_slope),
        "slope in N = {n_slope:.3} outside [-1.3, -0.7]"
    );
    pass(
        4,
        "convergence slopes",
        format!("slope_in_M = {m_slope:.3} (target -0.8), slope_in_N = {n_slope:.3} (target -1.0)"),
        started,
    );
}

/// 5. Saturation: past tau = 256 additional covariate rows no longer move
///    the MISE by more than 25%.
#[test]
fn criterion_5_saturation() {
    let _gate = serialized();
    let started = Instant::now();
    let study = mise_study(&skewed_study(vec![50], vec![256, 512], 0xE5)).unwrap();
    assert!(study.failures.is_empty(), "cells failed: {:?}", study.failures);
    let mise_at = |tau: usize| {
        study
            .cells
            .iter()
            .find(|c| c.estimator == EstimatorKind::ConvolutionMR && c.tau == tau)
            .map(|c| c.mise)
            .unwrap()
    };
    let (m256, m512) = (mise_at(256), mise_at(512));
    let rel = (m256 - m512).abs() / m512;
    assert!(rel < 0.25, "MISE(256) = {m256:.3e} vs MISE(512) = {m512:.3e}: {rel:.1}% apart");
    pass(
        5,
        "saturation",
        format!("MISE(tau=256) = {m256:.3e}, MISE(tau=512) = {m512:.3e}, rel diff = {:.1}%", 100.0 * rel),
        started,
    );
}

/// 6. Wall-clock: at M = 12800 the certified fast path beats the naive loop
///    by >= 10x and the FFT route by >= 3x, and grows at most 4x from M = 800.
#[test]
fn criterion_6_timing() {
    let _gate = serialized();
    let started = Instant::now();
    let cfg = TimingConfig {
        scenario: Preset::Skewed.spec(),
        n_complete: 100,
        grid_size: 50,
        m_values: vec![800, 12800],
        backends: vec![Backend::Naive, Backend::fft(), Backend::fgt()],
        seed: 0xF6,
        runs: 7,
        rule: BandwidthRule::SheatherJones,
        select_on: SelectOn::Residuals,
    };
    let rows = timing_bench(&cfg).unwrap();
    let seconds = |name: &str, m: usize| {
        rows.iter()
            .find(|r| r.backend.name() == name && r.m == m)
            .map(|r| r.seconds)
            .unwrap()
    };
    let (fgt_big, naive_big, fft_big) =
        (seconds("fgt", 12800), seconds("naive", 12800), seconds("fft", 12800));
    let fgt_small = seconds("fgt", 800);
    let vs_naive = naive_big / fgt_big;
    let vs_fft = fft_big / fgt_big;
    let growth = fgt_big / fgt_small;
    assert!(vs_naive >= 10.0, "fgt only {vs_naive:.1}x faster than naive at M = 12800");
    assert!(vs_fft >= 3.0, "fgt only {vs_fft:.1}x faster than fft at M = 12800");
    assert!(growth <= 4.0, "fgt grew {growth:.2}x from M = 800 to M = 12800");
    pass(
        6,
        "timing",
        format!(
            "fgt {:.2e}s: {vs_naive:.0}x vs naive, {vs_fft:.1}x vs fft; growth 800->12800 = {growth:.2}x",
            fgt_big
        ),
        started,
    );
}

/// 7. IFGT certification: 1000 random problems, every accuracy level, the
///    per-target error never exceeds accuracy * total weight mass.
#[test]
fn criterion_7_ifgt_certification() {
    let _gate = serialized();
    let started = Instant::now();
    let accuracies = [1e-3, 1e-6, 1e-8];
    let worst_ratio = (0..1000u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = seeds::stream_rng(0xAB7, i);
            let l = rng.random_range(1..=2000);
            let t = rng.random_range(1..=2000);
            let center: f64 = rng.random_range(-50.0..50.0);
            let spread: f64 = 10f64.powf(rng.random_range(-1.0..2.0));
            let g = spread * 10f64.powf(rng.random_range(-2.8..0.5));
            let sources: Vec<f64> =
                (0..l).map(|_| center + spread * rng.random_range(-1.0..1.0)).collect();
            let weights: Vec<f64> = (0..l).map(|_| rng.random_range(-2.0..2.0)).collect();
            let targets: Vec<f64> =
                (0..t).map(|_| center + 1.5 * spread * rng.random_range(-1.0..1.0)).collect();
            let mut problem =
                GaussTransformProblem::new(sources, weights, targets, g, 1e-3).unwrap();
            let exact = gt_exact(&problem);
            let mass = problem.total_weight();
            let mut worst = 0.0f64;
            for accuracy in accuracies {
                problem.accuracy = accuracy;
                let fast = gt_ifgt(&problem).unwrap();
                let err = max_abs_diff(&exact, &fast);
                let budget = accuracy * mass;
                assert!(
                    err <= budget,
                    "problem {i} at accuracy {accuracy:.0e}: error {err:.3e} > {budget:.3e}"
                );
                if budget > 0.0 {
                    worst = worst.max(err / budget);
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    pass(
        7,
        "ifgt certification",
        format!("1000 problems x 3 accuracies, worst error/budget = {worst_ratio:.3}"),
        started,
    );
}

/// 8. The OLS and bandwidth invariant suites, pinned at their stated
///    tolerances.
#[test]
fn criterion_8_ols_and_bandwidth_invariants() {
    let _gate = serialized();
    let started = Instant::now();
    // Orthogonality and residual sum.
    let spec = Preset::Correlated.spec();
    let (complete, _) = generate_scenario_with(&spec, 400, 0, &mut seeds::master_rng(8)).unwrap();
    let fit = fit_ols(&complete).unwrap();
    let xte = complete.design().tr_mul(fit.residuals());
    let scale = complete.design().amax().max(1.0) * fit.residuals().amax().max(1.0);
    let tol = 1e-8 * complete.n() as f64 * scale;
    assert!(xte.amax() <= tol, "X^T residuals = {:.3e} > {tol:.3e}", xte.amax());

    // Scale equivariance of the fit.
    let mut scaled_design = complete.design().clone_owned();
    for i in 0..scaled_design.nrows() {
        scaled_design[(i, 1)] *= 40.0;
    }
    let scaled = regconv::CompleteSample::new(complete.responses().clone_owned(), scaled_design)
        .unwrap();
    let fit_scaled = fit_ols(&scaled).unwrap();
    assert!(
        (fit_scaled.coefficients()[1] - fit.coefficients()[1] / 40.0).abs() < 1e-9,
        "coefficient did not rescale"
    );
    assert!((fit_scaled.residuals() - fit.residuals()).amax() < 1e-9, "residuals moved");

    // Bandwidth invariants.
    let data = regconv::sample_distribution(
        &regconv::DistributionSpec::Normal { mean: 0.0, variance: 1.0 },
        2000,
        88,
    )
    .unwrap();
    for rule in [BandwidthRule::Silverman, BandwidthRule::SheatherJones] {
        let h = bandwidth_rp(&data, &rule).unwrap();
        let shifted: Vec<f64> = data.iter().map(|x| x + 5.0).collect();
        assert!((bandwidth_rp(&shifted, &rule).unwrap() - h).abs() < 1e-12, "{rule:?} shift");
        let stretched: Vec<f64> = data.iter().map(|x| -2.5 * x).collect();
        assert!(
            (bandwidth_rp(&stretched, &rule).unwrap() - 2.5 * h).abs() < 1e-9,
            "{rule:?} scale"
        );
    }
    // L^(-1/5) identity at L = 32 and monotonicity.
    for h in [0.2, 0.7, 1.3] {
        assert!((bandwidth_conv(h, 32).unwrap() - h / 2.0).abs() < 1e-12);
    }
    let mut prev = f64::INFINITY;
    for l in 1..100 {
        let h = bandwidth_conv(0.5, l).unwrap();
        assert!(h < prev);
        prev = h;
    }
    pass(8, "ols and bandwidth invariants", "all stated tolerances hold".into(), started);
}

/// 9. The normal-equations boundedness statistic shows no growth trend in N.
#[test]
fn criterion_9_phi_moment_boundedness() {
    let _gate = serialized();
    let started = Instant::now();
    let spec = Preset::Skewed.spec(); // J = 2
    let n_values = [100usize, 200, 400, 800, 1600, 3200, 6400];
    let replications = 300usize;
    let mut log_stats = Vec::new();
    for (i, &n) in n_values.iter().enumerate() {
        let total: f64 = (0..replications)
            .into_par_iter()
            .map(|rep| {
                let mut rng = seeds::stream_rng(0x99 + i as u64, rep as u64);
                let (complete, _) = generate_scenario_with(&spec, n, 0, &mut rng).unwrap();
                phi_inv_row_moment(&complete).unwrap()
            })
            .sum();
        log_stats.push((total / replications as f64).ln());
    }
    let log_n: Vec<f64> = n_values.iter().map(|n| (*n as f64).ln()).collect();
    let slope = least_squares_slope(&log_n, &log_stats);
    assert!(
        slope.abs() <= 0.15,
        "log-statistic slope {slope:.4} outside +/-0.15 (stats: {log_stats:?})"
    );
    pass(
        9,
        "phi moment boundedness",
        format!("slope of log statistic vs log N = {slope:+.4}"),
        started,
    );
}
