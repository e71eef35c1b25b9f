//! FFT-binned Gauss transform.
//!
//! Weighted sources are linearly binned onto a uniform grid padded by four
//! bandwidths on each side, the binned weights are circularly convolved with
//! a sampled Gaussian truncated at the same four-bandwidth reach (so the
//! padding absorbs any wrap-around), and targets are linearly interpolated
//! from the grid. Accuracy is governed by the bin spacing and the e^-16
//! kernel truncation; it is documented rather than certified.

use rustfft::{num_complex::Complex, FftPlanner};

use super::{GaussTransformProblem, TransformError};

/// Kernel reach in bandwidth units; e^-(4^2) ~ 1.1e-7 per unit weight.
const PAD_BANDWIDTHS: f64 = 4.0;

pub(super) fn evaluate(
    problem: &GaussTransformProblem,
    bins: usize,
) -> Result<Vec<f64>, TransformError> {
    if bins < 256 || !bins.is_power_of_two() {
        return Err(TransformError::InvalidProblem(format!(
            "bin count {bins} must be a power of two >= 256"
        )));
    }
    if problem.sources.is_empty() {
        return Ok(vec![0.0; problem.targets.len()]);
    }
    let g = problem.gauss_bandwidth;
    let src_min = problem.sources.iter().cloned().fold(f64::INFINITY, f64::min);
    let src_max = problem.sources.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    // Identical sources still get a +/- 4g grid from the padding.
    let lo = src_min - PAD_BANDWIDTHS * g;
    let hi = src_max + PAD_BANDWIDTHS * g;
    let spacing = (hi - lo) / (bins - 1) as f64;

    let mut binned = vec![Complex::new(0.0, 0.0); bins];
    for (&x, &q) in problem.sources.iter().zip(&problem.weights) {
        let pos = (x - lo) / spacing;
        let idx = (pos.floor() as usize).min(bins - 2);
        let frac = pos - idx as f64;
        binned[idx].re += q * (1.0 - frac);
        binned[idx + 1].re += q * frac;
    }

    let reach = ((PAD_BANDWIDTHS * g / spacing).ceil() as usize).min(bins / 2 - 1);
    let mut kernel = vec![Complex::new(0.0, 0.0); bins];
    kernel[0].re = 1.0;
    for j in 1..=reach {
        let d = j as f64 * spacing / g;
        let v = (-d * d).exp();
        kernel[j].re += v;
        kernel[bins - j].re += v;
    }

    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(bins);
    forward.process(&mut binned);
    forward.process(&mut kernel);
    for (b, k) in binned.iter_mut().zip(&kernel) {
        *b *= k;
    }
    planner.plan_fft_inverse(bins).process(&mut binned);
    let grid: Vec<f64> = binned.iter().map(|v| v.re / bins as f64).collect();

    let values = problem
        .targets
        .iter()
        .map(|&t| {
            let pos = (t - lo) / spacing;
            if pos < 0.0 || pos > (bins - 1) as f64 {
                // Off-grid targets are at least 4 bandwidths from every
                // source; the transform there is below the documented
                // truncation level.
                return 0.0;
            }
            let idx = (pos.floor() as usize).min(bins - 2);
            let frac = pos - idx as f64;
            grid[idx] * (1.0 - frac) + grid[idx + 1] * frac
        })
        .collect();
    Ok(values)
}
