//! Shared fixtures for the criterion benchmarks.

use regconv::datagen::{generate_scenario, AuxiliarySample, CompleteSample, Preset};
use regconv::regression::{fit_ols, RegressionFit};

/// A fitted skewed-preset sample of `n` complete and `m` auxiliary rows.
pub fn fitted_sample(n: usize, m: usize, seed: u64) -> (CompleteSample, AuxiliarySample, RegressionFit) {
    let (complete, aux) = generate_scenario(&Preset::Skewed.spec(), n, m, seed).unwrap();
    let fit = fit_ols(&complete).unwrap();
    (complete, aux, fit)
}
