use super::*;

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Two-sided Kolmogorov-Smirnov statistic of `sample` against `cdf`.
fn ks_statistic(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = cdf(*x);
            let upper = (i + 1) as f64 / n - f;
            let lower = f - i as f64 / n;
            upper.max(lower)
        })
        .fold(0.0, f64::max)
}

#[test]
fn standard_normal_moments() {
    let spec = DistributionSpec::Normal { mean: 0.0, variance: 1.0 };
    let xs = sample_distribution(&spec, 1_000_000, 42).unwrap();
    assert!(mean(&xs).abs() < 0.01);
    assert!((variance(&xs) - 1.0).abs() < 0.01);
}

#[test]
fn skew_normal_centering_gives_zero_mean() {
    let shape = 3.0f64;
    let location =
        -(2.0 * shape * shape / ((1.0 + shape * shape) * std::f64::consts::PI)).sqrt();
    let spec = DistributionSpec::SkewNormal { location, scale: 1.0, shape };
    let xs = sample_distribution(&spec, 1_000_000, 7).unwrap();
    assert!(mean(&xs).abs() < 0.01, "skew normal mean = {}", mean(&xs));
}

#[test]
fn mixture_mean_matches_weighted_component_means() {
    // sum w_i mu_i = 0.2(-4) + 0.2(4) + 0.4(14) + 0.2(21) = 9.8
    let spec = DistributionSpec::GaussianMixture {
        weights: vec![0.2, 0.2, 0.4, 0.2],
        means: vec![-4.0, 4.0, 14.0, 21.0],
        sds: vec![3.0, 2.0, 2.0, 2.0],
    };
    let xs = sample_distribution(&spec, 1_000_000, 11).unwrap();
    assert!((mean(&xs) - 9.8).abs() < 0.05, "mixture mean = {}", mean(&xs));
}

#[test]
fn sampling_is_deterministic_in_seed() {
    let spec = Preset::Correlated.spec();
    let (c1, a1) = generate_scenario(&spec, 50, 30, 99).unwrap();
    let (c2, a2) = generate_scenario(&spec, 50, 30, 99).unwrap();
    assert_eq!(c1, c2);
    assert_eq!(a1, a2);
    let (c3, _) = generate_scenario(&spec, 50, 30, 100).unwrap();
    assert_ne!(c1, c3);
}

#[test]
fn zero_noise_responses_equal_linear_predictor() {
    let spec = ScenarioSpec {
        coefficients: vec![2.0, -1.0],
        covariates: vec![DistributionSpec::Normal { mean: 0.0, variance: 1.0 }],
        correlation: None,
        error: DistributionSpec::Normal { mean: 0.0, variance: 0.0 },
        normal_param: NormalParam::Variance,
    };
    let (complete, _) = generate_scenario(&spec, 40, 0, 5).unwrap();
    let predicted = complete.design() * DVector::from_column_slice(&spec.coefficients);
    for i in 0..complete.n() {
        assert!((complete.responses()[i] - predicted[i]).abs() < 1e-12);
    }
}

#[test]
fn empty_auxiliary_sample_keeps_column_count() {
    let spec = Preset::Skewed.spec();
    let (complete, aux) = generate_scenario(&spec, 20, 0, 1).unwrap();
    assert_eq!(aux.m(), 0);
    assert_eq!(aux.design().ncols(), complete.design().ncols());
}

#[test]
fn skewed_scenario_response_mean() {
    // alpha_0 + 3 E[Beta(5,1)] + 3 * 7 = 1 + 2.5 + 21 = 24.5
    let spec = Preset::Skewed.spec();
    assert!((spec.response_mean() - 24.5).abs() < 1e-12);
    let (complete, _) = generate_scenario(&spec, 1_000_000, 0, 3).unwrap();
    let m = complete.responses().mean();
    assert!((m - 24.5).abs() < 0.02, "sample mean = {m}");
}

#[test]
fn copula_marginals_pass_ks_test() {
    let spec = Preset::Correlated.spec();
    let (complete, _) = generate_scenario(&spec, 100_000, 0, 17).unwrap();
    for (j, marginal) in spec.covariates.iter().enumerate() {
        let mut col: Vec<f64> = (0..complete.n()).map(|i| complete.design()[(i, j + 1)]).collect();
        let d = ks_statistic(&mut col, |x| cdf(marginal, x));
        assert!(d < 0.01, "marginal {j} KS statistic = {d}");
    }
}

#[test]
fn copula_correlation_close_to_target() {
    let spec = Preset::Correlated.spec();
    let target = spec.correlation_matrix().unwrap().unwrap();
    let (complete, _) = generate_scenario(&spec, 100_000, 0, 23).unwrap();
    let n = complete.n();
    let j = spec.n_covariates();
    let cols: Vec<Vec<f64>> =
        (0..j).map(|c| (0..n).map(|i| complete.design()[(i, c + 1)]).collect()).collect();
    let means: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
    let sds: Vec<f64> = cols.iter().map(|c| variance(c).sqrt()).collect();
    for a in 0..j {
        for b in 0..a {
            let cov = cols[a]
                .iter()
                .zip(&cols[b])
                .map(|(x, y)| (x - means[a]) * (y - means[b]))
                .sum::<f64>()
                / (n - 1) as f64;
            let r = cov / (sds[a] * sds[b]);
            assert!(
                (r - target[(a, b)]).abs() < 0.05,
                "corr({a},{b}) = {r}, target {}",
                target[(a, b)]
            );
        }
    }
}

#[test]
fn skew_normal_sampler_matches_its_cdf() {
    // The |U0|-representation sampler against the Owen's-T-based CDF.
    let spec = DistributionSpec::SkewNormal { location: -0.75, scale: 1.3, shape: 3.0 };
    let mut xs = sample_distribution(&spec, 20_000, 13).unwrap();
    let d = ks_statistic(&mut xs, |x| cdf(&spec, x));
    assert!(d < 0.015, "KS statistic = {d}");
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(DistributionSpec::Beta { a: 0.0, b: 1.0 }.validate().is_err());
    assert!(DistributionSpec::StudentT { dof: 2.0 }.validate().is_err());
    assert!(DistributionSpec::SkewNormal { location: 0.0, scale: 0.0, shape: 1.0 }
        .validate()
        .is_err());
    assert!(DistributionSpec::GaussianMixture {
        weights: vec![0.5, 0.4],
        means: vec![0.0, 1.0],
        sds: vec![1.0, 1.0],
    }
    .validate()
    .is_err());
    assert!(sample_distribution(&DistributionSpec::Beta { a: -1.0, b: 1.0 }, 10, 0).is_err());
}

#[test]
fn non_positive_definite_correlation_is_rejected() {
    let mut spec = Preset::Correlated.spec();
    spec.correlation = Some(vec![
        vec![1.0, 0.99, -0.99],
        vec![0.99, 1.0, 0.99],
        vec![-0.99, 0.99, 1.0],
    ]);
    let err = generate_scenario(&spec, 20, 0, 0).unwrap_err();
    assert!(matches!(err, DatagenError::Correlation(_)));
}

#[test]
fn intercept_must_be_nonzero() {
    let mut spec = Preset::Skewed.spec();
    spec.coefficients[0] = 0.0;
    assert!(matches!(spec.validate(), Err(DatagenError::Scenario(_))));
}

#[test]
fn scenario_spec_round_trips_through_json() {
    for preset in Preset::ALL {
        let spec = preset.spec();
        let json = serde_json::to_string_pretty(&spec).unwrap();
        let back: ScenarioSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }
}

#[test]
fn std_dev_parameterization_rescales_normals() {
    let spec = ScenarioSpec {
        coefficients: vec![1.0, 1.0],
        covariates: vec![DistributionSpec::Normal { mean: 0.0, variance: 3.0 }],
        correlation: None,
        error: DistributionSpec::Normal { mean: 0.0, variance: 2.0 },
        normal_param: NormalParam::StdDev,
    };
    let resolved = spec.resolved();
    assert_eq!(
        resolved.covariates[0],
        DistributionSpec::Normal { mean: 0.0, variance: 9.0 }
    );
    assert_eq!(resolved.error, DistributionSpec::Normal { mean: 0.0, variance: 4.0 });
    let xs = sample_distribution_with(
        &resolved.error,
        200_000,
        &mut crate::seeds::master_rng(2),
    )
    .unwrap();
    assert!((variance(&xs) - 4.0).abs() < 0.1);
}

#[test]
fn auxiliary_rows_extend_under_fixed_stream() {
    // Same seed, larger auxiliary request: complete sample identical and the
    // smaller auxiliary sample is a prefix of the larger one.
    let spec = Preset::Skewed.spec();
    let (c_small, a_small) = generate_scenario(&spec, 30, 10, 8).unwrap();
    let (c_large, a_large) = generate_scenario(&spec, 30, 25, 8).unwrap();
    assert_eq!(c_small, c_large);
    assert_eq!(a_small.design(), &a_large.design().rows(0, 10).into_owned());
}
