//! Distribution functions and quantiles for the scenario distributions.
//!
//! Beta, normal, and Student t go through `statrs`. The skew normal CDF is
//! `Phi(z) - 2 T(z, shape)` with Owen's T function evaluated by composite
//! Simpson quadrature; mixture and skew normal quantiles invert the CDF by
//! bisection with an expanding bracket.

use statrs::distribution::{Beta, ContinuousCDF, Normal, StudentsT};

use super::DistributionSpec;

/// CDF of `spec` at `x`. The spec must already be validated.
pub(crate) fn cdf(spec: &DistributionSpec, x: f64) -> f64 {
    match spec {
        DistributionSpec::Normal { mean, variance } => {
            if *variance == 0.0 {
                return if x < *mean { 0.0 } else { 1.0 };
            }
            Normal::new(*mean, variance.sqrt()).expect("validated").cdf(x)
        }
        DistributionSpec::Beta { a, b } => Beta::new(*a, *b).expect("validated").cdf(x),
        DistributionSpec::StudentT { dof } => {
            StudentsT::new(0.0, 1.0, *dof).expect("validated").cdf(x)
        }
        DistributionSpec::SkewNormal { location, scale, shape } => {
            let z = (x - location) / scale;
            let phi = Normal::standard().cdf(z);
            (phi - 2.0 * owen_t(z, *shape)).clamp(0.0, 1.0)
        }
        DistributionSpec::GaussianMixture { weights, means, sds } => {
            let std = Normal::standard();
            weights
                .iter()
                .zip(means.iter().zip(sds))
                .map(|(w, (m, s))| w * std.cdf((x - m) / s))
                .sum()
        }
    }
}

/// Quantile (inverse CDF) of `spec` at probability `u` in (0, 1).
pub(crate) fn quantile(spec: &DistributionSpec, u: f64) -> f64 {
    debug_assert!(u > 0.0 && u < 1.0);
    match spec {
        DistributionSpec::Normal { mean, variance } => {
            if *variance == 0.0 {
                return *mean;
            }
            Normal::new(*mean, variance.sqrt()).expect("validated").inverse_cdf(u)
        }
        DistributionSpec::Beta { a, b } => Beta::new(*a, *b).expect("validated").inverse_cdf(u),
        DistributionSpec::StudentT { dof } => {
            StudentsT::new(0.0, 1.0, *dof).expect("validated").inverse_cdf(u)
        }
        DistributionSpec::SkewNormal { .. } | DistributionSpec::GaussianMixture { .. } => {
            bisect_quantile(spec, u)
        }
    }
}

/// Owen's T function `T(h, a)`: the integral of
/// `exp(-h^2 (1 + t^2) / 2) / (2 pi (1 + t^2))` over `t` in `[0, a]`.
fn owen_t(h: f64, a: f64) -> f64 {
    if a == 0.0 {
        return 0.0;
    }
    if a < 0.0 {
        return -owen_t(h, -a);
    }
    let h2 = h * h;
    let f = |t: f64| (-0.5 * h2 * (1.0 + t * t)).exp() / (1.0 + t * t);
    simpson(f, 0.0, a, 2048) / (2.0 * std::f64::consts::PI)
}

fn simpson(f: impl Fn(f64) -> f64, lo: f64, hi: f64, intervals: usize) -> f64 {
    debug_assert!(intervals >= 2 && intervals.is_multiple_of(2));
    let step = (hi - lo) / intervals as f64;
    let mut acc = f(lo) + f(hi);
    for i in 1..intervals {
        let weight = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += weight * f(lo + i as f64 * step);
    }
    acc * step / 3.0
}

/// Inverts a continuous CDF by bisection.
fn bisect_quantile(spec: &DistributionSpec, u: f64) -> f64 {
    // Expand a bracket around a central guess until it straddles u.
    let (center, spread) = match spec {
        DistributionSpec::SkewNormal { location, scale, .. } => (*location, scale.abs().max(1.0)),
        DistributionSpec::GaussianMixture { means, sds, .. } => {
            let center = means.iter().sum::<f64>() / means.len() as f64;
            let lo = means.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let max_sd = sds.iter().cloned().fold(0.0, f64::max);
            (center, (hi - lo).max(max_sd).max(1.0))
        }
        _ => unreachable!("closed-form quantile available"),
    };
    let mut lo = center - 10.0 * spread;
    let mut hi = center + 10.0 * spread;
    let mut width = 20.0 * spread;
    while cdf(spec, lo) > u {
        lo -= width;
        width *= 2.0;
    }
    while cdf(spec, hi) < u {
        hi += width;
        width *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if cdf(spec, mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn owen_t_matches_known_identity() {
        // T(h, 1) = Phi(h) (1 - Phi(h)) / 2 for any h.
        let std = Normal::standard();
        for h in [0.0, 0.3, 1.0, 2.5] {
            let phi = std.cdf(h);
            let expected = 0.5 * phi * (1.0 - phi);
            assert!((owen_t(h, 1.0) - expected).abs() < 1e-10, "h = {h}");
        }
    }

    #[test]
    fn skew_normal_cdf_reduces_to_normal_at_zero_shape() {
        let spec = DistributionSpec::SkewNormal { location: 0.0, scale: 1.0, shape: 0.0 };
        let std = Normal::standard();
        for x in [-2.0, -0.5, 0.0, 1.3] {
            assert!((cdf(&spec, x) - std.cdf(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let specs = [
            DistributionSpec::SkewNormal { location: -0.7, scale: 1.0, shape: 3.0 },
            DistributionSpec::GaussianMixture {
                weights: vec![0.2, 0.2, 0.4, 0.2],
                means: vec![-4.0, 4.0, 14.0, 21.0],
                sds: vec![3.0, 2.0, 2.0, 2.0],
            },
            DistributionSpec::Beta { a: 2.0, b: 5.0 },
            DistributionSpec::StudentT { dof: 6.0 },
        ];
        for spec in &specs {
            for u in [0.01, 0.2, 0.5, 0.8, 0.99] {
                let x = quantile(spec, u);
                assert!((cdf(spec, x) - u).abs() < 1e-9, "{spec:?} at u = {u}");
            }
        }
    }
}
