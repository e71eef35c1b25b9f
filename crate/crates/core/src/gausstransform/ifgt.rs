//! Improved fast Gauss transform in one dimension.
//!
//! Sources are grouped by farthest-point clustering; each cluster carries a
//! truncated Taylor expansion of the Gaussian about its center, with the
//! truncation order chosen per cluster from a rigorous remainder bound so
//! that the total absolute error at any target stays below
//! `accuracy * sum |q_i|`. Targets beyond a cluster's cutoff radius skip the
//! cluster entirely; the cutoff is chosen so the skipped mass also respects
//! the same budget.
//!
//! Sources are sorted before clustering, so the output is bit-identical
//! under permutation of the input and cluster iteration order is fixed.

use rayon::prelude::*;
use statrs::function::gamma::ln_gamma;

use super::cluster::farthest_point_centers;
use super::{GaussTransformProblem, TransformError};

/// Truncation orders above this are treated as unattainable accuracy.
pub const MAX_ORDER: usize = 200;

/// Default cap on the number of clusters; below the cap the cluster count
/// grows like sqrt(L).
pub const DEFAULT_MAX_CLUSTERS: usize = 1024;

struct Cluster {
    center: f64,
    /// Targets farther than this from the center skip the cluster.
    cutoff: f64,
    coefficients: Vec<f64>,
}

pub(super) fn evaluate(
    problem: &GaussTransformProblem,
    max_clusters: usize,
) -> Result<Vec<f64>, TransformError> {
    let g = problem.gauss_bandwidth;
    let eps = problem.accuracy;
    if problem.sources.is_empty() {
        return Ok(vec![0.0; problem.targets.len()]);
    }

    // Canonical order: sort (source, weight) pairs by value, then weight.
    let mut pairs: Vec<(f64, f64)> =
        problem.sources.iter().cloned().zip(problem.weights.iter().cloned()).collect();
    pairs.sort_by(|a, b| a.partial_cmp(b).expect("validated finite inputs"));
    let sources: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let weights: Vec<f64> = pairs.iter().map(|p| p.1).collect();

    // Enough clusters that radii come out near one bandwidth: sqrt(L) keeps
    // the transform near-linear, and spread/g keeps the expansion order low
    // when the sources span many bandwidths.
    let spread = sources.last().unwrap() - sources.first().unwrap();
    let cluster_count = ((sources.len() as f64).sqrt().ceil() as usize)
        .max((spread / g).ceil() as usize)
        .clamp(1, max_clusters);
    let center_indices = farthest_point_centers(&sources, cluster_count);
    let centers: Vec<f64> = center_indices.iter().map(|&i| sources[i]).collect();

    // Nearest-center assignment: contiguous runs split at gap midpoints.
    let mut boundaries = Vec::with_capacity(centers.len() + 1);
    boundaries.push(0usize);
    for w in centers.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let prev = *boundaries.last().unwrap();
        boundaries.push(prev + sources[prev..].partition_point(|&x| x <= mid));
    }
    boundaries.push(sources.len());

    let spill = g * (1.0 / eps).ln().sqrt();
    let mut clusters = Vec::with_capacity(centers.len());
    for (k, &center) in centers.iter().enumerate() {
        let (lo, hi) = (boundaries[k], boundaries[k + 1]);
        if lo == hi {
            continue;
        }
        let radius =
            sources[lo..hi].iter().map(|x| (x - center).abs()).fold(0.0, f64::max);
        let cutoff = radius + spill;
        let rho_x = radius / g;
        let rho_y = cutoff / g;
        let order = truncation_order(rho_x, rho_y, eps).ok_or(
            TransformError::AccuracyUnattainable { accuracy: eps, max_order: MAX_ORDER },
        )?;
        // C_n = 1/n! * sum_i q_i exp(-b_i^2) (2 b_i)^n; the per-source
        // recurrence accumulates the (2b)^n part, the 1/n! factor is applied
        // once per cluster afterwards.
        let mut coefficients = vec![0.0f64; order];
        for i in lo..hi {
            let b = (sources[i] - center) / g;
            let mut term = weights[i] * (-b * b).exp();
            for c in coefficients.iter_mut() {
                *c += term;
                term *= 2.0 * b;
            }
        }
        let mut inv_fact = 1.0;
        for (n, c) in coefficients.iter_mut().enumerate() {
            if n > 0 {
                inv_fact /= n as f64;
            }
            *c *= inv_fact;
        }
        clusters.push(Cluster { center, cutoff, coefficients });
    }

    let max_cutoff = clusters.iter().map(|c| c.cutoff).fold(0.0, f64::max);
    let values = problem
        .targets
        .par_iter()
        .map(|&t| {
            let start = clusters.partition_point(|c| c.center < t - max_cutoff);
            let mut acc = 0.0;
            for cluster in &clusters[start..] {
                if cluster.center > t + max_cutoff {
                    break;
                }
                let d = t - cluster.center;
                if d.abs() > cluster.cutoff {
                    continue;
                }
                let a = d / g;
                let mut series = 0.0;
                for &c in cluster.coefficients.iter().rev() {
                    series = series * a + c;
                }
                acc += (-a * a).exp() * series;
            }
            acc
        })
        .collect();
    Ok(values)
}

/// Smallest truncation order whose worst-case per-unit-weight error over
/// source distance <= `rho_x` and target distance <= `rho_y` (both in
/// bandwidth units) is at most `eps`. `None` if no order up to [`MAX_ORDER`]
/// suffices.
fn truncation_order(rho_x: f64, rho_y: f64, eps: f64) -> Option<usize> {
    (1..=MAX_ORDER).find(|&p| truncation_error_bound(p, rho_x, rho_y) <= eps)
}

/// Upper bound on `|exp(-(a-b)^2 scaled Gaussian) - its order-p expansion|`
/// per unit weight, maximized over `a in [0, rho_y], b in [0, rho_x]`.
///
/// The Taylor remainder of `exp(2ab)` after `p` terms is at most
/// `(2ab)^p exp(2ab) / p!`, so the remainder of the factored Gaussian is at
/// most `(2ab)^p exp(-(a-b)^2) / p!`. That expression has no interior
/// maximum over the rectangle, so the maximum lies on one of the two far
/// edges, each solvable in closed form.
pub(super) fn truncation_error_bound(p: usize, rho_x: f64, rho_y: f64) -> f64 {
    edge_maximum(p, rho_x, rho_y).max(edge_maximum(p, rho_y, rho_x))
}

/// Maximum of `(2 b a)^p exp(-(a-b)^2) / p!` over `a in [0, cap]` at fixed b.
fn edge_maximum(p: usize, b: f64, cap: f64) -> f64 {
    if b <= 0.0 || cap <= 0.0 {
        return 0.0;
    }
    let pf = p as f64;
    let a_peak = 0.5 * (b + (b * b + 2.0 * pf).sqrt());
    let a = a_peak.min(cap);
    let ln_bound = pf * (2.0 * a * b).ln() - ln_gamma(pf + 1.0) - (a - b) * (a - b);
    ln_bound.exp()
}
