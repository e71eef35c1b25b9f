//! Farthest-point (Gonzalez) clustering of sorted 1-D points.
//!
//! The first center is the smallest point; each subsequent center is the
//! point farthest from its nearest center, ties broken toward the smaller
//! value. On a sorted array the farthest point always sits at the edge of
//! the data or next to the midpoint of a gap between adjacent centers, so
//! the selection runs off a max-heap of per-gap candidates in
//! O(n log n + k log k) instead of the textbook O(nk) sweep.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// A candidate next center: the farthest point within one inter-center gap.
struct Candidate {
    dist: f64,
    point: usize,
    segment: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap on distance; ties prefer the smaller point index, which
        // on sorted input is the smaller value.
        self.dist
            .partial_cmp(&other.dist)
            .expect("distances are never NaN")
            .then_with(|| other.point.cmp(&self.point))
    }
}

/// A run of points strictly between two centers (or beyond the outermost
/// center, when one bound is open).
struct Segment {
    lo: usize,
    hi: usize,
    left_center: Option<f64>,
    right_center: Option<f64>,
}

/// Distance from point `x` to the nearest bounding center of its segment.
fn gap_distance(seg: &Segment, x: f64) -> f64 {
    match (seg.left_center, seg.right_center) {
        (Some(a), Some(b)) => (x - a).min(b - x),
        (Some(a), None) => x - a,
        (None, Some(b)) => b - x,
        (None, None) => unreachable!("segments always touch a center"),
    }
}

/// Best candidate inside a segment: an endpoint for open segments, the
/// point(s) nearest the gap midpoint otherwise.
fn best_candidate(points: &[f64], seg: &Segment) -> Option<(usize, f64)> {
    if seg.lo >= seg.hi {
        return None;
    }
    let pick = |idx: usize| (idx, gap_distance(seg, points[idx]));
    let (idx, dist) = match (seg.left_center, seg.right_center) {
        (Some(_), None) => pick(seg.hi - 1),
        (None, Some(_)) => pick(seg.lo),
        (Some(a), Some(b)) => {
            let mid = 0.5 * (a + b);
            let split = points[seg.lo..seg.hi].partition_point(|&x| x <= mid) + seg.lo;
            let mut best = if split > seg.lo { pick(split - 1) } else { pick(split) };
            if split > seg.lo && split < seg.hi {
                let right = pick(split);
                if right.1 > best.1 {
                    best = right;
                }
            }
            best
        }
        (None, None) => unreachable!(),
    };
    Some((idx, dist))
}

/// Indices (into the sorted input) of up to `k` farthest-point centers.
/// Stops early once every remaining point coincides with a center.
pub(super) fn farthest_point_centers(points: &[f64], k: usize) -> Vec<usize> {
    assert!(!points.is_empty() && k >= 1);
    let n = points.len();
    let mut centers = vec![0usize];
    let mut segments = Vec::new();
    let mut heap = BinaryHeap::new();

    let push_segment = |segments: &mut Vec<Segment>,
                            heap: &mut BinaryHeap<Candidate>,
                            seg: Segment| {
        if let Some((point, dist)) = best_candidate(points, &seg) {
            let segment = segments.len();
            heap.push(Candidate { dist, point, segment });
            segments.push(seg);
        }
    };

    push_segment(
        &mut segments,
        &mut heap,
        Segment { lo: 1, hi: n, left_center: Some(points[0]), right_center: None },
    );
    let mut stale = vec![false; segments.len()];

    while centers.len() < k {
        let Some(cand) = heap.pop() else { break };
        if stale[cand.segment] {
            continue;
        }
        if cand.dist <= 0.0 {
            break;
        }
        stale[cand.segment] = true;
        let seg = &segments[cand.segment];
        let (lo, hi) = (seg.lo, seg.hi);
        let (left_center, right_center) = (seg.left_center, seg.right_center);
        let center_value = points[cand.point];
        centers.push(cand.point);
        push_segment(
            &mut segments,
            &mut heap,
            Segment { lo, hi: cand.point, left_center, right_center: Some(center_value) },
        );
        push_segment(
            &mut segments,
            &mut heap,
            Segment { lo: cand.point + 1, hi, left_center: Some(center_value), right_center },
        );
        stale.resize(segments.len(), false);
    }
    centers.sort_unstable();
    centers
}
