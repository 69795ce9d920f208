//! k-means++ seeding and Lloyd iterations on client coordinates. Centroids
//! are continuous, so the final centers are snapped onto facilities.

use super::{farthest_point_fill, with_k, SolverId, VanillaSolution};
use crate::error::{Error, Result};
use crate::instance::{squared_euclidean, Assignment, ClusteringInstance};
use crate::rng::{sample_weighted, stream_rng, uniform_index, STREAM_KMEANS};

pub const DEFAULT_MAX_ITERS: usize = 300;
const RELATIVE_TOL: f64 = 1e-6;

/// Lloyd costs (sum of squared distances to centroids) after every
/// assignment step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KMeansTrace {
    pub lloyd_costs: Vec<f64>,
    /// Facilities picked by snapping before any refill.
    pub snapped: Vec<usize>,
}

pub fn kmeans(
    instance: &ClusteringInstance,
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<VanillaSolution> {
    kmeans_traced(instance, k, seed, max_iters).map(|(sol, _)| sol)
}

pub fn kmeans_traced(
    instance: &ClusteringInstance,
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<(VanillaSolution, KMeansTrace)> {
    let inst = with_k(instance, k)?;
    let space = inst.space();
    let dim = space.dim().ok_or_else(|| {
        Error::Unsupported("k-means needs a coordinate (Euclidean) instance".into())
    })?;
    let n = inst.num_clients();
    let points: Vec<&[f64]> = (0..n)
        .map(|v| space.point(inst.client_point(v)).unwrap())
        .collect();

    let mut rng = stream_rng(seed, STREAM_KMEANS);
    let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
    centroids.push(points[uniform_index(&mut rng, n)].to_vec());
    let mut weights: Vec<f64> = points
        .iter()
        .map(|p| squared_euclidean(p, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let Some(v) = sample_weighted(&mut rng, &weights) else {
            break;
        };
        let c = points[v].to_vec();
        for (w, p) in weights.iter_mut().zip(&points) {
            *w = w.min(squared_euclidean(p, &c));
        }
        centroids.push(c);
    }

    let mut trace = KMeansTrace::default();
    let mut labels = vec![0usize; n];
    let mut previous = f64::INFINITY;
    for _ in 0..max_iters.max(1) {
        let mut cost = 0.0;
        for (v, p) in points.iter().enumerate() {
            let (mut best, mut best_d) = (0, f64::INFINITY);
            for (c, centroid) in centroids.iter().enumerate() {
                let d = squared_euclidean(p, centroid);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            labels[v] = best;
            cost += best_d;
        }
        trace.lloyd_costs.push(cost);
        if cost == 0.0 || (previous - cost) <= RELATIVE_TOL * previous {
            break;
        }
        previous = cost;

        let mut sums = vec![vec![0.0; dim]; centroids.len()];
        let mut counts = vec![0usize; centroids.len()];
        for (v, p) in points.iter().enumerate() {
            counts[labels[v]] += 1;
            for (s, x) in sums[labels[v]].iter_mut().zip(p.iter()) {
                *s += x;
            }
        }
        for (c, centroid) in centroids.iter_mut().enumerate() {
            // empty clusters keep their centroid
            if counts[c] > 0 {
                for (x, s) in centroid.iter_mut().zip(&sums[c]) {
                    *x = s / counts[c] as f64;
                }
            }
        }
    }

    let mut opened: Vec<usize> = Vec::with_capacity(k);
    for centroid in &centroids {
        let mut best = (0, f64::INFINITY);
        for f in 0..inst.num_facilities() {
            let d = squared_euclidean(space.point(inst.facility_point(f)).unwrap(), centroid);
            if d < best.1 {
                best = (f, d);
            }
        }
        if !opened.contains(&best.0) {
            opened.push(best.0);
        }
    }
    trace.snapped = opened.clone();
    farthest_point_fill(&inst, &mut opened, k);
    let assignment = Assignment::nearest(&inst, opened)?;
    Ok((
        VanillaSolution {
            assignment,
            solver: SolverId::KMeansLloyd,
            seed,
        },
        trace,
    ))
}
