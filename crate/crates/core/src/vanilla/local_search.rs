//! Single-swap local search seeded with D-sampling.

use rayon::prelude::*;

use super::{with_k, SolverId, VanillaSolution};
use crate::error::{Error, Result};
use crate::instance::{Assignment, ClusteringInstance, Norm};
use crate::metrics::compensated_sum;
use crate::rng::{sample_weighted, stream_rng, uniform_index, STREAM_LOCAL_SEARCH};

pub const DEFAULT_TRIALS: usize = 5;
pub const DEFAULT_EPSILON: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LocalSearchOptions {
    pub trials: usize,
    /// A swap is taken only if it shrinks the cost below `(1 − ε/k)` times the current one.
    pub epsilon: f64,
}

impl Default for LocalSearchOptions {
    fn default() -> Self {
        LocalSearchOptions {
            trials: DEFAULT_TRIALS,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

/// Best of `trials` independent local-search runs. The swap objective is the
/// instance norm (`Σ d^p`, or the max for p = ∞).
pub fn local_search_k_median(
    instance: &ClusteringInstance,
    k: usize,
    seed: u64,
    trials: usize,
) -> Result<VanillaSolution> {
    local_search_with(
        instance,
        k,
        seed,
        LocalSearchOptions {
            trials,
            ..Default::default()
        },
    )
}

pub fn local_search_with(
    instance: &ClusteringInstance,
    k: usize,
    seed: u64,
    options: LocalSearchOptions,
) -> Result<VanillaSolution> {
    if options.trials == 0 {
        return Err(Error::Domain(
            "local search needs at least one trial".into(),
        ));
    }
    let inst = with_k(instance, k)?;
    let runs: Vec<(f64, Vec<usize>)> = (0..options.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stream_rng(seed, STREAM_LOCAL_SEARCH + trial);
            let start = d_sampling(&inst, k, &mut rng);
            let opened = descend(&inst, start, options.epsilon);
            (swap_objective(&inst, &opened), opened)
        })
        .collect();
    // min over trials, earliest trial on ties
    let (_, best) = runs
        .into_iter()
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .expect("at least one trial");
    let assignment = Assignment::nearest(&inst, best)?;
    Ok(VanillaSolution {
        assignment,
        solver: SolverId::KMedianLocalSearch,
        seed,
    })
}

/// Initial centers: a uniform client's nearest facility, then clients drawn
/// with probability proportional to their distance to the open set.
fn d_sampling(
    inst: &ClusteringInstance,
    k: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Vec<usize> {
    let n = inst.num_clients();
    let m = inst.num_facilities();
    let mut is_open = vec![false; m];
    let mut opened = Vec::with_capacity(k);
    let mut to_set = vec![f64::INFINITY; n];
    let mut anchor = uniform_index(rng, n);
    while opened.len() < k {
        let closed: Vec<usize> = (0..m).filter(|&f| !is_open[f]).collect();
        let (f, _) = inst.nearest_of(anchor, &closed).expect("k <= |F|");
        is_open[f] = true;
        opened.push(f);
        for (v, d) in to_set.iter_mut().enumerate() {
            *d = d.min(inst.dist(v, f));
        }
        match sample_weighted(rng, &to_set) {
            Some(v) => anchor = v,
            // every client sits on an open facility; any closed one will do
            None => anchor = 0,
        }
    }
    opened
}

struct NearestTwo {
    first: Vec<(usize, f64)>,
    second: Vec<f64>,
}

fn nearest_two(inst: &ClusteringInstance, opened: &[usize]) -> NearestTwo {
    let n = inst.num_clients();
    let mut first = Vec::with_capacity(n);
    let mut second = Vec::with_capacity(n);
    for v in 0..n {
        let mut best = (usize::MAX, f64::INFINITY);
        let mut runner = f64::INFINITY;
        for &f in opened {
            let d = inst.dist(v, f);
            if d < best.1 {
                runner = best.1;
                best = (f, d);
            } else if d < runner {
                runner = d;
            }
        }
        first.push(best);
        second.push(runner);
    }
    NearestTwo { first, second }
}

fn aggregate(norm: Norm, distances: impl Iterator<Item = f64>) -> f64 {
    match norm {
        Norm::Infinity => distances.fold(0.0, f64::max),
        Norm::Finite(_) => compensated_sum(distances.map(|d| norm.pow(d))),
    }
}

/// The local-search objective: `Σ_v d(v, S)^p`, or `max_v d(v, S)` for p = ∞.
pub(crate) fn swap_objective(inst: &ClusteringInstance, opened: &[usize]) -> f64 {
    let near = nearest_two(inst, opened);
    aggregate(inst.norm(), near.first.iter().map(|&(_, d)| d))
}

/// Objective after replacing `out` by `into` in `opened`.
pub fn swap_cost(inst: &ClusteringInstance, opened: &[usize], out: usize, into: usize) -> f64 {
    let swapped: Vec<usize> = opened
        .iter()
        .map(|&f| if f == out { into } else { f })
        .collect();
    swap_objective(inst, &swapped)
}

fn descend(inst: &ClusteringInstance, mut opened: Vec<usize>, epsilon: f64) -> Vec<usize> {
    let n = inst.num_clients();
    let m = inst.num_facilities();
    let k = opened.len();
    let norm = inst.norm();
    let factor = 1.0 - epsilon / k as f64;
    let mut current = swap_objective(inst, &opened);
    let mut column = vec![0.0; n];
    loop {
        let near = nearest_two(inst, &opened);
        let mut best: Option<(f64, usize, usize)> = None;
        for into in 0..m {
            if opened.contains(&into) {
                continue;
            }
            for (v, c) in column.iter_mut().enumerate() {
                *c = inst.dist(v, into);
            }
            for &out in &opened {
                let cost = aggregate(
                    norm,
                    (0..n).map(|v| {
                        let (f, d1) = near.first[v];
                        let keep = if f == out { near.second[v] } else { d1 };
                        keep.min(column[v])
                    }),
                );
                if best.is_none_or(|(b, _, _)| cost < b) {
                    best = Some((cost, out, into));
                }
            }
        }
        match best {
            Some((cost, out, into)) if cost < factor * current => {
                for f in opened.iter_mut() {
                    if *f == out {
                        *f = into;
                    }
                }
                current = cost;
            }
            _ => break,
        }
    }
    opened.sort_unstable();
    opened
}
