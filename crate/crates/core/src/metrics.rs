//! Cost and fairness measurements on assignments.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Assignment, ClusteringInstance, FairnessProfile, Norm};

/// Slack when comparing group counts against `α·|C(f)|` and `β·|C(f)|`.
pub const FAIR_TOL: f64 = 1e-9;

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// ℓ_p aggregate of a multiset of distances.
pub fn norm_of(distances: impl IntoIterator<Item = f64>, norm: Norm) -> f64 {
    match norm {
        Norm::Infinity => distances.into_iter().fold(0.0, f64::max),
        Norm::Finite(_) => norm.root(compensated_sum(distances.into_iter().map(|d| norm.pow(d)))),
    }
}

/// `(Σ_v d(v, φ(v))^p)^(1/p)`, or `max_v d(v, φ(v))` for the max norm.
pub fn lp_norm_cost(
    instance: &ClusteringInstance,
    opened: &[usize],
    phi: &[usize],
    norm: Norm,
) -> Result<f64> {
    if opened.is_empty() {
        return Err(Error::Domain("no facility opened".into()));
    }
    if phi.len() != instance.num_clients() {
        return Err(Error::Domain(format!(
            "assignment covers {} clients, instance has {}",
            phi.len(),
            instance.num_clients()
        )));
    }
    let is_open = |f: usize| opened.contains(&f);
    if let Some((v, &f)) = phi.iter().enumerate().find(|&(_, &f)| !is_open(f)) {
        return Err(Error::Domain(format!(
            "client {v} assigned to facility {f}, which is not opened"
        )));
    }
    Ok(norm_of(
        phi.iter().enumerate().map(|(v, &f)| instance.dist(v, f)),
        norm,
    ))
}

/// Per-cluster sizes and per-group counts for the nonempty clusters of an assignment.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterCounts {
    /// Nonempty clusters in increasing facility order.
    pub facilities: Vec<usize>,
    pub sizes: Vec<usize>,
    /// `group_counts[c][i] = |C_i(f_c)|`.
    pub group_counts: Vec<Vec<usize>>,
}

impl ClusterCounts {
    pub fn compute(instance: &ClusteringInstance, phi: &[usize]) -> ClusterCounts {
        let mut by_facility: BTreeMap<usize, (usize, Vec<usize>)> = BTreeMap::new();
        for (v, &f) in phi.iter().enumerate() {
            let entry = by_facility
                .entry(f)
                .or_insert_with(|| (0, vec![0; instance.num_groups()]));
            entry.0 += 1;
            for &i in instance.memberships(v) {
                entry.1[i] += 1;
            }
        }
        let mut counts = ClusterCounts {
            facilities: vec![],
            sizes: vec![],
            group_counts: vec![],
        };
        for (f, (size, groups)) in by_facility {
            counts.facilities.push(f);
            counts.sizes.push(size);
            counts.group_counts.push(groups);
        }
        counts
    }
}

fn cluster_balance(ratios: &[f64], size: usize, counts: &[usize]) -> f64 {
    let mut bal = 1.0f64;
    for (i, &r) in ratios.iter().enumerate() {
        let rf = counts[i] as f64 / size as f64;
        if rf == 0.0 {
            return 0.0;
        }
        bal = bal.min(r / rf).min(rf / r);
    }
    bal
}

/// Balance of every nonempty cluster: `min_i min(r_i / r_i(f), r_i(f) / r_i)`.
/// A cluster missing some group entirely has balance 0.
pub fn balance(instance: &ClusteringInstance, assignment: &Assignment) -> BTreeMap<usize, f64> {
    let ratios = instance.group_ratios();
    let counts = ClusterCounts::compute(instance, assignment.phi());
    counts
        .facilities
        .iter()
        .enumerate()
        .map(|(c, &f)| {
            (
                f,
                cluster_balance(&ratios, counts.sizes[c], &counts.group_counts[c]),
            )
        })
        .collect()
}

fn violation_of(profile: &FairnessProfile, size: usize, counts: &[usize]) -> f64 {
    let s = size as f64;
    let mut worst = 0.0f64;
    for (i, &c) in counts.iter().enumerate() {
        let c = c as f64;
        let over = c - profile.alpha()[i] * s;
        let under = profile.beta()[i] * s - c;
        worst = worst.max(over).max(under);
    }
    worst
}

/// Smallest `λ ≥ 0` with `β_i|C(f)| − λ ≤ |C_i(f)| ≤ α_i|C(f)| + λ` for every
/// nonempty cluster and group. Values within [`FAIR_TOL`] of zero are zero.
pub fn additive_violation(
    instance: &ClusteringInstance,
    profile: &FairnessProfile,
    assignment: &Assignment,
) -> f64 {
    violation_of_phi(instance, profile, assignment.phi())
}

pub(crate) fn violation_of_phi(
    instance: &ClusteringInstance,
    profile: &FairnessProfile,
    phi: &[usize],
) -> f64 {
    let counts = ClusterCounts::compute(instance, phi);
    let worst = counts
        .sizes
        .iter()
        .zip(&counts.group_counts)
        .map(|(&s, g)| violation_of(profile, s, g))
        .fold(0.0, f64::max);
    if worst <= FAIR_TOL {
        0.0
    } else {
        worst
    }
}

/// `β_i = r_i(1 − δ)`, `α_i = min(1, r_i / (1 − δ))`.
pub fn delta_to_profile(instance: &ClusteringInstance, delta: f64) -> Result<FairnessProfile> {
    if !(0.0..1.0).contains(&delta) {
        return Err(Error::Domain(format!(
            "delta must lie in [0, 1), got {delta}"
        )));
    }
    let ratios = instance.group_ratios();
    let alpha = ratios
        .iter()
        .map(|&r| (r / (1.0 - delta)).min(1.0))
        .collect();
    let beta = ratios.iter().map(|&r| r * (1.0 - delta)).collect();
    FairnessProfile::new(alpha, beta)
}

/// One nonempty cluster in a report.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ClusterSummary {
    pub facility: usize,
    pub size: usize,
    pub group_counts: Vec<usize>,
    pub balance: f64,
    pub violation: f64,
}

#[derive(Clone, Debug, Default, Serialize, PartialEq)]
pub struct PhaseTimings {
    pub vanilla_ms: f64,
    pub fair_lp_ms: f64,
    pub rounding_ms: f64,
    pub total_ms: f64,
}

/// Fairness and cost summary for one fair clustering run.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct FairnessReport {
    pub clusters: Vec<ClusterSummary>,
    pub lambda_max: f64,
    pub min_balance: f64,
    pub fair_cost: f64,
    pub vanilla_cost: f64,
    pub cost_of_fairness: f64,
    pub timings: PhaseTimings,
}

impl FairnessReport {
    pub fn build(
        instance: &ClusteringInstance,
        profile: &FairnessProfile,
        fair: &Assignment,
        vanilla_cost: f64,
        timings: PhaseTimings,
    ) -> FairnessReport {
        let clusters = summarize_clusters(instance, profile, fair.phi());
        let lambda_max = additive_violation(instance, profile, fair);
        let min_balance = clusters.iter().map(|c| c.balance).fold(1.0, f64::min);
        FairnessReport {
            clusters,
            lambda_max,
            min_balance,
            fair_cost: fair.cost(),
            vanilla_cost,
            cost_of_fairness: cost_ratio(fair.cost(), vanilla_cost),
            timings,
        }
    }

    /// The three largest clusters, larger first, lower facility index on ties.
    pub fn largest_clusters(&self, count: usize) -> Vec<&ClusterSummary> {
        let mut sorted: Vec<&ClusterSummary> = self.clusters.iter().collect();
        sorted.sort_by(|a, b| b.size.cmp(&a.size).then(a.facility.cmp(&b.facility)));
        sorted.truncate(count);
        sorted
    }
}

pub fn summarize_clusters(
    instance: &ClusteringInstance,
    profile: &FairnessProfile,
    phi: &[usize],
) -> Vec<ClusterSummary> {
    let ratios = instance.group_ratios();
    let counts = ClusterCounts::compute(instance, phi);
    (0..counts.facilities.len())
        .map(|c| {
            let violation = violation_of(profile, counts.sizes[c], &counts.group_counts[c]);
            ClusterSummary {
                facility: counts.facilities[c],
                size: counts.sizes[c],
                group_counts: counts.group_counts[c].clone(),
                balance: cluster_balance(&ratios, counts.sizes[c], &counts.group_counts[c]),
                violation: if violation <= FAIR_TOL {
                    0.0
                } else {
                    violation
                },
            }
        })
        .collect()
}

/// fair / vanilla, with 0/0 read as 1.
pub fn cost_ratio(fair: f64, vanilla: f64) -> f64 {
    if vanilla > 0.0 {
        fair / vanilla
    } else if fair == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}
