//! Clustering where every opened center serves at least `L` clients.
//!
//! A vanilla solution supplies candidate centers `S`. Every nonempty subset
//! `T ⊆ S` is tried as the final center set, each with an optimal
//! assignment under the lower bound, and the cheapest subset wins.

pub mod flow;

use log::debug;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Assignment, ClusteringInstance, Norm};
use crate::metrics::compensated_sum;
use crate::vanilla::{self, SolverId, VanillaSolution};

pub use flow::{Circulation, FlowNetwork};

/// Objective, center subset and assignment of one feasible subset.
type Candidate = (f64, Vec<usize>, Vec<usize>);

/// Largest candidate-center count whose subsets are enumerated.
pub const DEFAULT_ENUMERATION_CAP: usize = 20;

/// Optimal assignment of all clients to `centers` with at least `lower`
/// clients per center.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LbMatching {
    /// Facility of every client.
    pub phi: Vec<usize>,
    /// `Σ d^p` for finite p, the largest distance for p = ∞.
    pub objective: f64,
}

fn validate_centers(instance: &ClusteringInstance, centers: &[usize]) -> Result<()> {
    if centers.is_empty() {
        return Err(Error::Domain("the center set is empty".into()));
    }
    if let Some(&f) = centers.iter().find(|&&f| f >= instance.num_facilities()) {
        return Err(Error::Domain(format!("facility {f} does not exist")));
    }
    let mut sorted = centers.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != centers.len() {
        return Err(Error::Domain("the center set has duplicates".into()));
    }
    Ok(())
}

/// Flow network: source → client (exactly 1), client → center (cost per
/// unit), center → sink (at least `lower`), sink → source to close the
/// circulation. Only pairs accepted by `allow` get an arc.
fn matching_network(
    instance: &ClusteringInstance,
    centers: &[usize],
    lower: usize,
    cost: impl Fn(usize, usize) -> f64,
    allow: impl Fn(usize, usize) -> bool,
) -> Option<Vec<usize>> {
    let n = instance.num_clients();
    let source = 0;
    let sink = 1;
    let mut net = FlowNetwork::new(2 + n + centers.len());
    let client_node = |v: usize| 2 + v;
    let center_node = |t: usize| 2 + n + t;
    let mut pair_arcs = Vec::new();
    for v in 0..n {
        net.add_arc(source, client_node(v), 1, 1, 0.0);
        for (t, &f) in centers.iter().enumerate() {
            if allow(v, f) {
                pair_arcs.push((
                    net.add_arc(client_node(v), center_node(t), 0, 1, cost(v, f)),
                    v,
                    f,
                ));
            }
        }
    }
    for t in 0..centers.len() {
        net.add_arc(center_node(t), sink, lower as u64, n as u64, 0.0);
    }
    net.add_arc(sink, source, 0, n as u64, 0.0);
    let circulation = net.min_cost_circulation()?;
    let mut phi = vec![usize::MAX; n];
    for &(arc, v, f) in &pair_arcs {
        if circulation.flow[arc] == 1 {
            phi[v] = f;
        }
    }
    debug_assert!(phi.iter().all(|&f| f != usize::MAX));
    Some(phi)
}

/// Minimum-cost assignment of every client to one of `centers` such that
/// each center receives at least `lower` clients, with edge cost `d^p`.
/// For p = ∞ the largest distance is minimized instead. `None` exactly
/// when `lower · |centers| > n`.
pub fn min_cost_lb_matching(
    instance: &ClusteringInstance,
    centers: &[usize],
    lower: usize,
) -> Result<Option<LbMatching>> {
    validate_centers(instance, centers)?;
    let n = instance.num_clients();
    if lower.saturating_mul(centers.len()) > n {
        return Ok(None);
    }
    let norm = instance.norm();
    if !norm.is_finite() {
        return bottleneck_lb_matching(instance, centers, lower).map(Some);
    }
    let phi = matching_network(
        instance,
        centers,
        lower,
        |v, f| norm.pow(instance.dist(v, f)),
        |_, _| true,
    )
    .ok_or_else(|| Error::Solver("lower-bounded matching failed despite enough clients".into()))?;
    let objective = compensated_sum(
        phi.iter()
            .enumerate()
            .map(|(v, &f)| norm.pow(instance.dist(v, f))),
    );
    Ok(Some(LbMatching { phi, objective }))
}

/// Smallest radius admitting a lower-bounded assignment, found by binary
/// search over client-center distances with a zero-cost feasibility flow.
fn bottleneck_lb_matching(
    instance: &ClusteringInstance,
    centers: &[usize],
    lower: usize,
) -> Result<LbMatching> {
    let n = instance.num_clients();
    let mut radii: Vec<f64> = centers
        .iter()
        .flat_map(|&f| (0..n).map(move |v| instance.dist(v, f)))
        .collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let attempt = |g: f64| {
        matching_network(
            instance,
            centers,
            lower,
            |_, _| 0.0,
            |v, f| instance.dist(v, f) <= g,
        )
    };
    let (mut lo, mut hi) = (0, radii.len() - 1);
    let mut best = attempt(radii[hi]).ok_or_else(|| {
        Error::Solver("lower-bounded matching failed despite enough clients".into())
    })?;
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match attempt(radii[mid]) {
            Some(phi) => {
                best = phi;
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }
    let objective = best
        .iter()
        .enumerate()
        .map(|(v, &f)| instance.dist(v, f))
        .fold(0.0, f64::max);
    Ok(LbMatching {
        phi: best,
        objective,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LbSolution {
    pub vanilla: VanillaSolution,
    /// The chosen center subset and its assignment.
    pub assignment: Assignment,
    pub lower: usize,
    /// Subsets evaluated: `2^|S| − 1`.
    pub candidates: usize,
    /// Subsets that admitted an assignment.
    pub feasible_candidates: usize,
}

/// Vanilla centers from `solver`, then the best lower-bounded assignment
/// over all nonempty subsets of them.
pub fn lb_clustering(
    instance: &ClusteringInstance,
    lower: usize,
    k: usize,
    solver: SolverId,
    seed: u64,
) -> Result<LbSolution> {
    lb_clustering_capped(instance, lower, k, solver, seed, DEFAULT_ENUMERATION_CAP)
}

pub fn lb_clustering_capped(
    instance: &ClusteringInstance,
    lower: usize,
    k: usize,
    solver: SolverId,
    seed: u64,
    cap: usize,
) -> Result<LbSolution> {
    if k > cap {
        return Err(Error::Config(format!(
            "k = {k} exceeds the subset enumeration cap {cap}"
        )));
    }
    let inst = if instance.k() == k {
        instance.clone()
    } else {
        instance.with_k(k)?
    };
    let vanilla = vanilla::solve(&inst, solver, seed)?;
    lb_clustering_on(&inst, lower, vanilla, cap)
}

/// Subset enumeration over the centers of an existing vanilla solution.
pub fn lb_clustering_on(
    instance: &ClusteringInstance,
    lower: usize,
    vanilla: VanillaSolution,
    cap: usize,
) -> Result<LbSolution> {
    let n = instance.num_clients();
    if lower == 0 {
        return Err(Error::Domain("the lower bound must be at least 1".into()));
    }
    if lower > n {
        return Err(Error::Infeasible(format!(
            "lower bound {lower} exceeds the {n} clients"
        )));
    }
    let centers = vanilla.opened().to_vec();
    if centers.len() > cap {
        return Err(Error::Config(format!(
            "{} candidate centers exceed the subset enumeration cap {cap}",
            centers.len()
        )));
    }
    let candidates = (1usize << centers.len()) - 1;
    let results: Vec<Option<Candidate>> = (1..=candidates)
        .into_par_iter()
        .map(|mask| {
            let subset: Vec<usize> = centers
                .iter()
                .enumerate()
                .filter(|&(t, _)| mask >> t & 1 == 1)
                .map(|(_, &f)| f)
                .collect();
            min_cost_lb_matching(instance, &subset, lower)
                .map(|found| found.map(|m| (m.objective, subset, m.phi)))
        })
        .collect::<Result<_>>()?;
    let feasible_candidates = results.iter().filter(|r| r.is_some()).count();
    let best = results
        .into_iter()
        .flatten()
        .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
        .ok_or_else(|| {
            Error::Infeasible(format!(
                "no center subset can give {lower} clients to every center"
            ))
        })?;
    debug!(
        "lower bound {lower}: best subset {:?} with objective {}",
        best.1, best.0
    );
    let assignment = Assignment::new(instance, best.1, best.2)?;
    Ok(LbSolution {
        vanilla,
        assignment,
        lower,
        candidates,
        feasible_candidates,
    })
}

/// `Σ d^p` (or the maximum for p = ∞) of a matching, for comparison with
/// brute-force optima.
pub fn matching_objective(instance: &ClusteringInstance, phi: &[usize]) -> f64 {
    let norm: Norm = instance.norm();
    let distances = phi.iter().enumerate().map(|(v, &f)| instance.dist(v, f));
    match norm {
        Norm::Infinity => distances.fold(0.0, f64::max),
        Norm::Finite(_) => compensated_sum(distances.map(|d| norm.pow(d))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Group;

    fn line(xs: &[f64], norm: Norm) -> ClusteringInstance {
        let pts: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        ClusteringInstance::from_points(
            &pts,
            vec![Group::new("all", 0..xs.len())],
            xs.len().min(3),
            norm,
        )
        .unwrap()
    }

    #[test]
    fn counting_bound_decides_feasibility() {
        let inst = line(&[0.0, 1.0, 2.0, 3.0, 4.0], Norm::MEDIAN);
        assert!(min_cost_lb_matching(&inst, &[0, 4], 3).unwrap().is_none());
        assert!(min_cost_lb_matching(&inst, &[0, 4], 2).unwrap().is_some());
    }

    #[test]
    fn single_center_takes_everyone() {
        let inst = line(&[0.0, 1.0, 2.0, 5.0], Norm::MEDIAN);
        let m = min_cost_lb_matching(&inst, &[1], 4).unwrap().unwrap();
        assert_eq!(m.phi, vec![1, 1, 1, 1]);
        assert_eq!(m.objective, 1.0 + 0.0 + 1.0 + 4.0);
    }

    #[test]
    fn lower_bound_pulls_clients_over() {
        // centers at 0 and 10; three clients near 0, one near 10; L = 2
        let inst = line(&[0.0, 1.0, 2.0, 10.0], Norm::MEDIAN);
        let m = min_cost_lb_matching(&inst, &[0, 3], 2).unwrap().unwrap();
        assert_eq!(m.phi, vec![0, 0, 3, 3]);
        assert_eq!(m.objective, 0.0 + 1.0 + 8.0 + 0.0);
    }

    #[test]
    fn bottleneck_version() {
        let inst = line(&[0.0, 1.0, 2.0, 10.0], Norm::CENTER);
        let m = min_cost_lb_matching(&inst, &[0, 3], 2).unwrap().unwrap();
        assert_eq!(m.objective, 8.0);
    }

    #[test]
    fn l_one_never_worse_than_vanilla() {
        let inst = line(&[0.0, 0.5, 3.0, 3.2, 9.0, 9.1], Norm::MEDIAN);
        let sol = lb_clustering(&inst, 1, 3, SolverId::KMedianLocalSearch, 4).unwrap();
        assert_eq!(sol.candidates, 7);
        assert!(sol.assignment.cost() <= sol.vanilla.cost() + 1e-12);
    }

    #[test]
    fn cap_and_bounds_checked() {
        let inst = line(&[0.0, 1.0, 2.0], Norm::MEDIAN);
        assert!(matches!(
            lb_clustering_capped(&inst, 1, 3, SolverId::KCenterGonzalez, 0, 2),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            lb_clustering(&inst, 4, 2, SolverId::KCenterGonzalez, 0),
            Err(Error::Infeasible(_))
        ));
    }
}
