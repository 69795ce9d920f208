mod common;

use common::*;
use faircluster::vanilla::{self, gonzalez_from, kmeans, swap_cost, DEFAULT_MAX_ITERS};
use faircluster::{Assignment, ClusteringInstance, Group, Norm, SolverId};
use proptest::prelude::*;
use rand::RngExt;

fn one_group(n: usize) -> Vec<Group> {
    vec![Group::new("all", 0..n)]
}

#[test]
fn two_separated_pairs_form_their_own_clusters() {
    let pts = vec![
        vec![0.0, 0.0],
        vec![0.0, 1.0],
        vec![10.0, 0.0],
        vec![10.0, 1.0],
    ];
    let inst = ClusteringInstance::from_points(&pts, one_group(4), 2, Norm::MEANS).unwrap();
    let sol = kmeans(&inst, 2, 3, DEFAULT_MAX_ITERS).unwrap();
    let phi = sol.assignment.phi();
    assert_eq!(phi[0], phi[1]);
    assert_eq!(phi[2], phi[3]);
    assert_ne!(phi[0], phi[2]);
    // exhaustive over every pair of candidate centers
    let best = (0..4)
        .flat_map(|a| (a + 1..4).map(move |b| vec![a, b]))
        .map(|opened| Assignment::nearest(&inst, opened).unwrap().cost())
        .fold(f64::INFINITY, f64::min);
    assert_eq!(sol.cost(), best);
    assert_eq!(best, 2f64.sqrt());
}

#[test]
fn farthest_point_from_a_fixed_start() {
    let pts: Vec<Vec<f64>> = [0.0, 1.0, 10.0].iter().map(|&x| vec![x]).collect();
    let inst = ClusteringInstance::from_points(&pts, one_group(3), 2, Norm::CENTER).unwrap();
    let a = gonzalez_from(&inst, 2, 0).unwrap();
    assert_eq!(a.opened(), &[0, 2]);
    assert_eq!(a.cost(), 1.0);
}

#[test]
fn kmeans_needs_coordinates() {
    let rows = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
    let inst = ClusteringInstance::from_matrix(&rows, one_group(2), 1, Norm::MEANS).unwrap();
    assert!(vanilla::solve(&inst, SolverId::KMeansLloyd, 0)
        .unwrap_err()
        .to_string()
        .contains("Euclidean"));
}

#[test]
fn solver_names_parse() {
    for (name, id) in [
        ("gonzalez", SolverId::KCenterGonzalez),
        ("kmeans", SolverId::KMeansLloyd),
        ("local_search", SolverId::KMedianLocalSearch),
    ] {
        assert_eq!(name.parse::<SolverId>().unwrap(), id);
        assert_eq!(id.as_str().parse::<SolverId>().unwrap(), id);
    }
    assert!("simulated_annealing".parse::<SolverId>().is_err());
}

fn any_solver() -> impl Strategy<Value = SolverId> {
    prop_oneof![
        Just(SolverId::KCenterGonzalez),
        Just(SolverId::KMeansLloyd),
        Just(SolverId::KMedianLocalSearch)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn solutions_are_deterministic_and_nearest(seed in any::<u64>(), solver in any_solver()) {
        let mut rng = rng(seed);
        let n = rng.random_range(2..=40);
        let k = rng.random_range(1..=n.min(6));
        let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
        let norm = match solver {
            SolverId::KCenterGonzalez => Norm::CENTER,
            SolverId::KMeansLloyd => Norm::MEANS,
            SolverId::KMedianLocalSearch => Norm::MEDIAN,
        };
        let inst = ClusteringInstance::from_points(&pts, one_group(n), k, norm).unwrap();
        let a = vanilla::solve(&inst, solver, seed).unwrap();
        let b = vanilla::solve(&inst, solver, seed).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.opened().len() <= k);
        let nearest = Assignment::nearest(&inst, a.opened().to_vec()).unwrap();
        prop_assert_eq!(a.cost(), nearest.cost());
    }

    #[test]
    fn local_search_stops_at_a_local_optimum(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = rng.random_range(3..=15);
        let m = rng.random_range(2..=6);
        let k = rng.random_range(1..m);
        let inst = random_planar(&mut rng, n, m, k, 1, 1, Norm::MEDIAN);
        let sol = vanilla::solve(&inst, SolverId::KMedianLocalSearch, seed).unwrap();
        let current = inst.norm().pow(sol.cost());
        let factor = 1.0 - faircluster::vanilla::DEFAULT_EPSILON / k as f64;
        for &out in sol.opened() {
            for into in (0..m).filter(|f| !sol.opened().contains(f)) {
                prop_assert!(swap_cost(&inst, sol.opened(), out, into) >= factor * current - 1e-9);
            }
        }
    }
}
