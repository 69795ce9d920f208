#![allow(dead_code)]

use std::io::Write;
use std::path::PathBuf;

use faircluster::{ClusteringInstance, Group, MetricSpace, Norm, SolverId};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data")
}

/// Random groups over `n` clients. With `overlap == 1` they partition the
/// clients; with `overlap == 2` two partitions are laid over each other so
/// every client sits in exactly two groups.
pub fn random_groups(rng: &mut ChaCha8Rng, n: usize, ell: usize, overlap: usize) -> Vec<Group> {
    let partition = |rng: &mut ChaCha8Rng, parts: usize| -> Vec<usize> {
        let mut label: Vec<usize> = (0..n).map(|_| rng.random_range(0..parts)).collect();
        // every part gets at least one client
        for (p, slot) in rand_distinct(rng, n, parts).into_iter().enumerate() {
            label[slot] = p;
        }
        label
    };
    let mut groups = Vec::new();
    if overlap == 1 || ell < 2 {
        let label = partition(rng, ell);
        for p in 0..ell {
            groups.push(Group::new(
                format!("g{p}"),
                (0..n).filter(|&v| label[v] == p),
            ));
        }
    } else {
        let first = ell / 2;
        let second = ell - first;
        for (attr, parts) in [(0, first), (1, second)] {
            let label = partition(rng, parts);
            for p in 0..parts {
                groups.push(Group::new(
                    format!("a{attr}g{p}"),
                    (0..n).filter(|&v| label[v] == p),
                ));
            }
        }
    }
    groups
}

fn rand_distinct(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..count {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(count);
    pool
}

/// Clients and separate facilities drawn uniformly from `[0, 10]^2`.
pub fn random_planar(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    k: usize,
    ell: usize,
    overlap: usize,
    norm: Norm,
) -> ClusteringInstance {
    let clients: Vec<Vec<f64>> = (0..n)
        .map(|_| vec![rng.random::<f64>() * 10.0, rng.random::<f64>() * 10.0])
        .collect();
    let facilities: Vec<Vec<f64>> = (0..m)
        .map(|_| vec![rng.random::<f64>() * 10.0, rng.random::<f64>() * 10.0])
        .collect();
    let groups = random_groups(rng, n, ell, overlap);
    ClusteringInstance::from_points_and_facilities(&clients, &facilities, groups, k, norm).unwrap()
}

/// Points on an integer grid with ℓ1 distances, as an explicit matrix.
/// Costs stay integral, so exact comparisons are meaningful.
pub fn random_grid(
    rng: &mut ChaCha8Rng,
    n: usize,
    m: usize,
    k: usize,
    ell: usize,
    overlap: usize,
    norm: Norm,
) -> ClusteringInstance {
    let total = n + m;
    let pts: Vec<(i64, i64)> = (0..total)
        .map(|_| (rng.random_range(0..8), rng.random_range(0..8)))
        .collect();
    let rows: Vec<Vec<f64>> = pts
        .iter()
        .map(|a| {
            pts.iter()
                .map(|b| ((a.0 - b.0).abs() + (a.1 - b.1).abs()) as f64)
                .collect()
        })
        .collect();
    let space = MetricSpace::from_matrix(&rows).unwrap();
    let groups = random_groups(rng, n, ell, overlap);
    ClusteringInstance::new(
        space,
        (0..n).collect(),
        (n..total).collect(),
        groups,
        k,
        norm,
    )
    .unwrap()
}

pub fn random_norm(rng: &mut ChaCha8Rng) -> Norm {
    [Norm::MEDIAN, Norm::MEANS, Norm::CENTER][rng.random_range(0..3)]
}

/// The vanilla solver matching each objective.
pub fn solver_for(norm: Norm) -> SolverId {
    match norm {
        Norm::Infinity => SolverId::KCenterGonzalez,
        Norm::Finite(2.0) => SolverId::KMeansLloyd,
        Norm::Finite(_) => SolverId::KMedianLocalSearch,
    }
}

/// Approximation factor of `solver` for its own objective.
pub fn solver_factor(norm: Norm) -> f64 {
    match norm {
        Norm::Infinity => 2.0,
        _ => 5.0,
    }
}

/// Writes straight to stderr so the line survives the test harness's output capture.
pub fn report(criterion: usize, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr(),
        "[{status}] criterion {criterion}: {detail}"
    );
}
