//! Vanilla `(k, p)`-clustering solvers: the black box whose centers the fair
//! assignment step keeps.

mod gonzalez;
mod kmeans;
mod local_search;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Assignment, ClusteringInstance};

pub use gonzalez::{gonzalez_from, gonzalez_k_center};
pub use kmeans::{kmeans, kmeans_traced, KMeansTrace, DEFAULT_MAX_ITERS};
pub use local_search::{
    local_search_k_median, local_search_with, swap_cost, LocalSearchOptions, DEFAULT_EPSILON,
    DEFAULT_TRIALS,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverId {
    KCenterGonzalez,
    KMedianLocalSearch,
    KMeansLloyd,
}

impl SolverId {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverId::KCenterGonzalez => "k_center_gonzalez",
            SolverId::KMedianLocalSearch => "k_median_local_search",
            SolverId::KMeansLloyd => "k_means_lloyd",
        }
    }
}

impl fmt::Display for SolverId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverId {
    type Err = Error;

    fn from_str(s: &str) -> Result<SolverId> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "k_center_gonzalez" | "gonzalez" | "kcenter" | "k_center" => {
                Ok(SolverId::KCenterGonzalez)
            }
            "k_median_local_search" | "local_search" | "kmedian" | "k_median" => {
                Ok(SolverId::KMedianLocalSearch)
            }
            "k_means_lloyd" | "kmeans" | "k_means" | "lloyd" => Ok(SolverId::KMeansLloyd),
            other => Err(Error::Config(format!("unknown solver {other:?}"))),
        }
    }
}

impl<'de> Deserialize<'de> for SolverId {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<SolverId, D::Error> {
        let name = String::deserialize(deserializer)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

/// Centers opened by a vanilla solver with the nearest-center assignment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VanillaSolution {
    pub assignment: Assignment,
    pub solver: SolverId,
    pub seed: u64,
}

impl VanillaSolution {
    pub fn opened(&self) -> &[usize] {
        self.assignment.opened()
    }

    pub fn cost(&self) -> f64 {
        self.assignment.cost()
    }
}

/// Runs `solver` with its default parameters and `k = instance.k()`.
pub fn solve(
    instance: &ClusteringInstance,
    solver: SolverId,
    seed: u64,
) -> Result<VanillaSolution> {
    let k = instance.k();
    match solver {
        SolverId::KCenterGonzalez => gonzalez_k_center(instance, k, seed),
        SolverId::KMedianLocalSearch => local_search_k_median(instance, k, seed, DEFAULT_TRIALS),
        SolverId::KMeansLloyd => kmeans(instance, k, seed, DEFAULT_MAX_ITERS),
    }
}

fn check_k(instance: &ClusteringInstance, k: usize) -> Result<()> {
    if k == 0 || k > instance.num_facilities() {
        return Err(Error::Domain(format!(
            "k = {k} must be in 1..={} (number of facilities)",
            instance.num_facilities()
        )));
    }
    Ok(())
}

/// Instance view whose `k` admits `k` opened facilities.
fn with_k(
    instance: &ClusteringInstance,
    k: usize,
) -> Result<std::borrow::Cow<'_, ClusteringInstance>> {
    check_k(instance, k)?;
    if instance.k() == k {
        Ok(std::borrow::Cow::Borrowed(instance))
    } else {
        Ok(std::borrow::Cow::Owned(instance.with_k(k)?))
    }
}

/// Adds facilities by farthest-point traversal until `target` are open: the
/// client farthest from the open set contributes its nearest closed facility.
pub(crate) fn farthest_point_fill(
    instance: &ClusteringInstance,
    opened: &mut Vec<usize>,
    target: usize,
) {
    let n = instance.num_clients();
    let m = instance.num_facilities();
    let mut is_open = vec![false; m];
    for &f in opened.iter() {
        is_open[f] = true;
    }
    let mut to_set: Vec<f64> = (0..n)
        .map(|v| {
            opened
                .iter()
                .map(|&f| instance.dist(v, f))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    while opened.len() < target.min(m) {
        let mut far = 0;
        for v in 1..n {
            if to_set[v] > to_set[far] {
                far = v;
            }
        }
        let closed: Vec<usize> = (0..m).filter(|&f| !is_open[f]).collect();
        let (pick, _) = instance
            .nearest_of(far, &closed)
            .expect("a closed facility remains");
        is_open[pick] = true;
        opened.push(pick);
        for (v, d) in to_set.iter_mut().enumerate() {
            *d = d.min(instance.dist(v, pick));
        }
    }
}
