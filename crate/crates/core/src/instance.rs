//! Instances, fairness parameters and assignments.
//!
//! A [`ClusteringInstance`] lives in a finite metric space. Clients and
//! facilities are both lists of point ids into that space, so `F = C` is just
//! the case where the two lists coincide. Groups are sets of *client* indices
//! and may overlap.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::metrics;

/// Tolerance used when validating explicit distance matrices.
pub const METRIC_TOL: f64 = 1e-9;

/// Explicit matrices above this many points skip the O(n³) triangle check
/// unless validation is requested.
pub const DEFAULT_VALIDATE_LIMIT: usize = 500;

/// The ℓ_p norm selecting the clustering objective.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Norm {
    Finite(f64),
    Infinity,
}

impl Norm {
    pub const MEDIAN: Norm = Norm::Finite(1.0);
    pub const MEANS: Norm = Norm::Finite(2.0);
    pub const CENTER: Norm = Norm::Infinity;

    pub fn finite(p: f64) -> Result<Norm> {
        if p.is_finite() && p >= 1.0 {
            Ok(Norm::Finite(p))
        } else {
            Err(Error::Domain(format!(
                "norm p must be a finite real >= 1, got {p}"
            )))
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Norm::Finite(_))
    }

    /// `d^p` for finite p; `d` itself for the max norm.
    #[inline]
    pub fn pow(self, d: f64) -> f64 {
        match self {
            Norm::Finite(1.0) => d,
            Norm::Finite(2.0) => d * d,
            Norm::Finite(p) => d.powf(p),
            Norm::Infinity => d,
        }
    }

    /// Inverse of [`Norm::pow`] applied to an aggregated value.
    #[inline]
    pub fn root(self, value: f64) -> f64 {
        match self {
            Norm::Finite(1.0) => value,
            Norm::Finite(2.0) => value.sqrt(),
            Norm::Finite(p) => value.powf(1.0 / p),
            Norm::Infinity => value,
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::Finite(p) => write!(f, "{p}"),
            Norm::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Norm> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "inf" | "infinity" | "∞" | "max" => Ok(Norm::Infinity),
            _ => {
                let p: f64 = t
                    .parse()
                    .map_err(|_| Error::Domain(format!("cannot parse norm {s:?}")))?;
                Norm::finite(p)
            }
        }
    }
}

impl Serialize for Norm {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Norm::Finite(p) if p.fract() == 0.0 => serializer.serialize_i64(*p as i64),
            Norm::Finite(p) => serializer.serialize_f64(*p),
            Norm::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Norm {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Norm, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Float(f64),
            Text(String),
        }
        let parsed = match Raw::deserialize(deserializer)? {
            Raw::Int(p) => Norm::finite(p as f64),
            Raw::Float(p) => Norm::finite(p),
            Raw::Text(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

/// The metric the points live in.
#[derive(Clone, Debug)]
pub enum MetricSpace {
    /// Row-major coordinates, `dim` reals per point, Euclidean distance.
    Euclidean { dim: usize, coords: Vec<f64> },
    /// Explicit symmetric `size × size` distance matrix.
    Matrix { size: usize, dist: Vec<f64> },
}

impl MetricSpace {
    pub fn from_points(points: &[Vec<f64>]) -> Result<MetricSpace> {
        let dim = points.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::InvalidInstance(
                "points need at least one coordinate".into(),
            ));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidInstance(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if let Some(bad) = p.iter().find(|x| !x.is_finite()) {
                return Err(Error::InvalidInstance(format!(
                    "point {i} has non-finite coordinate {bad}"
                )));
            }
            coords.extend_from_slice(p);
        }
        Ok(MetricSpace::Euclidean { dim, coords })
    }

    pub fn from_matrix(rows: &[Vec<f64>]) -> Result<MetricSpace> {
        let size = rows.len();
        let mut dist = Vec::with_capacity(size * size);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(Error::InvalidInstance(format!(
                    "distance row {i} has {} entries, expected {size}",
                    row.len()
                )));
            }
            dist.extend_from_slice(row);
        }
        Ok(MetricSpace::Matrix { size, dist })
    }

    pub fn len(&self) -> usize {
        match self {
            MetricSpace::Euclidean { dim, coords } => coords.len() / dim,
            MetricSpace::Matrix { size, .. } => *size,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self, MetricSpace::Euclidean { .. })
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            MetricSpace::Euclidean { dim, .. } => Some(*dim),
            MetricSpace::Matrix { .. } => None,
        }
    }

    pub fn point(&self, id: usize) -> Option<&[f64]> {
        match self {
            MetricSpace::Euclidean { dim, coords } => Some(&coords[id * dim..(id + 1) * dim]),
            MetricSpace::Matrix { .. } => None,
        }
    }

    #[inline]
    pub fn dist(&self, a: usize, b: usize) -> f64 {
        match self {
            MetricSpace::Euclidean { dim, coords } => {
                let (pa, pb) = (
                    &coords[a * dim..(a + 1) * dim],
                    &coords[b * dim..(b + 1) * dim],
                );
                squared_euclidean(pa, pb).sqrt()
            }
            MetricSpace::Matrix { size, dist } => dist[a * size + b],
        }
    }

    /// Checks nonnegativity, symmetry and the zero diagonal always, and the
    /// triangle inequality when `triangle` is set.
    pub fn validate(&self, triangle: bool) -> Result<()> {
        let MetricSpace::Matrix { size, dist } = self else {
            return Ok(());
        };
        let n = *size;
        let at = |i: usize, j: usize| dist[i * n + j];
        for i in 0..n {
            if at(i, i).abs() > METRIC_TOL {
                return Err(Error::InvalidInstance(format!(
                    "d({i},{i}) = {} is not zero",
                    at(i, i)
                )));
            }
            for j in 0..n {
                let d = at(i, j);
                if !d.is_finite() || d < 0.0 {
                    return Err(Error::InvalidInstance(format!(
                        "d({i},{j}) = {d} is not a nonnegative real"
                    )));
                }
                if (d - at(j, i)).abs() > METRIC_TOL {
                    return Err(Error::InvalidInstance(format!(
                        "distance matrix not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        if triangle {
            for i in 0..n {
                for j in 0..n {
                    for m in 0..n {
                        if at(i, j) > at(i, m) + at(m, j) + METRIC_TOL {
                            return Err(Error::InvalidInstance(format!(
                                "triangle inequality fails: d({i},{j}) > d({i},{m}) + d({m},{j})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn squared_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// A protected group: a named subset of client indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub name: String,
    pub members: Vec<usize>,
}

impl Group {
    pub fn new(name: impl Into<String>, members: impl IntoIterator<Item = usize>) -> Group {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        Group {
            name: name.into(),
            members,
        }
    }
}

/// A `(k, p)`-clustering instance with protected groups.
#[derive(Clone, Debug)]
pub struct ClusteringInstance {
    space: MetricSpace,
    clients: Vec<usize>,
    facilities: Vec<usize>,
    groups: Vec<Group>,
    memberships: Vec<Vec<usize>>,
    k: usize,
    norm: Norm,
}

impl ClusteringInstance {
    /// Builds an instance, validating explicit metrics with the default
    /// policy (full triangle check only up to [`DEFAULT_VALIDATE_LIMIT`] points).
    pub fn new(
        space: MetricSpace,
        clients: Vec<usize>,
        facilities: Vec<usize>,
        groups: Vec<Group>,
        k: usize,
        norm: Norm,
    ) -> Result<ClusteringInstance> {
        let triangle = space.len() <= DEFAULT_VALIDATE_LIMIT;
        Self::with_validation(space, clients, facilities, groups, k, norm, triangle)
    }

    pub fn with_validation(
        space: MetricSpace,
        clients: Vec<usize>,
        facilities: Vec<usize>,
        groups: Vec<Group>,
        k: usize,
        norm: Norm,
        validate_triangle: bool,
    ) -> Result<ClusteringInstance> {
        let size = space.len();
        if clients.is_empty() {
            return Err(Error::InvalidInstance("no clients".into()));
        }
        if facilities.is_empty() {
            return Err(Error::InvalidInstance("no facilities".into()));
        }
        if let Some(bad) = clients.iter().chain(&facilities).find(|&&id| id >= size) {
            return Err(Error::InvalidInstance(format!(
                "point id {bad} outside metric of size {size}"
            )));
        }
        if k == 0 || k > facilities.len() {
            return Err(Error::InvalidInstance(format!(
                "k = {k} must be in 1..={}",
                facilities.len()
            )));
        }
        if groups.is_empty() {
            return Err(Error::InvalidInstance(
                "at least one protected group is required".into(),
            ));
        }
        let n = clients.len();
        let mut memberships = vec![Vec::new(); n];
        for (gi, g) in groups.iter().enumerate() {
            if g.members.is_empty() {
                return Err(Error::InvalidInstance(format!(
                    "group {:?} is empty",
                    g.name
                )));
            }
            for &v in &g.members {
                if v >= n {
                    return Err(Error::InvalidInstance(format!(
                        "group {:?} contains client {v} but there are only {n} clients",
                        g.name
                    )));
                }
                if memberships[v].last() == Some(&gi) {
                    return Err(Error::InvalidInstance(format!(
                        "group {:?} lists client {v} twice",
                        g.name
                    )));
                }
                memberships[v].push(gi);
            }
        }
        space.validate(validate_triangle)?;
        Ok(ClusteringInstance {
            space,
            clients,
            facilities,
            groups,
            memberships,
            k,
            norm,
        })
    }

    /// Euclidean instance with `F = C`.
    pub fn from_points(
        points: &[Vec<f64>],
        groups: Vec<Group>,
        k: usize,
        norm: Norm,
    ) -> Result<Self> {
        let space = MetricSpace::from_points(points)?;
        let ids: Vec<usize> = (0..space.len()).collect();
        Self::new(space, ids.clone(), ids, groups, k, norm)
    }

    /// Euclidean instance with separate client and facility locations.
    pub fn from_points_and_facilities(
        clients: &[Vec<f64>],
        facilities: &[Vec<f64>],
        groups: Vec<Group>,
        k: usize,
        norm: Norm,
    ) -> Result<Self> {
        let all: Vec<Vec<f64>> = clients.iter().chain(facilities).cloned().collect();
        let space = MetricSpace::from_points(&all)?;
        let n = clients.len();
        Self::new(
            space,
            (0..n).collect(),
            (n..all.len()).collect(),
            groups,
            k,
            norm,
        )
    }

    /// Explicit-metric instance with `F = C`.
    pub fn from_matrix(
        rows: &[Vec<f64>],
        groups: Vec<Group>,
        k: usize,
        norm: Norm,
    ) -> Result<Self> {
        let space = MetricSpace::from_matrix(rows)?;
        let ids: Vec<usize> = (0..space.len()).collect();
        Self::new(space, ids.clone(), ids, groups, k, norm)
    }

    /// Same instance with a different `k`.
    pub fn with_k(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.facilities.len() {
            return Err(Error::InvalidInstance(format!(
                "k = {k} must be in 1..={}",
                self.facilities.len()
            )));
        }
        Ok(ClusteringInstance { k, ..self.clone() })
    }

    /// Same instance under a different norm.
    pub fn with_norm(&self, norm: Norm) -> Self {
        ClusteringInstance {
            norm,
            ..self.clone()
        }
    }

    pub fn num_clients(&self) -> usize {
        self.clients.len()
    }

    pub fn num_facilities(&self) -> usize {
        self.facilities.len()
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn norm(&self) -> Norm {
        self.norm
    }

    pub fn space(&self) -> &MetricSpace {
        &self.space
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn group(&self, i: usize) -> &Group {
        &self.groups[i]
    }

    /// Indices of the groups containing client `v`.
    pub fn memberships(&self, v: usize) -> &[usize] {
        &self.memberships[v]
    }

    /// Point id of client `v` in the metric space.
    pub fn client_point(&self, v: usize) -> usize {
        self.clients[v]
    }

    /// Point id of facility `f` in the metric space.
    pub fn facility_point(&self, f: usize) -> usize {
        self.facilities[f]
    }

    /// Maximum number of groups any client belongs to.
    pub fn max_groups_per_client(&self) -> usize {
        self.memberships.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Dataset-level ratio `r_i = |C_i| / |C|` for each group.
    pub fn group_ratios(&self) -> Vec<f64> {
        let n = self.num_clients() as f64;
        self.groups
            .iter()
            .map(|g| g.members.len() as f64 / n)
            .collect()
    }

    /// Distance from client `v` to facility `f`.
    #[inline]
    pub fn dist(&self, v: usize, f: usize) -> f64 {
        self.space.dist(self.clients[v], self.facilities[f])
    }

    /// Distance between two facilities.
    #[inline]
    pub fn facility_dist(&self, f: usize, g: usize) -> f64 {
        self.space.dist(self.facilities[f], self.facilities[g])
    }

    /// Facility indices sitting on the same point as some client.
    pub fn facilities_on_clients(&self) -> Vec<usize> {
        let mut client_points = self.clients.clone();
        client_points.sort_unstable();
        (0..self.facilities.len())
            .filter(|&f| client_points.binary_search(&self.facilities[f]).is_ok())
            .collect()
    }

    /// Largest client-facility distance.
    pub fn max_client_facility_distance(&self) -> f64 {
        let mut best: f64 = 0.0;
        for v in 0..self.num_clients() {
            for f in 0..self.num_facilities() {
                best = best.max(self.dist(v, f));
            }
        }
        best
    }

    /// Nearest facility of `candidates` to client `v`; ties go to the lowest
    /// facility index.
    pub fn nearest_of(&self, v: usize, candidates: &[usize]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for &f in candidates {
            let d = self.dist(v, f);
            match best {
                Some((bf, bd)) if d > bd || (d == bd && f > bf) => {}
                _ => best = Some((f, d)),
            }
        }
        best
    }
}

/// Per-group fairness bounds: `β_i ≤ |C_i(f)| / |C(f)| ≤ α_i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FairnessProfile {
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl FairnessProfile {
    pub fn new(alpha: Vec<f64>, beta: Vec<f64>) -> Result<FairnessProfile> {
        if alpha.len() != beta.len() {
            return Err(Error::InvalidProfile(format!(
                "alpha has {} entries but beta has {}",
                alpha.len(),
                beta.len()
            )));
        }
        for (i, (&a, &b)) in alpha.iter().zip(&beta).enumerate() {
            if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
                return Err(Error::InvalidProfile(format!(
                    "group {i}: alpha={a}, beta={b} outside [0,1]"
                )));
            }
            if b > a {
                return Err(Error::InvalidProfile(format!(
                    "group {i}: beta={b} exceeds alpha={a}"
                )));
            }
        }
        Ok(FairnessProfile { alpha, beta })
    }

    /// `α = 1, β = 0` for every group: no fairness constraint at all.
    pub fn vacuous(groups: usize) -> FairnessProfile {
        FairnessProfile {
            alpha: vec![1.0; groups],
            beta: vec![0.0; groups],
        }
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn is_vacuous(&self) -> bool {
        self.alpha.iter().all(|&a| a >= 1.0) && self.beta.iter().all(|&b| b <= 0.0)
    }

    pub(crate) fn check_against(&self, instance: &ClusteringInstance) -> Result<()> {
        if self.len() != instance.num_groups() {
            return Err(Error::InvalidProfile(format!(
                "profile covers {} groups but the instance has {}",
                self.len(),
                instance.num_groups()
            )));
        }
        Ok(())
    }

    /// First group whose dataset ratio lies outside `[β_i, α_i]`. When one
    /// exists no fractional fair assignment exists for any set of centers.
    pub fn violated_aggregate(&self, instance: &ClusteringInstance) -> Option<(usize, f64)> {
        instance
            .group_ratios()
            .into_iter()
            .enumerate()
            .find(|&(i, r)| {
                r > self.alpha[i] + metrics::FAIR_TOL || r < self.beta[i] - metrics::FAIR_TOL
            })
    }
}

/// A total map from clients to opened facilities, with its ℓ_p cost.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Assignment {
    opened: Vec<usize>,
    phi: Vec<usize>,
    cost: f64,
}

impl Assignment {
    /// Validates `phi` against `opened` and computes the cost under the
    /// instance norm. `opened` is sorted and deduplicated.
    pub fn new(
        instance: &ClusteringInstance,
        mut opened: Vec<usize>,
        phi: Vec<usize>,
    ) -> Result<Assignment> {
        opened.sort_unstable();
        opened.dedup();
        if let Some(&f) = opened.iter().find(|&&f| f >= instance.num_facilities()) {
            return Err(Error::Domain(format!("opened facility {f} does not exist")));
        }
        if opened.len() > instance.k() {
            return Err(Error::Domain(format!(
                "{} facilities opened but k = {}",
                opened.len(),
                instance.k()
            )));
        }
        if phi.len() != instance.num_clients() {
            return Err(Error::Domain(format!(
                "assignment covers {} clients, instance has {}",
                phi.len(),
                instance.num_clients()
            )));
        }
        let cost = metrics::lp_norm_cost(instance, &opened, &phi, instance.norm())?;
        Ok(Assignment { opened, phi, cost })
    }

    /// Every client goes to its nearest facility in `opened`, lowest index on ties.
    pub fn nearest(instance: &ClusteringInstance, opened: Vec<usize>) -> Result<Assignment> {
        let mut sorted = opened;
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.is_empty() {
            return Err(Error::Domain("no facility opened".into()));
        }
        let phi = (0..instance.num_clients())
            .map(|v| instance.nearest_of(v, &sorted).map(|(f, _)| f).unwrap())
            .collect();
        Assignment::new(instance, sorted, phi)
    }

    pub fn opened(&self) -> &[usize] {
        &self.opened
    }

    pub fn phi(&self) -> &[usize] {
        &self.phi
    }

    pub fn facility_of(&self, v: usize) -> usize {
        self.phi[v]
    }

    /// ℓ_p cost under the instance norm at construction time.
    pub fn cost(&self) -> f64 {
        self.cost
    }

    /// Cluster sizes indexed like [`Assignment::opened`].
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.opened.len()];
        for &f in &self.phi {
            let slot = self.opened.binary_search(&f).expect("phi maps into opened");
            sizes[slot] += 1;
        }
        sizes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(points: &[f64]) -> Vec<Vec<f64>> {
        points.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn norm_parsing_and_display() {
        assert_eq!("inf".parse::<Norm>().unwrap(), Norm::Infinity);
        assert_eq!("2".parse::<Norm>().unwrap(), Norm::Finite(2.0));
        assert!("0.5".parse::<Norm>().is_err());
        assert_eq!(Norm::Finite(1.0).to_string(), "1");
        assert_eq!(Norm::Infinity.to_string(), "inf");
    }

    #[test]
    fn group_subset_and_nonempty_enforced() {
        let pts = line(&[0.0, 1.0, 2.0]);
        let bad =
            ClusteringInstance::from_points(&pts, vec![Group::new("g", [0, 7])], 1, Norm::MEDIAN);
        assert!(matches!(bad, Err(Error::InvalidInstance(_))));
        let empty =
            ClusteringInstance::from_points(&pts, vec![Group::new("g", [])], 1, Norm::MEDIAN);
        assert!(matches!(empty, Err(Error::InvalidInstance(_))));
    }

    #[test]
    fn k_bounds_checked() {
        let pts = line(&[0.0, 1.0]);
        let g = vec![Group::new("all", [0, 1])];
        assert!(ClusteringInstance::from_points(&pts, g.clone(), 3, Norm::MEDIAN).is_err());
        assert!(ClusteringInstance::from_points(&pts, g, 0, Norm::MEDIAN).is_err());
    }

    #[test]
    fn max_groups_per_client_counts_overlap() {
        let pts = line(&[0.0, 1.0, 2.0, 3.0]);
        let groups = vec![
            Group::new("a", [0, 1]),
            Group::new("b", [2, 3]),
            Group::new("x", [0, 2]),
            Group::new("y", [1, 3]),
        ];
        let inst = ClusteringInstance::from_points(&pts, groups, 2, Norm::MEDIAN).unwrap();
        assert_eq!(inst.max_groups_per_client(), 2);
        assert_eq!(inst.memberships(2), &[1, 2]);
    }

    #[test]
    fn explicit_metric_validation() {
        let ok = vec![
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ];
        let g = vec![Group::new("all", [0, 1, 2])];
        assert!(ClusteringInstance::from_matrix(&ok, g.clone(), 1, Norm::MEDIAN).is_ok());

        let asym = vec![
            vec![0.0, 1.0, 2.0],
            vec![1.5, 0.0, 1.0],
            vec![2.0, 1.0, 0.0],
        ];
        assert!(ClusteringInstance::from_matrix(&asym, g.clone(), 1, Norm::MEDIAN).is_err());

        let no_triangle = vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0],
        ];
        assert!(ClusteringInstance::from_matrix(&no_triangle, g.clone(), 1, Norm::MEDIAN).is_err());
        let space = MetricSpace::from_matrix(&no_triangle).unwrap();
        assert!(ClusteringInstance::with_validation(
            space,
            vec![0, 1, 2],
            vec![0, 1, 2],
            g,
            1,
            Norm::MEDIAN,
            false
        )
        .is_ok());
    }

    #[test]
    fn profile_rejects_beta_above_alpha() {
        assert!(FairnessProfile::new(vec![0.4], vec![0.5]).is_err());
        assert!(FairnessProfile::new(vec![1.2], vec![0.5]).is_err());
        assert!(FairnessProfile::new(vec![0.5], vec![0.5]).is_ok());
    }

    #[test]
    fn nearest_assignment_breaks_ties_by_lowest_index() {
        let pts = line(&[0.0, 1.0, 2.0]);
        let inst = ClusteringInstance::from_points(
            &pts,
            vec![Group::new("all", [0, 1, 2])],
            2,
            Norm::MEDIAN,
        )
        .unwrap();
        let a = Assignment::nearest(&inst, vec![2, 0]).unwrap();
        assert_eq!(a.opened(), &[0, 2]);
        // client 1 is equidistant to 0 and 2
        assert_eq!(a.phi(), &[0, 0, 2]);
        assert_eq!(a.cost(), 1.0);
    }

    #[test]
    fn separate_facilities() {
        let clients = line(&[0.0, 4.0]);
        let facilities = line(&[1.0, 3.0, 10.0]);
        let inst = ClusteringInstance::from_points_and_facilities(
            &clients,
            &facilities,
            vec![Group::new("all", [0, 1])],
            2,
            Norm::MEDIAN,
        )
        .unwrap();
        assert_eq!(inst.num_facilities(), 3);
        assert_eq!(inst.dist(1, 1), 1.0);
        assert_eq!(inst.facility_dist(0, 2), 9.0);
        assert!(inst.facilities_on_clients().is_empty());
    }
}
