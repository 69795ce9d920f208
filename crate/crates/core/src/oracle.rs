//! Exhaustive optima for small instances and the almost-fair LP lower bound.
//!
//! The searches enumerate assignments depth-first with a simple cost bound.
//! They never call the LP or flow code, so they can check it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Assignment, ClusteringInstance, FairnessProfile, Norm};
use crate::lp::{solve_lp, LpModel, LpStatus, Relation};
use crate::metrics::FAIR_TOL;

/// Default refusal threshold on the estimated number of enumerated states.
pub const DEFAULT_GUARD: u128 = 10_000_000;
/// Default limit on the number of variables of the almost-fair LP.
pub const DEFAULT_AFLP_MAX_VARS: usize = 25_000;

/// Order in which clients and facilities are enumerated. Optima do not
/// depend on it; the alternative exists for cross-checking.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum EnumerationOrder {
    #[default]
    Forward,
    Reverse,
}

/// Optimal costs (ℓ_p norms) with witnesses; fields not computed are `None`.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OracleResult {
    pub opt_vnll: Option<f64>,
    /// `+∞` when no exactly fair assignment exists.
    pub opt_fair: Option<f64>,
    /// Best exactly fair assignment to a fixed center set; `+∞` if none.
    pub opt_asgn: Option<f64>,
    /// Best assignment to the fixed center set with violation at most the
    /// requested slack; `+∞` if none.
    pub opt_asgn_relaxed: Option<f64>,
    /// `+∞` when no clustering meets the lower bound.
    pub opt_lbnd: Option<f64>,
    pub vnll_witness: Option<Assignment>,
    pub fair_witness: Option<Assignment>,
    pub asgn_witness: Option<Assignment>,
    pub asgn_relaxed_witness: Option<Assignment>,
    pub lbnd_witness: Option<Assignment>,
    /// Search nodes visited across all enumerations.
    pub states_visited: u64,
}

impl OracleResult {
    pub fn fair_infeasible(&self) -> bool {
        self.opt_fair == Some(f64::INFINITY)
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1))
}

fn pow_saturating(base: usize, exp: usize) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base as u128))
}

/// Estimated states for enumerating every clustering with at most `k` centers.
pub fn clustering_states(instance: &ClusteringInstance) -> u128 {
    let k = instance.k().min(instance.num_facilities());
    binomial(instance.num_facilities(), k).saturating_mul(pow_saturating(k, instance.num_clients()))
}

fn check_guard(states: u128, guard: u128) -> Result<()> {
    if states > guard {
        return Err(Error::GuardExceeded { states, guard });
    }
    Ok(())
}

#[derive(Clone, Copy)]
enum Accept<'a> {
    Fair {
        profile: &'a FairnessProfile,
        slack: f64,
    },
    /// Every nonempty cluster has at least this many clients.
    AtLeast(usize),
    /// Every allowed facility gets at least this many clients.
    EveryAtLeast(usize),
}

struct Search<'a> {
    instance: &'a ClusteringInstance,
    norm: Norm,
    accept: Accept<'a>,
    clients: Vec<usize>,
    allowed: Vec<usize>,
    max_open: usize,
    /// `weight[v][a]`: d^p (or d for p = ∞) from client v to allowed facility a.
    weight: Vec<Vec<f64>>,
    /// Bound on the remaining cost from position `t` of `clients` onward.
    rest: Vec<f64>,
    choice: Vec<usize>,
    sizes: Vec<usize>,
    group_counts: Vec<Vec<usize>>,
    open: usize,
    best: f64,
    best_choice: Option<Vec<usize>>,
    states: u64,
}

impl<'a> Search<'a> {
    fn new(
        instance: &'a ClusteringInstance,
        allowed: Vec<usize>,
        max_open: usize,
        accept: Accept<'a>,
        order: EnumerationOrder,
    ) -> Search<'a> {
        let norm = instance.norm();
        let n = instance.num_clients();
        let mut clients: Vec<usize> = (0..n).collect();
        let mut allowed = allowed;
        if order == EnumerationOrder::Reverse {
            clients.reverse();
            allowed.reverse();
        }
        let weight: Vec<Vec<f64>> = (0..n)
            .map(|v| {
                allowed
                    .iter()
                    .map(|&f| norm.pow(instance.dist(v, f)))
                    .collect()
            })
            .collect();
        let mut rest = vec![0.0; n + 1];
        for t in (0..n).rev() {
            let cheapest = weight[clients[t]]
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            rest[t] = combine(norm, rest[t + 1], cheapest);
        }
        let a = allowed.len();
        Search {
            instance,
            norm,
            accept,
            clients,
            max_open,
            weight,
            rest,
            choice: vec![usize::MAX; n],
            sizes: vec![0; a],
            group_counts: vec![vec![0; instance.num_groups()]; a],
            allowed,
            open: 0,
            best: f64::INFINITY,
            best_choice: None,
            states: 0,
        }
    }

    fn run(&mut self) {
        self.descend(0, zero(self.norm));
    }

    fn descend(&mut self, t: usize, cost: f64) {
        self.states += 1;
        if combine(self.norm, cost, self.rest[t]) >= self.best {
            return;
        }
        if t == self.clients.len() {
            if self.accepted() {
                self.best = cost;
                self.best_choice = Some(self.choice.clone());
            }
            return;
        }
        let v = self.clients[t];
        for a in 0..self.allowed.len() {
            let opening = self.sizes[a] == 0;
            if opening && self.open == self.max_open {
                continue;
            }
            self.place(v, a, opening, true);
            let next = combine(self.norm, cost, self.weight[v][a]);
            self.descend(t + 1, next);
            self.place(v, a, opening, false);
        }
    }

    fn place(&mut self, v: usize, a: usize, opening: bool, add: bool) {
        if add {
            self.choice[v] = a;
            self.sizes[a] += 1;
            for &i in self.instance.memberships(v) {
                self.group_counts[a][i] += 1;
            }
            if opening {
                self.open += 1;
            }
        } else {
            self.choice[v] = usize::MAX;
            self.sizes[a] -= 1;
            for &i in self.instance.memberships(v) {
                self.group_counts[a][i] -= 1;
            }
            if opening {
                self.open -= 1;
            }
        }
    }

    fn accepted(&self) -> bool {
        match self.accept {
            Accept::Fair { profile, slack } => (0..self.allowed.len())
                .filter(|&a| self.sizes[a] > 0)
                .all(|a| {
                    let size = self.sizes[a] as f64;
                    self.group_counts[a].iter().enumerate().all(|(i, &c)| {
                        let c = c as f64;
                        c - profile.alpha()[i] * size <= slack + FAIR_TOL
                            && profile.beta()[i] * size - c <= slack + FAIR_TOL
                    })
                }),
            Accept::AtLeast(lower) => self.sizes.iter().all(|&s| s == 0 || s >= lower),
            Accept::EveryAtLeast(lower) => self.sizes.iter().all(|&s| s >= lower),
        }
    }

    /// Witness of the best accepted leaf, or `None` if there was none.
    fn witness(&self) -> Result<Option<Assignment>> {
        let Some(choice) = &self.best_choice else {
            return Ok(None);
        };
        let phi: Vec<usize> = choice.iter().map(|&a| self.allowed[a]).collect();
        let mut opened = phi.clone();
        opened.sort_unstable();
        opened.dedup();
        let instance = if opened.len() > self.instance.k() {
            self.instance.with_k(opened.len())?
        } else {
            self.instance.clone()
        };
        Assignment::new(&instance, opened, phi).map(Some)
    }
}

fn zero(_norm: Norm) -> f64 {
    0.0
}

fn combine(norm: Norm, acc: f64, w: f64) -> f64 {
    match norm {
        Norm::Infinity => acc.max(w),
        Norm::Finite(_) => acc + w,
    }
}

fn cost_of(witness: &Option<Assignment>) -> f64 {
    witness.as_ref().map_or(f64::INFINITY, Assignment::cost)
}

/// Best unconstrained clustering: every center set of size `min(k, |F|)`
/// with its nearest assignment.
pub fn brute_force_vanilla(
    instance: &ClusteringInstance,
    guard: u128,
) -> Result<(f64, Assignment)> {
    let m = instance.num_facilities();
    let k = instance.k().min(m);
    check_guard(
        binomial(m, k).saturating_mul(instance.num_clients() as u128),
        guard,
    )?;
    let mut best: Option<Assignment> = None;
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        let candidate = Assignment::nearest(instance, subset.clone())?;
        if best.as_ref().is_none_or(|b| candidate.cost() < b.cost()) {
            best = Some(candidate);
        }
        // next k-combination in lexicographic order
        let mut i = k;
        while i > 0 && subset[i - 1] == m - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        subset[i - 1] += 1;
        for j in i..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
    let best = best.expect("at least one center set");
    Ok((best.cost(), best))
}

/// Optimal vanilla and exactly fair clusterings with at most `k` centers.
pub fn brute_force_fair(
    instance: &ClusteringInstance,
    profile: &FairnessProfile,
    guard: u128,
) -> Result<OracleResult> {
    brute_force_fair_ordered(instance, profile, guard, EnumerationOrder::Forward)
}

pub fn brute_force_fair_ordered(
    instance: &ClusteringInstance,
    profile: &FairnessProfile,
    guard: u128,
    order: EnumerationOrder,
) -> Result<OracleResult> {
    profile.check_against(instance)?;
    check_guard(clustering_states(instance), guard)?;
    let (opt_vnll, vnll) = brute_force_vanilla(instance, guard)?;
    let all: Vec<usize> = (0..instance.num_facilities()).collect();
    let mut search = Search::new(
        instance,
        all,
        instance.k(),
        Accept::Fair {
            profile,
            slack: 0.0,
        },
        order,
    );
    search.run();
    let fair = search.witness()?;
    Ok(OracleResult {
        opt_vnll: Some(opt_vnll),
        opt_fair: Some(cost_of(&fair)),
        vnll_witness: Some(vnll),
        fair_witness: fair,
        states_visited: search.states,
        ..Default::default()
    })
}

/// Best exactly fair assignment to the centers `opened`, and the best one
/// whose additive violation is at most `slack`.
pub fn brute_force_assignment(
    instance: &ClusteringInstance,
    opened: &[usize],
    profile: &FairnessProfile,
    slack: f64,
    guard: u128,
) -> Result<OracleResult> {
    brute_force_assignment_ordered(
        instance,
        opened,
        profile,
        slack,
        guard,
        EnumerationOrder::Forward,
    )
}

pub fn brute_force_assignment_ordered(
    instance: &ClusteringInstance,
    opened: &[usize],
    profile: &FairnessProfile,
    slack: f64,
    guard: u128,
    order: EnumerationOrder,
) -> Result<OracleResult> {
    profile.check_against(instance)?;
    let centers = distinct_centers(instance, opened)?;
    check_guard(pow_saturating(centers.len(), instance.num_clients()), guard)?;
    let max_open = centers.len();
    let mut exact = Search::new(
        instance,
        centers.clone(),
        max_open,
        Accept::Fair {
            profile,
            slack: 0.0,
        },
        order,
    );
    exact.run();
    let mut relaxed = Search::new(
        instance,
        centers,
        max_open,
        Accept::Fair { profile, slack },
        order,
    );
    relaxed.run();
    let asgn = exact.witness()?;
    let asgn_relaxed = relaxed.witness()?;
    Ok(OracleResult {
        opt_asgn: Some(cost_of(&asgn)),
        opt_asgn_relaxed: Some(cost_of(&asgn_relaxed)),
        asgn_witness: asgn,
        asgn_relaxed_witness: asgn_relaxed,
        states_visited: exact.states + relaxed.states,
        ..Default::default()
    })
}

/// Best clustering with at most `k` centers in which every nonempty cluster
/// has at least `lower` clients.
pub fn brute_force_lower_bounded(
    instance: &ClusteringInstance,
    lower: usize,
    guard: u128,
) -> Result<OracleResult> {
    check_guard(clustering_states(instance), guard)?;
    let all: Vec<usize> = (0..instance.num_facilities()).collect();
    let mut search = Search::new(
        instance,
        all,
        instance.k(),
        Accept::AtLeast(lower),
        EnumerationOrder::Forward,
    );
    search.run();
    let lbnd = search.witness()?;
    Ok(OracleResult {
        opt_lbnd: Some(cost_of(&lbnd)),
        lbnd_witness: lbnd,
        states_visited: search.states,
        ..Default::default()
    })
}

/// Best assignment to exactly the centers `centers`, each receiving at least
/// `lower` clients. Returns `Σ d^p` (the maximum distance for p = ∞) and the
/// facility of every client, or `None` when no such assignment exists.
pub fn brute_force_lb_assignment(
    instance: &ClusteringInstance,
    centers: &[usize],
    lower: usize,
    guard: u128,
) -> Result<Option<(f64, Vec<usize>)>> {
    let centers = distinct_centers(instance, centers)?;
    check_guard(pow_saturating(centers.len(), instance.num_clients()), guard)?;
    let max_open = centers.len();
    let mut search = Search::new(
        instance,
        centers,
        max_open,
        Accept::EveryAtLeast(lower),
        EnumerationOrder::Forward,
    );
    search.run();
    Ok(search.best_choice.as_ref().map(|choice| {
        (
            search.best,
            choice.iter().map(|&a| search.allowed[a]).collect(),
        )
    }))
}

fn distinct_centers(instance: &ClusteringInstance, opened: &[usize]) -> Result<Vec<usize>> {
    let mut centers = opened.to_vec();
    centers.sort_unstable();
    centers.dedup();
    if centers.is_empty() {
        return Err(Error::Domain("the center set is empty".into()));
    }
    if let Some(&f) = centers.iter().find(|&&f| f >= instance.num_facilities()) {
        return Err(Error::Domain(format!("facility {f} does not exist")));
    }
    Ok(centers)
}

/// Almost-fair LP: fractional center opening `y_f` and assignment `x_{v,f}`
/// over all facilities, `x_{v,f} ≤ y_f`, `Σ y_f ≤ k`, one unit per client,
/// and fairness rows relaxed by the additive `slack`. Returns the optimum
/// raised to `1/p`, a lower bound on the cost of every clustering whose
/// additive violation is at most `slack`.
pub fn almost_fair_lp(
    instance: &ClusteringInstance,
    profile: &FairnessProfile,
    slack: f64,
) -> Result<f64> {
    almost_fair_lp_guarded(instance, profile, slack, DEFAULT_AFLP_MAX_VARS)
}

pub fn almost_fair_lp_guarded(
    instance: &ClusteringInstance,
    profile: &FairnessProfile,
    slack: f64,
    max_vars: usize,
) -> Result<f64> {
    profile.check_against(instance)?;
    let norm = instance.norm();
    if !norm.is_finite() {
        return Err(Error::Unsupported(
            "the almost-fair LP needs finite p".into(),
        ));
    }
    if slack.is_nan() || slack < 0.0 {
        return Err(Error::Domain(format!(
            "violation slack must be nonnegative, got {slack}"
        )));
    }
    let n = instance.num_clients();
    let m = instance.num_facilities();
    let vars = n * m + m;
    if vars > max_vars {
        return Err(Error::GuardExceeded {
            states: vars as u128,
            guard: max_vars as u128,
        });
    }
    let unit = instance.max_client_facility_distance();
    let unit = if unit > 0.0 { unit } else { 1.0 };

    let mut model = LpModel::new();
    let open: Vec<usize> = (0..m).map(|_| model.add_var(0.0, 0.0, 1.0)).collect();
    let x: Vec<Vec<usize>> = (0..n)
        .map(|v| {
            (0..m)
                .map(|f| model.add_var(norm.pow(instance.dist(v, f) / unit), 0.0, 1.0))
                .collect()
        })
        .collect();
    for row in &x {
        model.add_constraint(row.iter().map(|&j| (j, 1.0)).collect(), Relation::Eq, 1.0)?;
    }
    for f in 0..m {
        for row in &x {
            model.add_constraint(vec![(row[f], 1.0), (open[f], -1.0)], Relation::Le, 0.0)?;
        }
    }
    model.add_constraint(
        open.iter().map(|&j| (j, 1.0)).collect(),
        Relation::Le,
        instance.k() as f64,
    )?;

    let member: Vec<Vec<bool>> = (0..n)
        .map(|v| {
            let mut row = vec![false; instance.num_groups()];
            for &i in instance.memberships(v) {
                row[i] = true;
            }
            row
        })
        .collect();
    for f in 0..m {
        for (i, (&alpha, &beta)) in profile.alpha().iter().zip(profile.beta()).enumerate() {
            let row = |bound: f64| -> Vec<(usize, f64)> {
                x.iter()
                    .zip(&member)
                    .map(|(xv, mv)| (xv[f], if mv[i] { 1.0 } else { 0.0 } - bound))
                    .filter(|&(_, a)| a != 0.0)
                    .collect()
            };
            if alpha < 1.0 {
                model.add_constraint(row(alpha), Relation::Le, slack)?;
            }
            if beta > 0.0 {
                model.add_constraint(row(beta), Relation::Ge, -slack)?;
            }
        }
    }
    let solution = solve_lp(&model)?;
    match solution.status {
        LpStatus::Optimal => Ok(norm.root(solution.objective.max(0.0) * norm.pow(unit))),
        LpStatus::Infeasible => Ok(f64::INFINITY),
        LpStatus::Unbounded => Err(Error::Solver("the almost-fair LP is unbounded".into())),
    }
}
