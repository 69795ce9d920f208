//! Fair assignment on fixed centers: the fairness LP, its iterative rounding,
//! the bottleneck search for p = ∞, and the full two-step pipeline.

use std::time::Instant;

use log::{debug, info};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{Assignment, ClusteringInstance, FairnessProfile, Norm};
use crate::lp::{solve_lp, LpModel, LpSolution, LpStatus, Relation, INTEGRALITY_TOL};
use crate::metrics::{additive_violation, FairnessReport, PhaseTimings};
use crate::vanilla::{self, SolverId, VanillaSolution};

/// Centers fixed by a vanilla solution together with the fairness bounds.
#[derive(Clone, Debug)]
pub struct FairAssignmentProblem<'a> {
    instance: &'a ClusteringInstance,
    opened: Vec<usize>,
    profile: &'a FairnessProfile,
}

impl<'a> FairAssignmentProblem<'a> {
    pub fn new(
        instance: &'a ClusteringInstance,
        opened: &[usize],
        profile: &'a FairnessProfile,
    ) -> Result<FairAssignmentProblem<'a>> {
        let mut opened = opened.to_vec();
        opened.sort_unstable();
        opened.dedup();
        if opened.is_empty() {
            return Err(Error::Domain("no opened facility".into()));
        }
        if let Some(&f) = opened.iter().find(|&&f| f >= instance.num_facilities()) {
            return Err(Error::Domain(format!("opened facility {f} does not exist")));
        }
        profile.check_against(instance)?;
        Ok(FairAssignmentProblem {
            instance,
            opened,
            profile,
        })
    }

    pub fn instance(&self) -> &'a ClusteringInstance {
        self.instance
    }

    pub fn opened(&self) -> &[usize] {
        &self.opened
    }

    pub fn profile(&self) -> &'a FairnessProfile {
        self.profile
    }

    pub fn norm(&self) -> Norm {
        self.instance.norm()
    }

    /// Whether no fairness row survives: every `α_i ≥ 1` and `β_i ≤ 0`.
    pub fn is_vacuous(&self) -> bool {
        self.profile.is_vacuous()
    }

    fn infeasible(&self, context: &str) -> Error {
        match self.profile.violated_aggregate(self.instance) {
            Some((i, r)) => Error::Infeasible(format!(
                "group {:?} makes up {r:.6} of all clients, outside [{}, {}]",
                self.instance.group(i).name,
                self.profile.beta()[i],
                self.profile.alpha()[i]
            )),
            None => Error::Infeasible(context.to_string()),
        }
    }
}

/// The fairness LP over client/center pairs, with its variable layout.
#[derive(Clone, Debug)]
pub struct FairLp {
    pub model: LpModel,
    /// `(client, position in opened)` for every variable, in variable order.
    pub pairs: Vec<(usize, usize)>,
    /// Multiplier turning model objective values back into `Σ d^p` units.
    pub scale: f64,
}

impl FairLp {
    fn cost(&self, var: usize) -> f64 {
        self.model.objective()[var]
    }
}

fn membership_table(instance: &ClusteringInstance) -> Vec<Vec<bool>> {
    (0..instance.num_clients())
        .map(|v| {
            let mut row = vec![false; instance.num_groups()];
            for &i in instance.memberships(v) {
                row[i] = true;
            }
            row
        })
        .collect()
}

/// Adds the assignment rows and the per-(center, group) fairness rows.
/// Rows made vacuous by `α_i ≥ 1` or `β_i ≤ 0` are left out.
fn add_fair_rows(
    problem: &FairAssignmentProblem,
    model: &mut LpModel,
    pairs: &[(usize, usize)],
) -> Result<()> {
    let instance = problem.instance;
    let n = instance.num_clients();
    let m = problem.opened.len();
    let member = membership_table(instance);
    let mut by_client: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut by_center: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m];
    for (j, &(v, s)) in pairs.iter().enumerate() {
        by_client[v].push((j, 1.0));
        by_center[s].push((j, v));
    }
    for terms in by_client {
        model.add_constraint(terms, Relation::Eq, 1.0)?;
    }
    let alpha = problem.profile.alpha();
    let beta = problem.profile.beta();
    for column in &by_center {
        for i in 0..instance.num_groups() {
            for (bound, relation, skip) in [
                (alpha[i], Relation::Le, alpha[i] >= 1.0),
                (beta[i], Relation::Ge, beta[i] <= 0.0),
            ] {
                if skip {
                    continue;
                }
                let terms: Vec<(usize, f64)> = column
                    .iter()
                    .map(|&(j, v)| (j, if member[v][i] { 1.0 } else { 0.0 } - bound))
                    .filter(|&(_, a)| a != 0.0)
                    .collect();
                if !terms.is_empty() {
                    model.add_constraint(terms, relation, 0.0)?;
                }
            }
        }
    }
    Ok(())
}

/// The fairness LP for finite `p`: minimize `Σ d(v,f)^p x_{v,f}` subject to
/// the fairness rows per (center, group) and one assignment row per client.
/// Distances are divided by the largest one before being raised to `p`.
pub fn build_fair_lp(problem: &FairAssignmentProblem) -> Result<FairLp> {
    let norm = problem.norm();
    if !norm.is_finite() {
        return Err(Error::Unsupported(
            "the cost LP needs finite p; use the feasibility LP".into(),
        ));
    }
    let instance = problem.instance;
    let unit = problem
        .opened
        .iter()
        .flat_map(|&f| (0..instance.num_clients()).map(move |v| instance.dist(v, f)))
        .fold(0.0, f64::max);
    let unit = if unit > 0.0 { unit } else { 1.0 };
    let mut model = LpModel::new();
    let mut pairs = Vec::with_capacity(instance.num_clients() * problem.opened.len());
    for v in 0..instance.num_clients() {
        for (s, &f) in problem.opened.iter().enumerate() {
            model.add_var(norm.pow(instance.dist(v, f) / unit), 0.0, 1.0);
            pairs.push((v, s));
        }
    }
    add_fair_rows(problem, &mut model, &pairs)?;
    Ok(FairLp {
        model,
        pairs,
        scale: norm.pow(unit),
    })
}

/// Zero-objective fairness LP with variables only for pairs at distance at
/// most `radius`.
pub fn build_fair_feasibility_lp(problem: &FairAssignmentProblem, radius: f64) -> Result<FairLp> {
    let instance = problem.instance;
    let mut model = LpModel::new();
    let mut pairs = Vec::new();
    for v in 0..instance.num_clients() {
        for (s, &f) in problem.opened.iter().enumerate() {
            if instance.dist(v, f) <= radius {
                model.add_var(0.0, 0.0, 1.0);
                pairs.push((v, s));
            }
        }
    }
    add_fair_rows(problem, &mut model, &pairs)?;
    Ok(FairLp {
        model,
        pairs,
        scale: 1.0,
    })
}

/// Result of rounding a fractional fair assignment.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct RoundingOutcome {
    pub assignment: Assignment,
    /// Additive violation of the rounded assignment.
    pub violation: f64,
    /// Passes of the solve/fix/drop loop.
    pub iterations: usize,
    /// LP solves inside the loop.
    pub lp_solves: usize,
    /// Objective of the starting LP solution, in `Σ d^p` units.
    pub lp_objective: f64,
    /// Objective after each pass (fixed cost plus residual LP), same units.
    pub objective_history: Vec<f64>,
    /// Fractional load `Σ_v x_{v,f}` of each center in the starting solution.
    pub initial_loads: Vec<f64>,
    /// Fractional load `Σ_{v∈C_i} x_{v,f}`, indexed `[center][group]`.
    pub initial_group_loads: Vec<Vec<f64>>,
    /// Strictly fractional variables in the starting solution.
    pub initial_fractional: usize,
}

/// Bounds of one residual load row; `None` once dropped.
type RowBounds = Option<(f64, f64)>;

fn floor_ceil(t: f64) -> (f64, f64) {
    ((t + INTEGRALITY_TOL).floor(), (t - INTEGRALITY_TOL).ceil())
}

/// Iterative rounding of a basic LP solution into an integral assignment.
///
/// Integral ones are fixed first. The residual problem keeps the positive
/// variables and replaces the fairness rows by `⌊T⌋ ≤ load ≤ ⌈T⌉` rows on the
/// residual fractional loads of every center and every (center, group). Each
/// pass re-solves at a vertex, deletes zeros, fixes ones (lowering the bounds
/// they touch by one), then drops (center, group) rows and afterwards center
/// rows whose fractional support is at most `2(Δ+1)`.
pub fn iterative_round(
    problem: &FairAssignmentProblem,
    lp: &FairLp,
    solution: &LpSolution,
) -> Result<RoundingOutcome> {
    if solution.status != LpStatus::Optimal {
        return Err(Error::Domain(format!(
            "cannot round a {:?} LP solution",
            solution.status
        )));
    }
    if solution.values.len() != lp.pairs.len() {
        return Err(Error::Domain("LP solution does not match the model".into()));
    }
    let instance = problem.instance;
    let n = instance.num_clients();
    let m = problem.opened.len();
    let groups = instance.num_groups();
    let threshold = 2 * (instance.max_groups_per_client() + 1);
    let member = membership_table(instance);

    let mut initial_loads = vec![0.0; m];
    let mut initial_group_loads = vec![vec![0.0; groups]; m];
    for (&(v, s), &x) in lp.pairs.iter().zip(&solution.values) {
        initial_loads[s] += x;
        for &i in instance.memberships(v) {
            initial_group_loads[s][i] += x;
        }
    }

    let mut fixed: Vec<Option<usize>> = vec![None; n];
    let mut fixed_cost = 0.0;
    for (j, (&(v, s), &x)) in lp.pairs.iter().zip(&solution.values).enumerate() {
        if x >= 1.0 - INTEGRALITY_TOL && fixed[v].is_none() {
            fixed[v] = Some(s);
            fixed_cost += lp.cost(j);
        }
    }

    // surviving variables: (pair index, value from the last solve)
    let mut active: Vec<(usize, f64)> = lp
        .pairs
        .iter()
        .zip(&solution.values)
        .enumerate()
        .filter(|&(_, (&(v, _), &x))| fixed[v].is_none() && x > INTEGRALITY_TOL)
        .map(|(j, (_, &x))| (j, x))
        .collect();

    let mut load = vec![0.0; m];
    let mut group_load = vec![vec![0.0; groups]; m];
    for &(j, x) in &active {
        let (v, s) = lp.pairs[j];
        load[s] += x;
        for &i in instance.memberships(v) {
            group_load[s][i] += x;
        }
    }
    let mut center_rows: Vec<RowBounds> = load.iter().map(|&t| Some(floor_ceil(t))).collect();
    let mut group_rows: Vec<Vec<RowBounds>> = group_load
        .iter()
        .map(|row| row.iter().map(|&t| Some(floor_ceil(t))).collect())
        .collect();

    let lp_objective = solution.objective * lp.scale;
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut lp_solves = 0;
    let max_passes = lp.model.num_vars() + lp.model.num_constraints() + 1;

    while fixed.iter().any(Option::is_none) {
        iterations += 1;
        if iterations > max_passes {
            return Err(Error::Solver(format!(
                "rounding exceeded {max_passes} passes"
            )));
        }

        let mut model = LpModel::new();
        let mut by_client: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        let mut by_center: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        let mut by_group: Vec<Vec<Vec<(usize, f64)>>> = vec![vec![Vec::new(); groups]; m];
        for &(j, _) in &active {
            let (v, s) = lp.pairs[j];
            let var = model.add_var(lp.cost(j), 0.0, 1.0);
            by_client[v].push((var, 1.0));
            by_center[s].push((var, 1.0));
            for &i in instance.memberships(v) {
                by_group[s][i].push((var, 1.0));
            }
        }
        for v in (0..n).filter(|&v| fixed[v].is_none()) {
            model.add_constraint(std::mem::take(&mut by_client[v]), Relation::Eq, 1.0)?;
        }
        let mut active_rows = 0;
        for s in 0..m {
            if let Some((lo, hi)) = center_rows[s] {
                active_rows += 1;
                add_range(&mut model, std::mem::take(&mut by_center[s]), lo, hi)?;
            }
            for i in 0..groups {
                if let Some((lo, hi)) = group_rows[s][i] {
                    active_rows += 1;
                    add_range(&mut model, std::mem::take(&mut by_group[s][i]), lo, hi)?;
                }
            }
        }

        let residual = solve_lp(&model)?;
        lp_solves += 1;
        if residual.status != LpStatus::Optimal {
            return Err(Error::Solver(format!(
                "residual LP became {:?} at pass {iterations}",
                residual.status
            )));
        }
        history.push((fixed_cost + residual.objective) * lp.scale);
        for (slot, &x) in active.iter_mut().zip(&residual.values) {
            slot.1 = x;
        }

        let mut progress = false;
        let before = active.len();
        active.retain(|&(_, x)| x > INTEGRALITY_TOL);
        progress |= active.len() < before;

        for &(j, x) in &active {
            let (v, s) = lp.pairs[j];
            if x >= 1.0 - INTEGRALITY_TOL && fixed[v].is_none() {
                fixed[v] = Some(s);
                fixed_cost += lp.cost(j);
                if let Some((lo, hi)) = center_rows[s].as_mut() {
                    *lo -= 1.0;
                    *hi -= 1.0;
                }
                for &i in instance.memberships(v) {
                    if let Some((lo, hi)) = group_rows[s][i].as_mut() {
                        *lo -= 1.0;
                        *hi -= 1.0;
                    }
                }
                progress = true;
            }
        }
        active.retain(|&(j, _)| fixed[lp.pairs[j].0].is_none());

        let mut center_support = vec![0usize; m];
        let mut group_support = vec![vec![0usize; groups]; m];
        for &(j, _) in &active {
            let (v, s) = lp.pairs[j];
            center_support[s] += 1;
            for (i, &inside) in member[v].iter().enumerate() {
                if inside {
                    group_support[s][i] += 1;
                }
            }
        }
        for s in 0..m {
            for i in 0..groups {
                if group_rows[s][i].is_some() && group_support[s][i] <= threshold {
                    group_rows[s][i] = None;
                    progress = true;
                }
            }
        }
        for s in 0..m {
            if center_rows[s].is_some() && center_support[s] <= threshold {
                center_rows[s] = None;
                progress = true;
            }
        }

        debug_assert!((0..n).filter(|&v| fixed[v].is_none()).all(|v| {
            let mass: f64 = active
                .iter()
                .filter(|&&(j, _)| lp.pairs[j].0 == v)
                .map(|&(_, x)| x)
                .sum();
            (mass - 1.0).abs() <= 1e-6
        }));
        debug!(
            "rounding pass {iterations}: {} clients left, {} variables, {active_rows} load rows",
            fixed.iter().filter(|f| f.is_none()).count(),
            active.len()
        );

        if !progress {
            return Err(Error::RoundingStall {
                iteration: iterations,
                active_rows,
                fractional: active
                    .iter()
                    .map(|&(j, x)| (lp.pairs[j].0, problem.opened[lp.pairs[j].1], x))
                    .collect(),
            });
        }
    }

    let phi: Vec<usize> = fixed
        .iter()
        .map(|s| problem.opened[s.expect("every client fixed")])
        .collect();
    let assignment = Assignment::new(instance, problem.opened.clone(), phi)?;
    let violation = additive_violation(instance, problem.profile, &assignment);
    Ok(RoundingOutcome {
        assignment,
        violation,
        iterations,
        lp_solves,
        lp_objective,
        objective_history: history,
        initial_loads,
        initial_group_loads,
        initial_fractional: solution.fractional_count(),
    })
}

fn add_range(model: &mut LpModel, terms: Vec<(usize, f64)>, lo: f64, hi: f64) -> Result<()> {
    if lo == hi {
        model.add_constraint(terms, Relation::Eq, lo)?;
    } else {
        if lo > 0.0 {
            model.add_constraint(terms.clone(), Relation::Ge, lo)?;
        }
        model.add_constraint(terms, Relation::Le, hi)?;
    }
    Ok(())
}

/// Rounding result plus, for p = ∞, the smallest fractionally feasible radius.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct FairAssignmentOutcome {
    pub rounding: RoundingOutcome,
    pub radius: Option<f64>,
    pub lp_ms: f64,
    pub rounding_ms: f64,
}

impl FairAssignmentOutcome {
    pub fn assignment(&self) -> &Assignment {
        &self.rounding.assignment
    }
}

/// Closed-form optimum when no fairness row is present: every client on its
/// nearest center, which is an integral vertex of the LP.
fn vacuous_outcome(problem: &FairAssignmentProblem) -> Result<FairAssignmentOutcome> {
    let instance = problem.instance;
    let assignment = Assignment::nearest(instance, problem.opened.clone())?;
    let m = problem.opened.len();
    let mut initial_loads = vec![0.0; m];
    let mut initial_group_loads = vec![vec![0.0; instance.num_groups()]; m];
    let mut objective = 0.0;
    let mut radius: f64 = 0.0;
    for (v, &f) in assignment.phi().iter().enumerate() {
        let s = problem
            .opened
            .binary_search(&f)
            .expect("assigned to an opened center");
        initial_loads[s] += 1.0;
        for &i in instance.memberships(v) {
            initial_group_loads[s][i] += 1.0;
        }
        let d = instance.dist(v, f);
        objective += problem.norm().pow(d);
        radius = radius.max(d);
    }
    let lp_objective = if problem.norm().is_finite() {
        objective
    } else {
        0.0
    };
    Ok(FairAssignmentOutcome {
        rounding: RoundingOutcome {
            assignment,
            violation: 0.0,
            iterations: 0,
            lp_solves: 0,
            lp_objective,
            objective_history: Vec::new(),
            initial_loads,
            initial_group_loads,
            initial_fractional: 0,
        },
        radius: (!problem.norm().is_finite()).then_some(radius),
        lp_ms: 0.0,
        rounding_ms: 0.0,
    })
}

/// Fair assignment for p = ∞: binary search over the sorted distinct
/// client-center distances for the smallest radius whose feasibility LP has
/// a solution, then rounding of that LP's vertex.
pub fn fair_assign_k_center(problem: &FairAssignmentProblem) -> Result<FairAssignmentOutcome> {
    if problem.norm().is_finite() {
        return Err(Error::Domain("the radius search applies to p = ∞".into()));
    }
    if problem.is_vacuous() {
        return vacuous_outcome(problem);
    }
    if problem
        .profile
        .violated_aggregate(problem.instance)
        .is_some()
    {
        return Err(problem.infeasible(""));
    }
    let instance = problem.instance;
    let started = Instant::now();
    let mut radii: Vec<f64> = problem
        .opened
        .iter()
        .flat_map(|&f| (0..instance.num_clients()).map(move |v| instance.dist(v, f)))
        .collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    // no radius below the farthest nearest-center distance can cover everyone
    let cover = (0..instance.num_clients())
        .map(|v| {
            instance
                .nearest_of(v, &problem.opened)
                .map_or(0.0, |(_, d)| d)
        })
        .fold(0.0, f64::max);
    let first = radii.partition_point(|&g| g < cover);

    let solve_at = |g: f64| -> Result<Option<(FairLp, LpSolution)>> {
        let lp = build_fair_feasibility_lp(problem, g)?;
        let solution = solve_lp(&lp.model)?;
        Ok((solution.status == LpStatus::Optimal).then_some((lp, solution)))
    };
    let (mut lo, mut hi) = (first, radii.len() - 1);
    let mut best = match solve_at(radii[hi])? {
        Some(found) => found,
        None => return Err(problem.infeasible("no radius admits a fractional fair assignment")),
    };
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match solve_at(radii[mid])? {
            Some(found) => {
                hi = mid;
                best = found;
            }
            None => lo = mid + 1,
        }
    }
    let radius = radii[hi];
    let lp_ms = started.elapsed().as_secs_f64() * 1e3;
    debug!(
        "bottleneck radius {radius} at index {hi} of {}",
        radii.len()
    );

    let started = Instant::now();
    let rounding = iterative_round(problem, &best.0, &best.1)?;
    Ok(FairAssignmentOutcome {
        rounding,
        radius: Some(radius),
        lp_ms,
        rounding_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

/// Fair assignment for any norm: the cost LP and its rounding for finite p,
/// the radius search for p = ∞.
pub fn solve_fair_assignment(problem: &FairAssignmentProblem) -> Result<FairAssignmentOutcome> {
    if !problem.norm().is_finite() {
        return fair_assign_k_center(problem);
    }
    if problem.is_vacuous() {
        return vacuous_outcome(problem);
    }
    let started = Instant::now();
    let lp = build_fair_lp(problem)?;
    let solution = solve_lp(&lp.model)?;
    match solution.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(problem.infeasible("the fairness LP has no solution")),
        LpStatus::Unbounded => return Err(Error::Solver("the fairness LP is unbounded".into())),
    }
    let lp_ms = started.elapsed().as_secs_f64() * 1e3;
    let started = Instant::now();
    let rounding = iterative_round(problem, &lp, &solution)?;
    Ok(FairAssignmentOutcome {
        rounding,
        radius: None,
        lp_ms,
        rounding_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

/// Output of the two-step pipeline.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct FairSolution {
    pub vanilla: VanillaSolution,
    pub fair: FairAssignmentOutcome,
}

impl FairSolution {
    pub fn assignment(&self) -> &Assignment {
        self.fair.assignment()
    }
}

/// Vanilla clustering to pick the centers, then a fair assignment to them.
pub fn fair_clustering(
    instance: &ClusteringInstance,
    profile: &FairnessProfile,
    solver: SolverId,
    seed: u64,
) -> Result<(FairSolution, FairnessReport)> {
    profile.check_against(instance)?;
    let started = Instant::now();
    let vanilla = vanilla::solve(instance, solver, seed)?;
    let vanilla_ms = started.elapsed().as_secs_f64() * 1e3;
    fair_clustering_from(instance, profile, vanilla, vanilla_ms, started)
}

/// The fair-assignment half of the pipeline on an existing vanilla solution.
pub fn fair_clustering_on(
    instance: &ClusteringInstance,
    profile: &FairnessProfile,
    vanilla: VanillaSolution,
) -> Result<(FairSolution, FairnessReport)> {
    fair_clustering_from(instance, profile, vanilla, 0.0, Instant::now())
}

fn fair_clustering_from(
    instance: &ClusteringInstance,
    profile: &FairnessProfile,
    vanilla: VanillaSolution,
    vanilla_ms: f64,
    started: Instant,
) -> Result<(FairSolution, FairnessReport)> {
    let problem = FairAssignmentProblem::new(instance, vanilla.opened(), profile)?;
    let fair = solve_fair_assignment(&problem)?;
    let timings = PhaseTimings {
        vanilla_ms,
        fair_lp_ms: fair.lp_ms,
        rounding_ms: fair.rounding_ms,
        total_ms: started.elapsed().as_secs_f64() * 1e3,
    };
    let report = FairnessReport::build(
        instance,
        profile,
        fair.assignment(),
        vanilla.cost(),
        timings,
    );
    info!(
        "{} k={} p={}: vanilla {:.6}, fair {:.6}, violation {}",
        vanilla.solver,
        instance.k(),
        instance.norm(),
        vanilla.cost(),
        report.fair_cost,
        report.lambda_max
    );
    Ok((FairSolution { vanilla, fair }, report))
}
