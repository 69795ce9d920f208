//! Runs the (k, δ) grid of a manifest and writes the report files.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::ingest::{ingest, Dataset};
use crate::error::{Error, Result};
use crate::fair::fair_clustering_on;
use crate::instance::{ClusteringInstance, FairnessProfile};
use crate::lower_bounded::lb_clustering;
use crate::metrics::{cost_ratio, delta_to_profile, ClusterCounts, ClusterSummary, PhaseTimings};
use crate::oracle::{almost_fair_lp_guarded, brute_force_assignment, brute_force_fair};
use crate::vanilla::{self, VanillaSolution};

/// Vanilla solution per k with its runtime; shared by every δ of that k.
type VanillaCache = BTreeMap<usize, std::result::Result<(VanillaSolution, f64), String>>;

/// What a run computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunMode {
    /// The fair pipeline per (k, δ) cell, plus lower-bounded cells when
    /// `flags.lb_mode` is set.
    Fair,
    /// Fair cells with the brute-force oracles forced on.
    Oracle,
    /// Only lower-bounded cells with the given bound.
    LowerBounded(usize),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellSpec {
    pub k: usize,
    /// `None` is the vacuous cell (`α = 1, β = 0`).
    pub delta: Option<f64>,
}

impl CellSpec {
    pub fn label(&self) -> String {
        self.delta
            .map_or_else(|| "vacuous".to_string(), |d| d.to_string())
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct OracleValues {
    pub opt_vnll: f64,
    pub opt_fair: f64,
    /// Best exactly fair assignment to the centers the pipeline used.
    pub opt_asgn: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CellMetrics {
    pub n: usize,
    pub opened: Vec<usize>,
    pub vanilla_cost: f64,
    pub fair_cost: f64,
    pub cost_of_fairness: f64,
    pub lambda_max: f64,
    pub violation_bound: f64,
    pub min_balance: f64,
    /// Fairness LP optimum `Σ d^p x` (finite p).
    pub lp_objective: Option<f64>,
    /// `lp_objective^(1/p)`, or the bottleneck radius for p = ∞.
    pub lp_cost: f64,
    pub rounding_iterations: usize,
    pub lp_solves: usize,
    pub initial_fractional: usize,
    pub aflp_cost: Option<f64>,
    pub oracle: Option<OracleValues>,
    pub largest_clusters: Vec<ClusterSummary>,
    #[serde(rename = "per_cluster_balance")]
    pub clusters: Vec<ClusterSummary>,
    pub timings_ms: PhaseTimings,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CellReport {
    pub k: usize,
    pub delta: Option<f64>,
    pub label: String,
    pub status: &'static str,
    pub error: Option<String>,
    pub seed: u64,
    pub solver_id: String,
    #[serde(flatten)]
    pub metrics: Option<CellMetrics>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct LbMetrics {
    pub opened: Vec<usize>,
    pub lb_cost: f64,
    pub vanilla_cost: f64,
    pub cost_ratio: f64,
    pub candidates: usize,
    pub feasible_candidates: usize,
    pub min_cluster_size: usize,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct LbCellReport {
    pub k: usize,
    pub lower: usize,
    pub status: &'static str,
    pub error: Option<String>,
    #[serde(flatten)]
    pub metrics: Option<LbMetrics>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct GroupSummary {
    pub name: String,
    pub size: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ExperimentReport {
    pub dataset: String,
    pub p: String,
    pub solver_id: String,
    pub seed: u64,
    pub n: usize,
    pub rows_read: usize,
    pub dropped_rows: usize,
    pub max_groups_per_client: usize,
    pub groups: Vec<GroupSummary>,
    pub cells: Vec<CellReport>,
    pub lb_cells: Vec<LbCellReport>,
}

impl ExperimentReport {
    pub fn failed_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.error.is_some()).count()
            + self.lb_cells.iter().filter(|c| c.error.is_some()).count()
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub report: ExperimentReport,
    pub files: Vec<PathBuf>,
}

impl ExperimentOutcome {
    pub fn failed_cells(&self) -> usize {
        self.report.failed_cells()
    }
}

pub fn grid(config: &ExperimentConfig) -> Vec<CellSpec> {
    let mut ks = config.k_values.clone();
    ks.sort_unstable();
    ks.dedup();
    let mut deltas = config.delta_values.clone();
    deltas.sort_by(f64::total_cmp);
    deltas.dedup();
    let mut cells = Vec::new();
    for &k in &ks {
        for &d in &deltas {
            cells.push(CellSpec { k, delta: Some(d) });
        }
        if config.flags.include_vacuous {
            cells.push(CellSpec { k, delta: None });
        }
    }
    cells
}

/// Ingests the dataset, runs every cell on a pool of `jobs` threads and
/// writes `report.json`, `cells.csv`, `clusters.csv` and, with lower-bounded
/// cells, `lb_cells.csv` into the output directory.
pub fn run_experiment(
    config: &ExperimentConfig,
    jobs: usize,
    mode: RunMode,
) -> Result<ExperimentOutcome> {
    let dataset = ingest(config)?;
    let base = dataset.instance(1, config.p, config.flags.validate_metric)?;
    let mut ks = config.k_values.clone();
    ks.sort_unstable();
    ks.dedup();
    if let Some(&k) = ks.iter().find(|&&k| k > base.num_facilities()) {
        return Err(Error::Config(format!(
            "k = {k} exceeds the {} points",
            base.num_facilities()
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {jobs} worker threads: {e}")))?;

    let (cells, lb_cells) = pool.install(|| {
        let cells: Vec<CellReport> = match mode {
            RunMode::LowerBounded(_) => Vec::new(),
            _ => {
                let vanillas: VanillaCache = ks
                    .par_iter()
                    .map(|&k| {
                        let started = Instant::now();
                        let sol = base
                            .with_k(k)
                            .and_then(|inst| vanilla::solve(&inst, config.solver(), config.seed))
                            .map(|sol| (sol, started.elapsed().as_secs_f64() * 1e3))
                            .map_err(|e| e.to_string());
                        (k, sol)
                    })
                    .collect();
                grid(config)
                    .par_iter()
                    .map(|cell_spec| run_cell(config, &base, &vanillas, *cell_spec, mode))
                    .collect()
            }
        };
        let lower = match mode {
            RunMode::LowerBounded(l) => Some(l),
            _ => config.flags.lb_mode,
        };
        let lb_cells: Vec<LbCellReport> = match lower {
            Some(l) => ks
                .par_iter()
                .map(|&k| run_lb_cell(config, &base, k, l))
                .collect(),
            None => Vec::new(),
        };
        (cells, lb_cells)
    });

    let report = ExperimentReport {
        dataset: config.dataset_path.display().to_string(),
        p: config.p.to_string(),
        solver_id: config.solver().to_string(),
        seed: config.seed,
        n: base.num_clients(),
        rows_read: dataset.rows_read,
        dropped_rows: dataset.dropped_rows,
        max_groups_per_client: base.max_groups_per_client(),
        groups: group_summaries(&dataset, &base),
        cells,
        lb_cells,
    };
    let files = write_outputs(config, &report, &base)?;
    info!(
        "{} cells, {} failed",
        report.cells.len() + report.lb_cells.len(),
        report.failed_cells()
    );
    Ok(ExperimentOutcome { report, files })
}

fn group_summaries(dataset: &Dataset, base: &ClusteringInstance) -> Vec<GroupSummary> {
    dataset
        .groups
        .iter()
        .zip(base.group_ratios())
        .map(|(g, ratio)| GroupSummary {
            name: g.name.clone(),
            size: g.members.len(),
            ratio,
        })
        .collect()
}

fn run_cell(
    config: &ExperimentConfig,
    base: &ClusteringInstance,
    vanillas: &VanillaCache,
    cell_spec: CellSpec,
    mode: RunMode,
) -> CellReport {
    let solver = config.solver();
    let (metrics, error) = match cell_metrics(config, base, vanillas, cell_spec, mode) {
        Ok(m) => (Some(m), None),
        Err(e) => {
            warn!("cell k={} δ={} failed: {e}", cell_spec.k, cell_spec.label());
            (None, Some(e.to_string()))
        }
    };
    CellReport {
        k: cell_spec.k,
        delta: cell_spec.delta,
        label: cell_spec.label(),
        status: if error.is_none() { "ok" } else { "failed" },
        error,
        seed: config.seed,
        solver_id: solver.to_string(),
        metrics,
    }
}

fn cell_metrics(
    config: &ExperimentConfig,
    base: &ClusteringInstance,
    vanillas: &VanillaCache,
    cell_spec: CellSpec,
    mode: RunMode,
) -> Result<CellMetrics> {
    let instance = base.with_k(cell_spec.k)?;
    let profile = match cell_spec.delta {
        Some(d) => delta_to_profile(&instance, d)?,
        None => FairnessProfile::vacuous(instance.num_groups()),
    };
    let (vanilla, vanilla_ms) = match &vanillas[&cell_spec.k] {
        Ok((sol, ms)) => (sol.clone(), *ms),
        Err(e) => return Err(Error::Solver(format!("vanilla clustering failed: {e}"))),
    };
    let (solution, mut report) = fair_clustering_on(&instance, &profile, vanilla)?;
    report.timings.vanilla_ms = vanilla_ms;
    report.timings.total_ms += vanilla_ms;
    let n = instance.num_clients();
    let bound = (4 * instance.max_groups_per_client() + 3) as f64;
    if report.lambda_max > bound {
        return Err(Error::Solver(format!(
            "violation {} exceeds the bound {bound}",
            report.lambda_max
        )));
    }
    let counts = ClusterCounts::compute(&instance, solution.assignment().phi());
    if counts.sizes.iter().sum::<usize>() != n {
        return Err(Error::Solver("cluster sizes do not add up to n".into()));
    }

    let norm = instance.norm();
    let rounding = &solution.fair.rounding;
    let (lp_objective, lp_cost) = match solution.fair.radius {
        Some(radius) => (None, radius),
        None => (
            Some(rounding.lp_objective),
            norm.root(rounding.lp_objective.max(0.0)),
        ),
    };
    if let Some(lp) = lp_objective {
        let fair_p = norm.pow(report.fair_cost);
        if fair_p > lp * (1.0 + 1e-6) + 1e-9 {
            return Err(Error::Solver(format!(
                "rounded cost^p {fair_p} exceeds the LP optimum {lp}"
            )));
        }
        if report.fair_cost < lp_cost * (1.0 - 1e-9) {
            info!(
                "k={} δ={}: rounded cost {} is below the LP cost {lp_cost}",
                cell_spec.k,
                cell_spec.label(),
                report.fair_cost
            );
        }
    }

    let mut timings = report.timings.clone();
    let started = Instant::now();
    let aflp_cost = if config.flags.run_aflp || (mode == RunMode::Oracle && norm.is_finite()) {
        Some(almost_fair_lp_guarded(
            &instance,
            &profile,
            report.lambda_max,
            config.flags.aflp_max_vars,
        )?)
    } else {
        None
    };
    let oracle = if config.flags.run_oracle || mode == RunMode::Oracle {
        let fair = brute_force_fair(&instance, &profile, u128::from(config.flags.oracle_guard))?;
        let asgn = brute_force_assignment(
            &instance,
            solution.vanilla.opened(),
            &profile,
            0.0,
            u128::from(config.flags.oracle_guard),
        )?;
        Some(OracleValues {
            opt_vnll: fair.opt_vnll.unwrap_or(f64::NAN),
            opt_fair: fair.opt_fair.unwrap_or(f64::NAN),
            opt_asgn: asgn.opt_asgn.unwrap_or(f64::NAN),
        })
    } else {
        None
    };
    timings.total_ms += started.elapsed().as_secs_f64() * 1e3;

    let largest = report.largest_clusters(3).into_iter().cloned().collect();
    Ok(CellMetrics {
        n,
        opened: solution.assignment().opened().to_vec(),
        vanilla_cost: report.vanilla_cost,
        fair_cost: report.fair_cost,
        cost_of_fairness: report.cost_of_fairness,
        lambda_max: report.lambda_max,
        violation_bound: bound,
        min_balance: report.min_balance,
        lp_objective,
        lp_cost,
        rounding_iterations: rounding.iterations,
        lp_solves: rounding.lp_solves,
        initial_fractional: rounding.initial_fractional,
        aflp_cost,
        oracle,
        largest_clusters: largest,
        clusters: report.clusters,
        timings_ms: timings,
    })
}

fn run_lb_cell(
    config: &ExperimentConfig,
    base: &ClusteringInstance,
    k: usize,
    lower: usize,
) -> LbCellReport {
    let started = Instant::now();
    let result = base.with_k(k).and_then(|inst| {
        let sol = lb_clustering(&inst, lower, k, config.solver(), config.seed)?;
        let min_cluster_size = sol
            .assignment
            .cluster_sizes()
            .into_iter()
            .filter(|&s| s > 0)
            .min()
            .unwrap_or(0);
        if min_cluster_size < lower {
            return Err(Error::Solver(format!(
                "a cluster has {min_cluster_size} < {lower} clients"
            )));
        }
        Ok(LbMetrics {
            opened: sol.assignment.opened().to_vec(),
            lb_cost: sol.assignment.cost(),
            vanilla_cost: sol.vanilla.cost(),
            cost_ratio: cost_ratio(sol.assignment.cost(), sol.vanilla.cost()),
            candidates: sol.candidates,
            feasible_candidates: sol.feasible_candidates,
            min_cluster_size,
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
        })
    });
    match result {
        Ok(m) => LbCellReport {
            k,
            lower,
            status: "ok",
            error: None,
            metrics: Some(m),
        },
        Err(e) => {
            warn!("lower-bounded cell k={k} L={lower} failed: {e}");
            LbCellReport {
                k,
                lower,
                status: "failed",
                error: Some(e.to_string()),
                metrics: None,
            }
        }
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn write_outputs(
    config: &ExperimentConfig,
    report: &ExperimentReport,
    base: &ClusteringInstance,
) -> Result<Vec<PathBuf>> {
    let dir = &config.output_dir;
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();

    let path = dir.join("report.json");
    fs::write(&path, serde_json::to_string_pretty(report)? + "\n")?;
    files.push(path);

    if !report.cells.is_empty() {
        let path = dir.join("cells.csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record([
            "k",
            "delta",
            "status",
            "n",
            "vanilla_cost",
            "fair_cost",
            "cost_of_fairness",
            "lambda_max",
            "violation_bound",
            "min_balance",
            "lp_cost",
            "aflp_cost",
            "opt_vnll",
            "opt_fair",
            "rounding_iterations",
            "top1_balance",
            "top2_balance",
            "top3_balance",
            "error",
        ])?;
        for cell in &report.cells {
            let mut row = vec![
                cell.k.to_string(),
                cell.label.clone(),
                cell.status.to_string(),
            ];
            match &cell.metrics {
                Some(m) => {
                    let top = |i: usize| {
                        m.largest_clusters
                            .get(i)
                            .map(|c| num(c.balance))
                            .unwrap_or_default()
                    };
                    row.extend([
                        m.n.to_string(),
                        num(m.vanilla_cost),
                        num(m.fair_cost),
                        num(m.cost_of_fairness),
                        num(m.lambda_max),
                        num(m.violation_bound),
                        num(m.min_balance),
                        num(m.lp_cost),
                        opt_num(m.aflp_cost),
                        opt_num(m.oracle.as_ref().map(|o| o.opt_vnll)),
                        opt_num(m.oracle.as_ref().map(|o| o.opt_fair)),
                        m.rounding_iterations.to_string(),
                        top(0),
                        top(1),
                        top(2),
                    ]);
                }
                None => row.extend(std::iter::repeat_n(String::new(), 15)),
            }
            row.push(cell.error.clone().unwrap_or_default());
            w.write_record(&row)?;
        }
        w.flush()?;
        files.push(path);

        let path = dir.join("clusters.csv");
        let mut w = csv::Writer::from_path(&path)?;
        let mut header: Vec<String> = ["k", "delta", "facility", "size", "balance", "violation"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        header.extend(base.groups().iter().map(|g| g.name.clone()));
        w.write_record(&header)?;
        for cell in &report.cells {
            let Some(m) = &cell.metrics else { continue };
            for c in &m.clusters {
                let mut row = vec![
                    cell.k.to_string(),
                    cell.label.clone(),
                    c.facility.to_string(),
                    c.size.to_string(),
                    num(c.balance),
                    num(c.violation),
                ];
                row.extend(c.group_counts.iter().map(|g| g.to_string()));
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        files.push(path);
    }

    if !report.lb_cells.is_empty() {
        let path = dir.join("lb_cells.csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record([
            "k",
            "lower",
            "status",
            "lb_cost",
            "vanilla_cost",
            "cost_ratio",
            "candidates",
            "feasible_candidates",
            "min_cluster_size",
            "error",
        ])?;
        for cell in &report.lb_cells {
            let mut row = vec![
                cell.k.to_string(),
                cell.lower.to_string(),
                cell.status.to_string(),
            ];
            match &cell.metrics {
                Some(m) => row.extend([
                    num(m.lb_cost),
                    num(m.vanilla_cost),
                    num(m.cost_ratio),
                    m.candidates.to_string(),
                    m.feasible_candidates.to_string(),
                    m.min_cluster_size.to_string(),
                ]),
                None => row.extend(std::iter::repeat_n(String::new(), 6)),
            }
            row.push(cell.error.clone().unwrap_or_default());
            w.write_record(&row)?;
        }
        w.flush()?;
        files.push(path);
    }
    Ok(files)
}
