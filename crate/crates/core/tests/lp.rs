#![allow(clippy::needless_range_loop)]

mod common;

use faircluster::lp::{check_feasible, solve_lp, LpModel, LpStatus, Relation};
use proptest::prelude::*;
use rand::RngExt;

struct Row {
    coef: [f64; 3],
    relation: Relation,
    rhs: f64,
}

fn satisfied(row: &Row, x: &[f64; 3]) -> bool {
    let lhs: f64 = (0..3).map(|j| row.coef[j] * x[j]).sum();
    match row.relation {
        Relation::Le => lhs <= row.rhs + 1e-7,
        Relation::Ge => lhs >= row.rhs - 1e-7,
        Relation::Eq => (lhs - row.rhs).abs() <= 1e-7,
    }
}

/// Solves a 3×3 system by Gaussian elimination with partial pivoting.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-9 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in 0..3 {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..3 {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some([b[0] / a[0][0], b[1] / a[1][1], b[2] / a[2][2]])
}

/// Minimum of `cost · x` over every vertex of `{rows, 0 ≤ x ≤ upper}`; `None`
/// when no vertex is feasible, which for a box means the polytope is empty.
fn vertex_enumeration(cost: [f64; 3], upper: [f64; 3], rows: &[Row]) -> Option<f64> {
    let mut planes: Vec<([f64; 3], f64)> = rows.iter().map(|r| (r.coef, r.rhs)).collect();
    for j in 0..3 {
        let mut e = [0.0; 3];
        e[j] = 1.0;
        planes.push((e, 0.0));
        planes.push((e, upper[j]));
    }
    let mut best: Option<f64> = None;
    for a in 0..planes.len() {
        for b in a + 1..planes.len() {
            for c in b + 1..planes.len() {
                let m = [planes[a].0, planes[b].0, planes[c].0];
                let Some(x) = solve3(m, [planes[a].1, planes[b].1, planes[c].1]) else {
                    continue;
                };
                let in_box = (0..3).all(|j| x[j] >= -1e-7 && x[j] <= upper[j] + 1e-7);
                if in_box && rows.iter().all(|r| satisfied(r, &x)) {
                    let value: f64 = (0..3).map(|j| cost[j] * x[j]).sum();
                    best = Some(best.map_or(value, |v: f64| v.min(value)));
                }
            }
        }
    }
    best
}

fn random_lp(seed: u64) -> ([f64; 3], [f64; 3], Vec<Row>) {
    let mut rng = common::rng(seed);
    let cost = [0, 1, 2].map(|_| rng.random_range(-5..=5) as f64);
    let upper = [0, 1, 2].map(|_| rng.random_range(1..=5) as f64);
    let rows = (0..rng.random_range(1..=4))
        .map(|_| Row {
            coef: [0, 1, 2].map(|_| rng.random_range(-3..=3) as f64),
            relation: [Relation::Le, Relation::Ge, Relation::Eq][rng.random_range(0..3)],
            rhs: rng.random_range(-4..=8) as f64,
        })
        .collect();
    (cost, upper, rows)
}

fn build(cost: [f64; 3], upper: [f64; 3], rows: &[Row]) -> LpModel {
    let mut model = LpModel::new();
    let vars: Vec<usize> = (0..3)
        .map(|j| model.add_var(cost[j], 0.0, upper[j]))
        .collect();
    for r in rows {
        let terms = (0..3)
            .filter(|&j| r.coef[j] != 0.0)
            .map(|j| (vars[j], r.coef[j]))
            .collect();
        model.add_constraint(terms, r.relation, r.rhs).unwrap();
    }
    model
}

#[test]
fn three_variable_lps_match_vertex_enumeration() {
    let (mut optimal, mut infeasible) = (0, 0);
    for seed in 0..400 {
        let (cost, upper, rows) = random_lp(seed);
        let model = build(cost, upper, &rows);
        let solution = solve_lp(&model).unwrap();
        match vertex_enumeration(cost, upper, &rows) {
            Some(best) => {
                optimal += 1;
                assert_eq!(solution.status, LpStatus::Optimal, "seed {seed}");
                assert!(
                    (solution.objective - best).abs() <= 1e-6 * (1.0 + best.abs()),
                    "seed {seed}: {} vs {best}",
                    solution.objective
                );
                for c in model.constraints() {
                    assert!(c.violation(&solution.values) <= 1e-6, "seed {seed}");
                }
                assert!(check_feasible(&model).unwrap());
            }
            None => {
                infeasible += 1;
                assert_eq!(solution.status, LpStatus::Infeasible, "seed {seed}");
                assert!(!check_feasible(&model).unwrap());
            }
        }
    }
    assert!(
        optimal > 50 && infeasible > 20,
        "{optimal} optimal, {infeasible} infeasible"
    );
}

#[test]
fn bounded_box_without_rows_picks_cheapest_corner() {
    let cost = [3.0, -2.0, 0.5];
    let upper = [2.0, 4.0, 1.0];
    let solution = solve_lp(&build(cost, upper, &[])).unwrap();
    assert_eq!(solution.objective, -8.0);
    assert_eq!(vertex_enumeration(cost, upper, &[]), Some(-8.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimum_never_above_any_feasible_point(seed in any::<u64>(), probe in prop::array::uniform3(0.0f64..1.0)) {
        let (cost, upper, rows) = random_lp(seed);
        let solution = solve_lp(&build(cost, upper, &rows)).unwrap();
        let x = [probe[0] * upper[0], probe[1] * upper[1], probe[2] * upper[2]];
        if solution.is_optimal() && rows.iter().all(|r| satisfied(r, &x)) {
            let value: f64 = (0..3).map(|j| cost[j] * x[j]).sum();
            prop_assert!(solution.objective <= value + 1e-6);
        }
    }

    #[test]
    fn optimal_values_respect_bounds(seed in any::<u64>()) {
        let (cost, upper, rows) = random_lp(seed);
        let solution = solve_lp(&build(cost, upper, &rows)).unwrap();
        if solution.is_optimal() {
            for j in 0..3 {
                prop_assert!(solution.values[j] >= 0.0 && solution.values[j] <= upper[j]);
            }
        }
    }
}
