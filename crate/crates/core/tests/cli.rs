mod common;

use std::path::Path;
use std::process::Command;

use common::*;
use faircluster::cli::config::ExperimentConfig;
use faircluster::cli::experiment::{run_experiment, RunMode};
use faircluster::cli::ingest::{ingest, parse_dataset};

fn fixture_config(sensitive: &[&str], extra: &str, out: &Path) -> String {
    let attrs: String = sensitive
        .iter()
        .map(|c| format!("[[sensitive_attributes]]\ncolumn = \"{c}\"\ngroups = \"one-group-per-distinct-value\"\n\n"))
        .collect();
    format!(
        "dataset_path = \"{}\"\ncoordinate_columns = [\"x\", \"y\"]\nk_values = [2]\np = 1\ndelta_values = [0.2]\n\
         output_dir = \"{}\"\n{extra}\n{attrs}",
        data_dir().join("fixture_6.csv").display(),
        out.display()
    )
}

fn load(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(text, &[], &data_dir()).unwrap()
}

#[test]
fn one_attribute_partitions_the_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let config = load(&fixture_config(&["sex"], "", dir.path()));
    let data = ingest(&config).unwrap();
    let inst = data.instance(2, config.p, true).unwrap();
    assert_eq!(inst.num_clients(), 6);
    assert_eq!(inst.num_groups(), 2);
    assert_eq!(inst.max_groups_per_client(), 1);
    assert_eq!(data.dropped_rows, 1);
    assert_eq!(data.rows_read, 7);
    assert_eq!(data.groups[0].name, "sex=F");
    assert_eq!(data.groups[0].members, vec![0, 2, 4]);
}

#[test]
fn two_attributes_overlap() {
    let dir = tempfile::tempdir().unwrap();
    let config = load(&fixture_config(&["sex", "married"], "", dir.path()));
    let inst = ingest(&config)
        .unwrap()
        .instance(2, config.p, false)
        .unwrap();
    assert_eq!(inst.num_groups(), 4);
    assert_eq!(inst.max_groups_per_client(), 2);
    assert!((0..6).all(|v| inst.memberships(v).len() == 2));
}

#[test]
fn semicolons_mappings_and_missing_columns() {
    let dir = tempfile::tempdir().unwrap();
    let text = "x;y;colour\n0;0;red\n1;0;crimson\n5;5;blue\n;3;blue\n";
    let mut config = load(&fixture_config(&["sex"], "", dir.path()));
    config.sensitive_attributes[0].column = "colour".into();
    config.sensitive_attributes[0].groups = faircluster::cli::config::GroupRule::Mapping(
        [
            ("red".to_string(), "warm".to_string()),
            ("crimson".to_string(), "warm".to_string()),
        ]
        .into(),
    );
    let data = parse_dataset(text, &config, Path::new("inline")).unwrap();
    assert_eq!(data.len(), 3);
    assert_eq!(data.dropped_rows, 1);
    let names: Vec<&str> = data.groups.iter().map(|g| g.name.as_str()).collect();
    assert_eq!(names, ["colour=blue", "colour=warm"]);

    config.coordinate_columns = vec!["x".into(), "depth".into()];
    let err = parse_dataset(text, &config, Path::new("inline")).unwrap_err();
    assert!(err.is_config() && err.to_string().contains("depth"));
}

#[test]
fn subsample_is_seeded_and_bounded() {
    let dir = tempfile::tempdir().unwrap();
    let base = data_dir().join("example_config.toml");
    let out = format!("output_dir=\"{}\"", dir.path().display());
    let a = ingest(&ExperimentConfig::load(&base, &["max_points=50".into(), out.clone()]).unwrap())
        .unwrap();
    let b = ingest(&ExperimentConfig::load(&base, &["max_points=50".into(), out.clone()]).unwrap())
        .unwrap();
    let c = ingest(
        &ExperimentConfig::load(
            &base,
            &["max_points=50".into(), "seed=8".into(), out.clone()],
        )
        .unwrap(),
    )
    .unwrap();
    assert_eq!(a, b);
    assert_ne!(a.source_rows, c.source_rows);
    assert_eq!(a.len(), 50);
    let too_many = ExperimentConfig::load(&base, &["max_points=5000".into(), out]).unwrap();
    assert!(ingest(&too_many).unwrap_err().is_config());
}

#[test]
fn report_invariants_hold_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let config = ExperimentConfig::load(
        &data_dir().join("example_config.toml"),
        &[
            "max_points=60".into(),
            "k_values=[2,4]".into(),
            "delta_values=[0.1,0.4]".into(),
            "flags.run_aflp=true".into(),
            format!("output_dir=\"{}\"", dir.path().display()),
        ],
    )
    .unwrap();
    let outcome = run_experiment(&config, 2, RunMode::Fair).unwrap();
    assert_eq!(outcome.failed_cells(), 0);
    assert_eq!(outcome.report.cells.len(), 6);
    for cell in &outcome.report.cells {
        let m = cell.metrics.as_ref().unwrap();
        assert_eq!(m.clusters.iter().map(|c| c.size).sum::<usize>(), 60);
        assert!(m.lambda_max <= 11.0);
        assert!(m.aflp_cost.unwrap() <= m.fair_cost * (1.0 + 1e-9));
        assert!(m.largest_clusters.len() <= 3);
        if cell.delta.is_none() {
            assert_eq!(m.cost_of_fairness, 1.0);
            assert_eq!(m.lambda_max, 0.0);
        }
    }
    for name in ["report.json", "cells.csv", "clusters.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap())
            .unwrap();
    let cell = &json["cells"][0];
    for key in [
        "vanilla_cost",
        "fair_cost",
        "cost_of_fairness",
        "per_cluster_balance",
        "lambda_max",
        "lp_objective",
        "aflp_cost",
        "timings_ms",
        "seed",
        "solver_id",
    ] {
        assert!(!cell[key].is_null(), "report.json lacks {key}");
    }
}

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_faircluster"))
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.toml");
    std::fs::write(
        &good,
        fixture_config(&["sex", "married"], "", &dir.path().join("out")),
    )
    .unwrap();

    let ok = binary()
        .args(["run", "--config"])
        .arg(&good)
        .args(["--jobs", "2"])
        .output()
        .unwrap();
    assert_eq!(
        ok.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&ok.stderr)
    );
    assert!(dir.path().join("out/cells.csv").exists());

    let oracle = binary()
        .args(["oracle", "--config"])
        .arg(&good)
        .output()
        .unwrap();
    assert_eq!(
        oracle.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&oracle.stderr)
    );

    let lb = binary()
        .args(["lb", "--config"])
        .arg(&good)
        .args(["--L", "2"])
        .output()
        .unwrap();
    assert_eq!(
        lb.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&lb.stderr)
    );
    assert!(dir.path().join("out/lb_cells.csv").exists());

    // an oracle guard of one state fails every cell but not the run
    let partial = binary()
        .args(["run", "--config"])
        .arg(&good)
        .args([
            "--override",
            "flags.run_oracle=true",
            "--override",
            "flags.oracle_guard=1",
        ])
        .output()
        .unwrap();
    assert_eq!(partial.status.code(), Some(2));

    let bad = binary()
        .args(["run", "--config"])
        .arg(&good)
        .args(["--override", "delta_values=[1.5]"])
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    let missing = binary()
        .args(["run", "--config", "/nonexistent/config.toml"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn fixture_runs_are_byte_identical() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let outputs: Vec<Vec<u8>> = dirs
        .iter()
        .map(|dir| {
            let config = load(&fixture_config(&["sex", "married"], "seed = 5", dir.path()));
            run_experiment(&config, 1, RunMode::Fair).unwrap();
            std::fs::read(dir.path().join("cells.csv")).unwrap()
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
}
