//! Delimited-text datasets: coordinates plus sensitive columns.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use log::{info, warn};
use rand::seq::index;

use super::config::{ExperimentConfig, GroupRule};
use crate::error::{Error, Result};
use crate::instance::{ClusteringInstance, Group, MetricSpace, Norm};
use crate::rng::{stream_rng, STREAM_SUBSAMPLE};

/// Cleaned rows ready to become an instance with `F = C`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub points: Vec<Vec<f64>>,
    pub groups: Vec<Group>,
    /// Data rows in the file.
    pub rows_read: usize,
    /// Rows dropped for a missing or non-numeric coordinate or an empty
    /// sensitive value.
    pub dropped_rows: usize,
    /// Zero-based data-row index in the file of every kept point.
    pub source_rows: Vec<usize>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn instance(
        &self,
        k: usize,
        norm: Norm,
        validate_metric: bool,
    ) -> Result<ClusteringInstance> {
        let space = MetricSpace::from_points(&self.points)?;
        let ids: Vec<usize> = (0..self.len()).collect();
        ClusteringInstance::with_validation(
            space,
            ids.clone(),
            ids,
            self.groups.clone(),
            k,
            norm,
            validate_metric,
        )
    }
}

/// `;` when the header has more semicolons than commas, else `,`.
pub fn detect_delimiter(header: &str) -> u8 {
    if header.matches(';').count() > header.matches(',').count() {
        b';'
    } else {
        b','
    }
}

pub fn ingest(config: &ExperimentConfig) -> Result<Dataset> {
    let text = std::fs::read_to_string(&config.dataset_path).map_err(|e| {
        Error::Config(format!(
            "cannot read dataset {}: {e}",
            config.dataset_path.display()
        ))
    })?;
    let dataset = parse_dataset(&text, config, &config.dataset_path)?;
    info!(
        "{}: {} rows read, {} dropped, {} kept, {} groups",
        config.dataset_path.display(),
        dataset.rows_read,
        dataset.dropped_rows,
        dataset.len(),
        dataset.groups.len()
    );
    Ok(dataset)
}

pub fn parse_dataset(text: &str, config: &ExperimentConfig, origin: &Path) -> Result<Dataset> {
    let header = text.lines().next().unwrap_or("");
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(detect_delimiter(header))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let column = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::Config(format!("column {name:?} not found in {}", origin.display()))
        })
    };
    let coord_cols: Vec<usize> = config
        .coordinate_columns
        .iter()
        .map(|c| column(c))
        .collect::<Result<_>>()?;
    let sensitive_cols: Vec<usize> = config
        .sensitive_attributes
        .iter()
        .map(|a| column(&a.column))
        .collect::<Result<_>>()?;

    let mut points = Vec::new();
    let mut labels: Vec<Vec<String>> = Vec::new();
    let mut source_rows = Vec::new();
    let mut rows_read = 0;
    let mut dropped_rows = 0;
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        rows_read += 1;
        let coords: Option<Vec<f64>> = coord_cols
            .iter()
            .map(|&c| {
                record
                    .get(c)
                    .and_then(|s| s.parse::<f64>().ok())
                    .filter(|x| x.is_finite())
            })
            .collect();
        let values: Option<Vec<String>> = sensitive_cols
            .iter()
            .map(|&c| record.get(c).filter(|s| !s.is_empty()).map(str::to_string))
            .collect();
        match (coords, values) {
            (Some(coords), Some(values)) => {
                points.push(coords);
                labels.push(values);
                source_rows.push(row);
            }
            _ => dropped_rows += 1,
        }
    }
    if dropped_rows > 0 {
        warn!(
            "{}: dropped {dropped_rows} of {rows_read} rows",
            origin.display()
        );
    }
    if points.is_empty() {
        return Err(Error::Config(format!(
            "{} has no usable rows",
            origin.display()
        )));
    }

    if let Some(max) = config.max_points {
        if max > points.len() {
            return Err(Error::Config(format!(
                "max_points = {max} exceeds the {} rows left after cleaning",
                points.len()
            )));
        }
        let mut rng = stream_rng(config.seed, STREAM_SUBSAMPLE);
        let mut keep = index::sample(&mut rng, points.len(), max).into_vec();
        keep.sort_unstable();
        points = keep.iter().map(|&i| points[i].clone()).collect();
        labels = keep.iter().map(|&i| labels[i].clone()).collect();
        source_rows = keep.iter().map(|&i| source_rows[i]).collect();
    }

    if config.flags.standardize {
        standardize(&mut points);
    }

    let mut groups = Vec::new();
    for (a, attr) in config.sensitive_attributes.iter().enumerate() {
        let mut members: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        if let GroupRule::Mapping(map) = &attr.groups {
            for target in map.values().collect::<BTreeSet<_>>() {
                members.entry(target.clone()).or_default();
            }
        }
        for (v, values) in labels.iter().enumerate() {
            let value = &values[a];
            let name = match &attr.groups {
                GroupRule::Mapping(map) => map.get(value).unwrap_or(value).clone(),
                GroupRule::Keyword(_) => value.clone(),
            };
            members.entry(name).or_default().push(v);
        }
        for (name, ids) in members {
            if ids.is_empty() {
                return Err(Error::Config(format!(
                    "group {}={name} has no members",
                    attr.column
                )));
            }
            groups.push(Group::new(format!("{}={name}", attr.column), ids));
        }
    }

    Ok(Dataset {
        points,
        groups,
        rows_read,
        dropped_rows,
        source_rows,
    })
}

fn standardize(points: &mut [Vec<f64>]) {
    let n = points.len() as f64;
    let dim = points[0].len();
    for c in 0..dim {
        let mean = points.iter().map(|p| p[c]).sum::<f64>() / n;
        let var = points.iter().map(|p| (p[c] - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        for p in points.iter_mut() {
            p[c] -= mean;
            if sd > 0.0 {
                p[c] /= sd;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delimiter_detection() {
        assert_eq!(detect_delimiter("a;b;c"), b';');
        assert_eq!(detect_delimiter("a,b,c"), b',');
        assert_eq!(detect_delimiter("\"a;b\",c,d"), b',');
    }
}
