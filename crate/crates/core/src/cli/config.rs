//! Experiment manifests: a TOML document plus `key=value` overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Norm;
use crate::oracle::{DEFAULT_AFLP_MAX_VARS, DEFAULT_GUARD};
use crate::vanilla::SolverId;

pub const DISTINCT_VALUES: &str = "one-group-per-distinct-value";

/// How the values of one sensitive column become groups.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupRule {
    /// Must be [`DISTINCT_VALUES`].
    Keyword(String),
    /// Column value → group name. Values not listed form their own group.
    Mapping(BTreeMap<String, String>),
}

impl Default for GroupRule {
    fn default() -> Self {
        GroupRule::Keyword(DISTINCT_VALUES.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensitiveAttribute {
    pub column: String,
    #[serde(default)]
    pub groups: GroupRule,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Flags {
    /// Check the triangle inequality on load.
    pub validate_metric: bool,
    /// Solve the almost-fair LP at the observed violation in every cell.
    pub run_aflp: bool,
    /// Run the brute-force oracles in every cell (tiny inputs only).
    pub run_oracle: bool,
    /// Lower bound `L`; when set, lower-bounded clustering runs for every k.
    pub lb_mode: Option<usize>,
    /// Per-column z-scores for the coordinates.
    pub standardize: bool,
    /// Add an `α = 1, β = 0` cell for every k.
    pub include_vacuous: bool,
    pub oracle_guard: u64,
    pub aflp_max_vars: usize,
}

impl Default for Flags {
    fn default() -> Self {
        Flags {
            validate_metric: false,
            run_aflp: false,
            run_oracle: false,
            lb_mode: None,
            standardize: false,
            include_vacuous: false,
            oracle_guard: DEFAULT_GUARD as u64,
            aflp_max_vars: DEFAULT_AFLP_MAX_VARS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset_path: PathBuf,
    pub coordinate_columns: Vec<String>,
    pub sensitive_attributes: Vec<SensitiveAttribute>,
    pub k_values: Vec<usize>,
    pub p: Norm,
    pub delta_values: Vec<f64>,
    #[serde(default)]
    pub max_points: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Defaults to the solver matching `p`.
    #[serde(default)]
    pub solver_id: Option<SolverId>,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub flags: Flags,
}

impl ExperimentConfig {
    /// Reads `path`, applies `overrides` (`dotted.key=value`), resolves
    /// relative paths against the manifest's directory and validates.
    pub fn load(path: &Path, overrides: &[String]) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        ExperimentConfig::from_toml(&text, overrides, base)
    }

    pub fn from_toml(text: &str, overrides: &[String], base: &Path) -> Result<ExperimentConfig> {
        let mut tree: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(format!("malformed config: {e}")))?;
        for item in overrides {
            apply_override(&mut tree, item)?;
        }
        let mut config: ExperimentConfig = toml::Value::Table(tree)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("invalid config: {e}")))?;
        if config.dataset_path.is_relative() {
            config.dataset_path = base.join(&config.dataset_path);
        }
        if config.output_dir.is_relative() {
            config.output_dir = base.join(&config.output_dir);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn solver(&self) -> SolverId {
        self.solver_id.unwrap_or(match self.p {
            Norm::Infinity => SolverId::KCenterGonzalez,
            Norm::Finite(2.0) => SolverId::KMeansLloyd,
            Norm::Finite(_) => SolverId::KMedianLocalSearch,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.coordinate_columns.is_empty() {
            return Err(Error::Config(
                "at least one coordinate column is required".into(),
            ));
        }
        if self.sensitive_attributes.is_empty() {
            return Err(Error::Config(
                "at least one sensitive attribute is required".into(),
            ));
        }
        for attr in &self.sensitive_attributes {
            if let GroupRule::Keyword(word) = &attr.groups {
                if word != DISTINCT_VALUES {
                    return Err(Error::Config(format!(
                        "groups of column {:?} must be {DISTINCT_VALUES:?} or a value mapping, got {word:?}",
                        attr.column
                    )));
                }
            }
        }
        if self.k_values.is_empty() {
            return Err(Error::Config("k_values is empty".into()));
        }
        if let Some(&k) = self.k_values.iter().find(|&&k| k == 0) {
            return Err(Error::Config(format!("k = {k} is not positive")));
        }
        if self.delta_values.is_empty() && !self.flags.include_vacuous {
            return Err(Error::Config(
                "delta_values is empty and no vacuous cell was requested".into(),
            ));
        }
        if let Some(&d) = self
            .delta_values
            .iter()
            .find(|&&d| !(0.0..1.0).contains(&d))
        {
            return Err(Error::Config(format!("delta {d} outside [0, 1)")));
        }
        if self.max_points == Some(0) {
            return Err(Error::Config("max_points must be positive".into()));
        }
        if self.flags.lb_mode == Some(0) {
            return Err(Error::Config("lb_mode lower bound must be positive".into()));
        }
        Ok(())
    }
}

/// Sets `dotted.key` in `tree`. The value is read as a TOML value when it
/// parses as one and as a plain string otherwise.
fn apply_override(tree: &mut toml::Table, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {item:?} is not key=value")))?;
    let value = parse_value(raw.trim());
    let mut parts: Vec<&str> = key.trim().split('.').collect();
    let last = parts
        .pop()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| Error::Config(format!("empty key in {item:?}")))?;
    let mut table = tree;
    for part in parts {
        let entry = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override {key:?}: {part:?} is not a table")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("value = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("value"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASIC: &str = r#"
dataset_path = "points.csv"
coordinate_columns = ["x", "y"]
k_values = [2, 3]
p = "inf"
delta_values = [0.2]
output_dir = "out"

[[sensitive_attributes]]
column = "sex"
groups = "one-group-per-distinct-value"

[[sensitive_attributes]]
column = "marital"
groups = { single = "unmarried", divorced = "unmarried" }
"#;

    #[test]
    fn parses_and_resolves_paths() {
        let c = ExperimentConfig::from_toml(BASIC, &[], Path::new("/data")).unwrap();
        assert_eq!(c.dataset_path, PathBuf::from("/data/points.csv"));
        assert_eq!(c.p, Norm::Infinity);
        assert_eq!(c.solver(), SolverId::KCenterGonzalez);
        assert!(matches!(
            c.sensitive_attributes[1].groups,
            GroupRule::Mapping(_)
        ));
        assert_eq!(u128::from(c.flags.oracle_guard), DEFAULT_GUARD);
    }

    #[test]
    fn overrides_use_dotted_paths() {
        let overrides = vec![
            "p=2".to_string(),
            "flags.run_aflp=true".to_string(),
            "k_values=[4]".to_string(),
            "solver_id=kmeans".to_string(),
        ];
        let c = ExperimentConfig::from_toml(BASIC, &overrides, Path::new(".")).unwrap();
        assert_eq!(c.p, Norm::MEANS);
        assert!(c.flags.run_aflp);
        assert_eq!(c.k_values, vec![4]);
    }

    #[test]
    fn rejects_bad_values() {
        for bad in [
            "delta_values=[1.0]",
            "k_values=[]",
            "coordinate_columns=[]",
            "bogus=1",
        ] {
            let err =
                ExperimentConfig::from_toml(BASIC, &[bad.to_string()], Path::new(".")).unwrap_err();
            assert!(err.is_config(), "{bad}: {err}");
        }
        let err = ExperimentConfig::from_toml(
            &BASIC.replace("one-group-per-distinct-value", "each"),
            &[],
            Path::new("."),
        )
        .unwrap_err();
        assert!(err.is_config());
    }
}
