//! Fair clustering with additive-violation guarantees.
//!
//! A vanilla `(k, p)`-clustering solver picks the centers; an LP over the
//! fairness constraints is then rounded iteratively into an assignment whose
//! per-cluster group counts miss their bounds by a small additive amount.
//! Also included: lower-bounded clustering via b-matching, brute-force
//! oracles for small instances, and an experiment CLI.

pub mod cli;
pub mod error;
pub mod fair;
pub mod instance;
pub mod lower_bounded;
pub mod lp;
pub mod metrics;
pub mod oracle;
pub mod rng;
pub mod vanilla;

pub use error::{Error, Result};
pub use instance::{Assignment, ClusteringInstance, FairnessProfile, Group, MetricSpace, Norm};
pub use metrics::{additive_violation, balance, delta_to_profile, lp_norm_cost, FairnessReport};
pub use vanilla::{SolverId, VanillaSolution};
