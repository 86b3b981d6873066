//! Synthetic ARX data, Monte Carlo studies and CSV plumbing.

pub mod config;
pub mod dataset;
pub mod estimate;
pub mod experiment;
pub mod generate;
pub mod rng;

pub use config::{parse_vector, DriftSpec, SimConfig};
pub use dataset::{Dataset, Record};
pub use estimate::{audit, estimate_dataset, estimate_from_csv, write_estimates, ContainmentAudit};
pub use experiment::{lambda_sweep, run_experiment, write_sweep, ExperimentResult, ModeSeries, RunAudit, SweepRow};
pub use generate::{generate_any, generate_lti, generate_ltv};
pub use rng::SimRng;
