//! Scenario-driven front end for the `pmsm-imbalance` models: scenario
//! parsing, CSV output and the `coeffs`, `simulate`, `compare` and
//! `identify` jobs.

pub mod csv_io;
pub mod error;
pub mod jobs;
pub mod scenario;

pub use csv_io::{format_csv, read_csv, write_csv};
pub use error::{CliError, Result};
pub use jobs::{run_scenario, Job, JobOutput};
pub use scenario::{parse_scenario, parse_scenario_str, Scenario};
