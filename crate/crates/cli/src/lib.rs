//! Command-line front end: JSON configuration in, `report.json` and
//! `samples.csv` out.

pub mod config;
pub mod decimal;
pub mod report;
pub mod run;

pub use config::{validate_config, Mode, Overrides, RunConfig};
pub use run::{run, run_file, CliError, RunOutput, Status};
