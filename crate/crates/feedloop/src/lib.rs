//! Files, orchestration and command-line front end for `feedloop-core`.
//!
//! - [`formats`]: JSON distribution, metric and learner files.
//! - [`config`]: experiment configs and their validation.
//! - [`experiment`]: parallel replicate runs, calibration estimates, bounds.
//! - [`trajectory_csv`]: the trajectory CSV schema.
//! - [`report`]: the JSON bound/calibration report.
//! - [`plot`]: static SVG charts.
//! - [`verify`]: the `lemma2`, `oracle` and `fixed_points` property suites.

pub mod config;
pub mod error;
pub mod experiment;
pub mod formats;
pub mod fsutil;
pub mod plot;
pub mod report;
pub mod trajectory_csv;
pub mod verify;

pub use error::{CliError, ExitCode};
