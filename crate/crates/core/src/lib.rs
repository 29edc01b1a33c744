//! Simulation and analysis of model-induced data feedback loops over finite
//! joint distributions.
//!
//! A model is repeatedly retrained on a dataset that mixes fresh human
//! annotations with annotations produced by its own previous deployment.
//! This crate provides:
//!
//! - exact finite joint distributions, bias metrics, relabelings and
//!   mixtures ([`distribution`]),
//! - seeded, platform-independent sampling ([`rng`], [`sampling`]),
//! - tabular learners spanning argmax and sampling predictors ([`learner`]),
//! - the feedback engine in accumulate, fresh-draw, worst-case subsample and
//!   exact population modes ([`feedback`]),
//! - calibration estimators, stability bound coefficients, feature
//!   calibration checks and an exhaustive enumeration oracle ([`analysis`]).
//!
//! The crate is `no_std` and only needs `alloc`. IO, file formats and the
//! command-line front end live in the `feedloop` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod analysis;
pub mod dataset;
pub mod distribution;
pub mod error;
pub mod feedback;
pub mod generators;
pub mod learner;
pub mod predictor;
pub mod rng;
pub mod sampling;
pub(crate) mod stats;

pub use dataset::{Dataset, Provenance, Sample};
pub use distribution::{expectation, mixture, relabel, BiasMetric, DiscreteJointDistribution};
pub use error::{Error, Result};
pub use feedback::{
    run_feedback, run_replicate, summarize, FeedbackConfig, FeedbackMode, FeedbackTrajectory,
    MeanStd, RoundRecord, RoundSummary,
};
pub use learner::{fit, fit_counts, fit_population, Fallback, LearnerKind, LearnerSpec};
pub use predictor::Predictor;
pub use rng::SeedSpec;

/// Tolerance used for probability-mass invariants (row sums, total mass).
pub const MASS_TOLERANCE: f64 = 1e-12;
