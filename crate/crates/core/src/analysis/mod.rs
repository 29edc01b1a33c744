//! Calibration, stability bounds and the exhaustive oracle.
//!
//! Conventions shared by the estimators:
//!
//! - A calibration gap is signed, `Qφ - Q̂(f)φ`. Estimators average the
//!   signed gap over replicates first and take the absolute value of the
//!   mean afterwards; both numbers are reported.
//! - Replicate `r` of an estimator seeded with `seed` draws its training
//!   set exactly as replicate `r` of a feedback run with `base_seed = seed`
//!   draws `S_0`, so an initial calibration estimate can be paired with the
//!   round-0 models of a run.

mod bounds;
mod calibration;
mod features;
mod oracle;

pub use bounds::{
    build_bound_curve, check_lemma2, coefficient_path, exact_bound_coefficient,
    simplified_bound_coefficient, BoundCurve, BoundPoint, Lemma2Failure, Lemma2Report,
    SimplifiedBound,
};
pub use calibration::{
    calibration_by_size, estimate_calibration_error, worst_case_calibration, CalibrationEstimate,
};
pub use features::{
    estimate_distinguishability, feature_calibration_test, FeatureCalibrationReport, Partition,
};
pub use oracle::{brute_force_expected_bias, ORACLE_MAX_ROUNDS, ORACLE_MAX_SAMPLES};
