//! JSON summary report written next to the trajectory CSV.

use feedloop_core::analysis::{BoundCurve, CalibrationEstimate};
use feedloop_core::FeedbackConfig;
use serde::{Deserialize, Serialize};

pub const DELTA0_NOTE: &str = "delta0 is the calibration error of the round-0 learner measured on the \
initial distribution only. It lower-bounds the consistent calibration error, so the bound columns \
are an estimate of the amplification envelope, not a guarantee.";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub n0: usize,
    pub m: usize,
    pub k: usize,
    pub rounds: usize,
    pub replicates: usize,
    pub base_seed: u64,
    /// `P_0 φ`.
    pub initial_bias: f64,
    pub delta0: Option<f64>,
    pub delta0_signed: Option<f64>,
    pub delta0_stderr: Option<f64>,
    pub delta0_replicates: Option<usize>,
    /// Exact coefficients `1 + c_t` for `t = 0..=rounds`; empty when bounds
    /// are disabled.
    pub coefficients: Vec<f64>,
    /// `(m+k)/m`, or `null` when `m = 0` (the bound is vacuous).
    pub simplified_coefficient: Option<f64>,
    pub final_model_bias_mean: f64,
    pub final_amplification_mean: f64,
    pub note: String,
}

impl Report {
    pub fn new(
        config: &FeedbackConfig,
        initial_bias: f64,
        delta0: Option<&CalibrationEstimate>,
        bounds: Option<&BoundCurve>,
        final_model_bias_mean: f64,
        final_amplification_mean: f64,
    ) -> Self {
        Self {
            n0: config.n0,
            m: config.m,
            k: config.k,
            rounds: config.rounds,
            replicates: config.replicates,
            base_seed: config.base_seed,
            initial_bias,
            delta0: delta0.map(|d| d.absolute),
            delta0_signed: delta0.map(|d| d.signed_mean),
            delta0_stderr: delta0.map(|d| d.stderr),
            delta0_replicates: delta0.map(|d| d.replicates),
            coefficients: bounds
                .map(|b| b.points.iter().map(|p| p.exact_coefficient).collect())
                .unwrap_or_default(),
            simplified_coefficient: feedloop_core::analysis::simplified_bound_coefficient(
                config.m, config.k,
            )
            .finite(),
            final_model_bias_mean,
            final_amplification_mean,
            note: DELTA0_NOTE.to_string(),
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("report serializes");
        bytes.push(b'\n');
        bytes
    }
}
