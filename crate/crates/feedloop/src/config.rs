//! Experiment configuration files.
//!
//! ```json
//! {
//!   "distribution": {"generator": "label_imbalance", "num_labels": 10, "majority_label": 0,
//!                    "majority_prob": 0.5, "cell_noise": 0.6},
//!   "metric": {"generator": "class_fraction", "target_label": 0},
//!   "feedback": {"n0": 5000, "m": 100, "k": 400, "rounds": 30, "mode": "accumulate",
//!                "learner": {"kind": "empirical_argmax"}, "replicates": 20, "base_seed": 1},
//!   "analysis": {"estimate_delta0": true, "delta0_replicates": 20, "emit_bounds": true},
//!   "output": {"csv_path": "out/run.csv", "report_path": "out/run.json", "svg_path": "out/run.svg"}
//! }
//! ```
//!
//! Relative paths are resolved against the config file's directory.

use std::path::{Path, PathBuf};

use feedloop_core::{BiasMetric, DiscreteJointDistribution, FeedbackConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;
use crate::formats::{parse_distribution, parse_metric, read_json_value};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    distribution: Value,
    metric: Value,
    feedback: Value,
    #[serde(default)]
    analysis: Option<Value>,
    output: Value,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisOptions {
    #[serde(default = "yes")]
    pub estimate_delta0: bool,
    /// Defaults to `feedback.replicates`.
    #[serde(default)]
    pub delta0_replicates: Option<usize>,
    #[serde(default = "yes")]
    pub emit_bounds: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            estimate_delta0: true,
            delta0_replicates: None,
            emit_bounds: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub csv_path: PathBuf,
    pub report_path: PathBuf,
    #[serde(default)]
    pub svg_path: Option<PathBuf>,
}

/// A validated experiment, ready to run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub p0: DiscreteJointDistribution,
    pub metric: BiasMetric,
    pub feedback: FeedbackConfig,
    pub analysis: AnalysisOptions,
    pub output: OutputPaths,
}

impl Experiment {
    pub fn delta0_replicates(&self) -> usize {
        self.analysis
            .delta0_replicates
            .unwrap_or(self.feedback.replicates)
    }
}

fn field<T: serde::de::DeserializeOwned>(name: &str, value: Value) -> Result<T, CliError> {
    serde_json::from_value(value).map_err(|e| CliError::Config(format!("{name}: {e}")))
}

fn resolve(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

pub fn load_experiment(path: &Path, seed_override: Option<u64>) -> Result<Experiment, CliError> {
    let value = read_json_value(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    parse_experiment(value, base, seed_override)
}

pub fn parse_experiment(
    value: Value,
    base_dir: &Path,
    seed_override: Option<u64>,
) -> Result<Experiment, CliError> {
    let raw: RawConfig = field("config", value)?;
    let p0 = parse_distribution("distribution", &raw.distribution, base_dir)?;
    let metric = parse_metric(
        "metric",
        &raw.metric,
        base_dir,
        p0.num_cells(),
        p0.num_labels(),
    )?;
    p0.check_dims(metric.num_cells(), metric.num_labels())
        .map_err(|e| CliError::core("metric", e))?;

    let mut feedback: FeedbackConfig = field("feedback", raw.feedback)?;
    if let Some(seed) = seed_override {
        feedback.base_seed = seed;
    }
    feedback.validate().map_err(|e| match e {
        feedloop_core::Error::InvalidConfig { field, reason } => {
            CliError::Config(format!("feedback.{field}: {reason}"))
        }
        other => CliError::core("feedback", other),
    })?;

    let analysis: AnalysisOptions = match raw.analysis {
        Some(v) => field("analysis", v)?,
        None => AnalysisOptions::default(),
    };
    if analysis.estimate_delta0 && analysis.delta0_replicates == Some(0) {
        return Err(CliError::Config(
            "analysis.delta0_replicates: must be at least 1".into(),
        ));
    }

    let mut output: OutputPaths = field("output", raw.output)?;
    output.csv_path = resolve(base_dir, output.csv_path);
    output.report_path = resolve(base_dir, output.report_path);
    output.svg_path = output.svg_path.map(|p| resolve(base_dir, p));

    Ok(Experiment {
        p0,
        metric,
        feedback,
        analysis,
        output,
    })
}
