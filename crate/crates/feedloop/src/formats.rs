//! JSON file formats.
//!
//! ```text
//! distribution  {"num_cells": 2, "num_labels": 2, "probs": [[0.1, 0.2], [0.3, 0.4]]}
//! metric        {"values": [[1.0, 0.0], [1.0, 0.0]]}
//! generator     {"generator": "label_imbalance", "num_labels": 10, "majority_label": 0,
//!                "majority_prob": 0.5, "cell_noise": 0.6, "cells_per_label": 50}
//! metric gen    {"generator": "class_fraction", "target_label": 0}
//! learner       {"kind": "smoothed_sampler", "smoothing": 1.0, "fallback": "uniform"}
//! ```
//!
//! Distribution and metric entries may also be `{"file": "path.json"}`,
//! resolved relative to the directory of the file that references them.

use std::path::{Path, PathBuf};

use feedloop_core::generators::LabelImbalance;
use feedloop_core::{BiasMetric, DiscreteJointDistribution};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionFile {
    pub num_cells: usize,
    pub num_labels: usize,
    pub probs: Vec<Vec<f64>>,
}

impl DistributionFile {
    pub fn from_distribution(dist: &DiscreteJointDistribution) -> Self {
        Self {
            num_cells: dist.num_cells(),
            num_labels: dist.num_labels(),
            probs: dist.rows().map(<[f64]>::to_vec).collect(),
        }
    }

    pub fn to_distribution(&self) -> Result<DiscreteJointDistribution, feedloop_core::Error> {
        if self.probs.len() != self.num_cells || self.probs.iter().any(|r| r.len() != self.num_labels) {
            return Err(feedloop_core::Error::DimensionMismatch {
                expected_cells: self.num_cells,
                expected_labels: self.num_labels,
                cells: self.probs.len(),
                labels: self.probs.first().map_or(0, Vec::len),
            });
        }
        DiscreteJointDistribution::from_rows(&self.probs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricFile {
    pub values: Vec<Vec<f64>>,
}

impl MetricFile {
    pub fn from_metric(metric: &BiasMetric) -> Self {
        Self {
            values: (0..metric.num_cells()).map(|x| metric.row(x).to_vec()).collect(),
        }
    }
}

fn default_cells_per_label() -> usize {
    LabelImbalance::DEFAULT_CELLS_PER_LABEL
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionGenerator {
    LabelImbalance {
        num_labels: usize,
        majority_label: usize,
        majority_prob: f64,
        cell_noise: f64,
        #[serde(default = "default_cells_per_label")]
        cells_per_label: usize,
    },
}

impl DistributionGenerator {
    pub fn build(&self) -> Result<DiscreteJointDistribution, feedloop_core::Error> {
        match *self {
            DistributionGenerator::LabelImbalance {
                num_labels,
                majority_label,
                majority_prob,
                cell_noise,
                cells_per_label,
            } => LabelImbalance {
                num_labels,
                majority_label,
                majority_prob,
                cell_noise,
                cells_per_label,
            }
            .build(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricGenerator {
    ClassFraction { target_label: usize },
}

pub fn read_json_value(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: not valid JSON: {e}", path.display())))
}

fn from_value<T: serde::de::DeserializeOwned>(field: &str, value: Value) -> Result<T, CliError> {
    serde_json::from_value(value).map_err(|e| CliError::Config(format!("{field}: {e}")))
}

fn resolve(base_dir: &Path, file: &str) -> PathBuf {
    let p = Path::new(file);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

fn file_reference(value: &Value) -> Option<&str> {
    let obj = value.as_object()?;
    if obj.len() == 1 {
        obj.get("file").and_then(Value::as_str)
    } else {
        None
    }
}

/// Parses a distribution entry named `field`: inline matrix, generator, or
/// file reference.
pub fn parse_distribution(
    field: &str,
    value: &Value,
    base_dir: &Path,
) -> Result<DiscreteJointDistribution, CliError> {
    if let Some(file) = file_reference(value) {
        let path = resolve(base_dir, file);
        let inner = read_json_value(&path)?;
        let dir = path.parent().unwrap_or(base_dir).to_path_buf();
        return parse_distribution(&format!("{field} ({})", path.display()), &inner, &dir);
    }
    let dist = if value.get("generator").is_some() {
        from_value::<DistributionGenerator>(field, value.clone())?.build()
    } else {
        from_value::<DistributionFile>(field, value.clone())?.to_distribution()
    };
    dist.map_err(|e| CliError::core(field, e))
}

/// Parses a metric entry. Generators need the distribution's dimensions.
pub fn parse_metric(
    field: &str,
    value: &Value,
    base_dir: &Path,
    num_cells: usize,
    num_labels: usize,
) -> Result<BiasMetric, CliError> {
    if let Some(file) = file_reference(value) {
        let path = resolve(base_dir, file);
        let inner = read_json_value(&path)?;
        let dir = path.parent().unwrap_or(base_dir).to_path_buf();
        return parse_metric(
            &format!("{field} ({})", path.display()),
            &inner,
            &dir,
            num_cells,
            num_labels,
        );
    }
    let metric = if value.get("generator").is_some() {
        match from_value::<MetricGenerator>(field, value.clone())? {
            MetricGenerator::ClassFraction { target_label } => {
                BiasMetric::class_fraction(num_cells, num_labels, target_label)
            }
        }
    } else {
        BiasMetric::from_rows(&from_value::<MetricFile>(field, value.clone())?.values)
    };
    metric.map_err(|e| CliError::core(field, e))
}

pub fn load_distribution(path: &Path) -> Result<DiscreteJointDistribution, CliError> {
    let value = read_json_value(path)?;
    parse_distribution(
        &path.display().to_string(),
        &value,
        path.parent().unwrap_or(Path::new(".")),
    )
}

pub fn load_metric(path: &Path, num_cells: usize, num_labels: usize) -> Result<BiasMetric, CliError> {
    let value = read_json_value(path)?;
    parse_metric(
        &path.display().to_string(),
        &value,
        path.parent().unwrap_or(Path::new(".")),
        num_cells,
        num_labels,
    )
}
