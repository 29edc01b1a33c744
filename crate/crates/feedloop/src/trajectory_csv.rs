//! Trajectory CSV schema.
//!
//! One row per round with the header [`HEADER`]. Floats use 17 significant
//! digits so a write/parse round trip is exact. The three bound columns are
//! optional: a field is empty when the value is absent (bounds disabled, no
//! `delta0`, or a vacuous simplified bound when `m = 0`). Readers also
//! accept files that omit those columns entirely.

use std::path::Path;

use feedloop_core::analysis::BoundCurve;
use feedloop_core::RoundSummary;

use crate::error::CliError;
use crate::fsutil::fmt_f64;

pub const HEADER: [&str; 11] = [
    "round",
    "n_t",
    "bias_model_mean",
    "bias_model_std",
    "bias_dataset_mean",
    "bias_dataset_std",
    "accuracy_mean",
    "accuracy_std",
    "bound_exact",
    "bound_simplified",
    "delta0",
];

const REQUIRED: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub round: usize,
    pub n_t: usize,
    pub bias_model_mean: f64,
    pub bias_model_std: f64,
    pub bias_dataset_mean: f64,
    pub bias_dataset_std: f64,
    pub accuracy_mean: f64,
    pub accuracy_std: f64,
    pub bound_exact: Option<f64>,
    pub bound_simplified: Option<f64>,
    pub delta0: Option<f64>,
}

impl TrajectoryRow {
    fn fields(&self) -> [String; 11] {
        let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
        [
            self.round.to_string(),
            self.n_t.to_string(),
            fmt_f64(self.bias_model_mean),
            fmt_f64(self.bias_model_std),
            fmt_f64(self.bias_dataset_mean),
            fmt_f64(self.bias_dataset_std),
            fmt_f64(self.accuracy_mean),
            fmt_f64(self.accuracy_std),
            opt(self.bound_exact),
            opt(self.bound_simplified),
            opt(self.delta0),
        ]
    }
}

/// Joins per-round summaries with an optional bound curve. Rounds beyond
/// the curve get empty bound fields.
pub fn rows_from(summaries: &[RoundSummary], bounds: Option<&BoundCurve>) -> Vec<TrajectoryRow> {
    summaries
        .iter()
        .map(|s| {
            let point = bounds.and_then(|b| b.points.get(s.round).map(|p| (b.delta0, p)));
            TrajectoryRow {
                round: s.round,
                n_t: s.n_t,
                bias_model_mean: s.model_bias.mean,
                bias_model_std: s.model_bias.std,
                bias_dataset_mean: s.dataset_bias.mean,
                bias_dataset_std: s.dataset_bias.std,
                accuracy_mean: s.accuracy.mean,
                accuracy_std: s.accuracy.std,
                bound_exact: point.map(|(_, p)| p.bound_exact),
                bound_simplified: point.and_then(|(_, p)| p.bound_simplified),
                delta0: point.map(|(d, _)| d),
            }
        })
        .collect()
}

pub fn to_bytes(rows: &[TrajectoryRow]) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    // Writing into a Vec cannot fail.
    w.write_record(HEADER).expect("in-memory write");
    for row in rows {
        w.write_record(row.fields()).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn parse_bytes(bytes: &[u8], path: &Path) -> Result<Vec<TrajectoryRow>, CliError> {
    let bad = |reason: String| CliError::Csv {
        path: path.to_path_buf(),
        reason,
    };
    let mut r = csv::ReaderBuilder::new().from_reader(bytes);
    let headers = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    let mut index = [None; 11];
    for (i, name) in headers.iter().enumerate() {
        match HEADER.iter().position(|h| *h == name) {
            Some(j) if index[j].is_none() => index[j] = Some(i),
            Some(_) => return Err(bad(format!("duplicate column `{name}`"))),
            None => return Err(bad(format!("unknown column `{name}`"))),
        }
    }
    if let Some(j) = (0..REQUIRED).find(|&j| index[j].is_none()) {
        return Err(bad(format!("missing column `{}`", HEADER[j])));
    }

    let mut rows = Vec::new();
    for (line, record) in r.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        let raw = |j: usize| index[j].and_then(|i| record.get(i)).unwrap_or("");
        let float = |j: usize| -> Result<f64, CliError> {
            raw(j).parse::<f64>().map_err(|_| {
                bad(format!("row {}: `{}` is not a number: {:?}", line + 1, HEADER[j], raw(j)))
            })
        };
        let count = |j: usize| -> Result<usize, CliError> {
            raw(j).parse::<usize>().map_err(|_| {
                bad(format!("row {}: `{}` is not a count: {:?}", line + 1, HEADER[j], raw(j)))
            })
        };
        let optional = |j: usize| -> Result<Option<f64>, CliError> {
            if raw(j).is_empty() {
                Ok(None)
            } else {
                float(j).map(Some)
            }
        };
        rows.push(TrajectoryRow {
            round: count(0)?,
            n_t: count(1)?,
            bias_model_mean: float(2)?,
            bias_model_std: float(3)?,
            bias_dataset_mean: float(4)?,
            bias_dataset_std: float(5)?,
            accuracy_mean: float(6)?,
            accuracy_std: float(7)?,
            bound_exact: optional(8)?,
            bound_simplified: optional(9)?,
            delta0: optional(10)?,
        });
    }
    Ok(rows)
}

pub fn read(path: &Path) -> Result<Vec<TrajectoryRow>, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    parse_bytes(&bytes, path)
}
