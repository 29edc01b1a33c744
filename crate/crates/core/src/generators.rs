//! Parametric distribution families.

use alloc::format;
use alloc::vec::Vec;

use crate::distribution::DiscreteJointDistribution;
use crate::error::{Error, Result};

/// A label-imbalanced classification problem over a finite cell space.
///
/// Labels follow a prior `π` with `π[majority_label] = majority_prob` and
/// the remaining mass split evenly. Every label owns `cells_per_label` cells
/// (its "signal" cells), and each cell `c` with signal label `s(c)` has
///
/// ```text
/// p(y | c) = cell_noise * π(y) + (1 - cell_noise) * 1{y = s(c)}
/// p(c)     = π(s(c)) / cells_per_label
/// ```
///
/// so the label marginal is exactly `π` for any noise level. With high
/// noise, the majority label is a close runner-up in minority cells: the
/// Bayes-optimal argmax still predicts the majority at its prior rate, while
/// an argmax fitted on a few samples per cell over-predicts it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabelImbalance {
    pub num_labels: usize,
    pub majority_label: usize,
    pub majority_prob: f64,
    pub cell_noise: f64,
    pub cells_per_label: usize,
}

impl LabelImbalance {
    pub const DEFAULT_CELLS_PER_LABEL: usize = 50;

    pub fn prior(&self) -> Vec<f64> {
        let other = if self.num_labels > 1 {
            (1.0 - self.majority_prob) / (self.num_labels - 1) as f64
        } else {
            0.0
        };
        (0..self.num_labels)
            .map(|y| if y == self.majority_label { self.majority_prob } else { other })
            .collect()
    }

    /// Signal label of a cell.
    pub fn signal_label(&self, cell: usize) -> usize {
        cell / self.cells_per_label
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &'static str, reason: &str| {
            Err(Error::InvalidDistribution(format!("label_imbalance.{field}: {reason}")))
        };
        if self.num_labels < 2 {
            return bad("num_labels", "needs at least 2 labels");
        }
        if self.majority_label >= self.num_labels {
            return bad("majority_label", "outside the label range");
        }
        if !(self.majority_prob > 0.0 && self.majority_prob < 1.0) {
            return bad("majority_prob", "must lie in (0, 1)");
        }
        if !(0.0..=1.0).contains(&self.cell_noise) {
            return bad("cell_noise", "must lie in [0, 1]");
        }
        if self.cells_per_label == 0 {
            return bad("cells_per_label", "must be positive");
        }
        Ok(())
    }

    pub fn build(&self) -> Result<DiscreteJointDistribution> {
        self.validate()?;
        let prior = self.prior();
        let num_cells = self.num_labels * self.cells_per_label;
        let mut probs = Vec::with_capacity(num_cells * self.num_labels);
        for cell in 0..num_cells {
            let signal = self.signal_label(cell);
            let mass = prior[signal] / self.cells_per_label as f64;
            probs.extend(prior.iter().enumerate().map(|(y, &p)| {
                let cond = self.cell_noise * p
                    + if y == signal { 1.0 - self.cell_noise } else { 0.0 };
                mass * cond
            }));
        }
        DiscreteJointDistribution::new(num_cells, self.num_labels, probs)
    }
}
