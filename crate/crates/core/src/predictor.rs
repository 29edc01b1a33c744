use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::distribution::DiscreteJointDistribution;
use crate::error::{Error, Result};
use crate::learner::Fallback;
use crate::MASS_TOLERANCE;

/// A conditional labeler `f(y | x)`; each row is a probability vector.
///
/// Argmax predictors have point-mass rows and report
/// [`is_deterministic`](Predictor::is_deterministic).
#[derive(Debug, Clone, PartialEq)]
pub struct Predictor {
    num_cells: usize,
    num_labels: usize,
    conditional: Vec<f64>,
    deterministic: bool,
}

impl Predictor {
    pub fn new(num_cells: usize, num_labels: usize, conditional: Vec<f64>) -> Result<Self> {
        if num_cells == 0 || num_labels == 0 || conditional.len() != num_cells * num_labels {
            return Err(Error::InvalidPredictor(format!(
                "expected {num_cells}x{num_labels} entries, found {}",
                conditional.len()
            )));
        }
        for (x, row) in conditional.chunks_exact(num_labels).enumerate() {
            if row.iter().any(|q| !(0.0..=1.0).contains(q)) {
                return Err(Error::InvalidPredictor(format!(
                    "row {x} has an entry outside [0, 1]"
                )));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > MASS_TOLERANCE {
                return Err(Error::InvalidPredictor(format!(
                    "row {x} sums to {total}"
                )));
            }
        }
        Ok(Self::new_unchecked(num_cells, num_labels, conditional))
    }

    pub(crate) fn new_unchecked(num_cells: usize, num_labels: usize, conditional: Vec<f64>) -> Self {
        let deterministic = conditional
            .chunks_exact(num_labels)
            .all(|row| row.iter().filter(|&&q| q == 1.0).count() == 1);
        Self {
            num_cells,
            num_labels,
            conditional,
            deterministic,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let num_labels = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != num_labels) {
            return Err(Error::InvalidPredictor("ragged rows".into()));
        }
        Self::new(rows.len(), num_labels, rows.concat())
    }

    /// One point mass per cell, on `labels[cell]`.
    pub fn point_masses(num_labels: usize, labels: &[usize]) -> Result<Self> {
        let mut conditional = vec![0.0; labels.len() * num_labels];
        for (x, &y) in labels.iter().enumerate() {
            if y >= num_labels {
                return Err(Error::InvalidPredictor(format!(
                    "label {y} for cell {x} outside {num_labels} labels"
                )));
            }
            conditional[x * num_labels + y] = 1.0;
        }
        Self::new(labels.len(), num_labels, conditional)
    }

    pub fn uniform(num_cells: usize, num_labels: usize) -> Self {
        Self::new_unchecked(
            num_cells,
            num_labels,
            vec![1.0 / num_labels as f64; num_cells * num_labels],
        )
    }

    /// The exact conditional `p(y | x)` of `dist`. Zero-mass cells, where the
    /// conditional is undefined, get the fallback row.
    pub fn conditional_of(dist: &DiscreteJointDistribution, fallback: Fallback) -> Self {
        let num_labels = dist.num_labels();
        let fallback_row = fallback.row(&dist.label_marginals());
        let mut conditional = Vec::with_capacity(dist.probs().len());
        for x in 0..dist.num_cells() {
            match dist.conditional(x) {
                Some(row) => conditional.extend(row),
                None => conditional.extend_from_slice(&fallback_row),
            }
        }
        Self::new_unchecked(dist.num_cells(), num_labels, conditional)
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn conditional(&self) -> &[f64] {
        &self.conditional
    }

    pub fn row(&self, cell: usize) -> &[f64] {
        &self.conditional[cell * self.num_labels..(cell + 1) * self.num_labels]
    }

    pub fn prob(&self, cell: usize, label: usize) -> f64 {
        self.conditional[cell * self.num_labels + label]
    }

    /// True when every row is a point mass.
    pub fn is_deterministic(&self) -> bool {
        self.deterministic
    }

    /// `Σ_x p(x) Σ_y f(y | x) p(y | x)`, i.e. `Σ_{x,y} f(y|x) p(x, y)`.
    pub fn accuracy(&self, dist: &DiscreteJointDistribution) -> Result<f64> {
        dist.check_dims(self.num_cells, self.num_labels)?;
        Ok(self
            .conditional
            .iter()
            .zip(dist.probs())
            .map(|(q, p)| q * p)
            .sum())
    }
}
