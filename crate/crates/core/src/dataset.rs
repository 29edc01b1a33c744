use alloc::vec;
use alloc::vec::Vec;

use crate::distribution::{BiasMetric, DiscreteJointDistribution};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Human,
    Model,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Sample {
    pub cell: usize,
    pub label: usize,
    pub provenance: Provenance,
}

/// An ordered multiset of `(cell, label)` samples over fixed dimensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    num_cells: usize,
    num_labels: usize,
    samples: Vec<Sample>,
}

impl Dataset {
    pub fn new(num_cells: usize, num_labels: usize) -> Self {
        Self {
            num_cells,
            num_labels,
            samples: Vec::new(),
        }
    }

    pub fn with_capacity(num_cells: usize, num_labels: usize, capacity: usize) -> Self {
        Self {
            num_cells,
            num_labels,
            samples: Vec::with_capacity(capacity),
        }
    }

    pub fn from_pairs(
        num_cells: usize,
        num_labels: usize,
        pairs: &[(usize, usize)],
        provenance: Provenance,
    ) -> Result<Self> {
        let mut out = Self::with_capacity(num_cells, num_labels, pairs.len());
        for &(cell, label) in pairs {
            out.push(Sample {
                cell,
                label,
                provenance,
            })?;
        }
        Ok(out)
    }

    pub fn push(&mut self, sample: Sample) -> Result<()> {
        if sample.cell >= self.num_cells || sample.label >= self.num_labels {
            return Err(Error::SampleOutOfRange {
                cell: sample.cell,
                label: sample.label,
                num_cells: self.num_cells,
                num_labels: self.num_labels,
            });
        }
        self.samples.push(sample);
        Ok(())
    }

    /// Appends all samples of `other` (the multiset union).
    pub fn extend_from(&mut self, other: &Dataset) -> Result<()> {
        if other.num_cells != self.num_cells || other.num_labels != self.num_labels {
            return Err(Error::DimensionMismatch {
                expected_cells: self.num_cells,
                expected_labels: self.num_labels,
                cells: other.num_cells,
                labels: other.num_labels,
            });
        }
        self.samples.extend_from_slice(&other.samples);
        Ok(())
    }

    pub(crate) fn push_unchecked(&mut self, sample: Sample) {
        self.samples.push(sample);
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn count_provenance(&self, provenance: Provenance) -> usize {
        self.samples.iter().filter(|s| s.provenance == provenance).count()
    }

    /// Row-major `num_cells x num_labels` count matrix.
    pub fn counts(&self) -> Vec<u64> {
        let mut counts = vec![0_u64; self.num_cells * self.num_labels];
        for s in &self.samples {
            counts[s.cell * self.num_labels + s.label] += 1;
        }
        counts
    }

    /// Mean of `φ` over the samples.
    pub fn mean_metric(&self, metric: &BiasMetric) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if metric.num_cells() != self.num_cells || metric.num_labels() != self.num_labels {
            return Err(Error::DimensionMismatch {
                expected_cells: self.num_cells,
                expected_labels: self.num_labels,
                cells: metric.num_cells(),
                labels: metric.num_labels(),
            });
        }
        let total: f64 = self
            .samples
            .iter()
            .map(|s| metric.value(s.cell, s.label))
            .sum();
        Ok(total / self.len() as f64)
    }
}

/// The normalised count matrix of a non-empty dataset.
pub fn empirical_distribution(data: &Dataset) -> Result<DiscreteJointDistribution> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = data.len() as f64;
    let probs = data.counts().into_iter().map(|c| c as f64 / n).collect();
    DiscreteJointDistribution::new(data.num_cells, data.num_labels, probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::mixture;

    #[test]
    fn single_sample_is_point_mass() {
        let d = Dataset::from_pairs(2, 2, &[(0, 0)], Provenance::Human).unwrap();
        let e = empirical_distribution(&d).unwrap();
        assert_eq!(e.probs(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn direct_normalisation() {
        let d = Dataset::from_pairs(1, 2, &[(0, 0), (0, 1), (0, 0)], Provenance::Human).unwrap();
        let e = empirical_distribution(&d).unwrap();
        assert_eq!(e.probs(), &[2.0 / 3.0, 1.0 / 3.0]);
    }

    #[test]
    fn union_is_size_weighted_mixture() {
        let a = Dataset::from_pairs(2, 2, &[(0, 0), (1, 1), (0, 1)], Provenance::Human).unwrap();
        let b = Dataset::from_pairs(2, 2, &[(1, 0)], Provenance::Model).unwrap();
        let mut u = a.clone();
        u.extend_from(&b).unwrap();
        let ea = empirical_distribution(&a).unwrap();
        let eb = empirical_distribution(&b).unwrap();
        let mix = mixture(&[&ea, &eb], &[0.75, 0.25]).unwrap();
        let eu = empirical_distribution(&u).unwrap();
        for (x, y) in eu.probs().iter().zip(mix.probs()) {
            assert!((x - y).abs() < 1e-15);
        }
        assert_eq!(u.count_provenance(Provenance::Model), 1);
    }

    #[test]
    fn empty_dataset_errors() {
        assert_eq!(
            empirical_distribution(&Dataset::new(1, 2)),
            Err(Error::EmptyDataset)
        );
    }

    #[test]
    fn out_of_range_sample_rejected() {
        assert!(Dataset::from_pairs(1, 2, &[(0, 2)], Provenance::Human).is_err());
        assert!(Dataset::from_pairs(1, 2, &[(1, 0)], Provenance::Human).is_err());
    }
}
