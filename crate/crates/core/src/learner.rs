//! Tabular learning algorithms mapping a dataset (or, for the population
//! kinds, an exact distribution) to a [`Predictor`].
//!
//! `InterpolatingTable` memorises its training set and answers with a
//! uniformly drawn stored label for the queried cell. On a finite cell space
//! that is exactly the empirical conditional sampler, so it fits the same
//! predictor as `EmpiricalSampler`; the two names are kept apart because
//! they play different roles in experiments (an overfit argmax-style model
//! versus an explicit sampler).
//!
//! Ties in argmax go to the lowest label index.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::distribution::DiscreteJointDistribution;
use crate::error::{Error, Result};
use crate::predictor::Predictor;
use crate::rng::SeedSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LearnerKind {
    EmpiricalArgmax,
    EmpiricalSampler,
    SmoothedSampler,
    InterpolatingTable,
    PopulationArgmax,
    PopulationSampler,
}

impl LearnerKind {
    pub fn is_population(self) -> bool {
        matches!(self, LearnerKind::PopulationArgmax | LearnerKind::PopulationSampler)
    }
}

/// Prediction for cells with no training data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Fallback {
    #[default]
    Uniform,
    /// Point mass on the most frequent label overall.
    GlobalMode,
}

impl Fallback {
    /// The fallback row given overall label weights (counts or masses).
    pub fn row(self, label_weights: &[f64]) -> Vec<f64> {
        let n = label_weights.len();
        match self {
            Fallback::Uniform => vec![1.0 / n as f64; n],
            Fallback::GlobalMode => {
                let mut row = vec![0.0; n];
                row[argmax(label_weights)] = 1.0;
                row
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    /// Laplace pseudo-count, used by `SmoothedSampler` only.
    #[cfg_attr(feature = "serde", serde(default))]
    pub smoothing: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub fallback: Fallback,
}

impl LearnerSpec {
    pub const fn new(kind: LearnerKind) -> Self {
        Self {
            kind,
            smoothing: 0.0,
            fallback: Fallback::Uniform,
        }
    }

    pub const fn smoothed(smoothing: f64) -> Self {
        Self {
            kind: LearnerKind::SmoothedSampler,
            smoothing,
            fallback: Fallback::Uniform,
        }
    }

    pub const fn with_fallback(mut self, fallback: Fallback) -> Self {
        self.fallback = fallback;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind == LearnerKind::SmoothedSampler
            && !(self.smoothing.is_finite() && self.smoothing > 0.0)
        {
            return Err(Error::InvalidLearner(format!(
                "smoothed_sampler needs smoothing > 0, got {}",
                self.smoothing
            )));
        }
        Ok(())
    }
}

/// First index of the maximum.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Fits a dataset learner. Every kind is a deterministic function of the
/// data, so `seed` is accepted for interface stability but not consumed.
pub fn fit(spec: &LearnerSpec, data: &Dataset, _seed: SeedSpec) -> Result<Predictor> {
    if spec.kind.is_population() {
        return Err(Error::InvalidLearner(format!(
            "{:?} fits a distribution, not a dataset; use fit_population",
            spec.kind
        )));
    }
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    fit_counts(spec, &data.counts(), data.num_cells(), data.num_labels())
}

/// Fits a dataset learner from its row-major count matrix.
pub fn fit_counts(
    spec: &LearnerSpec,
    counts: &[u64],
    num_cells: usize,
    num_labels: usize,
) -> Result<Predictor> {
    spec.validate()?;
    if spec.kind.is_population() {
        return Err(Error::InvalidLearner(format!(
            "{:?} fits a distribution, not a dataset; use fit_population",
            spec.kind
        )));
    }
    if counts.len() != num_cells * num_labels {
        return Err(Error::DimensionMismatch {
            expected_cells: num_cells,
            expected_labels: num_labels,
            cells: counts.len() / num_labels.max(1),
            labels: num_labels,
        });
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(Error::EmptyDataset);
    }
    let mut label_totals = vec![0.0; num_labels];
    for row in counts.chunks_exact(num_labels) {
        for (t, &c) in label_totals.iter_mut().zip(row) {
            *t += c as f64;
        }
    }
    let fallback = spec.fallback.row(&label_totals);

    let mut conditional = Vec::with_capacity(counts.len());
    for row in counts.chunks_exact(num_labels) {
        let total: u64 = row.iter().sum();
        if total == 0 {
            conditional.extend_from_slice(&fallback);
            continue;
        }
        match spec.kind {
            LearnerKind::EmpiricalArgmax => {
                let mode = row
                    .iter()
                    .enumerate()
                    .fold(0, |best, (i, &c)| if c > row[best] { i } else { best });
                conditional.extend((0..num_labels).map(|y| if y == mode { 1.0 } else { 0.0 }));
            }
            LearnerKind::EmpiricalSampler | LearnerKind::InterpolatingTable => {
                let t = total as f64;
                conditional.extend(row.iter().map(|&c| c as f64 / t));
            }
            LearnerKind::SmoothedSampler => {
                let s = spec.smoothing;
                let denom = total as f64 + s * num_labels as f64;
                conditional.extend(row.iter().map(|&c| (c as f64 + s) / denom));
            }
            LearnerKind::PopulationArgmax | LearnerKind::PopulationSampler => unreachable!(),
        }
    }
    Ok(Predictor::new_unchecked(num_cells, num_labels, conditional))
}

/// Fits a population learner to the exact distribution.
pub fn fit_population(spec: &LearnerSpec, dist: &DiscreteJointDistribution) -> Result<Predictor> {
    match spec.kind {
        LearnerKind::PopulationSampler => Ok(Predictor::conditional_of(dist, spec.fallback)),
        LearnerKind::PopulationArgmax => {
            let fallback = spec.fallback.row(&dist.label_marginals());
            let mut conditional = Vec::with_capacity(dist.probs().len());
            for x in 0..dist.num_cells() {
                if dist.marginal(x) > 0.0 {
                    let mode = argmax(dist.row(x));
                    conditional
                        .extend((0..dist.num_labels()).map(|y| if y == mode { 1.0 } else { 0.0 }));
                } else {
                    conditional.extend_from_slice(&fallback);
                }
            }
            Ok(Predictor::new_unchecked(
                dist.num_cells(),
                dist.num_labels(),
                conditional,
            ))
        }
        other => Err(Error::InvalidLearner(format!(
            "{other:?} is a dataset learner; use fit"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{empirical_distribution, Provenance};
    use crate::distribution::relabel;

    fn nurse_data() -> Dataset {
        Dataset::from_pairs(1, 2, &[(0, 0), (0, 1), (0, 0)], Provenance::Human).unwrap()
    }

    const SEED: SeedSpec = SeedSpec::new(0, 0);

    #[test]
    fn argmax_predicts_only_nurse() {
        let f = fit(&LearnerSpec::new(LearnerKind::EmpiricalArgmax), &nurse_data(), SEED).unwrap();
        assert_eq!(f.row(0), &[1.0, 0.0]);
        assert!(f.is_deterministic());
    }

    #[test]
    fn sampler_reproduces_two_thirds() {
        let f = fit(&LearnerSpec::new(LearnerKind::EmpiricalSampler), &nurse_data(), SEED).unwrap();
        assert_eq!(f.row(0), &[2.0 / 3.0, 1.0 / 3.0]);
    }

    #[test]
    fn laplace_smoothing() {
        let f = fit(&LearnerSpec::smoothed(1.0), &nurse_data(), SEED).unwrap();
        assert!((f.prob(0, 0) - 0.6).abs() < 1e-15);
        assert!((f.prob(0, 1) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn smoothing_must_be_positive() {
        assert!(fit(&LearnerSpec::smoothed(0.0), &nurse_data(), SEED).is_err());
    }

    #[test]
    fn argmax_tie_goes_to_lowest_label() {
        let d = Dataset::from_pairs(1, 3, &[(0, 2), (0, 1)], Provenance::Human).unwrap();
        let f = fit(&LearnerSpec::new(LearnerKind::EmpiricalArgmax), &d, SEED).unwrap();
        assert_eq!(f.row(0), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn unseen_cells_use_fallback() {
        let d = Dataset::from_pairs(2, 3, &[(0, 2), (0, 2), (0, 1)], Provenance::Human).unwrap();
        let uniform = fit(&LearnerSpec::new(LearnerKind::EmpiricalArgmax), &d, SEED).unwrap();
        assert_eq!(uniform.row(1), &[1.0 / 3.0; 3]);
        let mode = fit(
            &LearnerSpec::new(LearnerKind::EmpiricalSampler).with_fallback(Fallback::GlobalMode),
            &d,
            SEED,
        )
        .unwrap();
        assert_eq!(mode.row(1), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn population_kinds_reject_datasets() {
        for kind in [LearnerKind::PopulationArgmax, LearnerKind::PopulationSampler] {
            assert!(matches!(
                fit(&LearnerSpec::new(kind), &nurse_data(), SEED),
                Err(Error::InvalidLearner(_))
            ));
        }
        let d = DiscreteJointDistribution::uniform(1, 2).unwrap();
        assert!(fit_population(&LearnerSpec::new(LearnerKind::EmpiricalArgmax), &d).is_err());
    }

    #[test]
    fn empty_dataset_rejected() {
        assert_eq!(
            fit(&LearnerSpec::new(LearnerKind::EmpiricalArgmax), &Dataset::new(1, 2), SEED),
            Err(Error::EmptyDataset)
        );
    }

    #[test]
    fn population_fits() {
        let toy = DiscreteJointDistribution::new(1, 2, vec![2.0 / 3.0, 1.0 / 3.0]).unwrap();
        let a = fit_population(&LearnerSpec::new(LearnerKind::PopulationArgmax), &toy).unwrap();
        assert_eq!(a.row(0), &[1.0, 0.0]);

        let tie = DiscreteJointDistribution::uniform(1, 2).unwrap();
        let a = fit_population(&LearnerSpec::new(LearnerKind::PopulationArgmax), &tie).unwrap();
        assert_eq!(a.row(0), &[1.0, 0.0]);

        let d = DiscreteJointDistribution::new(2, 2, vec![0.1, 0.3, 0.35, 0.25]).unwrap();
        let s = fit_population(&LearnerSpec::new(LearnerKind::PopulationSampler), &d).unwrap();
        let r = relabel(&d, &s).unwrap();
        for (a, b) in r.probs().iter().zip(d.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn sampler_reproduces_its_empirical_distribution() {
        let d = Dataset::from_pairs(
            3,
            2,
            &[(0, 0), (0, 1), (0, 1), (2, 0), (1, 1), (2, 0), (2, 1)],
            Provenance::Human,
        )
        .unwrap();
        let f = fit(&LearnerSpec::new(LearnerKind::EmpiricalSampler), &d, SEED).unwrap();
        let e = empirical_distribution(&d).unwrap();
        let r = relabel(&e, &f).unwrap();
        for (a, b) in r.probs().iter().zip(e.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
        let g = fit(&LearnerSpec::new(LearnerKind::InterpolatingTable), &d, SEED).unwrap();
        assert_eq!(f, g);
    }
}
