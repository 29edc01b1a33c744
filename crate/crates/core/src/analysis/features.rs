use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::distribution::{BiasMetric, DiscreteJointDistribution};
use crate::error::{Error, Result};
use crate::feedback::MeanStd;
use crate::learner::LearnerSpec;
use crate::rng::SeedSpec;

use super::calibration::{estimate_calibration_error, fit_replicate, CalibrationEstimate};

/// A coarsening `L` of the cell space into `num_parts` parts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<usize>,
    num_parts: usize,
}

impl Partition {
    pub fn new(assignment: Vec<usize>, num_parts: usize) -> Result<Self> {
        if assignment.is_empty() || num_parts == 0 {
            return Err(Error::InvalidPartition(
                "needs at least one cell and one part".into(),
            ));
        }
        if let Some((cell, part)) = assignment.iter().enumerate().find(|(_, &p)| p >= num_parts) {
            return Err(Error::InvalidPartition(format!(
                "cell {cell} assigned to part {part}, but there are {num_parts} parts"
            )));
        }
        Ok(Self {
            assignment,
            num_parts,
        })
    }

    pub fn identity(num_cells: usize) -> Result<Self> {
        Self::new((0..num_cells).collect(), num_cells)
    }

    pub fn single(num_cells: usize) -> Result<Self> {
        Self::new(vec![0; num_cells], 1)
    }

    pub fn num_cells(&self) -> usize {
        self.assignment.len()
    }

    pub fn num_parts(&self) -> usize {
        self.num_parts
    }

    pub fn part(&self, cell: usize) -> usize {
        self.assignment[cell]
    }

    /// `P̂(L)`: covariates from `marginal`, labeled by their part.
    pub fn relabeling(&self, marginal: &[f64]) -> Result<DiscreteJointDistribution> {
        if marginal.len() != self.num_cells() {
            return Err(Error::InvalidPartition(format!(
                "partition covers {} cells, marginal has {}",
                self.num_cells(),
                marginal.len()
            )));
        }
        let mut probs = vec![0.0; self.num_cells() * self.num_parts];
        for (x, &p) in marginal.iter().enumerate() {
            probs[x * self.num_parts + self.part(x)] = p;
        }
        DiscreteJointDistribution::new(self.num_cells(), self.num_parts, probs)
    }

    /// `φ(x, y) = T(L(x), y)` for a test `T` over `num_parts x num_labels`.
    pub fn compose(&self, test: &BiasMetric) -> Result<BiasMetric> {
        if test.num_cells() != self.num_parts {
            return Err(Error::InvalidPartition(format!(
                "test is defined on {} parts, partition has {}",
                test.num_cells(),
                self.num_parts
            )));
        }
        let values = (0..self.num_cells())
            .flat_map(|x| test.row(self.part(x)).iter().copied())
            .collect();
        BiasMetric::new(self.num_cells(), test.num_labels(), values)
    }
}

/// Monte Carlo estimate of `1 - P[f(x) = L(x)]` where `f` is fitted on `n`
/// draws from `P̂(L)` and `x ~ p(x)`. Each trial measures the exact
/// misclassification mass `Σ_x p(x) (1 - f(L(x) | x))`.
pub fn estimate_distinguishability(
    partition: &Partition,
    learner: &LearnerSpec,
    marginal: &[f64],
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<MeanStd> {
    learner.validate()?;
    if trials == 0 {
        return Err(Error::config("trials", "must be at least 1"));
    }
    if n == 0 && !learner.kind.is_population() {
        return Err(Error::config("n", "must be at least 1"));
    }
    let coarse = partition.relabeling(marginal)?;
    let errors = (0..trials as u64)
        .map(|r| {
            let f = fit_replicate(learner, &coarse, n, seed, r)?;
            Ok(marginal
                .iter()
                .enumerate()
                .map(|(x, p)| p * (1.0 - f.prob(x, partition.part(x))))
                .sum())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(MeanStd::from_values(&errors))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureCalibrationReport {
    /// Estimate of `E[T(L(x), y) - T(L(x), f(x))]`, computed on the
    /// coarsened `(part, label)` tables.
    pub feature: CalibrationEstimate,
    /// The same quantity through the calibration estimator with
    /// `φ(x, y) = T(L(x), y)`, on an independent seed.
    pub via_metric: CalibrationEstimate,
    /// Whether the two signed means agree within three combined standard
    /// errors.
    pub agrees: bool,
}

impl FeatureCalibrationReport {
    /// The feature-calibration discrepancy, `|signed mean|`.
    pub fn discrepancy(&self) -> f64 {
        self.feature.absolute
    }
}

/// Seed used for the calibration-route half of [`feature_calibration_test`].
pub(crate) fn cross_check_seed(seed: u64) -> u64 {
    SeedSpec::new(seed, u64::MAX).seed()
}

/// Feature calibration of `learner` at the resolution of `partition`,
/// cross-checked against the calibration error of the composed metric.
pub fn feature_calibration_test(
    partition: &Partition,
    test: &BiasMetric,
    learner: &LearnerSpec,
    q: &DiscreteJointDistribution,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<FeatureCalibrationReport> {
    learner.validate()?;
    if partition.num_cells() != q.num_cells() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} cells, distribution has {}",
            partition.num_cells(),
            q.num_cells()
        )));
    }
    if test.num_labels() != q.num_labels() || test.num_cells() != partition.num_parts() {
        return Err(Error::DimensionMismatch {
            expected_cells: partition.num_parts(),
            expected_labels: q.num_labels(),
            cells: test.num_cells(),
            labels: test.num_labels(),
        });
    }
    if n == 0 {
        return Err(Error::config("n", "must be at least 1"));
    }
    let labels = q.num_labels();
    let parts = partition.num_parts();

    // (part, label) table of the data distribution.
    let mut coarse_q = vec![0.0; parts * labels];
    for x in 0..q.num_cells() {
        let base = partition.part(x) * labels;
        for (y, p) in q.row(x).iter().enumerate() {
            coarse_q[base + y] += p;
        }
    }
    let data_side: f64 = coarse_q.iter().zip(test.values()).map(|(p, t)| p * t).sum();
    let marginal = q.marginals();

    let trials = if learner.kind.is_population() { 1 } else { replicates.max(1) };
    let mut gaps = Vec::with_capacity(trials);
    let mut coarse_f = vec![0.0; parts * labels];
    for r in 0..trials as u64 {
        let f = fit_replicate(learner, q, n, seed, r)?;
        coarse_f.iter_mut().for_each(|v| *v = 0.0);
        for (x, px) in marginal.iter().enumerate() {
            if *px == 0.0 {
                continue;
            }
            let base = partition.part(x) * labels;
            for (y, fy) in f.row(x).iter().enumerate() {
                coarse_f[base + y] += px * fy;
            }
        }
        let model_side: f64 = coarse_f.iter().zip(test.values()).map(|(p, t)| p * t).sum();
        gaps.push(data_side - model_side);
    }
    let feature = if learner.kind.is_population() {
        let g = gaps[0];
        CalibrationEstimate {
            signed_mean: g,
            stderr: 0.0,
            absolute: g.abs(),
            replicates: 1,
        }
    } else {
        CalibrationEstimate::from_gaps(&gaps)
    };

    let composed = partition.compose(test)?;
    let via_metric = estimate_calibration_error(
        learner,
        q,
        &composed,
        n,
        replicates,
        cross_check_seed(seed),
    )?;
    let combined = libm::sqrt(feature.stderr * feature.stderr + via_metric.stderr * via_metric.stderr);
    let agrees = (feature.signed_mean - via_metric.signed_mean).abs() <= 3.0 * combined + 1e-12;
    Ok(FeatureCalibrationReport {
        feature,
        via_metric,
        agrees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::LearnerKind;

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![0, 2], 2).is_err());
        assert!(Partition::new(vec![], 1).is_err());
        let p = Partition::new(vec![1, 0, 1], 2).unwrap();
        assert_eq!(p.part(2), 1);
        assert!(p.relabeling(&[0.5, 0.5]).is_err());
    }

    #[test]
    fn single_part_is_perfectly_distinguishable() {
        let p = Partition::single(3).unwrap();
        for kind in [LearnerKind::EmpiricalArgmax, LearnerKind::EmpiricalSampler] {
            let d = estimate_distinguishability(
                &p,
                &LearnerSpec::new(kind),
                &[0.2, 0.3, 0.5],
                4,
                50,
                1,
            )
            .unwrap();
            assert_eq!(d.mean, 0.0);
        }
    }

    #[test]
    fn population_argmax_distinguishes_identity() {
        let p = Partition::identity(3).unwrap();
        let d = estimate_distinguishability(
            &p,
            &LearnerSpec::new(LearnerKind::PopulationArgmax),
            &[0.2, 0.3, 0.5],
            1,
            1,
            0,
        )
        .unwrap();
        assert_eq!(d.mean, 0.0);
    }

    #[test]
    fn compose_matches_manual_metric() {
        let p = Partition::new(vec![1, 0, 1], 2).unwrap();
        let t = BiasMetric::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let phi = p.compose(&t).unwrap();
        assert_eq!(phi.values(), &[3.0, 4.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn sampler_and_constant_tests_give_zero() {
        let q = DiscreteJointDistribution::new(3, 2, vec![0.1, 0.2, 0.3, 0.1, 0.15, 0.15]).unwrap();
        let p = Partition::new(vec![0, 0, 1], 2).unwrap();
        let t = BiasMetric::new(2, 2, vec![1.0, -1.0, 0.5, 2.0]).unwrap();
        let r = feature_calibration_test(
            &p,
            &t,
            &LearnerSpec::new(LearnerKind::PopulationSampler),
            &q,
            5,
            1,
            0,
        )
        .unwrap();
        assert!(r.discrepancy() < 1e-15);
        assert!(r.agrees);

        let c = BiasMetric::constant(2, 2, 0.7).unwrap();
        let r = feature_calibration_test(
            &p,
            &c,
            &LearnerSpec::new(LearnerKind::EmpiricalArgmax),
            &q,
            5,
            100,
            4,
        )
        .unwrap();
        assert!(r.discrepancy() < 1e-12);
    }

    #[test]
    fn nurse_toy_feature_gap() {
        let q = DiscreteJointDistribution::new(1, 2, vec![2.0 / 3.0, 1.0 / 3.0]).unwrap();
        let p = Partition::single(1).unwrap();
        let t = BiasMetric::class_fraction(1, 2, 0).unwrap();
        let r = feature_calibration_test(
            &p,
            &t,
            &LearnerSpec::new(LearnerKind::PopulationArgmax),
            &q,
            1,
            1,
            0,
        )
        .unwrap();
        assert!((r.discrepancy() - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.via_metric.absolute - 1.0 / 3.0).abs() < 1e-15);
        assert!(r.agrees);
    }
}
