use alloc::format;
use alloc::vec::Vec;

use crate::distribution::{expectation, relabeled_expectation, BiasMetric, DiscreteJointDistribution};
use crate::error::{Error, Result};
use crate::feedback::{initial_dataset, MeanStd};
use crate::learner::{fit_counts, fit_population, LearnerSpec};
use crate::predictor::Predictor;
use crate::rng::SeedSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationEstimate {
    /// Mean of the signed gap `Qφ - Q̂(f)φ` over replicates.
    pub signed_mean: f64,
    /// Standard error of `signed_mean`; 0 for exact (population) fits.
    pub stderr: f64,
    /// `|signed_mean|`.
    pub absolute: f64,
    pub replicates: usize,
}

impl CalibrationEstimate {
    fn exact(gap: f64) -> Self {
        Self {
            signed_mean: gap,
            stderr: 0.0,
            absolute: gap.abs(),
            replicates: 1,
        }
    }

    pub(crate) fn from_gaps(gaps: &[f64]) -> Self {
        let s = MeanStd::from_values(gaps);
        Self {
            signed_mean: s.mean,
            stderr: s.stderr(),
            absolute: s.mean.abs(),
            replicates: gaps.len(),
        }
    }
}

/// Fits `learner` on replicate `r`'s size-`n` draw from `q`, or exactly on
/// `q` for population kinds.
pub(crate) fn fit_replicate(
    learner: &LearnerSpec,
    q: &DiscreteJointDistribution,
    n: usize,
    seed: u64,
    r: u64,
) -> Result<Predictor> {
    if learner.kind.is_population() {
        return fit_population(learner, q);
    }
    let data = initial_dataset(q, n, SeedSpec::new(seed, r));
    fit_counts(learner, &data.counts(), q.num_cells(), q.num_labels())
}

/// Monte Carlo estimate of `E_{S ~ Q^n, f ~ A(S)}[Qφ - Q̂(f)φ]`.
///
/// Population learners are evaluated exactly and `replicates` is ignored.
pub fn estimate_calibration_error(
    learner: &LearnerSpec,
    q: &DiscreteJointDistribution,
    metric: &BiasMetric,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<CalibrationEstimate> {
    learner.validate()?;
    q.check_dims(metric.num_cells(), metric.num_labels())?;
    if n == 0 {
        return Err(Error::config("n", "must be at least 1"));
    }
    let q_bias = expectation(q, metric)?;
    if learner.kind.is_population() {
        let f = fit_population(learner, q)?;
        return Ok(CalibrationEstimate::exact(
            q_bias - relabeled_expectation(q, &f, metric)?,
        ));
    }
    if replicates == 0 {
        return Err(Error::config("replicates", "must be at least 1"));
    }
    let gaps = (0..replicates as u64)
        .map(|r| {
            let f = fit_replicate(learner, q, n, seed, r)?;
            Ok(q_bias - relabeled_expectation(q, &f, metric)?)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CalibrationEstimate::from_gaps(&gaps))
}

/// Calibration error over a grid of training-set sizes, for inspecting
/// whether `δ_n` is non-increasing in `n`.
pub fn calibration_by_size(
    learner: &LearnerSpec,
    q: &DiscreteJointDistribution,
    metric: &BiasMetric,
    sizes: &[usize],
    replicates: usize,
    seed: u64,
) -> Result<Vec<(usize, CalibrationEstimate)>> {
    sizes
        .iter()
        .map(|&n| Ok((n, estimate_calibration_error(learner, q, metric, n, replicates, seed)?)))
        .collect()
}

/// Largest absolute calibration error over a user-supplied family of joints
/// sharing one covariate marginal. Returns the index of the worst member.
///
/// This is a search over the family only; it says nothing about joints
/// outside it.
pub fn worst_case_calibration(
    learner: &LearnerSpec,
    family: &[DiscreteJointDistribution],
    metric: &BiasMetric,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<(usize, CalibrationEstimate)> {
    let first = family
        .first()
        .ok_or_else(|| Error::config("family", "needs at least one distribution"))?;
    let marginal = first.marginals();
    let mut worst: Option<(usize, CalibrationEstimate)> = None;
    for (i, q) in family.iter().enumerate() {
        first.check_dims(q.num_cells(), q.num_labels())?;
        if q
            .marginals()
            .iter()
            .zip(&marginal)
            .any(|(a, b)| (a - b).abs() > crate::MASS_TOLERANCE)
        {
            return Err(Error::config(
                "family",
                format!("member {i} has a different covariate marginal"),
            ));
        }
        let est = estimate_calibration_error(learner, q, metric, n, replicates, seed)?;
        if worst.is_none_or(|(_, w)| est.absolute > w.absolute) {
            worst = Some((i, est));
        }
    }
    Ok(worst.expect("family is non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::LearnerKind;
    use alloc::vec;

    fn toy() -> DiscreteJointDistribution {
        DiscreteJointDistribution::new(1, 2, vec![2.0 / 3.0, 1.0 / 3.0]).unwrap()
    }

    fn nurse() -> BiasMetric {
        BiasMetric::class_fraction(1, 2, 0).unwrap()
    }

    #[test]
    fn population_sampler_is_calibrated() {
        let q = DiscreteJointDistribution::new(2, 3, vec![0.1, 0.05, 0.2, 0.3, 0.25, 0.1]).unwrap();
        let m = BiasMetric::new(2, 3, vec![1.0, -2.0, 0.5, 3.0, 0.0, 1.0]).unwrap();
        let e = estimate_calibration_error(
            &LearnerSpec::new(LearnerKind::PopulationSampler),
            &q,
            &m,
            10,
            1,
            0,
        )
        .unwrap();
        assert!(e.absolute < 1e-15);
        assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn population_argmax_toy_gap() {
        let e = estimate_calibration_error(
            &LearnerSpec::new(LearnerKind::PopulationArgmax),
            &toy(),
            &nurse(),
            1,
            1,
            0,
        )
        .unwrap();
        assert!((e.signed_mean + 1.0 / 3.0).abs() < 1e-15);
        assert!((e.absolute - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn empirical_argmax_three_draws() {
        // Exact: 2/3 - P(at least 2 of 3 draws are nurses) = 2/3 - 20/27.
        let exact = 2.0 / 3.0 - 20.0 / 27.0;
        let e = estimate_calibration_error(
            &LearnerSpec::new(LearnerKind::EmpiricalArgmax),
            &toy(),
            &nurse(),
            3,
            200_000,
            17,
        )
        .unwrap();
        assert!(e.signed_mean < 0.0);
        assert!(
            (e.signed_mean - exact).abs() < 3.0 * e.stderr,
            "{} vs {exact} (se {})",
            e.signed_mean,
            e.stderr
        );
        assert!((e.absolute - 2.0 / 27.0).abs() < 3.0 * e.stderr);
    }

    #[test]
    fn absolute_value_is_taken_after_averaging() {
        // Per-replicate gaps of the empirical sampler on one cell are
        // symmetric around zero, so averaging first gives a much smaller
        // number than averaging absolute gaps.
        let q = DiscreteJointDistribution::uniform(1, 2).unwrap();
        let e = estimate_calibration_error(
            &LearnerSpec::new(LearnerKind::EmpiricalSampler),
            &q,
            &BiasMetric::class_fraction(1, 2, 0).unwrap(),
            5,
            4000,
            3,
        )
        .unwrap();
        assert!(e.absolute < 4.0 * e.stderr);
        assert!(e.absolute < 0.02);
    }

    #[test]
    fn size_grid_and_worst_case() {
        let learner = LearnerSpec::new(LearnerKind::EmpiricalArgmax);
        let grid = calibration_by_size(&learner, &toy(), &nurse(), &[1, 5, 25], 2000, 9).unwrap();
        assert_eq!(grid.len(), 3);
        // One draw makes the argmax a sampler; more draws lock onto the
        // majority, so δ_n grows with n here.
        assert!(grid[0].1.absolute < 3.0 * grid[0].1.stderr);
        assert!(grid[2].1.absolute > grid[1].1.absolute);

        let family = [
            DiscreteJointDistribution::new(1, 2, vec![0.5, 0.5]).unwrap(),
            DiscreteJointDistribution::new(1, 2, vec![0.8, 0.2]).unwrap(),
        ];
        let argmax = LearnerSpec::new(LearnerKind::PopulationArgmax);
        let (i, w) = worst_case_calibration(&argmax, &family, &nurse(), 1, 1, 0).unwrap();
        assert_eq!(i, 0);
        assert!((w.absolute - 0.5).abs() < 1e-15);

        let mismatched = [
            DiscreteJointDistribution::new(2, 2, vec![0.25, 0.25, 0.25, 0.25]).unwrap(),
            DiscreteJointDistribution::new(2, 2, vec![0.5, 0.25, 0.25, 0.0]).unwrap(),
        ];
        let m = BiasMetric::class_fraction(2, 2, 0).unwrap();
        assert!(worst_case_calibration(&argmax, &mismatched, &m, 1, 1, 0).is_err());
    }
}
