//! Exhaustive enumeration of the accumulate-mode feedback process for tiny
//! configurations.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::distribution::{relabel, relabeled_expectation, BiasMetric, DiscreteJointDistribution};
use crate::error::{Error, Result};
use crate::learner::{fit_counts, LearnerSpec};

pub const ORACLE_MAX_SAMPLES: usize = 12;
pub const ORACLE_MAX_ROUNDS: usize = 2;

type States = BTreeMap<Vec<u8>, f64>;

/// Adds one draw from `probs` to every state.
fn add_draw(states: &States, probs: &[f64]) -> States {
    let mut next = States::new();
    for (state, &w) in states {
        for (i, &p) in probs.iter().enumerate() {
            if p > 0.0 {
                let mut s = state.clone();
                s[i] += 1;
                *next.entry(s).or_insert(0.0) += w * p;
            }
        }
    }
    next
}

fn as_counts(state: &[u8]) -> Vec<u64> {
    state.iter().map(|&c| u64::from(c)).collect()
}

/// Exact `E[P̂_0(f_t) φ]` under accumulate-mode feedback, obtained by
/// summing over every dataset realisation weighted by its probability.
///
/// Datasets are tracked as count matrices, which is all a tabular learner
/// sees. Limited to `n_t <= 12` samples and `t <= 2` rounds.
#[allow(clippy::too_many_arguments)]
pub fn brute_force_expected_bias(
    p0: &DiscreteJointDistribution,
    learner: &LearnerSpec,
    metric: &BiasMetric,
    n0: usize,
    m: usize,
    k: usize,
    t: usize,
) -> Result<f64> {
    learner.validate()?;
    if learner.kind.is_population() {
        return Err(Error::InvalidLearner(
            "the oracle enumerates datasets; population learners have nothing to enumerate".into(),
        ));
    }
    p0.check_dims(metric.num_cells(), metric.num_labels())?;
    let n_t = n0 + t * (m + k);
    if t > ORACLE_MAX_ROUNDS || n_t > ORACLE_MAX_SAMPLES {
        return Err(Error::EnumerationLimit(format!(
            "t = {t}, n_t = {n_t}; limits are t <= {ORACLE_MAX_ROUNDS}, n_t <= {ORACLE_MAX_SAMPLES}"
        )));
    }
    if n0 == 0 {
        return Err(Error::config("n0", "must be at least 1"));
    }
    let (cells, labels) = (p0.num_cells(), p0.num_labels());

    let mut states = States::new();
    states.insert(vec![0; cells * labels], 1.0);
    for _ in 0..n0 {
        states = add_draw(&states, p0.probs());
    }
    for _ in 1..=t {
        let mut next = States::new();
        for (state, w) in states {
            let f = fit_counts(learner, &as_counts(&state), cells, labels)?;
            let model = relabel(p0, &f)?;
            let mut local = States::new();
            local.insert(state, w);
            for _ in 0..m {
                local = add_draw(&local, p0.probs());
            }
            for _ in 0..k {
                local = add_draw(&local, model.probs());
            }
            for (s, v) in local {
                *next.entry(s).or_insert(0.0) += v;
            }
        }
        states = next;
    }

    let mut total = 0.0;
    for (state, w) in &states {
        let f = fit_counts(learner, &as_counts(state), cells, labels)?;
        total += w * relabeled_expectation(p0, &f, metric)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learner::LearnerKind;

    fn toy() -> DiscreteJointDistribution {
        DiscreteJointDistribution::new(1, 2, vec![2.0 / 3.0, 1.0 / 3.0]).unwrap()
    }

    fn nurse() -> BiasMetric {
        BiasMetric::class_fraction(1, 2, 0).unwrap()
    }

    #[test]
    fn argmax_three_draws_is_twenty_over_twenty_seven() {
        let v = brute_force_expected_bias(
            &toy(),
            &LearnerSpec::new(LearnerKind::EmpiricalArgmax),
            &nurse(),
            3,
            0,
            1,
            0,
        )
        .unwrap();
        assert!((v - 20.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn sampler_is_unbiased_on_one_cell() {
        let v = brute_force_expected_bias(
            &toy(),
            &LearnerSpec::new(LearnerKind::EmpiricalSampler),
            &nurse(),
            3,
            0,
            1,
            0,
        )
        .unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn one_round_argmax_by_hand() {
        // n0 = 3, m = 0, k = 1: the added label always repeats the round-0
        // majority, so a 3-0 or 2-1 majority can only grow and the expected
        // bias stays at 20/27.
        let v = brute_force_expected_bias(
            &toy(),
            &LearnerSpec::new(LearnerKind::EmpiricalArgmax),
            &nurse(),
            3,
            0,
            1,
            1,
        )
        .unwrap();
        assert!((v - 20.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn limits_enforced() {
        let l = LearnerSpec::new(LearnerKind::EmpiricalArgmax);
        assert!(matches!(
            brute_force_expected_bias(&toy(), &l, &nurse(), 3, 1, 1, 3),
            Err(Error::EnumerationLimit(_))
        ));
        assert!(matches!(
            brute_force_expected_bias(&toy(), &l, &nurse(), 13, 0, 1, 0),
            Err(Error::EnumerationLimit(_))
        ));
        let pop = LearnerSpec::new(LearnerKind::PopulationArgmax);
        assert!(brute_force_expected_bias(&toy(), &pop, &nurse(), 3, 0, 1, 0).is_err());
    }
}
