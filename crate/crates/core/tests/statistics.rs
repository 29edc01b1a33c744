//! Large-sample checks of the samplers and Monte Carlo estimators against
//! independently computed values.

use feedloop_core::analysis::{brute_force_expected_bias, estimate_distinguishability, Partition};
use feedloop_core::sampling::{draw_covariates_and_label, draw_samples};
use feedloop_core::{
    run_feedback, summarize, BiasMetric, DiscreteJointDistribution, Fallback, FeedbackConfig,
    FeedbackMode, LearnerKind, LearnerSpec, Predictor, SeedSpec,
};

/// Upper 0.001 quantile of chi-square with `df` degrees of freedom
/// (Wilson-Hilferty approximation).
fn chi2_critical(df: f64) -> f64 {
    let z = 3.090_232_306_167_813;
    let a = 2.0 / (9.0 * df);
    df * (1.0 - a + z * a.sqrt()).powi(3)
}

fn nurse_toy() -> DiscreteJointDistribution {
    DiscreteJointDistribution::new(1, 2, vec![2.0 / 3.0, 1.0 / 3.0]).unwrap()
}

#[test]
fn million_draws_match_the_nurse_fraction() {
    let data = draw_samples(&nurse_toy(), 1_000_000, SeedSpec::new(11, 0));
    let nurses = data.counts()[0] as f64 / 1e6;
    assert!((nurses - 2.0 / 3.0).abs() < 0.002, "{nurses}");
}

#[test]
fn relabel_draws_with_true_conditional_match_joint_draws() {
    let d = DiscreteJointDistribution::from_rows(&[
        vec![0.10, 0.05, 0.15],
        vec![0.20, 0.02, 0.08],
        vec![0.05, 0.25, 0.10],
    ])
    .unwrap();
    let f = Predictor::conditional_of(&d, Fallback::Uniform);
    let n = 100_000;
    let a = draw_samples(&d, n, SeedSpec::new(21, 0)).counts();
    let b = draw_covariates_and_label(&d, &f, n, SeedSpec::new(22, 0)).unwrap().counts();
    // Two-sample chi-square on the 2 x 9 contingency table.
    let mut stat = 0.0;
    let mut df = 0.0;
    for (&x, &y) in a.iter().zip(&b) {
        let total = (x + y) as f64;
        if total == 0.0 {
            continue;
        }
        df += 1.0;
        let e = total / 2.0;
        stat += (x as f64 - e).powi(2) / e + (y as f64 - e).powi(2) / e;
    }
    df -= 1.0;
    assert!(stat < chi2_critical(df), "chi2 {stat} df {df}");
}

#[test]
fn model_labeled_covariates_follow_the_marginal() {
    let d = DiscreteJointDistribution::from_rows(&[
        vec![0.30, 0.10],
        vec![0.05, 0.15],
        vec![0.20, 0.20],
    ])
    .unwrap();
    let f = Predictor::point_masses(2, &[1, 0, 1]).unwrap();
    let n = 20_000;
    let data = draw_covariates_and_label(&d, &f, n, SeedSpec::new(5, 0)).unwrap();
    let counts = data.counts();
    let stat: f64 = d
        .marginals()
        .iter()
        .enumerate()
        .map(|(x, p)| {
            let observed = (counts[2 * x] + counts[2 * x + 1]) as f64;
            let e = p * n as f64;
            (observed - e).powi(2) / e
        })
        .sum();
    assert!(stat < chi2_critical(2.0), "{stat}");
    // Labels come only from f.
    assert_eq!(counts[0] + counts[3] + counts[4], 0);
}

#[test]
fn distinguishability_of_two_equal_cells() {
    // An unseen cell falls back to uniform and is misread half the time.
    // P(one cell unseen in 10 draws) = 2 * 2^-10, error mass 1/2 * 1/2.
    let exact: f64 = 2.0 * 0.5f64.powi(10) * 0.25;
    assert_eq!(exact, 2f64.powi(-11));
    let est = estimate_distinguishability(
        &Partition::identity(2).unwrap(),
        &LearnerSpec::new(LearnerKind::EmpiricalArgmax),
        &[0.5, 0.5],
        10,
        400_000,
        7,
    )
    .unwrap();
    assert!((est.mean - exact).abs() <= 4.0 * est.stderr(), "{} vs {exact}", est.mean);
}

#[test]
fn one_round_monte_carlo_matches_enumeration() {
    let metric = BiasMetric::class_fraction(1, 2, 0).unwrap();
    let learner = LearnerSpec::new(LearnerKind::EmpiricalArgmax);
    let config = FeedbackConfig {
        n0: 3,
        m: 0,
        k: 1,
        rounds: 1,
        mode: FeedbackMode::Accumulate,
        learner,
        replicates: 100_000,
        base_seed: 2,
    };
    let s = summarize(&run_feedback(&config, &nurse_toy(), &metric).unwrap()).unwrap();
    for (t, round) in s.iter().enumerate() {
        let exact = brute_force_expected_bias(&nurse_toy(), &learner, &metric, 3, 0, 1, t).unwrap();
        assert_eq!(exact, 20.0 / 27.0);
        let mc = round.model_bias;
        assert!((mc.mean - exact).abs() <= 3.0 * mc.stderr(), "t={t}: {} vs {exact}", mc.mean);
    }
}
