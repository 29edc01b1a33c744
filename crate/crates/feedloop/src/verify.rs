//! Property suites behind `feedloop verify`.
//!
//! - `lemma2`: the bound coefficient recursion stays below `(m+k)/m` and is
//!   nondecreasing over a grid of `(n0, m, k)`.
//! - `oracle`: Monte Carlo means of the model bias match exhaustive
//!   enumeration on tiny configurations.
//! - `fixed_points`: the population sampler never amplifies bias.

use std::fmt;

use feedloop_core::analysis::{brute_force_expected_bias, check_lemma2};
use feedloop_core::{
    run_replicate, summarize, BiasMetric, DiscreteJointDistribution, FeedbackConfig, FeedbackMode,
    LearnerKind, LearnerSpec, SeedSpec,
};
use rand::Rng;
use rayon::prelude::*;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Lemma2,
    Oracle,
    #[value(name = "fixed_points")]
    FixedPoints,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Lemma2 => "lemma2",
            Suite::Oracle => "oracle",
            Suite::FixedPoints => "fixed_points",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    /// The parameter tuple checked, e.g. `(n0=5, m=1, k=0)`.
    pub params: String,
    pub detail: String,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub rows: Vec<CheckRow>,
    pub summary: String,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    /// Plain-text table, one line per check.
    pub fn table(&self) -> String {
        let width = self.rows.iter().map(|r| r.params.len()).max().unwrap_or(0);
        let mut out = String::new();
        for r in &self.rows {
            let status = if r.pass { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status}  {:width$}  {}\n", r.params, r.detail));
        }
        out.push_str(&format!(
            "{}: {} ({}/{} checks passed)\n",
            self.suite,
            self.summary,
            self.rows.iter().filter(|r| r.pass).count(),
            self.rows.len()
        ));
        out
    }
}

pub const LEMMA2_T_MAX: usize = 1000;
pub const ORACLE_REPLICATES: usize = 100_000;
pub const ORACLE_SEED: u64 = 0x0AC1E;
pub const FIXED_POINT_CASES: usize = 10;
pub const FIXED_POINT_ROUNDS: usize = 200;
pub const FIXED_POINT_SEED: u64 = 0xF1;

pub fn run_suite(suite: Suite) -> Result<SuiteReport, CliError> {
    match suite {
        Suite::Lemma2 => Ok(lemma2()),
        Suite::Oracle => oracle(),
        Suite::FixedPoints => fixed_points(),
    }
}

pub fn lemma2() -> SuiteReport {
    let mut rows = Vec::new();
    let mut min_slack = f64::INFINITY;
    for n0 in [5, 50, 500] {
        for m in 1..=5 {
            for k in 0..=5 {
                let params = format!("(n0={n0}, m={m}, k={k})");
                match check_lemma2(&[(n0, m, k)], LEMMA2_T_MAX) {
                    Ok(r) => {
                        min_slack = min_slack.min(r.min_slack);
                        rows.push(CheckRow {
                            params,
                            detail: format!(
                                "max 1+c_t = {:.12}, slack to (m+k)/m = {:.3e}",
                                r.max_coefficient, r.min_slack
                            ),
                            pass: true,
                        });
                    }
                    Err(e) => rows.push(CheckRow {
                        params,
                        detail: e.to_string(),
                        pass: false,
                    }),
                }
            }
        }
    }
    SuiteReport {
        suite: Suite::Lemma2,
        rows,
        summary: format!("t <= {LEMMA2_T_MAX}, minimum coefficient slack {min_slack:.3e}"),
    }
}

pub fn oracle() -> Result<SuiteReport, CliError> {
    let p0 = DiscreteJointDistribution::new(1, 2, vec![2.0 / 3.0, 1.0 / 3.0])
        .map_err(|e| CliError::core("oracle", e))?;
    let metric = BiasMetric::class_fraction(1, 2, 0).map_err(|e| CliError::core("oracle", e))?;
    let rounds = 2;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for kind in [LearnerKind::EmpiricalArgmax, LearnerKind::EmpiricalSampler] {
        let learner = LearnerSpec::new(kind);
        for n0 in [1, 3] {
            for (m, k) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                let config = FeedbackConfig {
                    n0,
                    m,
                    k,
                    rounds,
                    mode: FeedbackMode::Accumulate,
                    learner,
                    replicates: ORACLE_REPLICATES,
                    base_seed: ORACLE_SEED,
                };
                let trajectories = (0..ORACLE_REPLICATES as u64)
                    .into_par_iter()
                    .map(|r| run_replicate(&config, &p0, &metric, r))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| CliError::core("oracle", e))?;
                let summary = summarize(&trajectories).map_err(|e| CliError::core("oracle", e))?;
                for s in &summary {
                    let exact = brute_force_expected_bias(&p0, &learner, &metric, n0, m, k, s.round)
                        .map_err(|e| CliError::core("oracle", e))?;
                    let se = s.model_bias.stderr();
                    let diff = (s.model_bias.mean - exact).abs();
                    let z = if se > 0.0 { diff / se } else { 0.0 };
                    worst = worst.max(z);
                    rows.push(CheckRow {
                        params: format!("({kind:?}, n0={n0}, m={m}, k={k}, t={})", s.round),
                        detail: format!(
                            "mc {:.6} ± {:.6}, exact {exact:.6}, |z| = {z:.2}",
                            s.model_bias.mean, se
                        ),
                        pass: diff <= 3.0 * se + 1e-12,
                    });
                }
            }
        }
    }
    Ok(SuiteReport {
        suite: Suite::Oracle,
        rows,
        summary: format!("{ORACLE_REPLICATES} replicates per tuple, largest |z| {worst:.2}"),
    })
}

/// A random distribution with every cell and label reachable, and a metric
/// with values in `[-1, 1]`.
fn random_case(index: u64) -> Result<(DiscreteJointDistribution, BiasMetric, FeedbackConfig), CliError> {
    let mut rng = SeedSpec::new(FIXED_POINT_SEED, index).rng();
    let cells = rng.random_range(1..=6);
    let labels = rng.random_range(2..=5);
    let probs: Vec<f64> = (0..cells * labels).map(|_| rng.random::<f64>() + 0.01).collect();
    let total: f64 = probs.iter().sum();
    let p0 = DiscreteJointDistribution::new(cells, labels, probs.iter().map(|p| p / total).collect())
        .map_err(|e| CliError::core("fixed_points", e))?;
    let values = (0..cells * labels).map(|_| rng.random_range(-1.0..=1.0)).collect();
    let metric = BiasMetric::new(cells, labels, values).map_err(|e| CliError::core("fixed_points", e))?;
    let config = FeedbackConfig {
        n0: rng.random_range(1..=1000),
        m: rng.random_range(0..=50),
        k: rng.random_range(1..=500),
        rounds: FIXED_POINT_ROUNDS,
        mode: FeedbackMode::Population,
        learner: LearnerSpec::new(LearnerKind::PopulationSampler),
        replicates: 1,
        base_seed: FIXED_POINT_SEED,
    };
    Ok((p0, metric, config))
}

pub fn fixed_points() -> Result<SuiteReport, CliError> {
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for i in 0..FIXED_POINT_CASES as u64 {
        let (p0, metric, config) = random_case(i)?;
        let traj = run_replicate(&config, &p0, &metric, 0).map_err(|e| CliError::core("fixed_points", e))?;
        let max_amp = traj.records.iter().map(|r| r.amplification).fold(0.0, f64::max);
        worst = worst.max(max_amp);
        rows.push(CheckRow {
            params: format!(
                "(case={i}, cells={}, labels={}, n0={}, m={}, k={})",
                p0.num_cells(),
                p0.num_labels(),
                config.n0,
                config.m,
                config.k
            ),
            detail: format!("max |amplification| over t <= {} = {max_amp:.3e}", config.rounds),
            pass: max_amp < 1e-12,
        });
    }
    Ok(SuiteReport {
        suite: Suite::FixedPoints,
        rows,
        summary: format!("population_sampler, max |amplification| {worst:.3e}"),
    })
}
