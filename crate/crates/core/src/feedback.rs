//! The data feedback dynamical system.
//!
//! Round 0 fits `f_0` on `S_0 ~ P_0^{n0}`. Each later round adds `m` fresh
//! human draws from `P_0` and `k` model-annotated draws (covariates from
//! `P_0(x)`, labels from `f_{t-1}`) and refits. Four modes are supported:
//!
//! - [`FeedbackMode::Accumulate`]: the dataset grows, `|S_t| = n0 + t(m+k)`.
//! - [`FeedbackMode::FreshDraw`]: `S_t` is a fresh draw of size `n_t` from
//!   the training mixture `P_t`, which is flattened to weight
//!   `(n0 + t m) / n_t` on `P_0` and `k / n_t` on each past relabeling
//!   `P̂_0(f_i)`. All past predictors are retained, so memory grows as
//!   `O(t |X| |Y|)`.
//! - [`FeedbackMode::WorstCaseSubsample`]: accumulate, but fit each round on
//!   a uniform without-replacement subsample of size `n0`.
//! - [`FeedbackMode::Population`]: exact propagation of `P_t` through
//!   mixtures and relabelings with a population learner; no sampling.
//!
//! Model bias is always computed exactly from the predictor against `P_0`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;

use crate::dataset::{Dataset, Provenance};
use crate::distribution::{
    expectation, mixture, relabel, relabeled_expectation, BiasMetric, DiscreteJointDistribution,
};
use crate::error::{Error, Result};
use crate::learner::{fit_counts, fit_population, LearnerSpec};
use crate::predictor::Predictor;
use crate::rng::{SeedSpec, Stream};
use crate::sampling::{JointSampler, RelabelSampler};
use crate::stats::mean_std;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FeedbackMode {
    Accumulate,
    FreshDraw,
    WorstCaseSubsample,
    Population,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct FeedbackConfig {
    pub n0: usize,
    pub m: usize,
    pub k: usize,
    pub rounds: usize,
    pub mode: FeedbackMode,
    pub learner: LearnerSpec,
    pub replicates: usize,
    pub base_seed: u64,
}

impl FeedbackConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n0 == 0 {
            return Err(Error::config(
                "n0",
                "must be at least 1 (the initial predictor is undefined on an empty dataset)",
            ));
        }
        if self.replicates == 0 {
            return Err(Error::config("replicates", "must be at least 1"));
        }
        self.learner
            .validate()
            .map_err(|e| Error::config("learner", format!("{e}")))?;
        let population = self.learner.kind.is_population();
        if self.mode == FeedbackMode::Population && !population {
            return Err(Error::config(
                "learner.kind",
                "population mode requires population_argmax or population_sampler",
            ));
        }
        if self.mode != FeedbackMode::Population && population {
            return Err(Error::config(
                "learner.kind",
                "population learners only run in population mode",
            ));
        }
        Ok(())
    }

    /// Training set size at round `t`, `n0 + t (m + k)`.
    pub fn n_at(&self, t: usize) -> usize {
        self.n0 + t * (self.m + self.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    /// Size of the set the round's model was fitted on.
    pub n_t: usize,
    /// `Σ_x p0(x) Σ_y f_t(y|x) φ(x, y)`.
    pub model_bias: f64,
    /// Mean of `φ` over the fitted data, or `P_t φ` in population mode.
    pub dataset_bias: f64,
    /// `|P_0 φ - model_bias|`.
    pub amplification: f64,
    /// `Σ_{x,y} p0(x, y) f_t(y|x)`.
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackTrajectory {
    pub replicate: u64,
    pub records: Vec<RoundRecord>,
}

struct Recorder<'a> {
    p0: &'a DiscreteJointDistribution,
    metric: &'a BiasMetric,
    p0_bias: f64,
    records: Vec<RoundRecord>,
}

impl<'a> Recorder<'a> {
    fn new(p0: &'a DiscreteJointDistribution, metric: &'a BiasMetric, rounds: usize) -> Result<Self> {
        Ok(Self {
            p0,
            metric,
            p0_bias: expectation(p0, metric)?,
            records: Vec::with_capacity(rounds + 1),
        })
    }

    fn record(&mut self, round: usize, n_t: usize, f: &Predictor, dataset_bias: f64) -> Result<()> {
        let model_bias = relabeled_expectation(self.p0, f, self.metric)?;
        self.records.push(RoundRecord {
            round,
            n_t,
            model_bias,
            dataset_bias,
            amplification: (self.p0_bias - model_bias).abs(),
            accuracy: f.accuracy(self.p0)?,
        });
        Ok(())
    }
}

fn mean_from_counts(counts: &[u64], metric: &BiasMetric) -> f64 {
    let n: u64 = counts.iter().sum();
    let total: f64 = counts
        .iter()
        .zip(metric.values())
        .map(|(&c, v)| c as f64 * v)
        .sum();
    total / n as f64
}

/// Runs one replicate. Replicate `r` draws only from seeds derived from
/// `SeedSpec::new(config.base_seed, r)`, so replicates can run in any order
/// or in parallel with identical results.
pub fn run_replicate(
    config: &FeedbackConfig,
    p0: &DiscreteJointDistribution,
    metric: &BiasMetric,
    replicate: u64,
) -> Result<FeedbackTrajectory> {
    config.validate()?;
    p0.check_dims(metric.num_cells(), metric.num_labels())?;
    let rep = SeedSpec::new(config.base_seed, replicate);
    let records = match config.mode {
        FeedbackMode::Population => run_population(config, p0, metric)?,
        FeedbackMode::Accumulate | FeedbackMode::WorstCaseSubsample => {
            run_accumulate(config, p0, metric, rep)?
        }
        FeedbackMode::FreshDraw => run_fresh_draw(config, p0, metric, rep)?,
    };
    Ok(FeedbackTrajectory { replicate, records })
}

/// Runs all replicates sequentially, in replicate order.
pub fn run_feedback(
    config: &FeedbackConfig,
    p0: &DiscreteJointDistribution,
    metric: &BiasMetric,
) -> Result<Vec<FeedbackTrajectory>> {
    config.validate()?;
    (0..config.replicates as u64)
        .map(|r| run_replicate(config, p0, metric, r))
        .collect()
}

/// The initial dataset of a replicate, `S_0 ~ P_0^{n0}`.
pub fn initial_dataset(p0: &DiscreteJointDistribution, n0: usize, replicate: SeedSpec) -> Dataset {
    crate::sampling::draw_samples(p0, n0, replicate.stream(0, Stream::Initial))
}

fn run_accumulate(
    config: &FeedbackConfig,
    p0: &DiscreteJointDistribution,
    metric: &BiasMetric,
    rep: SeedSpec,
) -> Result<Vec<RoundRecord>> {
    let (cells, labels) = (p0.num_cells(), p0.num_labels());
    let human = JointSampler::new(p0);
    let mut recorder = Recorder::new(p0, metric, config.rounds)?;

    let mut data = Dataset::with_capacity(cells, labels, config.n_at(config.rounds));
    data.extend_from(&initial_dataset(p0, config.n0, rep))?;
    let mut counts = data.counts();
    let mut f = fit_counts(&config.learner, &counts, cells, labels)?;
    recorder.record(0, config.n0, &f, mean_from_counts(&counts, metric))?;

    for t in 1..=config.rounds {
        let start = data.len();
        human.draw_into(
            config.m,
            &mut rep.stream(t as u64, Stream::Human).rng(),
            Provenance::Human,
            &mut data,
        );
        RelabelSampler::new(p0, &f)?.draw_into(
            config.k,
            &mut rep.stream(t as u64, Stream::Model).rng(),
            &mut data,
        );
        for s in &data.samples()[start..] {
            counts[s.cell * labels + s.label] += 1;
        }

        if config.mode == FeedbackMode::WorstCaseSubsample {
            let mut rng = rep.stream(t as u64, Stream::Subsample).rng();
            let picked = index::sample(&mut rng, data.len(), config.n0);
            let mut sub = vec![0_u64; cells * labels];
            for i in picked.iter() {
                let s = data.samples()[i];
                sub[s.cell * labels + s.label] += 1;
            }
            f = fit_counts(&config.learner, &sub, cells, labels)?;
            recorder.record(t, config.n0, &f, mean_from_counts(&sub, metric))?;
        } else {
            f = fit_counts(&config.learner, &counts, cells, labels)?;
            recorder.record(t, data.len(), &f, mean_from_counts(&counts, metric))?;
        }
    }
    Ok(recorder.records)
}

fn run_fresh_draw(
    config: &FeedbackConfig,
    p0: &DiscreteJointDistribution,
    metric: &BiasMetric,
    rep: SeedSpec,
) -> Result<Vec<RoundRecord>> {
    let (cells, labels) = (p0.num_cells(), p0.num_labels());
    let mut recorder = Recorder::new(p0, metric, config.rounds)?;

    let s0 = initial_dataset(p0, config.n0, rep);
    let counts = s0.counts();
    let mut f = fit_counts(&config.learner, &counts, cells, labels)?;
    recorder.record(0, config.n0, &f, mean_from_counts(&counts, metric))?;

    let mut relabelings: Vec<DiscreteJointDistribution> = Vec::with_capacity(config.rounds);
    for t in 1..=config.rounds {
        relabelings.push(relabel(p0, &f)?);
        let n_t = config.n_at(t);
        let p_t = fresh_draw_mixture(config, p0, &relabelings, t)?;
        let mut data = Dataset::with_capacity(cells, labels, n_t);
        JointSampler::new(&p_t).draw_into(
            n_t,
            &mut rep.stream(t as u64, Stream::Initial).rng(),
            Provenance::Human,
            &mut data,
        );
        let counts = data.counts();
        f = fit_counts(&config.learner, &counts, cells, labels)?;
        recorder.record(t, n_t, &f, mean_from_counts(&counts, metric))?;
    }
    Ok(recorder.records)
}

/// `P_t` flattened over `P_0` and the relabelings by `f_0 .. f_{t-1}`.
pub fn fresh_draw_mixture(
    config: &FeedbackConfig,
    p0: &DiscreteJointDistribution,
    relabelings: &[DiscreteJointDistribution],
    t: usize,
) -> Result<DiscreteJointDistribution> {
    let n_t = config.n_at(t) as f64;
    let mut dists = Vec::with_capacity(t + 1);
    let mut weights = Vec::with_capacity(t + 1);
    dists.push(p0);
    weights.push((config.n0 + t * config.m) as f64 / n_t);
    for r in &relabelings[..t] {
        dists.push(r);
        weights.push(config.k as f64 / n_t);
    }
    mixture(&dists, &weights)
}

/// Exact training distributions and population fits `(P_t, f_t)` for
/// `t = 0..=rounds`.
pub fn population_path(
    config: &FeedbackConfig,
    p0: &DiscreteJointDistribution,
) -> Result<Vec<(DiscreteJointDistribution, Predictor)>> {
    config.validate()?;
    let mut path = Vec::with_capacity(config.rounds + 1);
    let f0 = fit_population(&config.learner, p0)?;
    path.push((p0.clone(), f0));
    for t in 1..=config.rounds {
        let (prev, f_prev) = &path[t - 1];
        let n_t = config.n_at(t) as f64;
        let model = relabel(p0, f_prev)?;
        let p_t = mixture(
            &[prev, p0, &model],
            &[
                config.n_at(t - 1) as f64 / n_t,
                config.m as f64 / n_t,
                config.k as f64 / n_t,
            ],
        )?;
        let f_t = fit_population(&config.learner, &p_t)?;
        path.push((p_t, f_t));
    }
    Ok(path)
}

fn run_population(
    config: &FeedbackConfig,
    p0: &DiscreteJointDistribution,
    metric: &BiasMetric,
) -> Result<Vec<RoundRecord>> {
    let mut recorder = Recorder::new(p0, metric, config.rounds)?;
    for (t, (p_t, f_t)) in population_path(config, p0)?.iter().enumerate() {
        recorder.record(t, config.n_at(t), f_t, expectation(p_t, metric)?)?;
    }
    Ok(recorder.records)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    /// Unbiased sample standard deviation; 0 for a single replicate.
    pub std: f64,
    pub count: usize,
}

impl MeanStd {
    pub fn from_values(values: &[f64]) -> Self {
        let (mean, std) = mean_std(values);
        Self {
            mean,
            std,
            count: values.len(),
        }
    }

    pub fn stderr(&self) -> f64 {
        self.std / libm::sqrt(self.count as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundSummary {
    pub round: usize,
    pub n_t: usize,
    pub model_bias: MeanStd,
    pub dataset_bias: MeanStd,
    pub amplification: MeanStd,
    pub accuracy: MeanStd,
}

/// Per-round mean and standard deviation across replicates. Reduction runs
/// in the order trajectories are given.
pub fn summarize(trajectories: &[FeedbackTrajectory]) -> Result<Vec<RoundSummary>> {
    let first = trajectories
        .first()
        .ok_or_else(|| Error::EmptySummary("no trajectories".into()))?;
    let len = first.records.len();
    if trajectories.iter().any(|t| t.records.len() != len) {
        return Err(Error::EmptySummary(
            "trajectories have different lengths".into(),
        ));
    }
    let mut column = Vec::with_capacity(trajectories.len());
    let mut stat = |round: usize, get: fn(&RoundRecord) -> f64| {
        column.clear();
        column.extend(trajectories.iter().map(|t| get(&t.records[round])));
        MeanStd::from_values(&column)
    };
    Ok((0..len)
        .map(|i| RoundSummary {
            round: first.records[i].round,
            n_t: first.records[i].n_t,
            model_bias: stat(i, |r| r.model_bias),
            dataset_bias: stat(i, |r| r.dataset_bias),
            amplification: stat(i, |r| r.amplification),
            accuracy: stat(i, |r| r.accuracy),
        })
        .collect())
}
