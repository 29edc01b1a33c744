//! Runs a configured experiment: replicates in parallel, `delta0`, bounds,
//! and the output files.

use std::path::Path;

use feedloop_core::analysis::{build_bound_curve, estimate_calibration_error, BoundCurve, CalibrationEstimate};
use feedloop_core::{expectation, run_replicate, summarize, FeedbackTrajectory, RoundSummary};
use rayon::prelude::*;

use crate::config::{load_experiment, Experiment};
use crate::error::CliError;
use crate::fsutil::write_atomic;
use crate::report::Report;
use crate::{plot, trajectory_csv};

/// Everything an experiment produced, before it is written out.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub trajectories: Vec<FeedbackTrajectory>,
    pub summaries: Vec<RoundSummary>,
    pub delta0: Option<CalibrationEstimate>,
    pub bounds: Option<BoundCurve>,
    pub report: Report,
    pub rows: Vec<trajectory_csv::TrajectoryRow>,
}

/// Builds a rayon pool of `threads` workers, or the rayon default when
/// `None`. Results never depend on the thread count.
pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("--threads: must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| CliError::Config(format!("--threads: {e}")))
}

/// Runs every replicate on the current rayon pool, in replicate order.
pub fn run_replicates(exp: &Experiment) -> Result<Vec<FeedbackTrajectory>, CliError> {
    (0..exp.feedback.replicates as u64)
        .into_par_iter()
        .map(|r| run_replicate(&exp.feedback, &exp.p0, &exp.metric, r))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::core("feedback", e))
}

/// `delta0` uses the run's own base seed, so replicate `r` of the estimate
/// fits exactly the round-0 model of replicate `r` of the run.
pub fn estimate_delta0(exp: &Experiment) -> Result<CalibrationEstimate, CliError> {
    estimate_calibration_error(
        &exp.feedback.learner,
        &exp.p0,
        &exp.metric,
        exp.feedback.n0,
        exp.delta0_replicates(),
        exp.feedback.base_seed,
    )
    .map_err(|e| CliError::core("analysis.delta0", e))
}

pub fn run(exp: &Experiment) -> Result<ExperimentOutput, CliError> {
    let trajectories = run_replicates(exp)?;
    let summaries = summarize(&trajectories).map_err(|e| CliError::core("summary", e))?;
    let delta0 = if exp.analysis.estimate_delta0 {
        Some(estimate_delta0(exp)?)
    } else {
        None
    };
    let bounds = match delta0 {
        Some(d) if exp.analysis.emit_bounds => Some(
            build_bound_curve(
                exp.feedback.rounds,
                exp.feedback.n0,
                exp.feedback.m,
                exp.feedback.k,
                d.absolute,
            )
            .map_err(|e| CliError::core("analysis", e))?,
        ),
        _ => None,
    };
    let initial_bias =
        expectation(&exp.p0, &exp.metric).map_err(|e| CliError::core("metric", e))?;
    let last = summaries.last().expect("at least round 0");
    let report = Report::new(
        &exp.feedback,
        initial_bias,
        delta0.as_ref(),
        bounds.as_ref(),
        last.model_bias.mean,
        last.amplification.mean,
    );
    let rows = trajectory_csv::rows_from(&summaries, bounds.as_ref());
    Ok(ExperimentOutput {
        trajectories,
        summaries,
        delta0,
        bounds,
        report,
        rows,
    })
}

/// Writes the CSV, report and optional SVG. Every file is written to a
/// temporary name and renamed into place.
pub fn write_outputs(exp: &Experiment, out: &ExperimentOutput) -> Result<(), CliError> {
    let csv = trajectory_csv::to_bytes(&out.rows);
    let report = out.report.to_bytes();
    let svg = exp
        .output
        .svg_path
        .as_ref()
        .map(|p| (p, plot::render(&out.rows).into_bytes()));
    write_atomic(&exp.output.csv_path, &csv)?;
    write_atomic(&exp.output.report_path, &report)?;
    if let Some((path, bytes)) = svg {
        write_atomic(path, &bytes)?;
    }
    Ok(())
}

/// Loads, runs and writes the experiment at `config_path`.
pub fn run_experiment(
    config_path: &Path,
    threads: Option<usize>,
    seed_override: Option<u64>,
) -> Result<ExperimentOutput, CliError> {
    let exp = load_experiment(config_path, seed_override)?;
    let pool = thread_pool(threads)?;
    let out = pool.install(|| run(&exp))?;
    write_outputs(&exp, &out)?;
    Ok(out)
}
