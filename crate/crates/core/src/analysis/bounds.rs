use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// `1 + Σ_{i=1}^t (k/n_i) Π_{j=i+1}^t (n_j - m)/n_j` with `n_i = n0 + i(m+k)`,
/// evaluated by the forward recursion `c_t = c_{t-1} (n_t - m)/n_t + k/n_t`,
/// `c_0 = 0`.
pub fn exact_bound_coefficient(t: usize, n0: usize, m: usize, k: usize) -> f64 {
    let mut c = 0.0;
    for i in 1..=t {
        c = step(c, n0, m, k, i);
    }
    1.0 + c
}

fn step(c: f64, n0: usize, m: usize, k: usize, i: usize) -> f64 {
    let n_i = (n0 + i * (m + k)) as f64;
    c * (n_i - m as f64) / n_i + k as f64 / n_i
}

/// Exact coefficients for `t = 0..=t_max`.
pub fn coefficient_path(t_max: usize, n0: usize, m: usize, k: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(t_max + 1);
    let mut c = 0.0;
    out.push(1.0);
    for i in 1..=t_max {
        c = step(c, n0, m, k, i);
        out.push(1.0 + c);
    }
    out
}

/// `(m + k) / m`, vacuous when no human data arrives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimplifiedBound {
    Finite(f64),
    Unbounded,
}

impl SimplifiedBound {
    pub fn finite(self) -> Option<f64> {
        match self {
            SimplifiedBound::Finite(v) => Some(v),
            SimplifiedBound::Unbounded => None,
        }
    }
}

pub fn simplified_bound_coefficient(m: usize, k: usize) -> SimplifiedBound {
    if m == 0 {
        SimplifiedBound::Unbounded
    } else {
        SimplifiedBound::Finite((m + k) as f64 / m as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPoint {
    pub round: usize,
    pub exact_coefficient: f64,
    pub simplified_coefficient: SimplifiedBound,
    pub bound_exact: f64,
    /// `None` when the simplified bound is vacuous (`m = 0`).
    pub bound_simplified: Option<f64>,
}

/// Predicted amplification envelope for a feedback run.
///
/// `delta0` is normally the calibration error of the round-0 learner
/// estimated on `P_0` alone, which only lower-bounds the consistent
/// calibration error (a supremum over all joints sharing the marginal). The
/// curve is therefore a heuristic prediction rather than a guarantee.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurve {
    pub n0: usize,
    pub m: usize,
    pub k: usize,
    pub delta0: f64,
    pub points: Vec<BoundPoint>,
}

pub fn build_bound_curve(
    t_max: usize,
    n0: usize,
    m: usize,
    k: usize,
    delta0: f64,
) -> Result<BoundCurve> {
    if !(delta0.is_finite() && delta0 >= 0.0) {
        return Err(Error::config("delta0", format!("must be finite and >= 0, got {delta0}")));
    }
    let simplified = simplified_bound_coefficient(m, k);
    let points = coefficient_path(t_max, n0, m, k)
        .into_iter()
        .enumerate()
        .map(|(round, c)| BoundPoint {
            round,
            exact_coefficient: c,
            simplified_coefficient: simplified,
            bound_exact: c * delta0,
            bound_simplified: simplified.finite().map(|s| s * delta0),
        })
        .collect();
    Ok(BoundCurve {
        n0,
        m,
        k,
        delta0,
        points,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma2Report {
    pub grid_points: usize,
    pub rounds_checked: usize,
    pub max_coefficient: f64,
    /// Smallest `(m+k)/m - coefficient` seen over the grid (tightest point).
    pub min_slack: f64,
    /// Largest `(m+k)/m - coefficient` seen over the grid.
    pub max_slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Lemma2Failure {
    NoHumanData { n0: usize, m: usize, k: usize },
    ExceedsBound { n0: usize, m: usize, k: usize, t: usize, coefficient: f64, bound: f64 },
    NotMonotone { n0: usize, m: usize, k: usize, t: usize, previous: f64, coefficient: f64 },
}

impl fmt::Display for Lemma2Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Lemma2Failure::NoHumanData { n0, m, k } => {
                write!(f, "(n0={n0}, m={m}, k={k}): m must be at least 1")
            }
            Lemma2Failure::ExceedsBound { n0, m, k, t, coefficient, bound } => write!(
                f,
                "(n0={n0}, m={m}, k={k}, t={t}): coefficient {coefficient} exceeds (m+k)/m = {bound}"
            ),
            Lemma2Failure::NotMonotone { n0, m, k, t, previous, coefficient } => write!(
                f,
                "(n0={n0}, m={m}, k={k}, t={t}): coefficient decreased from {previous} to {coefficient}"
            ),
        }
    }
}

/// Checks `1 + c_t <= (m+k)/m + 1e-12` and `c_t` nondecreasing for every
/// `(n0, m, k)` in the grid and every `t <= t_max`.
pub fn check_lemma2(
    grid: &[(usize, usize, usize)],
    t_max: usize,
) -> core::result::Result<Lemma2Report, Lemma2Failure> {
    let mut report = Lemma2Report {
        grid_points: grid.len(),
        rounds_checked: 0,
        max_coefficient: f64::NEG_INFINITY,
        min_slack: f64::INFINITY,
        max_slack: f64::NEG_INFINITY,
    };
    for &(n0, m, k) in grid {
        if m == 0 {
            return Err(Lemma2Failure::NoHumanData { n0, m, k });
        }
        let bound = (m + k) as f64 / m as f64;
        let path = coefficient_path(t_max, n0, m, k);
        for (t, &c) in path.iter().enumerate() {
            if c > bound + 1e-12 {
                return Err(Lemma2Failure::ExceedsBound { n0, m, k, t, coefficient: c, bound });
            }
            if t > 0 && c < path[t - 1] {
                return Err(Lemma2Failure::NotMonotone {
                    n0,
                    m,
                    k,
                    t,
                    previous: path[t - 1],
                    coefficient: c,
                });
            }
            report.max_coefficient = report.max_coefficient.max(c);
            report.min_slack = report.min_slack.min(bound - c);
            report.max_slack = report.max_slack.max(bound - c);
            report.rounds_checked += 1;
        }
    }
    Ok(report)
}
