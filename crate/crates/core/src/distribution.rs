//! Finite joint distributions `p(x, y)` over cells and labels, bias metrics
//! `φ(x, y)`, and the exact operations the feedback recursion is built from.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::predictor::Predictor;
use crate::MASS_TOLERANCE;

/// Exact probability mass over `num_cells x num_labels`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteJointDistribution {
    num_cells: usize,
    num_labels: usize,
    probs: Vec<f64>,
}

impl DiscreteJointDistribution {
    /// Validates non-negativity and total mass (within `1e-12`).
    pub fn new(num_cells: usize, num_labels: usize, probs: Vec<f64>) -> Result<Self> {
        if num_cells == 0 || num_labels == 0 {
            return Err(Error::InvalidDistribution(format!(
                "dimensions must be positive, got {num_cells}x{num_labels}"
            )));
        }
        if probs.len() != num_cells * num_labels {
            return Err(Error::InvalidDistribution(format!(
                "expected {} entries, found {}",
                num_cells * num_labels,
                probs.len()
            )));
        }
        if let Some((i, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "entry ({}, {}) = {p} is not a non-negative finite number",
                i / num_labels,
                i % num_labels
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "total mass {total} differs from 1"
            )));
        }
        Ok(Self {
            num_cells,
            num_labels,
            probs,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let num_cells = rows.len();
        let num_labels = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != num_labels) {
            return Err(Error::InvalidDistribution("ragged probability rows".into()));
        }
        Self::new(num_cells, num_labels, rows.concat())
    }

    /// Builds a distribution from a covariate marginal and a conditional
    /// labeler: `p(x, y) = marginal(x) * f(y | x)`.
    pub fn from_marginal_and_conditional(marginal: &[f64], f: &Predictor) -> Result<Self> {
        if marginal.len() != f.num_cells() {
            return Err(Error::DimensionMismatch {
                expected_cells: marginal.len(),
                expected_labels: f.num_labels(),
                cells: f.num_cells(),
                labels: f.num_labels(),
            });
        }
        let probs = (0..f.num_cells())
            .flat_map(|x| f.row(x).iter().map(move |q| marginal[x] * q))
            .collect();
        Self::new(marginal.len(), f.num_labels(), probs)
    }

    pub fn point_mass(num_cells: usize, num_labels: usize, cell: usize, label: usize) -> Result<Self> {
        let mut probs = vec![0.0; num_cells * num_labels];
        if cell >= num_cells || label >= num_labels {
            return Err(Error::InvalidDistribution(format!(
                "point ({cell}, {label}) outside {num_cells}x{num_labels}"
            )));
        }
        probs[cell * num_labels + label] = 1.0;
        Self::new(num_cells, num_labels, probs)
    }

    pub fn uniform(num_cells: usize, num_labels: usize) -> Result<Self> {
        let n = num_cells * num_labels;
        Self::new(num_cells, num_labels, vec![1.0 / n as f64; n])
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, cell: usize, label: usize) -> f64 {
        self.probs[cell * self.num_labels + label]
    }

    pub fn row(&self, cell: usize) -> &[f64] {
        &self.probs[cell * self.num_labels..(cell + 1) * self.num_labels]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.probs.chunks_exact(self.num_labels)
    }

    pub fn marginal(&self, cell: usize) -> f64 {
        self.row(cell).iter().sum()
    }

    pub fn marginals(&self) -> Vec<f64> {
        self.rows().map(|r| r.iter().sum()).collect()
    }

    /// Total mass per label, `p(y)`.
    pub fn label_marginals(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.num_labels];
        for row in self.rows() {
            for (o, p) in out.iter_mut().zip(row) {
                *o += p;
            }
        }
        out
    }

    /// `p(y | cell)`, or `None` for a zero-mass cell.
    pub fn conditional(&self, cell: usize) -> Option<Vec<f64>> {
        let mass = self.marginal(cell);
        if mass > 0.0 {
            Some(self.row(cell).iter().map(|p| p / mass).collect())
        } else {
            None
        }
    }

    pub fn check_dims(&self, num_cells: usize, num_labels: usize) -> Result<()> {
        if self.num_cells == num_cells && self.num_labels == num_labels {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected_cells: self.num_cells,
                expected_labels: self.num_labels,
                cells: num_cells,
                labels: num_labels,
            })
        }
    }

    /// Rescales to unit mass when accumulated drift exceeds the tolerance.
    fn renormalized(mut self) -> Self {
        let total: f64 = self.probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE && total > 0.0 {
            self.probs.iter_mut().for_each(|p| *p /= total);
        }
        self
    }
}

/// A bounded statistic `φ(x, y)` over `num_cells x num_labels`.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasMetric {
    num_cells: usize,
    num_labels: usize,
    values: Vec<f64>,
    bound: f64,
}

impl BiasMetric {
    pub fn new(num_cells: usize, num_labels: usize, values: Vec<f64>) -> Result<Self> {
        if num_cells == 0 || num_labels == 0 || values.len() != num_cells * num_labels {
            return Err(Error::InvalidMetric(format!(
                "expected {num_cells}x{num_labels} values, found {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMetric("metric values must be finite".into()));
        }
        let bound = values.iter().fold(0.0_f64, |b, v| b.max(v.abs()));
        Ok(Self {
            num_cells,
            num_labels,
            values,
            bound,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let num_cells = rows.len();
        let num_labels = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != num_labels) {
            return Err(Error::InvalidMetric("ragged metric rows".into()));
        }
        Self::new(num_cells, num_labels, rows.concat())
    }

    /// `φ(x, y) = 1{y = target}`: the fraction of mass carrying `target`.
    pub fn class_fraction(num_cells: usize, num_labels: usize, target: usize) -> Result<Self> {
        if target >= num_labels {
            return Err(Error::InvalidMetric(format!(
                "target label {target} outside {num_labels} labels"
            )));
        }
        let values = (0..num_cells * num_labels)
            .map(|i| if i % num_labels == target { 1.0 } else { 0.0 })
            .collect();
        Self::new(num_cells, num_labels, values)
    }

    pub fn constant(num_cells: usize, num_labels: usize, c: f64) -> Result<Self> {
        Self::new(num_cells, num_labels, vec![c; num_cells * num_labels])
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }

    pub fn num_labels(&self) -> usize {
        self.num_labels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, cell: usize, label: usize) -> f64 {
        self.values[cell * self.num_labels + label]
    }

    pub fn row(&self, cell: usize) -> &[f64] {
        &self.values[cell * self.num_labels..(cell + 1) * self.num_labels]
    }

    /// `max |φ|`.
    pub fn bound(&self) -> f64 {
        self.bound
    }
}

/// `Pφ = Σ p(x, y) φ(x, y)`.
pub fn expectation(dist: &DiscreteJointDistribution, metric: &BiasMetric) -> Result<f64> {
    dist.check_dims(metric.num_cells, metric.num_labels)?;
    Ok(dist
        .probs
        .iter()
        .zip(&metric.values)
        .map(|(p, v)| p * v)
        .sum())
}

/// Expected metric under the relabeling of `dist` by `f`, without
/// materialising the relabeled distribution.
pub fn relabeled_expectation(
    dist: &DiscreteJointDistribution,
    f: &Predictor,
    metric: &BiasMetric,
) -> Result<f64> {
    dist.check_dims(f.num_cells(), f.num_labels())?;
    dist.check_dims(metric.num_cells, metric.num_labels)?;
    Ok((0..dist.num_cells)
        .map(|x| {
            let mass = dist.marginal(x);
            if mass > 0.0 {
                mass * f
                    .row(x)
                    .iter()
                    .zip(metric.row(x))
                    .map(|(q, v)| q * v)
                    .sum::<f64>()
            } else {
                0.0
            }
        })
        .sum())
}

/// The relabeling of `dist` by `f`: `p'(x, y) = p(x) f(y | x)`.
///
/// Rows of `f` for zero-mass cells are ignored.
pub fn relabel(dist: &DiscreteJointDistribution, f: &Predictor) -> Result<DiscreteJointDistribution> {
    dist.check_dims(f.num_cells(), f.num_labels())?;
    let mut probs = vec![0.0; dist.probs.len()];
    for (x, out) in probs.chunks_exact_mut(dist.num_labels).enumerate() {
        let mass = dist.marginal(x);
        if mass > 0.0 {
            for (o, q) in out.iter_mut().zip(f.row(x)) {
                *o = mass * q;
            }
        }
    }
    Ok(DiscreteJointDistribution {
        num_cells: dist.num_cells,
        num_labels: dist.num_labels,
        probs,
    })
}

/// Entrywise convex combination of equally shaped distributions.
pub fn mixture(
    dists: &[&DiscreteJointDistribution],
    weights: &[f64],
) -> Result<DiscreteJointDistribution> {
    let first = dists
        .first()
        .ok_or_else(|| Error::InvalidWeights("no distributions to mix".into()))?;
    if dists.len() != weights.len() {
        return Err(Error::InvalidWeights(format!(
            "{} distributions but {} weights",
            dists.len(),
            weights.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::InvalidWeights(format!("weight {w} is negative or not finite")));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > MASS_TOLERANCE {
        return Err(Error::InvalidWeights(format!("weights sum to {total}, not 1")));
    }
    for d in dists {
        first.check_dims(d.num_cells, d.num_labels)?;
    }
    let mut probs = vec![0.0; first.probs.len()];
    for (d, &w) in dists.iter().zip(weights) {
        if w == 0.0 {
            continue;
        }
        for (o, p) in probs.iter_mut().zip(&d.probs) {
            *o += w * p;
        }
    }
    Ok(DiscreteJointDistribution {
        num_cells: first.num_cells,
        num_labels: first.num_labels,
        probs,
    }
    .renormalized())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nurse_toy() -> DiscreteJointDistribution {
        DiscreteJointDistribution::new(1, 2, vec![2.0 / 3.0, 1.0 / 3.0]).unwrap()
    }

    #[test]
    fn rejects_bad_mass() {
        assert!(DiscreteJointDistribution::new(1, 2, vec![0.5, 0.6]).is_err());
        assert!(DiscreteJointDistribution::new(1, 2, vec![1.5, -0.5]).is_err());
        assert!(DiscreteJointDistribution::new(1, 2, vec![1.0]).is_err());
        assert!(DiscreteJointDistribution::new(0, 2, vec![]).is_err());
    }

    #[test]
    fn expectation_examples() {
        let uniform = DiscreteJointDistribution::uniform(1, 2).unwrap();
        let ind0 = BiasMetric::class_fraction(1, 2, 0).unwrap();
        assert_eq!(expectation(&uniform, &ind0).unwrap(), 0.5);

        let e = expectation(&nurse_toy(), &ind0).unwrap();
        assert!((e - 2.0 / 3.0).abs() < 1e-15);

        let d = DiscreteJointDistribution::new(
            3,
            3,
            vec![0.05, 0.1, 0.15, 0.2, 0.0, 0.1, 0.05, 0.25, 0.1],
        )
        .unwrap();
        let c = BiasMetric::constant(3, 3, -1.75).unwrap();
        assert!((expectation(&d, &c).unwrap() + 1.75).abs() < 1e-12);
    }

    #[test]
    fn expectation_dimension_mismatch() {
        let m = BiasMetric::class_fraction(2, 2, 0).unwrap();
        assert!(matches!(
            expectation(&nurse_toy(), &m),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn relabel_argmax_of_majority() {
        let f = Predictor::point_masses(2, &[0]).unwrap();
        let r = relabel(&nurse_toy(), &f).unwrap();
        assert_eq!(r.probs(), &[1.0, 0.0]);
    }

    #[test]
    fn relabel_ignores_zero_mass_rows() {
        let d = DiscreteJointDistribution::new(2, 2, vec![0.25, 0.75, 0.0, 0.0]).unwrap();
        let f = Predictor::from_rows(&[vec![0.5, 0.5], vec![0.0, 1.0]]).unwrap();
        let r = relabel(&d, &f).unwrap();
        assert_eq!(r.probs(), &[0.5, 0.5, 0.0, 0.0]);
        assert_eq!(r.marginals(), d.marginals());
    }

    #[test]
    fn relabel_by_own_conditional_is_identity() {
        let d = DiscreteJointDistribution::new(2, 3, vec![0.1, 0.2, 0.3, 0.0, 0.15, 0.25]).unwrap();
        let f = Predictor::conditional_of(&d, crate::learner::Fallback::Uniform);
        let r = relabel(&d, &f).unwrap();
        for (a, b) in r.probs().iter().zip(d.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn mixture_recursion_nurse_toy() {
        let delta = DiscreteJointDistribution::point_mass(1, 2, 0, 0).unwrap();
        let p1 = mixture(&[&nurse_toy(), &delta], &[6.0 / 9.0, 3.0 / 9.0]).unwrap();
        assert!((p1.prob(0, 0) - 7.0 / 9.0).abs() < 1e-15);
        let p2 = mixture(&[&p1, &delta], &[9.0 / 12.0, 3.0 / 12.0]).unwrap();
        assert!((p2.prob(0, 0) - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn mixture_degenerate_weight() {
        let a = nurse_toy();
        let b = DiscreteJointDistribution::uniform(1, 2).unwrap();
        assert_eq!(mixture(&[&a, &b], &[1.0, 0.0]).unwrap(), a);
    }

    #[test]
    fn mixture_rejects_bad_weights() {
        let a = nurse_toy();
        assert!(mixture(&[&a, &a], &[1.5, -0.5]).is_err());
        assert!(mixture(&[&a, &a], &[0.5, 0.6]).is_err());
        assert!(mixture(&[&a], &[0.5, 0.5]).is_err());
        let c = DiscreteJointDistribution::uniform(2, 2).unwrap();
        assert!(mixture(&[&a, &c], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn metric_bound_and_validation() {
        let m = BiasMetric::new(1, 3, vec![0.5, -2.0, 1.0]).unwrap();
        assert_eq!(m.bound(), 2.0);
        assert!(BiasMetric::new(1, 2, vec![f64::NAN, 0.0]).is_err());
        assert!(BiasMetric::class_fraction(1, 2, 2).is_err());
    }
}
