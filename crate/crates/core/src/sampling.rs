//! Seeded inverse-CDF sampling from joint distributions and relabelings.
//!
//! Every draw takes one `f64` uniform in `[0, 1)` from the generator (53 bits
//! of a `u64`) and locates it in a precomputed cumulative table.

use alloc::vec::Vec;
use rand::Rng;

use crate::dataset::{Dataset, Provenance, Sample};
use crate::distribution::DiscreteJointDistribution;
use crate::error::Result;
use crate::predictor::Predictor;
use crate::rng::{SeedSpec, SimRng};

/// Cumulative table over a non-negative weight vector.
#[derive(Debug, Clone)]
pub(crate) struct Cumulative {
    cum: Vec<f64>,
}

impl Cumulative {
    pub(crate) fn new(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        let cum = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self { cum }
    }

    /// Index of the first cumulative entry strictly above `u * total`.
    pub(crate) fn sample(&self, rng: &mut SimRng) -> usize {
        let total = *self.cum.last().expect("non-empty cumulative table");
        let u: f64 = rng.random::<f64>() * total;
        let i = self.cum.partition_point(|&c| c <= u);
        // Guard against rounding at the top end; step back over zero-weight
        // trailing entries.
        let mut i = i.min(self.cum.len() - 1);
        while i > 0 && self.cum[i] == self.cum[i - 1] {
            i -= 1;
        }
        i
    }
}

/// Sampler for `(x, y) ~ dist`.
#[derive(Debug, Clone)]
pub struct JointSampler {
    num_cells: usize,
    num_labels: usize,
    table: Cumulative,
}

impl JointSampler {
    pub fn new(dist: &DiscreteJointDistribution) -> Self {
        Self {
            num_cells: dist.num_cells(),
            num_labels: dist.num_labels(),
            table: Cumulative::new(dist.probs()),
        }
    }

    pub fn draw_into(&self, n: usize, rng: &mut SimRng, provenance: Provenance, out: &mut Dataset) {
        for _ in 0..n {
            let i = self.table.sample(rng);
            out.push_unchecked(Sample {
                cell: i / self.num_labels,
                label: i % self.num_labels,
                provenance,
            });
        }
    }

    pub fn num_cells(&self) -> usize {
        self.num_cells
    }
}

/// Sampler for `x ~ marginal`, `y ~ f(y | x)`.
#[derive(Debug, Clone)]
pub struct RelabelSampler {
    num_labels: usize,
    cells: Cumulative,
    rows: Vec<Cumulative>,
}

impl RelabelSampler {
    pub fn new(dist: &DiscreteJointDistribution, f: &Predictor) -> Result<Self> {
        dist.check_dims(f.num_cells(), f.num_labels())?;
        Ok(Self {
            num_labels: dist.num_labels(),
            cells: Cumulative::new(&dist.marginals()),
            rows: (0..f.num_cells()).map(|x| Cumulative::new(f.row(x))).collect(),
        })
    }

    pub fn draw_into(&self, n: usize, rng: &mut SimRng, out: &mut Dataset) {
        debug_assert_eq!(out.num_labels(), self.num_labels);
        for _ in 0..n {
            let cell = self.cells.sample(rng);
            let label = self.rows[cell].sample(rng);
            out.push_unchecked(Sample {
                cell,
                label,
                provenance: Provenance::Model,
            });
        }
    }
}

/// `n` i.i.d. draws from `dist`, tagged as human-annotated.
pub fn draw_samples(dist: &DiscreteJointDistribution, n: usize, seed: SeedSpec) -> Dataset {
    let mut out = Dataset::with_capacity(dist.num_cells(), dist.num_labels(), n);
    JointSampler::new(dist).draw_into(n, &mut seed.rng(), Provenance::Human, &mut out);
    out
}

/// `n` draws of `x ~ dist(x)` labeled by `y ~ f(y | x)`, tagged as
/// model-annotated.
pub fn draw_covariates_and_label(
    dist: &DiscreteJointDistribution,
    f: &Predictor,
    n: usize,
    seed: SeedSpec,
) -> Result<Dataset> {
    let sampler = RelabelSampler::new(dist, f)?;
    let mut out = Dataset::with_capacity(dist.num_cells(), dist.num_labels(), n);
    sampler.draw_into(n, &mut seed.rng(), &mut out);
    Ok(out)
}
