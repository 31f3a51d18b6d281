//! Edge pruning given a causal order.
//!
//! Connection strengths are re-estimated by least squares on each
//! variable's causal predecessors, over bootstrap resamples of the sample
//! vectors. Edges whose mean is small relative to their spread are dropped.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{LingamError, Result};
use crate::lingam::ConnectionMatrix;
use crate::permutation::{check_bijection, CausalOrder};
use crate::seed::{derive_seed, rng_from};
use crate::stats::{covariance_centered, mean, std_dev};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PruneConfig {
    pub resamples: usize,
    pub z_threshold: f64,
    pub seed: u64,
}

impl Default for PruneConfig {
    fn default() -> Self {
        Self {
            resamples: 100,
            z_threshold: 2.0,
            seed: 0,
        }
    }
}

impl PruneConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resamples < 2 {
            return Err(LingamError::InvalidConfig(format!(
                "at least 2 resamples are needed, got {}",
                self.resamples
            )));
        }
        if !(self.z_threshold >= 0.0) || !self.z_threshold.is_finite() {
            return Err(LingamError::InvalidConfig(format!(
                "z threshold must be a non-negative number, got {}",
                self.z_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Kept,
    Pruned,
    /// Zero by the causal order (diagonal or pointing backwards).
    ForcedZero,
}

impl Verdict {
    /// Keep iff `|mean| > z * std`. A zero spread keeps any nonzero mean.
    pub fn decide(mean: f64, std: f64, z_threshold: f64) -> Self {
        if mean.abs() > z_threshold * std {
            Verdict::Kept
        } else {
            Verdict::Pruned
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Kept => "kept",
            Verdict::Pruned => "pruned",
            Verdict::ForcedZero => "forced-zero",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "kept" => Some(Verdict::Kept),
            "pruned" => Some(Verdict::Pruned),
            "forced-zero" => Some(Verdict::ForcedZero),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PruneReport {
    pub kept: ConnectionMatrix,
    pub edge_means: DMatrix<f64>,
    pub edge_stds: DMatrix<f64>,
    pub verdicts: DMatrix<Verdict>,
    pub order: CausalOrder,
    pub config: PruneConfig,
    /// Number of resamples whose regression succeeded.
    pub used_resamples: usize,
}

impl PruneReport {
    /// Recomputes verdicts and the kept matrix for another threshold from
    /// the stored means and spreads.
    pub fn rethreshold(&self, z_threshold: f64) -> Result<Self> {
        let mut out = self.clone();
        out.config.z_threshold = z_threshold;
        let (verdicts, kept) = apply_verdicts(&self.edge_means, &self.edge_stds, &self.order, z_threshold);
        out.verdicts = verdicts;
        out.kept = ConnectionMatrix::new(kept, self.kept.names().to_vec())?;
        Ok(out)
    }

    pub fn kept_count(&self) -> usize {
        self.verdicts.iter().filter(|v| **v == Verdict::Kept).count()
    }

    /// Rows of the edge table: `(i, j, mean, std, verdict)` for every
    /// ordered pair, where the edge is `x_j -> x_i`.
    pub fn edge_table(&self) -> Vec<(usize, usize, f64, f64, Verdict)> {
        let n = self.kept.n();
        let mut rows = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                rows.push((
                    i,
                    j,
                    self.edge_means[(i, j)],
                    self.edge_stds[(i, j)],
                    self.verdicts[(i, j)],
                ));
            }
        }
        rows
    }
}

/// Least-squares coefficients of each variable on its causal predecessors,
/// from the sample covariance.
pub fn regress_on_predecessors(x: &DataMatrix, order: &CausalOrder) -> Result<ConnectionMatrix> {
    let n = x.n_vars();
    check_bijection(&order.order, n)?;
    let mut centered = x.values().clone();
    for (mut row, mu) in centered.row_iter_mut().zip(x.row_means().iter()) {
        row.add_scalar_mut(-mu);
    }
    let cov = covariance_centered(&centered);
    let mut b = DMatrix::zeros(n, n);
    for p in 1..n {
        let target = order.order[p];
        let preds = &order.order[..p];
        let sigma = cov.select_rows(preds).select_columns(preds);
        let rhs = cov.select_rows(preds).column(target).into_owned();
        let scale = sigma.diagonal().max();
        let degenerate = || {
            LingamError::DegenerateData(format!(
                "predecessors of {} have a singular covariance matrix",
                x.names()[target]
            ))
        };
        let chol = sigma.cholesky().ok_or_else(degenerate)?;
        let pivot = chol.l_dirty().diagonal().map(|d| d * d).min();
        if !(scale > 0.0) || pivot <= 1e-12 * scale {
            return Err(degenerate());
        }
        let beta = chol.solve(&rhs);
        for (k, &j) in preds.iter().enumerate() {
            b[(target, j)] = beta[k];
        }
    }
    ConnectionMatrix::new(b, x.names().to_vec())
}

fn apply_verdicts(
    means: &DMatrix<f64>,
    stds: &DMatrix<f64>,
    order: &CausalOrder,
    z_threshold: f64,
) -> (DMatrix<Verdict>, DMatrix<f64>) {
    let n = means.nrows();
    let pos = order.positions();
    let verdicts = DMatrix::from_fn(n, n, |i, j| {
        if pos[j] >= pos[i] {
            Verdict::ForcedZero
        } else {
            Verdict::decide(means[(i, j)], stds[(i, j)], z_threshold)
        }
    });
    let kept = DMatrix::from_fn(n, n, |i, j| {
        if verdicts[(i, j)] == Verdict::Kept {
            means[(i, j)]
        } else {
            0.0
        }
    });
    (verdicts, kept)
}

/// Bootstrap estimate of every edge allowed by `order`, with pruning.
///
/// Each resample draws `m` sample vectors with replacement using its own
/// sub-seed, so the report does not depend on scheduling.
pub fn bootstrap_prune(x: &DataMatrix, order: &CausalOrder, config: &PruneConfig) -> Result<PruneReport> {
    config.validate()?;
    let n = x.n_vars();
    check_bijection(&order.order, n)?;
    let m = x.n_samples();

    let fits: Vec<Result<ConnectionMatrix>> = (0..config.resamples)
        .into_par_iter()
        .map(|k| {
            let mut rng = rng_from(derive_seed(config.seed, k as u64));
            let columns: Vec<usize> = (0..m).map(|_| rng.random_range(0..m)).collect();
            regress_on_predecessors(&x.select_samples(&columns), order)
        })
        .collect();

    let mut estimates = Vec::with_capacity(fits.len());
    let mut first_error = None;
    for fit in fits {
        match fit {
            Ok(b) => estimates.push(b),
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    let failed = config.resamples - estimates.len();
    if failed * 10 > config.resamples || estimates.len() < 2 {
        if let Some(e) = first_error {
            log::warn!("bootstrap regression failed: {e}");
        }
        return Err(LingamError::Unstable {
            failed,
            total: config.resamples,
        });
    }

    let mut means = DMatrix::zeros(n, n);
    let mut stds = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(estimates.len());
    for i in 0..n {
        for j in 0..n {
            values.clear();
            values.extend(estimates.iter().map(|b| b.get(i, j)));
            means[(i, j)] = mean(&values);
            stds[(i, j)] = std_dev(&values);
        }
    }
    let (verdicts, kept) = apply_verdicts(&means, &stds, order, config.z_threshold);
    Ok(PruneReport {
        kept: ConnectionMatrix::new(kept, x.names().to_vec())?,
        edge_means: means,
        edge_stds: stds,
        verdicts,
        order: order.clone(),
        config: config.clone(),
        used_resamples: estimates.len(),
    })
}
