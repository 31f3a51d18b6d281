//! The discovery pipeline: ICA, row permutation, normalization, connection
//! matrix, causal order and the assumption diagnostics.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{default_names, DataMatrix};
use crate::error::{LingamError, Result};
use crate::ica::{center, fast_ica, IcaConfig, IcaReport, UnmixingMatrix};
use crate::permutation::{
    causal_order_search, diag_permutation_assignment, triangularity_score, CausalOrder, RowPermutation,
};
use crate::stats::correlation;

/// Normalized triangularity residual above which a warning is raised.
pub const TRIANGULARITY_WARN_THRESHOLD: f64 = 0.05;
/// Nonlinear correlation score above which a warning is raised.
pub const INDEPENDENCE_WARN_THRESHOLD: f64 = 0.1;

/// Connection strengths: `b[i][j]` is the weight of the edge `x_j -> x_i`.
/// The diagonal is always zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionMatrix {
    b: DMatrix<f64>,
    names: Vec<String>,
}

impl ConnectionMatrix {
    pub fn new(b: DMatrix<f64>, names: Vec<String>) -> Result<Self> {
        if !b.is_square() {
            return Err(LingamError::DimensionMismatch(format!(
                "connection matrix must be square, got {}x{}",
                b.nrows(),
                b.ncols()
            )));
        }
        if names.len() != b.nrows() {
            return Err(LingamError::DimensionMismatch(format!(
                "{} names for {} variables",
                names.len(),
                b.nrows()
            )));
        }
        if let Some(i) = (0..b.nrows()).find(|&i| b[(i, i)] != 0.0) {
            return Err(LingamError::InvalidData(format!(
                "connection matrix has nonzero diagonal entry at {i}"
            )));
        }
        Ok(Self { b, names })
    }

    pub fn from_matrix(b: DMatrix<f64>) -> Result<Self> {
        let names = default_names(b.nrows());
        Self::new(b, names)
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n(&self) -> usize {
        self.b.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.b[(i, j)]
    }

    /// Nonzero entries as `(from, to, weight)` triples (`from = j`, `to = i`).
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.b[(i, j)] != 0.0 {
                    out.push((j, i, self.b[(i, j)]));
                }
            }
        }
        out
    }

    /// Relabels variables: new variable `k` is old variable `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let n = self.n();
        Self {
            b: DMatrix::from_fn(n, n, |i, j| self.b[(order[i], order[j])]),
            names: order.iter().map(|&i| self.names[i].clone()).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WarningKind {
    Triangularity,
    Independence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Warning {
    pub kind: WarningKind,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self.kind {
            WarningKind::Triangularity => "triangularity",
            WarningKind::Independence => "independence",
        };
        write!(f, "[{label}] {}", self.message)
    }
}

/// Advisory checks of the model assumptions. Passing them does not confirm
/// the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub triangularity_residual: f64,
    /// Symmetric, zero diagonal, entries in `[0, 1]`.
    pub independence_matrix: Vec<Vec<f64>>,
    pub warnings: Vec<Warning>,
}

impl DiagnosticsReport {
    pub fn has_warnings(&self) -> bool {
        !self.warnings.is_empty()
    }

    pub fn has(&self, kind: WarningKind) -> bool {
        self.warnings.iter().any(|w| w.kind == kind)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LingamResult {
    pub b_hat: ConnectionMatrix,
    pub causal_order: CausalOrder,
    /// Rows aligned with variables and scaled to a unit diagonal.
    pub w_tilde_prime: UnmixingMatrix,
    pub row_permutation: RowPermutation,
    /// `c = (I - B) mean(x)`, assuming zero-mean disturbances.
    pub constants: Vec<f64>,
    pub means: Vec<f64>,
    pub diagnostics: DiagnosticsReport,
    pub ica_report: Option<IcaReport>,
}

/// Divides each row by its diagonal element.
pub fn normalize_rows(w_tilde: &UnmixingMatrix) -> Result<UnmixingMatrix> {
    let mut w = w_tilde.matrix().clone();
    for i in 0..w.nrows() {
        let d = w[(i, i)];
        if d == 0.0 {
            return Err(LingamError::SingularStructure(format!(
                "zero diagonal entry in row {i} after permutation"
            )));
        }
        w.row_mut(i).unscale_mut(d);
        w[(i, i)] = 1.0;
    }
    UnmixingMatrix::new(w)
}

/// `B = I - W'`, with the diagonal set to exactly zero.
pub fn compute_b(w_tilde_prime: &UnmixingMatrix, names: &[String]) -> Result<ConnectionMatrix> {
    let w = w_tilde_prime.matrix();
    let n = w.nrows();
    let b = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { -w[(i, j)] });
    ConnectionMatrix::new(b, names.to_vec())
}

/// Runs the full discovery algorithm on observed data.
pub fn discover(x: &DataMatrix, ica_config: &IcaConfig) -> Result<LingamResult> {
    let (centered, centering) = center(x)?;
    let (w, report) = fast_ica(x, ica_config)?;
    finish(x, &centered, &centering.row_means, w, report)
}

/// Like [`discover`], but when ICA fails to converge the remaining steps
/// run on its best-effort estimate. Check `ica_report.converged`.
pub fn discover_best_effort(x: &DataMatrix, ica_config: &IcaConfig) -> Result<LingamResult> {
    let (centered, centering) = center(x)?;
    let (w, report) = match fast_ica(x, ica_config) {
        Ok(ok) => ok,
        Err(LingamError::NotConverged { best, report }) => (*best, *report),
        Err(e) => return Err(e),
    };
    finish(x, &centered, &centering.row_means, w, report)
}

fn finish(
    x: &DataMatrix,
    centered: &DataMatrix,
    means: &[f64],
    w: UnmixingMatrix,
    report: IcaReport,
) -> Result<LingamResult> {
    let centering_means = means;
    let mut result = estimate_from_unmixing(&w, x.names(), centering_means)?;
    result.ica_report = Some(report);
    let components = result.w_tilde_prime_components(&w, centered)?;
    result.diagnostics = assumption_report(&result, &components)?;
    Ok(result)
}

impl LingamResult {
    /// Components `S = W~ X` with rows aligned to the variables.
    fn w_tilde_prime_components(&self, w: &UnmixingMatrix, centered: &DataMatrix) -> Result<DataMatrix> {
        let aligned = w.matrix().select_rows(&self.row_permutation.mapping);
        DataMatrix::new(&aligned * centered.values(), centered.names().to_vec())
    }
}

/// Steps two to five applied to a given unmixing matrix. Diagnostics hold
/// the triangularity check only; independence needs the data.
pub(crate) fn estimate_from_unmixing(w: &UnmixingMatrix, names: &[String], means: &[f64]) -> Result<LingamResult> {
    let n = w.n();
    if names.len() != n || means.len() != n {
        return Err(LingamError::DimensionMismatch(format!(
            "unmixing matrix is {n}x{n} but {} names and {} means were given",
            names.len(),
            means.len()
        )));
    }
    let row_permutation = diag_permutation_assignment(w)?;
    let w_tilde = UnmixingMatrix::new(w.matrix().select_rows(&row_permutation.mapping))?;
    let w_tilde_prime = normalize_rows(&w_tilde)?;
    let b_hat = compute_b(&w_tilde_prime, names)?;
    let causal_order = causal_order_search(&b_hat)?;
    let mean_vec = DVector::from_column_slice(means);
    let constants = (DMatrix::identity(n, n) - b_hat.matrix()) * &mean_vec;
    let mut result = LingamResult {
        b_hat,
        causal_order,
        w_tilde_prime,
        row_permutation,
        constants: constants.iter().copied().collect(),
        means: means.to_vec(),
        diagnostics: DiagnosticsReport {
            triangularity_residual: 0.0,
            independence_matrix: vec![vec![0.0; n]; n],
            warnings: Vec::new(),
        },
        ica_report: None,
    };
    let residual = triangularity_score(&result.b_hat, &result.causal_order)?;
    result.diagnostics.triangularity_residual = residual;
    if let Some(w) = triangularity_warning(residual) {
        result.diagnostics.warnings.push(w);
    }
    Ok(result)
}

fn triangularity_warning(residual: f64) -> Option<Warning> {
    (residual > TRIANGULARITY_WARN_THRESHOLD).then(|| Warning {
        kind: WarningKind::Triangularity,
        message: format!("estimated B is far from triangular: residual {residual:.4} > {TRIANGULARITY_WARN_THRESHOLD}"),
    })
}

fn standardize(x: &[f64]) -> Option<Vec<f64>> {
    let m = x.len() as f64;
    let mu = x.iter().sum::<f64>() / m;
    let var = x.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / m;
    (var > 0.0).then(|| {
        let sd = var.sqrt();
        x.iter().map(|v| (v - mu) / sd).collect()
    })
}

/// Pairwise nonlinear correlation scores of the rows of `components`.
///
/// Entry `(i, j)` is the largest of `|corr(s_i, s_j^2)|`, `|corr(s_i^2, s_j)|`
/// and `|corr(s_i^2, s_j^2)|`, where the squares are taken of standardized
/// rows. Linear correlations are forced to zero by ICA and are not used.
pub fn independence_score(components: &DataMatrix) -> Result<DMatrix<f64>> {
    let n = components.n_vars();
    let mut plain = Vec::with_capacity(n);
    let mut squared = Vec::with_capacity(n);
    for (i, row) in components.values().row_iter().enumerate() {
        let row: Vec<f64> = row.iter().copied().collect();
        let s = standardize(&row).ok_or_else(|| LingamError::DegenerateData(format!("component {i} is constant")))?;
        squared.push(s.iter().map(|v| v * v).collect::<Vec<f64>>());
        plain.push(s);
    }
    let corr = |a: &[f64], b: &[f64]| correlation(a, b).map_or(0.0, f64::abs);
    let mut scores = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = corr(&plain[i], &squared[j])
                .max(corr(&squared[i], &plain[j]))
                .max(corr(&squared[i], &squared[j]));
            scores[(i, j)] = v;
            scores[(j, i)] = v;
        }
    }
    Ok(scores)
}

/// Triangularity and independence checks with their warnings.
pub fn assumption_report(result: &LingamResult, components: &DataMatrix) -> Result<DiagnosticsReport> {
    let n = result.b_hat.n();
    if components.n_vars() != n {
        return Err(LingamError::DimensionMismatch(format!(
            "{} components for {n} variables",
            components.n_vars()
        )));
    }
    let residual = triangularity_score(&result.b_hat, &result.causal_order)?;
    let scores = independence_score(components)?;
    let mut warnings: Vec<Warning> = triangularity_warning(residual).into_iter().collect();
    let mut worst = (0.0, 0, 0);
    for i in 0..n {
        for j in (i + 1)..n {
            if scores[(i, j)] > worst.0 {
                worst = (scores[(i, j)], i, j);
            }
        }
    }
    if worst.0 > INDEPENDENCE_WARN_THRESHOLD {
        let names = result.b_hat.names();
        warnings.push(Warning {
            kind: WarningKind::Independence,
            message: format!(
                "components for {} and {} look dependent: nonlinear correlation {:.4} > {INDEPENDENCE_WARN_THRESHOLD}",
                names[worst.1], names[worst.2], worst.0
            ),
        });
    }
    Ok(DiagnosticsReport {
        triangularity_residual: residual,
        independence_matrix: scores.row_iter().map(|r| r.iter().copied().collect()).collect(),
        warnings,
    })
}

/// Entry points that bypass ICA, for checking the algebraic steps in
/// isolation.
pub mod testing {
    use super::*;

    /// Runs the permutation, normalization and ordering steps on a given
    /// unmixing matrix (for instance the exact `I - B`), with zero means.
    pub fn discover_from_unmixing(w: &UnmixingMatrix) -> Result<LingamResult> {
        let n = w.n();
        estimate_from_unmixing(w, &default_names(n), &vec![0.0; n])
    }

    /// As [`discover_from_unmixing`] with explicit names and means.
    pub fn discover_from_unmixing_with(w: &UnmixingMatrix, names: &[String], means: &[f64]) -> Result<LingamResult> {
        estimate_from_unmixing(w, names, means)
    }
}
