//! Observed data in the variables-by-samples layout.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{LingamError, Result};

/// An `n x m` matrix of observations: one row per variable, one column per
/// sample vector.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    values: DMatrix<f64>,
    names: Vec<String>,
}

/// Per-variable sample means removed by centering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CenteringInfo {
    pub row_means: Vec<f64>,
}

pub fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

impl DataMatrix {
    pub fn new(values: DMatrix<f64>, names: Vec<String>) -> Result<Self> {
        let (n, m) = values.shape();
        if n == 0 {
            return Err(LingamError::InvalidData("no variables".into()));
        }
        if m < n {
            return Err(LingamError::InvalidData(format!(
                "need at least as many samples as variables (n = {n}, m = {m})"
            )));
        }
        if names.len() != n {
            return Err(LingamError::InvalidData(format!(
                "{} names given for {n} variables",
                names.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(LingamError::InvalidData(format!(
                "non-finite value for variable {} at sample {}",
                names[pos % n],
                pos / n
            )));
        }
        Ok(Self { values, names })
    }

    /// Builds a matrix with generated names `x1..xn`.
    pub fn from_matrix(values: DMatrix<f64>) -> Result<Self> {
        let names = default_names(values.nrows());
        Self::new(values, names)
    }

    /// One inner vector per variable.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(LingamError::InvalidData("ragged rows".into()));
        }
        Self::from_matrix(DMatrix::from_fn(n, m, |i, t| rows[i][t]))
    }

    /// One inner vector per sample, as read from a row-per-sample table.
    pub fn from_samples(samples: &[Vec<f64>], names: Vec<String>) -> Result<Self> {
        let n = names.len();
        if let Some(t) = samples.iter().position(|s| s.len() != n) {
            return Err(LingamError::InvalidData(format!(
                "sample {t} has {} values, expected {n}",
                samples[t].len()
            )));
        }
        Self::new(DMatrix::from_fn(n, samples.len(), |i, t| samples[t][i]), names)
    }

    pub fn n_vars(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_samples(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn into_values(self) -> DMatrix<f64> {
        self.values
    }

    pub fn row_means(&self) -> DVector<f64> {
        self.values.column_mean()
    }

    /// Returns a copy with variables reordered so that new row `i` is old
    /// row `order[i]`.
    pub fn select_rows(&self, order: &[usize]) -> Self {
        let values = self.values.select_rows(order);
        let names = order.iter().map(|&i| self.names[i].clone()).collect();
        Self { values, names }
    }

    /// Returns a copy built from the given sample columns (with repetition).
    pub fn select_samples(&self, columns: &[usize]) -> Self {
        Self {
            values: self.values.select_columns(columns),
            names: self.names.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite() {
        let err = DataMatrix::from_rows(&[vec![1.0, f64::NAN, 2.0]]).unwrap_err();
        assert!(matches!(err, LingamError::InvalidData(_)));
    }

    #[test]
    fn rejects_too_few_samples() {
        assert!(DataMatrix::from_rows(&[vec![1.0], vec![2.0]]).is_err());
        assert!(DataMatrix::from_rows(&[]).is_err());
    }

    #[test]
    fn samples_are_transposed() {
        let d = DataMatrix::from_samples(
            &[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        assert_eq!(d.n_vars(), 2);
        assert_eq!(d.n_samples(), 3);
        assert_eq!(d.values()[(1, 2)], 6.0);
    }
}
