//! Synthetic LiNGAM models and data with known ground truth.
//!
//! A random strictly lower-triangular `B` is drawn in causal order,
//! disturbances are gaussian draws passed through a signed power
//! nonlinearity, and the observed variables are shuffled to hide the order.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::error::{LingamError, Result};
use crate::lingam::ConnectionMatrix;
use crate::permutation::{check_bijection, CausalOrder};
use crate::seed::rng_from;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub n: usize,
    /// Probability that an eligible lower-triangular entry is zero.
    pub sparsity: f64,
    /// Magnitude range of nonzero coefficients; the sign is random.
    pub coefficient_range: (f64, f64),
    /// Disturbance exponents are drawn from one of these intervals, each
    /// chosen with equal probability.
    pub exponent_ranges: [(f64, f64); 2],
    pub disturbance_variance_range: (f64, f64),
    pub constants_range: (f64, f64),
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n: 4,
            sparsity: 0.0,
            coefficient_range: (0.2, 2.0),
            exponent_ranges: [(0.5, 0.8), (1.2, 2.0)],
            disturbance_variance_range: (0.5, 2.0),
            constants_range: (-1.0, 1.0),
            seed: 0,
        }
    }
}

fn check_range(name: &str, (lo, hi): (f64, f64)) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(LingamError::InvalidConfig(format!(
            "{name} range [{lo}, {hi}] is not well ordered"
        )));
    }
    Ok(())
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(LingamError::InvalidConfig("n must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.sparsity) {
            return Err(LingamError::InvalidConfig(format!(
                "sparsity must lie in [0, 1], got {}",
                self.sparsity
            )));
        }
        check_range("coefficient", self.coefficient_range)?;
        check_range("variance", self.disturbance_variance_range)?;
        check_range("constants", self.constants_range)?;
        for r in self.exponent_ranges {
            check_range("exponent", r)?;
        }
        if self.coefficient_range.0 <= 0.0 {
            return Err(LingamError::InvalidConfig(
                "coefficient magnitudes must be positive".into(),
            ));
        }
        if self.disturbance_variance_range.0 <= 0.0 {
            return Err(LingamError::InvalidConfig(
                "disturbance variances must be positive".into(),
            ));
        }
        if self.exponent_ranges.iter().any(|r| r.0 <= 0.0) {
            return Err(LingamError::InvalidConfig("exponents must be positive".into()));
        }
        Ok(())
    }
}

/// A generating model. `b_true`, `constants`, `variances` and `exponents`
/// are indexed in causal order (so `b_true` is strictly lower triangular);
/// observed variable `i` is causal variable `shuffle[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthModel {
    pub b_true: DMatrix<f64>,
    pub constants: Vec<f64>,
    pub variances: Vec<f64>,
    pub exponents: Vec<f64>,
    pub shuffle: Vec<usize>,
}

impl GroundTruthModel {
    /// Checks dimensions, strict lower triangularity and the shuffle.
    pub fn new(
        b_true: DMatrix<f64>,
        constants: Vec<f64>,
        variances: Vec<f64>,
        exponents: Vec<f64>,
        shuffle: Vec<usize>,
    ) -> Result<Self> {
        let n = b_true.nrows();
        if !b_true.is_square()
            || [constants.len(), variances.len(), exponents.len()]
                .iter()
                .any(|&l| l != n)
        {
            return Err(LingamError::DimensionMismatch(
                "ground-truth parts disagree in size".into(),
            ));
        }
        for i in 0..n {
            for j in i..n {
                if b_true[(i, j)] != 0.0 {
                    return Err(LingamError::InvalidData(format!(
                        "ground-truth B is not strictly lower triangular at ({i}, {j})"
                    )));
                }
            }
        }
        if variances.iter().any(|&v| !(v > 0.0)) {
            return Err(LingamError::InvalidData(
                "disturbance variances must be positive".into(),
            ));
        }
        check_bijection(&shuffle, n)?;
        Ok(Self {
            b_true,
            constants,
            variances,
            exponents,
            shuffle,
        })
    }

    pub fn n(&self) -> usize {
        self.b_true.nrows()
    }

    /// Names of the observed variables, `x1..xn` in observed order.
    pub fn names(&self) -> Vec<String> {
        crate::data::default_names(self.n())
    }

    /// Connection matrix in the observed labeling.
    pub fn observed_b(&self) -> ConnectionMatrix {
        let s = &self.shuffle;
        let n = self.n();
        let b = DMatrix::from_fn(n, n, |i, j| self.b_true[(s[i], s[j])]);
        ConnectionMatrix::new(b, self.names()).expect("zero diagonal by construction")
    }

    fn observed(&self, v: &[f64]) -> Vec<f64> {
        self.shuffle.iter().map(|&k| v[k]).collect()
    }

    pub fn observed_constants(&self) -> Vec<f64> {
        self.observed(&self.constants)
    }

    pub fn observed_variances(&self) -> Vec<f64> {
        self.observed(&self.variances)
    }

    pub fn observed_exponents(&self) -> Vec<f64> {
        self.observed(&self.exponents)
    }

    /// The generating order in the observed labeling.
    pub fn true_order(&self) -> CausalOrder {
        let mut order = vec![0; self.n()];
        for (obs, &k) in self.shuffle.iter().enumerate() {
            order[k] = obs;
        }
        CausalOrder::from_order(order, self.observed_b().matrix()).expect("valid shuffle")
    }

    /// True when `order` (observed labels) is consistent with every edge of
    /// the model, i.e. the true `B` is strictly lower triangular under it.
    pub fn order_is_consistent(&self, order: &[usize]) -> bool {
        let b = self.observed_b();
        let n = self.n();
        if check_bijection(order, n).is_err() {
            return false;
        }
        let mut pos = vec![0; n];
        for (p, &v) in order.iter().enumerate() {
            pos[v] = p;
        }
        (0..n).all(|i| (0..n).all(|j| b.get(i, j) == 0.0 || pos[j] < pos[i]))
    }

    /// Number of nonzero edges.
    pub fn edge_count(&self) -> usize {
        self.b_true.iter().filter(|v| **v != 0.0).count()
    }
}

/// Draws a random model from `config`; deterministic in `config.seed`.
pub fn random_model(config: &GeneratorConfig) -> Result<GroundTruthModel> {
    config.validate()?;
    let n = config.n;
    let mut rng = rng_from(config.seed);
    let (lo, hi) = config.coefficient_range;
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            if rng.random::<f64>() < config.sparsity {
                continue;
            }
            let magnitude = uniform(&mut rng, lo, hi);
            b[(i, j)] = if rng.random_bool(0.5) { magnitude } else { -magnitude };
        }
    }
    let (vlo, vhi) = config.disturbance_variance_range;
    let variances = (0..n).map(|_| uniform(&mut rng, vlo, vhi)).collect();
    let (clo, chi) = config.constants_range;
    let constants = (0..n).map(|_| uniform(&mut rng, clo, chi)).collect();
    let exponents = (0..n)
        .map(|_| {
            let (elo, ehi) = config.exponent_ranges[usize::from(rng.random_bool(0.5))];
            uniform(&mut rng, elo, ehi)
        })
        .collect();
    let mut shuffle: Vec<usize> = (0..n).collect();
    shuffle.shuffle(&mut rng);
    GroundTruthModel::new(b, constants, variances, exponents, shuffle)
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..hi)
    }
}

/// `m` draws of `sign(g) |g|^exponent` for standard gaussian `g`,
/// standardized to sample mean 0 and variance 1.
pub fn nongaussian_noise<R: Rng + ?Sized>(m: usize, exponent: f64, rng: &mut R) -> Vec<f64> {
    let mut e: Vec<f64> = (0..m)
        .map(|_| {
            let g: f64 = StandardNormal.sample(rng);
            g.signum() * g.abs().powf(exponent)
        })
        .collect();
    let mu = e.iter().sum::<f64>() / m as f64;
    let var = e.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / m as f64;
    let sd = var.sqrt();
    for v in &mut e {
        *v = if sd > 0.0 { (*v - mu) / sd } else { 0.0 };
    }
    e
}

/// Data in causal order before shuffling, with the disturbances used.
/// Returns `(X, E)`, both `n x m`, with `X = B X + E + c`.
pub fn generate_unshuffled<R: Rng + ?Sized>(
    model: &GroundTruthModel,
    m: usize,
    rng: &mut R,
) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = model.n();
    let mut e = DMatrix::zeros(n, m);
    for k in 0..n {
        let noise = nongaussian_noise(m, model.exponents[k], rng);
        let scale = model.variances[k].sqrt();
        for (t, v) in noise.into_iter().enumerate() {
            e[(k, t)] = scale * v;
        }
    }
    let mut x = DMatrix::zeros(n, m);
    for t in 0..m {
        for k in 0..n {
            let mut v = e[(k, t)] + model.constants[k];
            for j in 0..k {
                v += model.b_true[(k, j)] * x[(j, t)];
            }
            x[(k, t)] = v;
        }
    }
    (x, e)
}

/// Observed data: generated in causal order, then rows shuffled.
pub fn generate<R: Rng + ?Sized>(model: &GroundTruthModel, m: usize, rng: &mut R) -> Result<DataMatrix> {
    if m == 0 {
        return Err(LingamError::InvalidConfig("m must be >= 1".into()));
    }
    let (x, _) = generate_unshuffled(model, m, rng);
    DataMatrix::new(x.select_rows(&model.shuffle), model.names())
}
