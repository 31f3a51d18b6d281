//! Simulation sweeps: generate random models, run discovery, and compare
//! the estimated connection strengths with the generating ones.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::datagen::{generate, random_model, GeneratorConfig, GroundTruthModel};
use crate::error::{LingamError, Result};
use crate::ica::IcaConfig;
use crate::io::ScatterRecord;
use crate::lingam::{discover, LingamResult};
use crate::seed::{derive_seed, rng_from};

/// Cells with a larger share of failed trials are marked unreliable.
pub const UNRELIABLE_FAILURE_RATE: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub n_values: Vec<usize>,
    pub m_values: Vec<usize>,
    pub sparsity_values: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Template for the model generator; `n`, `sparsity` and `seed` are set
    /// per trial.
    pub generator: GeneratorConfig,
    /// `seed` is set per trial.
    pub ica: IcaConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_values: vec![3, 5, 8],
            m_values: vec![200, 1000, 10_000],
            sparsity_values: vec![0.0, 0.5],
            trials: 20,
            seed: 0,
            generator: GeneratorConfig::default(),
            ica: IcaConfig::default(),
        }
    }
}

/// Seeds of one trial, derived from the sweep seed and the cell values so
/// that adding cells to a sweep leaves existing trials unchanged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialSeeds {
    pub model: u64,
    pub data: u64,
    pub ica: u64,
}

impl TrialSeeds {
    pub fn new(seed: u64, n: usize, m: usize, sparsity: f64, trial: usize) -> Self {
        let cell = derive_seed(derive_seed(derive_seed(seed, n as u64), m as u64), sparsity.to_bits());
        let base = derive_seed(cell, trial as u64);
        Self {
            model: derive_seed(base, 0),
            data: derive_seed(base, 1),
            ica: derive_seed(base, 2),
        }
    }
}

/// One generated dataset and its discovery outcome.
#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub model: GroundTruthModel,
    pub result: Result<LingamResult, String>,
}

/// Generates a model and data for one trial and runs discovery.
pub fn run_trial(generator: &GeneratorConfig, ica: &IcaConfig, m: usize, seeds: TrialSeeds) -> Result<TrialOutcome> {
    let config = GeneratorConfig {
        seed: seeds.model,
        ..generator.clone()
    };
    let model = random_model(&config)?;
    let data = generate(&model, m, &mut rng_from(seeds.data))?;
    let ica = IcaConfig {
        seed: seeds.ica,
        ..ica.clone()
    };
    let result = discover(&data, &ica).map_err(|e| e.to_string());
    Ok(TrialOutcome { model, result })
}

/// Scatter records of every ordered pair `i != j` in the causal labeling.
pub fn scatter_records(trial: usize, m: usize, model: &GroundTruthModel, result: &LingamResult) -> Vec<ScatterRecord> {
    let n = model.n();
    let observed = model.true_order().order;
    let b_hat = result.b_hat.matrix();
    let mut out = Vec::with_capacity(n * (n - 1));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out.push(ScatterRecord {
                    trial,
                    n,
                    m,
                    i,
                    j,
                    b_true: model.b_true[(i, j)],
                    b_est: b_hat[(observed[i], observed[j])],
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub n: usize,
    pub m: usize,
    pub sparsity: f64,
    pub trial: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub n: usize,
    pub m: usize,
    pub sparsity: f64,
    pub trials: usize,
    pub failures: usize,
    pub unreliable: bool,
    pub points: usize,
    /// Least-squares line of `b_est` on `b_true`; `None` without spread in
    /// `b_true`.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r_squared: Option<f64>,
    pub max_abs_error: Option<f64>,
    /// Share of successful trials whose estimated order is consistent with
    /// every true edge.
    pub correct_order_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub records: Vec<ScatterRecord>,
    pub cells: Vec<CellSummary>,
    pub failures: Vec<TrialFailure>,
}

/// Least-squares fit `y = a + b x` with its coefficient of determination.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let k = x.len() as f64;
    if x.len() < 2 {
        return None;
    }
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Some((slope, my - slope * mx, r2))
}

fn summarize(
    n: usize,
    m: usize,
    sparsity: f64,
    trials: usize,
    records: &[ScatterRecord],
    failures: usize,
    correct: usize,
) -> CellSummary {
    let x: Vec<f64> = records.iter().map(|r| r.b_true).collect();
    let y: Vec<f64> = records.iter().map(|r| r.b_est).collect();
    let fit = linear_fit(&x, &y);
    let succeeded = trials - failures;
    CellSummary {
        n,
        m,
        sparsity,
        trials,
        failures,
        unreliable: trials > 0 && failures as f64 > UNRELIABLE_FAILURE_RATE * trials as f64,
        points: records.len(),
        slope: fit.map(|f| f.0),
        intercept: fit.map(|f| f.1),
        r_squared: fit.map(|f| f.2),
        max_abs_error: records
            .iter()
            .map(|r| (r.b_est - r.b_true).abs())
            .fold(None, |a: Option<f64>, e| Some(a.map_or(e, |a| a.max(e)))),
        correct_order_fraction: (succeeded > 0).then(|| correct as f64 / succeeded as f64),
    }
}

/// Runs every `(n, m, sparsity)` cell of the sweep. Trials run in parallel;
/// the output is ordered by cell, then trial.
///
/// Trial ids are unique within an `(n, m)` pair: trial `t` of the `s`-th
/// sparsity level has id `s * trials + t`.
pub fn run_experiment(sweep: &SweepConfig) -> Result<ExperimentOutput> {
    if sweep.n_values.contains(&0) || sweep.m_values.contains(&0) {
        return Err(LingamError::InvalidConfig("n and m values must be positive".into()));
    }
    let mut cells = Vec::new();
    for &n in &sweep.n_values {
        for &m in &sweep.m_values {
            for (si, &sparsity) in sweep.sparsity_values.iter().enumerate() {
                cells.push((n, m, si, sparsity));
            }
        }
    }
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..sweep.trials).map(move |t| (c, t)))
        .collect();

    let outcomes: Vec<Result<TrialOutcome>> = jobs
        .par_iter()
        .map(|&(c, t)| {
            let (n, m, _, sparsity) = cells[c];
            let generator = GeneratorConfig {
                n,
                sparsity,
                ..sweep.generator.clone()
            };
            run_trial(
                &generator,
                &sweep.ica,
                m,
                TrialSeeds::new(sweep.seed, n, m, sparsity, t),
            )
        })
        .collect();

    let mut output = ExperimentOutput {
        records: Vec::new(),
        cells: Vec::new(),
        failures: Vec::new(),
    };
    let mut outcomes = outcomes.into_iter();
    for &(n, m, si, sparsity) in &cells {
        let mut cell_records = Vec::new();
        let mut failures = 0;
        let mut correct = 0;
        for t in 0..sweep.trials {
            let outcome = outcomes.next().expect("one outcome per job")?;
            let id = si * sweep.trials + t;
            match &outcome.result {
                Ok(result) => {
                    if outcome.model.order_is_consistent(&result.causal_order.order) {
                        correct += 1;
                    }
                    cell_records.extend(scatter_records(id, m, &outcome.model, result));
                }
                Err(error) => {
                    failures += 1;
                    output.failures.push(TrialFailure {
                        n,
                        m,
                        sparsity,
                        trial: id,
                        error: error.clone(),
                    });
                }
            }
        }
        output.cells.push(summarize(
            n,
            m,
            sparsity,
            sweep.trials,
            &cell_records,
            failures,
            correct,
        ));
        output.records.extend(cell_records);
    }
    Ok(output)
}

fn opt(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.prec$}"))
}

impl fmt::Display for ExperimentOutput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>3} {:>7} {:>8} {:>6} {:>6} {:>8} {:>8} {:>9} {:>8}  flags",
            "n", "m", "sparsity", "trials", "failed", "slope", "r2", "max_err", "order_ok"
        )?;
        for c in &self.cells {
            writeln!(
                f,
                "{:>3} {:>7} {:>8.2} {:>6} {:>6} {:>8} {:>8} {:>9} {:>8}  {}",
                c.n,
                c.m,
                c.sparsity,
                c.trials,
                c.failures,
                opt(c.slope, 4),
                opt(c.r_squared, 4),
                opt(c.max_abs_error, 4),
                opt(c.correct_order_fraction, 3),
                if c.unreliable { "unreliable" } else { "" }
            )?;
        }
        Ok(())
    }
}
