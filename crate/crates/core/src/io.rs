//! File formats: dataset CSV, ground-truth sidecar, result and prune
//! reports, scatter CSV and Graphviz DOT export.
//!
//! Structured files are JSON documents carrying a `format` tag and a
//! `version`; floats are written with round-trip precision.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::data::DataMatrix;
use crate::datagen::GroundTruthModel;
use crate::error::{LingamError, Result};
use crate::ica::{IcaReport, UnmixingMatrix};
use crate::lingam::{ConnectionMatrix, DiagnosticsReport, LingamResult};
use crate::permutation::{CausalOrder, RowPermutation};
use crate::pruning::{PruneConfig, PruneReport, Verdict};

pub const FORMAT_VERSION: u32 = 1;
pub const GROUND_TRUTH_FORMAT: &str = "lingam-ground-truth";
pub const RESULT_FORMAT: &str = "lingam-result";
pub const PRUNE_FORMAT: &str = "lingam-prune";

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn matrix_from_rows(rows: &[Vec<f64>], n: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(LingamError::Parse(format!("{what} must be {n}x{n}")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn check_format(found: &str, version: u32, expected: &str) -> Result<()> {
    if found != expected {
        return Err(LingamError::Parse(format!(
            "expected a '{expected}' document, found '{found}'"
        )));
    }
    if version != FORMAT_VERSION {
        return Err(LingamError::Parse(format!(
            "unsupported {expected} version {version} (supported: {FORMAT_VERSION})"
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Dataset CSV

/// Reads a dataset: a header row of variable names, then one sample per
/// line.
pub fn read_dataset<R: Read>(reader: R) -> Result<DataMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let names: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if names.is_empty() || names.iter().any(String::is_empty) {
        return Err(LingamError::Parse("dataset header must name every column".into()));
    }
    let mut samples = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        let values = record
            .iter()
            .enumerate()
            .map(|(col, field)| {
                field.parse::<f64>().map_err(|_| {
                    LingamError::Parse(format!(
                        "sample {} column '{}': '{field}' is not a number",
                        line + 1,
                        names.get(col).map_or("?", String::as_str)
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        samples.push(values);
    }
    DataMatrix::from_samples(&samples, names)
}

pub fn write_dataset<W: Write>(writer: W, data: &DataMatrix) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(data.names())?;
    let values = data.values();
    let mut record = Vec::with_capacity(data.n_vars());
    for t in 0..data.n_samples() {
        record.clear();
        record.extend(values.column(t).iter().map(|v| v.to_string()));
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Ground truth

/// Entry `b[i][j]`, the weight of the edge `x_j -> x_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// Ground-truth sidecar; all per-variable fields use the observed labeling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthFile {
    pub format: String,
    pub version: u32,
    #[serde(default)]
    pub config: serde_json::Value,
    pub n: usize,
    pub variables: Vec<String>,
    pub edges: Vec<EdgeRecord>,
    pub constants: Vec<f64>,
    pub variances: Vec<f64>,
    pub exponents: Vec<f64>,
    /// Observed variable `i` is causal variable `shuffle[i]`.
    pub shuffle: Vec<usize>,
}

impl GroundTruthFile {
    pub fn from_model(model: &GroundTruthModel, config: serde_json::Value) -> Self {
        let b = model.observed_b();
        Self {
            format: GROUND_TRUTH_FORMAT.into(),
            version: FORMAT_VERSION,
            config,
            n: model.n(),
            variables: model.names(),
            edges: b
                .edges()
                .into_iter()
                .map(|(j, i, weight)| EdgeRecord { i, j, weight })
                .collect(),
            constants: model.observed_constants(),
            variances: model.observed_variances(),
            exponents: model.observed_exponents(),
            shuffle: model.shuffle.clone(),
        }
    }

    pub fn to_model(&self) -> Result<GroundTruthModel> {
        check_format(&self.format, self.version, GROUND_TRUTH_FORMAT)?;
        let n = self.n;
        let s = &self.shuffle;
        crate::permutation::check_bijection(s, n)?;
        if [self.constants.len(), self.variances.len(), self.exponents.len()]
            .iter()
            .any(|&l| l != n)
        {
            return Err(LingamError::Parse("ground-truth vectors must have length n".into()));
        }
        let mut b_true = DMatrix::zeros(n, n);
        for e in &self.edges {
            if e.i >= n || e.j >= n {
                return Err(LingamError::Parse(format!("edge ({}, {}) out of range", e.i, e.j)));
            }
            b_true[(s[e.i], s[e.j])] = e.weight;
        }
        let mut constants = vec![0.0; n];
        let mut variances = vec![0.0; n];
        let mut exponents = vec![0.0; n];
        for (obs, &k) in s.iter().enumerate() {
            constants[k] = self.constants[obs];
            variances[k] = self.variances[obs];
            exponents[k] = self.exponents[obs];
        }
        GroundTruthModel::new(b_true, constants, variances, exponents, s.clone())
    }
}

pub fn write_ground_truth<W: Write>(writer: W, model: &GroundTruthModel, config: serde_json::Value) -> Result<()> {
    write_json(writer, &GroundTruthFile::from_model(model, config))
}

pub fn read_ground_truth<R: Read>(reader: R) -> Result<GroundTruthModel> {
    let file: GroundTruthFile = serde_json::from_reader(reader)?;
    file.to_model()
}

// ---------------------------------------------------------------------------
// Discovery result

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub format: String,
    pub version: u32,
    #[serde(default)]
    pub config: serde_json::Value,
    pub variables: Vec<String>,
    pub b_hat: Vec<Vec<f64>>,
    pub causal_order: Vec<usize>,
    pub causal_order_names: Vec<String>,
    pub order_residual: f64,
    #[serde(default)]
    pub order_approximate: bool,
    pub constants: Vec<f64>,
    pub means: Vec<f64>,
    pub w_tilde_prime: Vec<Vec<f64>>,
    pub row_permutation: Vec<usize>,
    pub row_permutation_objective: f64,
    pub diagnostics: DiagnosticsReport,
    #[serde(default)]
    pub ica: Option<IcaReport>,
}

impl ResultFile {
    pub fn from_result(result: &LingamResult, config: serde_json::Value) -> Self {
        let names = result.b_hat.names().to_vec();
        Self {
            format: RESULT_FORMAT.into(),
            version: FORMAT_VERSION,
            config,
            causal_order_names: result.causal_order.order.iter().map(|&i| names[i].clone()).collect(),
            variables: names,
            b_hat: rows_of(result.b_hat.matrix()),
            causal_order: result.causal_order.order.clone(),
            order_residual: result.causal_order.residual,
            order_approximate: result.causal_order.approximate,
            constants: result.constants.clone(),
            means: result.means.clone(),
            w_tilde_prime: rows_of(result.w_tilde_prime.matrix()),
            row_permutation: result.row_permutation.mapping.clone(),
            row_permutation_objective: result.row_permutation.objective_value,
            diagnostics: result.diagnostics.clone(),
            ica: result.ica_report.clone(),
        }
    }

    pub fn to_result(&self) -> Result<LingamResult> {
        check_format(&self.format, self.version, RESULT_FORMAT)?;
        let n = self.variables.len();
        let b = ConnectionMatrix::new(matrix_from_rows(&self.b_hat, n, "b_hat")?, self.variables.clone())?;
        let w = UnmixingMatrix::new(matrix_from_rows(&self.w_tilde_prime, n, "w_tilde_prime")?)?;
        crate::permutation::check_bijection(&self.causal_order, n)?;
        crate::permutation::check_bijection(&self.row_permutation, n)?;
        if self.constants.len() != n || self.means.len() != n {
            return Err(LingamError::Parse("constants and means must have length n".into()));
        }
        Ok(LingamResult {
            b_hat: b,
            causal_order: CausalOrder {
                order: self.causal_order.clone(),
                residual: self.order_residual,
                approximate: self.order_approximate,
            },
            w_tilde_prime: w,
            row_permutation: RowPermutation {
                mapping: self.row_permutation.clone(),
                objective_value: self.row_permutation_objective,
            },
            constants: self.constants.clone(),
            means: self.means.clone(),
            diagnostics: self.diagnostics.clone(),
            ica_report: self.ica.clone(),
        })
    }
}

pub fn write_result<W: Write>(writer: W, result: &LingamResult, config: serde_json::Value) -> Result<()> {
    write_json(writer, &ResultFile::from_result(result, config))
}

pub fn read_result<R: Read>(reader: R) -> Result<LingamResult> {
    let file: ResultFile = serde_json::from_reader(reader)?;
    file.to_result()
}

/// Writes `B` as a CSV matrix with a header of variable names; row `i`
/// holds the incoming weights of variable `i`.
pub fn write_matrix_csv<W: Write>(writer: W, b: &ConnectionMatrix) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(b.names())?;
    for row in b.matrix().row_iter() {
        wtr.write_record(row.iter().map(|v| v.to_string()))?;
    }
    wtr.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Prune report

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeStat {
    pub i: usize,
    pub j: usize,
    pub mean: f64,
    pub std: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneFile {
    pub format: String,
    pub version: u32,
    #[serde(default)]
    pub config: serde_json::Value,
    pub prune: PruneConfig,
    pub variables: Vec<String>,
    pub causal_order: Vec<usize>,
    pub order_residual: f64,
    #[serde(default)]
    pub order_approximate: bool,
    pub used_resamples: usize,
    pub edges: Vec<EdgeStat>,
}

impl PruneFile {
    pub fn from_report(report: &PruneReport, config: serde_json::Value) -> Self {
        Self {
            format: PRUNE_FORMAT.into(),
            version: FORMAT_VERSION,
            config,
            prune: report.config.clone(),
            variables: report.kept.names().to_vec(),
            causal_order: report.order.order.clone(),
            order_residual: report.order.residual,
            order_approximate: report.order.approximate,
            used_resamples: report.used_resamples,
            edges: report
                .edge_table()
                .into_iter()
                .map(|(i, j, mean, std, verdict)| EdgeStat {
                    i,
                    j,
                    mean,
                    std,
                    verdict,
                })
                .collect(),
        }
    }

    pub fn to_report(&self) -> Result<PruneReport> {
        check_format(&self.format, self.version, PRUNE_FORMAT)?;
        crate::permutation::check_bijection(&self.causal_order, self.variables.len())?;
        let order = CausalOrder {
            order: self.causal_order.clone(),
            residual: self.order_residual,
            approximate: self.order_approximate,
        };
        edge_table_to_report(
            &self.edges,
            self.variables.clone(),
            order,
            self.prune.clone(),
            self.used_resamples,
        )
    }
}

fn edge_table_to_report(
    edges: &[EdgeStat],
    names: Vec<String>,
    order: CausalOrder,
    config: PruneConfig,
    used_resamples: usize,
) -> Result<PruneReport> {
    let n = names.len();
    if edges.len() != n * n {
        return Err(LingamError::Parse(format!(
            "edge table has {} rows, expected {}",
            edges.len(),
            n * n
        )));
    }
    let mut means = DMatrix::zeros(n, n);
    let mut stds = DMatrix::zeros(n, n);
    let mut verdicts = DMatrix::from_element(n, n, Verdict::ForcedZero);
    for e in edges {
        if e.i >= n || e.j >= n {
            return Err(LingamError::Parse(format!("edge ({}, {}) out of range", e.i, e.j)));
        }
        means[(e.i, e.j)] = e.mean;
        stds[(e.i, e.j)] = e.std;
        verdicts[(e.i, e.j)] = e.verdict;
    }
    let kept = DMatrix::from_fn(n, n, |i, j| {
        if verdicts[(i, j)] == Verdict::Kept {
            means[(i, j)]
        } else {
            0.0
        }
    });
    Ok(PruneReport {
        kept: ConnectionMatrix::new(kept, names)?,
        edge_means: means,
        edge_stds: stds,
        verdicts,
        order,
        config,
        used_resamples,
    })
}

pub fn write_prune_report<W: Write>(writer: W, report: &PruneReport, config: serde_json::Value) -> Result<()> {
    write_json(writer, &PruneFile::from_report(report, config))
}

pub fn read_prune_report<R: Read>(reader: R) -> Result<PruneReport> {
    let file: PruneFile = serde_json::from_reader(reader)?;
    file.to_report()
}

/// Edge table CSV with columns `i,j,mean,std,verdict`.
pub fn write_edge_table<W: Write>(writer: W, report: &PruneReport) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    for (i, j, mean, std, verdict) in report.edge_table() {
        wtr.serialize(EdgeStat {
            i,
            j,
            mean,
            std,
            verdict,
        })?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_edge_table<R: Read>(reader: R) -> Result<Vec<EdgeStat>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize().map(|r| r.map_err(LingamError::from)).collect()
}

// ---------------------------------------------------------------------------
// Scatter CSV

/// One entry of an estimated `B` against the generating one. Indices use
/// the causal labeling of the generating model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRecord {
    pub trial: usize,
    pub n: usize,
    pub m: usize,
    pub i: usize,
    pub j: usize,
    pub b_true: f64,
    pub b_est: f64,
}

pub fn write_scatter<W: Write>(writer: W, records: &[ScatterRecord]) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    wtr.write_record(["trial", "n", "m", "i", "j", "b_true", "b_est"])?;
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_scatter<R: Read>(reader: R) -> Result<Vec<ScatterRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    rdr.deserialize().map(|r| r.map_err(LingamError::from)).collect()
}

// ---------------------------------------------------------------------------
// DOT

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Graphviz digraph of the nonzero entries of `b`. Nodes are listed in
/// causal order; edge labels are strengths rounded to 3 decimals.
pub fn write_dot<W: Write>(mut writer: W, b: &ConnectionMatrix, order: &[usize], comments: &[String]) -> Result<()> {
    crate::permutation::check_bijection(order, b.n())?;
    for c in comments {
        for line in c.lines() {
            writeln!(writer, "// {line}")?;
        }
    }
    writeln!(writer, "digraph lingam {{")?;
    writeln!(writer, "  rankdir=TB;")?;
    let names = b.names();
    for &v in order {
        writeln!(writer, "  \"{}\";", dot_escape(&names[v]))?;
    }
    for &i in order {
        for &j in order {
            let w = b.get(i, j);
            if w != 0.0 {
                writeln!(
                    writer,
                    "  \"{}\" -> \"{}\" [label=\"{:.3}\"];",
                    dot_escape(&names[j]),
                    dot_escape(&names[i]),
                    w
                )?;
            }
        }
    }
    writeln!(writer, "}}")?;
    Ok(())
}

pub fn write_json<W: Write, T: Serialize>(mut writer: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, value)?;
    writeln!(writer)?;
    Ok(())
}
