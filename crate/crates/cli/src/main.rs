//! `lingam` command-line tool.
//!
//! Exit codes:
//! - 0: success
//! - 2: bad input, bad configuration, unreadable or unwritable file
//! - 3: discovery finished but the assumption diagnostics raised warnings
//! - 4: ICA did not converge; best-effort output was still written

mod config;

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lingam::experiment::run_experiment;
use lingam::{derive_seed, io as lio, Contrast, DataMatrix, LingamError};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::RunConfig;

const EXIT_OK: u8 = 0;
const EXIT_INPUT: u8 = 2;
const EXIT_WARNINGS: u8 = 3;
const EXIT_NOT_CONVERGED: u8 = 4;

#[derive(Parser)]
#[command(
    name = "lingam",
    version,
    about = "Causal discovery for linear non-gaussian acyclic models"
)]
struct Cli {
    /// TOML configuration file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path, `-` for standard output.
    #[arg(short, long, global = true, default_value = "-")]
    output: String,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Repeat for more log output on standard error.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Dot,
    Report,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random model and write a dataset with its ground truth.
    Generate(GenerateArgs),
    /// Estimate the connection matrix and causal order of a dataset.
    Discover(DiscoverArgs),
    /// Bootstrap the edges allowed by a discovered causal order.
    Prune(PruneArgs),
    /// Run a simulation sweep and compare estimates with the truth.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n: Option<usize>,
    /// Number of samples.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    sparsity: Option<f64>,
    /// Ground-truth path; defaults to `<stem>.truth.json` beside the output.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ContrastArg {
    LogCosh,
    Cubic,
}

#[derive(Args)]
struct DiscoverArgs {
    /// Dataset CSV, `-` for standard input.
    input: String,
    /// Also write the estimated graph here.
    #[arg(long)]
    dot: Option<PathBuf>,
    #[arg(long, value_enum)]
    contrast: Option<ContrastArg>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
}

#[derive(Args)]
struct PruneArgs {
    /// Dataset CSV the result was estimated from.
    input: String,
    /// Result file written by `discover --format report`.
    result: PathBuf,
    /// Also write the pruned graph here.
    #[arg(long)]
    dot: Option<PathBuf>,
    #[arg(long)]
    resamples: Option<usize>,
    #[arg(long)]
    z_threshold: Option<f64>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_delimiter = ',')]
    n_values: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    m_values: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    sparsity_values: Option<Vec<f64>>,
    #[arg(long)]
    trials: Option<usize>,
    /// Also write the JSON summary here.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Also write the text summary table here.
    #[arg(long)]
    table: Option<PathBuf>,
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = match error.downcast_ref::<LingamError>() {
            Some(LingamError::NotConverged { .. }) => EXIT_NOT_CONVERGED,
            _ => EXIT_INPUT,
        };
        Failure { code, error }
    }
}

impl From<LingamError> for Failure {
    fn from(e: LingamError) -> Self {
        anyhow::Error::from(e).into()
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    cfg.apply_seed();
    let out = Output {
        path: cli.output,
        format: cli.format,
    };
    match cli.command {
        Command::Generate(args) => generate(cfg, &out, args),
        Command::Discover(args) => discover(cfg, &out, args),
        Command::Prune(args) => prune(cfg, &out, args),
        Command::Experiment(args) => experiment(cfg, &out, args),
    }
}

struct Output {
    path: String,
    format: Option<Format>,
}

impl Output {
    fn format(&self, default: Format, allowed: &[Format]) -> Result<Format, Failure> {
        let f = self.format.unwrap_or(default);
        if !allowed.contains(&f) {
            let name = f.to_possible_value().expect("no skipped variants");
            return Err(anyhow!("format '{}' is not available for this command", name.get_name()).into());
        }
        Ok(f)
    }

    fn is_stdout(&self) -> bool {
        self.path == "-"
    }

    fn write(&self, body: impl FnOnce(&mut dyn Write) -> lingam::Result<()>) -> Result<(), Failure> {
        if self.is_stdout() {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            body(&mut w)?;
            w.flush().context("cannot write to standard output")?;
            Ok(())
        } else {
            write_file(Path::new(&self.path), body)
        }
    }
}

fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> lingam::Result<()>) -> Result<(), Failure> {
    let file = File::create(path).with_context(|| format!("cannot write {}", path.display()))?;
    let mut w = BufWriter::new(file);
    body(&mut w).map_err(|e| anyhow::Error::from(e).context(format!("cannot write {}", path.display())))?;
    w.flush().with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

fn read_dataset(input: &str) -> Result<DataMatrix, Failure> {
    let data = if input == "-" {
        let mut buf = Vec::new();
        io::stdin()
            .read_to_end(&mut buf)
            .context("cannot read standard input")?;
        lio::read_dataset(buf.as_slice())
    } else {
        let file = File::open(input).with_context(|| format!("cannot read {input}"))?;
        lio::read_dataset(io::BufReader::new(file))
    };
    Ok(data.map_err(|e| anyhow::Error::from(e).context(format!("invalid dataset {input}")))?)
}

fn header(command: &str, cfg: &RunConfig, extra: serde_json::Value) -> serde_json::Value {
    let mut v = json!({ "command": command, "version": env!("CARGO_PKG_VERSION") });
    let map = v.as_object_mut().unwrap();
    let cfg = serde_json::to_value(cfg).expect("config serializes");
    if let serde_json::Value::Object(entries) = cfg {
        map.extend(entries);
    }
    if let serde_json::Value::Object(entries) = extra {
        map.extend(entries);
    }
    v
}

fn truth_path(output: &str) -> PathBuf {
    let p = Path::new(output);
    let stem = p
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "data".into());
    p.with_file_name(format!("{stem}.truth.json"))
}

fn generate(mut cfg: RunConfig, out: &Output, args: GenerateArgs) -> CmdResult {
    out.format(Format::Csv, &[Format::Csv])?;
    if let Some(n) = args.n {
        cfg.model.n = n;
    }
    if let Some(m) = args.m {
        cfg.samples = m;
    }
    if let Some(s) = args.sparsity {
        cfg.model.sparsity = s;
    }
    let model = lingam::datagen::random_model(&cfg.model)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.model.seed, 1));
    let data = lingam::datagen::generate(&model, cfg.samples, &mut rng)?;

    let truth = match (args.truth, out.is_stdout()) {
        (Some(p), _) => Some(p),
        (None, false) => Some(truth_path(&out.path)),
        (None, true) => None,
    };
    out.write(|w| lio::write_dataset(w, &data))?;
    match truth {
        Some(path) => {
            let h = header("generate", &cfg, json!({}));
            write_file(&path, |w| lio::write_ground_truth(w, &model, h))?;
        }
        None => log::warn!("writing to standard output without --truth; ground truth not saved"),
    }
    Ok(EXIT_OK)
}

fn discover(mut cfg: RunConfig, out: &Output, args: DiscoverArgs) -> CmdResult {
    let format = out.format(Format::Report, &[Format::Report, Format::Csv, Format::Dot])?;
    if let Some(c) = args.contrast {
        cfg.ica.contrast = match c {
            ContrastArg::LogCosh => Contrast::LogCosh,
            ContrastArg::Cubic => Contrast::Cubic,
        };
    }
    if let Some(v) = args.max_iterations {
        cfg.ica.max_iterations = v;
    }
    if let Some(v) = args.tolerance {
        cfg.ica.tolerance = v;
    }
    if let Some(v) = args.restarts {
        cfg.ica.restarts = v;
    }
    let data = read_dataset(&args.input)?;
    let result = lingam::discover_best_effort(&data, &cfg.ica)?;
    let h = header("discover", &cfg, json!({ "input": args.input }));
    let comments = [format!("lingam discover {}", serde_json::to_string(&h).expect("json"))];

    let dot = |w: &mut dyn Write| lio::write_dot(w, &result.b_hat, &result.causal_order.order, &comments);
    match format {
        Format::Report => out.write(|w| lio::write_result(w, &result, h.clone()))?,
        Format::Csv => out.write(|w| lio::write_matrix_csv(w, &result.b_hat))?,
        Format::Dot => out.write(dot)?,
    }
    if let Some(path) = &args.dot {
        write_file(path, dot)?;
    }

    for warning in &result.diagnostics.warnings {
        eprintln!("warning: {warning}");
    }
    let converged = result.ica_report.as_ref().is_none_or(|r| r.converged);
    if !converged {
        eprintln!("warning: ICA did not converge; the output is a best-effort estimate");
        return Ok(EXIT_NOT_CONVERGED);
    }
    Ok(if result.diagnostics.has_warnings() {
        EXIT_WARNINGS
    } else {
        EXIT_OK
    })
}

fn prune(mut cfg: RunConfig, out: &Output, args: PruneArgs) -> CmdResult {
    let format = out.format(Format::Csv, &[Format::Csv, Format::Report, Format::Dot])?;
    if let Some(v) = args.resamples {
        cfg.prune.resamples = v;
    }
    if let Some(v) = args.z_threshold {
        cfg.prune.z_threshold = v;
    }
    let data = read_dataset(&args.input)?;
    let file = File::open(&args.result).with_context(|| format!("cannot read {}", args.result.display()))?;
    let result = lio::read_result(io::BufReader::new(file))
        .map_err(|e| anyhow::Error::from(e).context(format!("invalid result {}", args.result.display())))?;
    if result.b_hat.n() != data.n_vars() {
        return Err(anyhow!(
            "dimension mismatch: result has {} variables, dataset has {}",
            result.b_hat.n(),
            data.n_vars()
        )
        .into());
    }
    if result.b_hat.names() != data.names() {
        log::warn!("variable names of the result and the dataset differ");
    }
    let report = lingam::bootstrap_prune(&data, &result.causal_order, &cfg.prune)?;
    let h = header(
        "prune",
        &cfg,
        json!({ "input": args.input, "result": args.result.display().to_string() }),
    );
    let comments = [format!("lingam prune {}", serde_json::to_string(&h).expect("json"))];

    let dot = |w: &mut dyn Write| lio::write_dot(w, &report.kept, &report.order.order, &comments);
    match format {
        Format::Csv => out.write(|w| lio::write_edge_table(w, &report))?,
        Format::Report => out.write(|w| lio::write_prune_report(w, &report, h.clone()))?,
        Format::Dot => out.write(dot)?,
    }
    if let Some(path) = &args.dot {
        write_file(path, dot)?;
    }
    Ok(EXIT_OK)
}

fn experiment(mut cfg: RunConfig, out: &Output, args: ExperimentArgs) -> CmdResult {
    let format = out.format(Format::Csv, &[Format::Csv, Format::Report])?;
    if let Some(v) = args.n_values {
        cfg.experiment.n_values = v;
    }
    if let Some(v) = args.m_values {
        cfg.experiment.m_values = v;
    }
    if let Some(v) = args.sparsity_values {
        cfg.experiment.sparsity_values = v;
    }
    if let Some(v) = args.trials {
        cfg.experiment.trials = v;
    }
    let output = run_experiment(&cfg.sweep())?;
    let summary = json!({
        "config": header("experiment", &cfg, json!({})),
        "cells": output.cells,
        "failures": output.failures,
    });

    match format {
        Format::Csv => out.write(|w| lio::write_scatter(w, &output.records))?,
        _ => out.write(|w| lio::write_json(w, &summary))?,
    }
    if let Some(path) = &args.summary {
        write_file(path, |w| lio::write_json(w, &summary))?;
    }
    if let Some(path) = &args.table {
        write_file(path, |w| Ok(write!(w, "{output}")?))?;
    }
    for cell in output.cells.iter().filter(|c| c.unreliable) {
        eprintln!(
            "warning: cell n={} m={} sparsity={} unreliable ({} of {} trials failed)",
            cell.n, cell.m, cell.sparsity, cell.failures, cell.trials
        );
    }
    Ok(EXIT_OK)
}
