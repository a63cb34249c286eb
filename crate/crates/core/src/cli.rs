//! Command-line front end.
//!
//! Every command resolves one [`ExperimentConfig`] (JSON file first, flags
//! on top), runs the pipeline for the selected parity blocks and renders
//! its artifacts. [`execute`] does no I/O; [`main_with_args`] prints the
//! primary artifact and writes everything under `--out`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 spectrum incomplete
//! (partial results are still written), 1 output I/O failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::analysis::{eigensolve, hardware_reference, overlap_table, spectrum_rows, OverlapTable, SpectrumRow};
use crate::circuits::{ansatz_1q, ansatz_2q, ansatz_for_dim, Circuit};
use crate::estimator::{default_folds, EstimatorConfig, Mitigation, Shots};
use crate::format::sig;
use crate::optimizer::{
    default_grid, discover_spectrum, minimize_variance, random_start, sweep, Cluster, RunConfig, RunTrace,
    SpectrumReport, StopReason,
};
use crate::pauli::{decompose_real, PauliSum};
use crate::quasispin::{build_block_for, square_block, ModelParams, Parity, QuasispinBlock};
use crate::simulator::NoiseModel;
use crate::{seed, Error, Result};

pub const FORMAT_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INCOMPLETE: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
pub enum AnsatzChoice {
    #[default]
    #[serde(rename = "auto")]
    Auto,
    #[serde(rename = "1q")]
    #[value(name = "1q")]
    OneQubit,
    #[serde(rename = "2q")]
    #[value(name = "2q")]
    TwoQubit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BlockArg {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
}

impl From<BlockArg> for Parity {
    fn from(b: BlockArg) -> Self {
        match b {
            BlockArg::A => Parity::A,
            BlockArg::B => Parity::B,
        }
    }
}

/// Everything a command needs. Mirrors the JSON config file; fields left
/// out of the file take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format_version: Option<u32>,
    pub model: ModelParams,
    /// `None` runs both blocks.
    pub block: Option<Parity>,
    pub ansatz: AnsatzChoice,
    pub shots: Shots,
    pub noise: NoiseModel,
    pub mitigation: Mitigation,
    pub folds: Vec<u32>,
    pub calibration_shots: Option<u64>,
    pub n_starts: usize,
    /// Objective evaluations per minimization.
    pub budget: usize,
    /// Sweep grid size.
    pub steps: usize,
    pub sweep_parameter: usize,
    /// Values of all ansatz slots for a multi-parameter sweep; the swept
    /// slot's entry is ignored.
    pub fixed_parameters: Option<Vec<f64>>,
    /// Start point for `minimize`; a seeded random start otherwise.
    pub initial_parameters: Option<Vec<f64>>,
    pub seed: u64,
    pub format: Option<OutputFormat>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            format_version: None,
            model: ModelParams { n_particles: 3, eps: 1.0, v: 0.5, w: 0.0 },
            block: None,
            ansatz: AnsatzChoice::Auto,
            shots: Shots::Exact,
            noise: NoiseModel::noiseless(),
            mitigation: Mitigation::NONE,
            folds: default_folds(),
            calibration_shots: None,
            n_starts: 20,
            budget: 2000,
            steps: 50,
            sweep_parameter: 0,
            fixed_parameters: None,
            initial_parameters: None,
            seed: 0,
            format: None,
            out: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn estimator(&self) -> EstimatorConfig {
        EstimatorConfig {
            shots: self.shots,
            noise: self.noise,
            mitigation: self.mitigation,
            folds: self.folds.clone(),
            calibration_shots: self.calibration_shots,
        }
    }

    pub fn run_config(&self) -> RunConfig {
        RunConfig { budget: self.budget, ..RunConfig::new(self.estimator()) }
    }

    pub fn blocks(&self) -> Vec<Parity> {
        match self.block {
            Some(p) => vec![p],
            None => vec![Parity::A, Parity::B],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(v) = self.format_version {
            if v != FORMAT_VERSION {
                return Err(Error::Config(format!("unsupported format_version {v}")));
            }
        }
        self.model.validate()?;
        self.estimator().validate()?;
        for (name, value) in [("n_starts", self.n_starts), ("budget", self.budget), ("steps", self.steps)] {
            if value == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    /// Copy echoed into JSON artifacts: the output path is dropped so that
    /// reruns into different directories produce identical files.
    fn echo(&self) -> Self {
        Self { out: None, format_version: Some(FORMAT_VERSION), ..self.clone() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Pauli decomposition of H and H^2 for each block.
    Decompose,
    /// Energy and variance along one ansatz parameter.
    Sweep,
    /// One variance minimization per block.
    Minimize,
    /// Multistart spectrum discovery.
    Spectrum,
    /// Fidelities of discovered states against exact eigenvectors.
    Overlaps,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Number of particles N.
    #[arg(long, global = true)]
    pub n: Option<u32>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub v: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub w: Option<f64>,
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Parity block; both when omitted.
    #[arg(long, global = true, value_enum)]
    pub block: Option<BlockArg>,
    #[arg(long, global = true, value_enum)]
    pub ansatz: Option<AnsatzChoice>,
    /// Shots per measured term, or `exact`.
    #[arg(long, global = true)]
    pub shots: Option<Shots>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Symmetric per-qubit readout flip probability.
    #[arg(long, global = true)]
    pub noise_readout: Option<f64>,
    /// Depolarizing probability after each CNOT.
    #[arg(long, global = true)]
    pub noise_cnot: Option<f64>,
    /// `readout`, `cnot`, `readout,cnot` or `none`.
    #[arg(long, global = true)]
    pub mitigate: Option<Mitigation>,
    /// CNOT folds for extrapolation, e.g. `1,3,5`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub folds: Option<Vec<u32>>,
    #[arg(long, global = true)]
    pub calibration_shots: Option<u64>,
    #[arg(long, global = true)]
    pub starts: Option<usize>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true)]
    pub budget: Option<usize>,
    /// Swept parameter slot.
    #[arg(long, global = true)]
    pub parameter: Option<usize>,
    /// All slot values for a multi-parameter sweep, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub fixed: Option<Vec<f64>>,
    /// Start point for `minimize`, comma separated.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    pub initial: Option<Vec<f64>>,
    /// JSON experiment config; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
}

impl Overrides {
    /// Loads `--config` (if any), applies the flags and validates.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(n) = self.n {
            c.model.n_particles = n;
        }
        if let Some(v) = self.v {
            c.model.v = v;
        }
        if let Some(w) = self.w {
            c.model.w = w;
        }
        if let Some(eps) = self.eps {
            c.model.eps = eps;
        }
        if let Some(b) = self.block {
            c.block = Some(b.into());
        }
        if let Some(a) = self.ansatz {
            c.ansatz = a;
        }
        if let Some(s) = self.shots {
            c.shots = s;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(p) = self.noise_readout {
            c.noise.readout_p01 = p;
            c.noise.readout_p10 = p;
        }
        if let Some(p) = self.noise_cnot {
            c.noise.cnot_depolarizing = p;
        }
        if let Some(m) = self.mitigate {
            c.mitigation = m;
        }
        if let Some(f) = &self.folds {
            c.folds = f.clone();
        }
        if let Some(s) = self.calibration_shots {
            c.calibration_shots = Some(s);
        }
        if let Some(s) = self.starts {
            c.n_starts = s;
        }
        if let Some(s) = self.steps {
            c.steps = s;
        }
        if let Some(b) = self.budget {
            c.budget = b;
        }
        if let Some(p) = self.parameter {
            c.sweep_parameter = p;
        }
        if let Some(f) = &self.fixed {
            c.fixed_parameters = Some(f.clone());
        }
        if let Some(i) = &self.initial {
            c.initial_parameters = Some(i.clone());
        }
        if let Some(o) = &self.out {
            c.out = Some(o.clone());
        }
        if let Some(f) = self.format {
            c.format = Some(f);
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Parser)]
#[command(name = "lmg-vqe", version, about = "Variance-minimization VQE for LMG parity blocks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub overrides: Overrides,
}

/// Rendered results of one command.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    /// Primary artifact, printed to stdout.
    pub stdout: String,
    /// Files relative to `--out`.
    pub files: Vec<(PathBuf, String)>,
    /// Some oracle eigenvalue was not recovered.
    pub incomplete: bool,
}

impl Outcome {
    fn primary(name: &str, body: String) -> Self {
        Self { stdout: body.clone(), files: vec![(PathBuf::from(name), body)], incomplete: false }
    }

    pub fn exit_code(&self) -> i32 {
        if self.incomplete {
            EXIT_INCOMPLETE
        } else {
            EXIT_OK
        }
    }
}

pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

/// Parses `args` (program name first), runs the command, prints and writes
/// its artifacts and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = cli.overrides.resolve().and_then(|config| {
        let outcome = execute(cli.command, &config)?;
        if let Some(dir) = &config.out {
            write_outcome(dir, &outcome)?;
        }
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            if outcome.incomplete {
                eprintln!("lmg-vqe: spectrum incomplete, partial results written");
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("lmg-vqe: {e}");
            exit_code_for(&e)
        }
    }
}

pub fn write_outcome(dir: &Path, outcome: &Outcome) -> Result<()> {
    for (name, body) in &outcome.files {
        let path = dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, body)?;
    }
    Ok(())
}

pub fn execute(command: Command, config: &ExperimentConfig) -> Result<Outcome> {
    config.validate()?;
    match command {
        Command::Decompose => cmd_decompose(config),
        Command::Sweep => cmd_sweep(config),
        Command::Minimize => cmd_minimize(config),
        Command::Spectrum => cmd_spectrum(config),
        Command::Overlaps => cmd_overlaps(config),
    }
}

/// A parity block with its Pauli encodings.
pub struct PreparedBlock {
    pub block: QuasispinBlock,
    pub h: PauliSum,
    pub h2: PauliSum,
}

pub fn prepare(model: &ModelParams, parity: Parity) -> Result<PreparedBlock> {
    let block = build_block_for(model, parity)?;
    let h = decompose_real(&block.matrix)?;
    let h2 = decompose_real(&square_block(&block))?;
    Ok(PreparedBlock { block, h, h2 })
}

/// Circuit for a block under the configured ansatz choice.
pub fn select_ansatz(choice: AnsatzChoice, dim: usize) -> Result<Circuit> {
    let circuit = match choice {
        AnsatzChoice::Auto => ansatz_for_dim(dim),
        AnsatzChoice::OneQubit => Ok(ansatz_1q()),
        AnsatzChoice::TwoQubit => Ok(ansatz_2q()),
    }
    .map_err(|e| Error::Config(format!("no ansatz for block dimension {dim}: {e}")))?;
    if 1usize << circuit.num_qubits() != dim {
        return Err(Error::Config(format!(
            "{}-qubit ansatz does not match block dimension {dim}",
            circuit.num_qubits()
        )));
    }
    Ok(circuit)
}

fn block_seed(master: u64, parity: Parity) -> u64 {
    seed::derive(master, parity as u64)
}

fn csv_text(header: &[String], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn header(cols: &[&str]) -> Vec<String> {
    std::iter::once("format_version").chain(cols.iter().copied()).map(String::from).collect()
}

fn row(fields: impl IntoIterator<Item = String>) -> Vec<String> {
    std::iter::once(FORMAT_VERSION.to_string()).chain(fields).collect()
}

fn opt_sig(x: Option<f64>) -> String {
    x.map(sig).unwrap_or_default()
}

fn round_sig(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            let rounded: f64 = sig(x).parse().unwrap_or(x);
            if let Some(r) = serde_json::Number::from_f64(rounded) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_sig),
        Value::Object(map) => map.values_mut().for_each(round_sig),
        _ => {}
    }
}

/// Pretty JSON with every float rounded to nine significant digits.
pub fn json_text<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_sig(&mut v);
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

fn matrix_text(m: &nalgebra::DMatrix<f64>) -> String {
    m.row_iter().map(|r| r.iter().map(|&x| sig(x)).collect::<Vec<_>>().join(" ") + "\n").collect()
}

#[derive(Serialize)]
struct TermRecord {
    coefficient: f64,
    term: String,
}

fn term_records(sum: &PauliSum) -> Vec<TermRecord> {
    sum.terms().iter().map(|(c, s)| TermRecord { coefficient: *c, term: s.to_string() }).collect()
}

#[derive(Serialize)]
struct DecomposedBlock {
    block: Parity,
    m_values: Vec<String>,
    num_qubits: usize,
    h_matrix: Vec<Vec<f64>>,
    h: Vec<TermRecord>,
    h2_matrix: Vec<Vec<f64>>,
    h2: Vec<TermRecord>,
}

fn rows_of(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn cmd_decompose(config: &ExperimentConfig) -> Result<Outcome> {
    let m = &config.model;
    let mut text = format!(
        "# format_version {FORMAT_VERSION}\n# N={} eps={} V={} W={}\n",
        m.n_particles,
        sig(m.eps),
        sig(m.v),
        sig(m.w)
    );
    let mut records = Vec::new();
    let mut csv_rows = Vec::new();
    for parity in config.blocks() {
        let p = prepare(m, parity)?;
        let square = square_block(&p.block);
        let m_values: Vec<String> = p.block.m_values.iter().map(|m| m.to_string()).collect();
        text += &format!("\n# block {parity}\n# m {}\n# H matrix\n", m_values.join(" "));
        text += &matrix_text(&p.block.matrix);
        text += "# H\n";
        text += &p.h.to_text();
        text += "# H^2 matrix\n";
        text += &matrix_text(&square);
        text += "# H^2\n";
        text += &p.h2.to_text();
        for (op, sum) in [("H", &p.h), ("H^2", &p.h2)] {
            for (c, s) in sum.terms() {
                csv_rows.push(row([parity.to_string(), op.to_string(), sig(*c), s.to_string()]));
            }
        }
        records.push(DecomposedBlock {
            block: parity,
            m_values,
            num_qubits: p.h.num_qubits(),
            h_matrix: rows_of(&p.block.matrix),
            h: term_records(&p.h),
            h2_matrix: rows_of(&square),
            h2: term_records(&p.h2),
        });
    }
    let mut outcome = match config.format {
        None => Outcome::primary("decompose.txt", text.clone()),
        Some(OutputFormat::Csv) => Outcome::primary(
            "decompose.csv",
            csv_text(&header(&["block", "operator", "coefficient", "term"]), &csv_rows)?,
        ),
        Some(OutputFormat::Json) => Outcome::primary(
            "decompose.json",
            json_text(&serde_json::json!({
                "format_version": FORMAT_VERSION,
                "config": config.echo(),
                "blocks": records,
            }))?,
        ),
    };
    if config.format.is_some() {
        outcome.files.push((PathBuf::from("decompose.txt"), text));
    }
    Ok(outcome)
}

pub fn cmd_sweep(config: &ExperimentConfig) -> Result<Outcome> {
    let estimator = config.estimator();
    let mut rows = Vec::new();
    let mut blocks = Vec::new();
    for parity in config.blocks() {
        let p = prepare(&config.model, parity)?;
        let circuit = select_ansatz(config.ansatz, p.block.dim())?;
        let k = circuit.num_parameters();
        if config.sweep_parameter >= k {
            return Err(Error::Config(format!(
                "parameter {} out of range for a {k}-parameter ansatz",
                config.sweep_parameter
            )));
        }
        let fixed = match (&config.fixed_parameters, k) {
            (Some(f), _) if f.len() == k => f.clone(),
            (Some(f), _) => return Err(Error::Config(format!("--fixed needs {k} values, got {}", f.len()))),
            (None, 1) => vec![0.0],
            (None, _) => {
                return Err(Error::Config(format!("a {k}-parameter sweep needs --fixed with {k} values")));
            }
        };
        let grid = default_grid(config.steps);
        let points = sweep(
            &p.h,
            &p.h2,
            &circuit,
            config.sweep_parameter,
            &grid,
            &fixed,
            &estimator,
            block_seed(config.seed, parity),
        )?;
        for pt in &points {
            rows.push(row([
                parity.to_string(),
                sig(pt.angle),
                sig(pt.energy),
                sig(pt.variance),
                sig(pt.energy_stderr),
                sig(pt.variance_stderr),
            ]));
        }
        blocks.push(serde_json::json!({
            "block": parity,
            "parameter_index": config.sweep_parameter,
            "fixed_parameters": fixed,
            "points": points,
        }));
    }
    Ok(match config.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => Outcome::primary(
            "sweep.csv",
            csv_text(&header(&["block", "angle", "energy", "variance", "energy_stderr", "variance_stderr"]), &rows)?,
        ),
        OutputFormat::Json => Outcome::primary(
            "sweep.json",
            json_text(&serde_json::json!({
                "format_version": FORMAT_VERSION,
                "config": config.echo(),
                "blocks": blocks,
            }))?,
        ),
    })
}

fn trace_header(k: usize, with_block: bool) -> Vec<String> {
    let mut cols: Vec<String> = vec!["format_version".into()];
    if with_block {
        cols.push("block".into());
    }
    cols.push("evaluation".into());
    cols.extend((0..k).map(|i| format!("theta_{i}")));
    cols.extend(["energy", "energy_stderr", "variance", "variance_stderr", "best_variance"].map(String::from));
    cols
}

fn trace_rows(trace: &RunTrace, block: Option<Parity>) -> Vec<Vec<String>> {
    trace
        .iterations
        .iter()
        .map(|e| {
            let mut r = vec![FORMAT_VERSION.to_string()];
            if let Some(b) = block {
                r.push(b.to_string());
            }
            r.push(e.evaluation.to_string());
            r.extend(e.parameters.iter().map(|&x| sig(x)));
            r.extend([e.energy, e.energy_stderr, e.variance, e.variance_stderr, e.best_variance].map(sig));
            r
        })
        .collect()
}

pub fn cmd_minimize(config: &ExperimentConfig) -> Result<Outcome> {
    let run_config = config.run_config();
    let mut runs = Vec::new();
    let mut rows = Vec::new();
    let mut k_all = 0;
    for parity in config.blocks() {
        let p = prepare(&config.model, parity)?;
        let circuit = select_ansatz(config.ansatz, p.block.dim())?;
        let k = circuit.num_parameters();
        k_all = k;
        let bs = block_seed(config.seed, parity);
        let initial = match &config.initial_parameters {
            Some(x) if x.len() == k => x.clone(),
            Some(x) => return Err(Error::Config(format!("--initial needs {k} values, got {}", x.len()))),
            None => random_start(bs, 0, k),
        };
        let trace = minimize_variance(&p.h, &p.h2, &circuit, &initial, &run_config, seed::derive(bs, 1))?;
        let exact = eigensolve(&p.block.matrix)?.eigenvalues;
        rows.extend(trace_rows(&trace, Some(parity)));
        runs.push(serde_json::json!({
            "block": parity,
            "exact_eigenvalues": exact,
            "trace": trace,
        }));
    }
    Ok(match config.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => Outcome::primary(
            "minimize.json",
            json_text(&serde_json::json!({
                "format_version": FORMAT_VERSION,
                "config": config.echo(),
                "runs": runs,
            }))?,
        ),
        OutputFormat::Csv => Outcome::primary("minimize.csv", csv_text(&trace_header(k_all, true), &rows)?),
    })
}

/// Per-run summary for the spectrum report; full traces go to CSV files.
#[derive(Serialize)]
struct RunSummary {
    run: usize,
    initial_parameters: Vec<f64>,
    final_parameters: Vec<f64>,
    energy: f64,
    energy_stderr: f64,
    variance: f64,
    variance_stderr: f64,
    converged: bool,
    stop_reason: StopReason,
    evaluations: usize,
    trace_file: String,
}

#[derive(Serialize)]
struct BlockSpectrum<'a> {
    block: Parity,
    n_starts: usize,
    coverage: f64,
    oracle_eigenvalues: &'a [f64],
    rows: Vec<SpectrumRow>,
    clusters: &'a [Cluster],
    rejected: &'a [Cluster],
    runs: Vec<RunSummary>,
}

struct SpectrumRun {
    parity: Parity,
    prepared: PreparedBlock,
    circuit: Circuit,
    report: SpectrumReport,
}

fn run_spectra(config: &ExperimentConfig) -> Result<(Vec<SpectrumRun>, Vec<f64>)> {
    // ordinals count through both blocks unless one block was selected
    let mut full = Vec::new();
    for parity in config.blocks() {
        full.extend(eigensolve(&build_block_for(&config.model, parity)?.matrix)?.eigenvalues);
    }
    full.sort_by(f64::total_cmp);
    let run_config = config.run_config();
    let mut out = Vec::new();
    for parity in config.blocks() {
        let prepared = prepare(&config.model, parity)?;
        let circuit = select_ansatz(config.ansatz, prepared.block.dim())?;
        let report = discover_spectrum(
            &prepared.h,
            &prepared.h2,
            &circuit,
            config.n_starts,
            &run_config,
            block_seed(config.seed, parity),
        )?;
        out.push(SpectrumRun { parity, prepared, circuit, report });
    }
    Ok((out, full))
}

fn trace_file(parity: Parity, i: usize) -> String {
    format!("traces/{parity}_run{i:03}.csv")
}

pub fn cmd_spectrum(config: &ExperimentConfig) -> Result<Outcome> {
    let (spectra, full) = run_spectra(config)?;
    let mut files = Vec::new();
    let mut table = Vec::new();
    let mut blocks = Vec::new();
    for s in &spectra {
        let rows = spectrum_rows(&s.report, &s.parity.to_string(), &full);
        for r in &rows {
            table.push(row([
                r.block.clone(),
                r.eigenstate.clone(),
                sig(r.exact),
                opt_sig(r.measured),
                opt_sig(r.stderr),
                opt_sig(r.variance),
            ]));
        }
        let k = s.circuit.num_parameters();
        let mut runs = Vec::new();
        for (i, t) in s.report.runs.iter().enumerate() {
            let name = trace_file(s.parity, i);
            files.push((PathBuf::from(&name), csv_text(&trace_header(k, false), &trace_rows(t, None))?));
            runs.push(RunSummary {
                run: i,
                initial_parameters: t.initial_parameters.clone(),
                final_parameters: t.final_parameters.clone(),
                energy: t.final_result.energy,
                energy_stderr: t.final_result.energy_stderr,
                variance: t.final_result.variance,
                variance_stderr: t.final_result.variance_stderr,
                converged: t.converged,
                stop_reason: t.stop_reason,
                evaluations: t.iterations.len(),
                trace_file: name,
            });
        }
        blocks.push(BlockSpectrum {
            block: s.parity,
            n_starts: s.report.n_starts,
            coverage: s.report.coverage,
            oracle_eigenvalues: &s.report.oracle_eigenvalues,
            rows,
            clusters: &s.report.clusters,
            rejected: &s.report.rejected,
            runs,
        });
    }
    let incomplete = spectra.iter().any(|s| s.report.coverage < 1.0);
    let table_csv = csv_text(&header(&["block", "eigenstate", "exact", "measured", "stderr", "variance"]), &table)?;
    let json = json_text(&serde_json::json!({
        "format_version": FORMAT_VERSION,
        "config": config.echo(),
        "complete": !incomplete,
        "blocks": blocks,
        "hardware_reference": hardware_reference(config.model.n_particles),
    }))?;
    let stdout = match config.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => json.clone(),
        OutputFormat::Csv => table_csv.clone(),
    };
    let mut all = vec![(PathBuf::from("spectrum.json"), json), (PathBuf::from("spectrum.csv"), table_csv)];
    all.extend(files);
    Ok(Outcome { stdout, files: all, incomplete })
}

fn overlap_csv(parity: Parity, table: &OverlapTable) -> Result<String> {
    let mut cols = header(&["block", "state", "energy"]);
    cols.extend(table.eigenvalues.iter().map(|&l| sig(l)));
    let rows: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| {
            row([parity.to_string(), r.label.clone(), sig(r.energy)]
                .into_iter()
                .chain(r.fidelities.iter().map(|&f| sig(f))))
        })
        .collect();
    csv_text(&cols, &rows)
}

pub fn cmd_overlaps(config: &ExperimentConfig) -> Result<Outcome> {
    let (spectra, _) = run_spectra(config)?;
    let mut files = Vec::new();
    let mut csv_parts = Vec::new();
    let mut blocks = Vec::new();
    for s in &spectra {
        let decomposition = eigensolve(&s.prepared.block.matrix)?;
        let table = overlap_table(&s.report, &s.circuit, &decomposition)?;
        let body = overlap_csv(s.parity, &table)?;
        files.push((PathBuf::from(format!("overlaps_{}.csv", s.parity)), body.clone()));
        csv_parts.push(body);
        blocks.push(serde_json::json!({
            "block": s.parity,
            "coverage": s.report.coverage,
            "eigenvalues": table.eigenvalues,
            "rows": table.rows,
        }));
    }
    let incomplete = spectra.iter().any(|s| s.report.coverage < 1.0);
    let json = json_text(&serde_json::json!({
        "format_version": FORMAT_VERSION,
        "config": config.echo(),
        "complete": !incomplete,
        "blocks": blocks,
        "hardware_reference": hardware_reference(config.model.n_particles),
    }))?;
    files.push((PathBuf::from("overlaps.json"), json.clone()));
    let stdout = match config.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => csv_parts.join("\n"),
        OutputFormat::Json => json,
    };
    Ok(Outcome { stdout, files, incomplete })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(n: u32) -> ExperimentConfig {
        ExperimentConfig {
            model: ModelParams { n_particles: n, ..ExperimentConfig::default().model },
            ..Default::default()
        }
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"model": {"n_particles": 7, "v": 0.5}, "seed": 4, "n_starts": 9}"#).unwrap();
        let cli = Cli::try_parse_from([
            "lmg-vqe",
            "spectrum",
            "--config",
            path.to_str().unwrap(),
            "--starts",
            "3",
            "--v=-0.25",
            "--block",
            "B",
        ])
        .unwrap();
        let c = cli.overrides.resolve().unwrap();
        assert_eq!(c.model.n_particles, 7);
        assert_eq!(c.model.v, -0.25);
        assert_eq!(c.seed, 4);
        assert_eq!(c.n_starts, 3);
        assert_eq!(c.block, Some(Parity::B));
    }

    #[test]
    fn config_round_trip() {
        let c = ExperimentConfig {
            shots: Shots::Finite(1000),
            noise: NoiseModel::readout(0.02),
            mitigation: Mitigation { readout: true, cnot: false },
            block: Some(Parity::A),
            ansatz: AnsatzChoice::OneQubit,
            ..config(3)
        };
        let text = serde_json::to_string(&c).unwrap();
        assert!(text.contains(r#""ansatz":"1q""#));
        assert_eq!(ExperimentConfig::from_json(&text).unwrap(), c);
        let exact = serde_json::to_string(&config(3)).unwrap();
        assert!(exact.contains(r#""shots":"exact""#));
    }

    #[test]
    fn bad_configs() {
        assert!(ExperimentConfig::from_json(r#"{"modle": {}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"shots": 0}"#).is_err());
        let c = ExperimentConfig { n_starts: 0, ..config(3) };
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let c = ExperimentConfig { noise: NoiseModel::readout(0.1), ..config(3) };
        assert!(c.validate().is_err());
    }

    #[test]
    fn ansatz_selection() {
        assert_eq!(select_ansatz(AnsatzChoice::Auto, 2).unwrap().num_qubits(), 1);
        assert_eq!(select_ansatz(AnsatzChoice::Auto, 4).unwrap().num_qubits(), 2);
        assert!(select_ansatz(AnsatzChoice::TwoQubit, 2).is_err());
        assert!(select_ansatz(AnsatzChoice::Auto, 3).is_err());
    }

    #[test]
    fn json_rounding() {
        let t = json_text(&serde_json::json!({"x": 0.1234567891234, "n": 7, "v": [1.0, -2.5e-9]})).unwrap();
        assert!(t.contains("0.123456789"));
        assert!(!t.contains("0.1234567891"));
        assert!(t.contains("\"n\": 7"));
    }

    #[test]
    fn decompose_n1_single_identity() {
        let out = cmd_decompose(&config(1)).unwrap();
        let h_lines: Vec<&str> = out.stdout.lines().filter(|l| l.ends_with(" I")).collect();
        // H and H^2 for each of the two 1x1 blocks
        assert_eq!(h_lines.len(), 4);
        assert!(out.stdout.contains("-0.500000000 I"));
    }

    #[test]
    fn sweep_rows() {
        let out = cmd_sweep(&config(3)).unwrap();
        assert_eq!(out.stdout.lines().count(), 101);
        let c = ExperimentConfig { steps: 10, block: Some(Parity::A), ..config(3) };
        assert_eq!(cmd_sweep(&c).unwrap().stdout.lines().count(), 11);
        assert!(matches!(cmd_sweep(&config(7)), Err(Error::Config(_))));
    }
}
