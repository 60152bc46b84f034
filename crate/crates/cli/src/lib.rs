//! Batch front end: simulate data, run inference, check formulas and
//! re-render saved result tables.

pub mod config;

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use leadsto_core::causal::DivisorMode;
use leadsto_core::checker::{
    evaluate, leads_to_prob, sat_set, trace_leads_to, unless_prob, until_prob, CheckError,
};
use leadsto_core::dtmc::{build_dtmc, read_model, write_model, Dtmc, DtmcError};
use leadsto_core::fdr::{write_plot, FdrError, FdrOptions, FdrResult, FitOptions};
use leadsto_core::pctl::{parse, validate, Formula};
use leadsto_core::pipeline::{
    infer, read_table, rescore, significant_edges, stage_counts, write_edges, write_summary,
    write_table, InferenceOptions, PipelineError, Report, StageCounts, TableRow,
};
use leadsto_core::synthgen::{generate, preset, GenConfig, GenError};
use leadsto_core::traces::{
    discretize, load_series, load_traces, write_events, Format, TraceError, TraceSet,
    DEFAULT_THETA_DOWN, DEFAULT_THETA_UP,
};

use config::{ConfigFile, Settings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_FIT: i32 = 3;

pub const HYPOTHESES_FILE: &str = "hypotheses.tsv";
pub const EDGES_FILE: &str = "edges.tsv";
pub const PLOT_FILE: &str = "plot.tsv";
pub const SUMMARY_FILE: &str = "summary.tsv";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Fit(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Fit(_) => EXIT_FIT,
        }
    }
}

impl From<TraceError> for CliError {
    fn from(e: TraceError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<DtmcError> for CliError {
    fn from(e: DtmcError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<CheckError> for CliError {
    fn from(e: CheckError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<FdrError> for CliError {
    fn from(e: FdrError) -> Self {
        match e {
            FdrError::InvalidOptions(_) | FdrError::InvalidThreshold(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Fit(format!("fdr stage: {e}")),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Fdr(inner) => inner.into(),
            PipelineError::Enumerate(_) => CliError::Usage(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        match e {
            GenError::Trace(_) => CliError::Data(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(
    name = "leadsto",
    version,
    about = "Temporal-logic causal inference over event traces"
)]
pub struct Cli {
    /// Config file with `[section]` headers and `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate spike trains over a preset structure.
    Generate(GenerateArgs),
    /// Run the full inference pipeline.
    Infer(InferArgs),
    /// Evaluate one formula on traces or on a saved model.
    Check(CheckArgs),
    /// Redo z-scoring, fitting and classification on a saved table.
    Fdr(FdrArgs),
    /// Re-render edges, summary and plot data from a saved table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// chain, fork, collider or tree.
    #[arg(long)]
    pub preset: Option<String>,
    /// Neuron count for chains, depth for trees.
    #[arg(long)]
    pub size: Option<usize>,
    #[arg(long)]
    pub trigger_prob: Option<f64>,
    /// Per-tick spontaneous firing probability.
    #[arg(long)]
    pub spontaneous_rate: Option<f64>,
    /// Spontaneous rate for non-root neurons (defaults to the common rate).
    #[arg(long)]
    pub internal_rate: Option<f64>,
    #[arg(long)]
    pub refractory: Option<u64>,
    #[arg(long)]
    pub delay_min: Option<u64>,
    #[arg(long)]
    pub delay_max: Option<u64>,
    /// Stop once this many firings have occurred.
    #[arg(long)]
    pub target: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output event csv.
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// Output ground-truth edge list.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

const GENERATE_KEYS: &[&str] = &[
    "preset",
    "size",
    "trigger-prob",
    "spontaneous-rate",
    "internal-rate",
    "refractory",
    "delay-min",
    "delay-max",
    "target",
    "seed",
    "events",
    "truth",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    /// `time,variable` rows.
    Events,
    /// 0/1 table with a `time` column.
    Wide,
    /// Real-valued table, discretized with the up/down thresholds.
    Series,
}

impl FromStr for InputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "events" => Ok(InputFormat::Events),
            "wide" => Ok(InputFormat::Wide),
            "series" => Ok(InputFormat::Series),
            other => Err(format!(
                "unknown format '{other}' (expected events, wide or series)"
            )),
        }
    }
}

impl fmt::Display for InputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputFormat::Events => "events",
            InputFormat::Wide => "wide",
            InputFormat::Series => "series",
        })
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input file; repeat for several traces.
    #[arg(long)]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub format: Option<InputFormat>,
    /// Trace length for event input (default: last event + 1).
    #[arg(long)]
    pub horizon: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta_up: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta_down: Option<f64>,
}

const INPUT_KEYS: &[&str] = &["input", "format", "horizon", "theta-up", "theta-down"];

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub degree: Option<usize>,
    /// Histogram padding as a fraction of the z range.
    #[arg(long)]
    pub pad: Option<f64>,
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Estimate the null proportion and scale the fdr by it.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub p0: Option<bool>,
}

const FIT_KEYS: &[&str] = &["bins", "degree", "pad", "threshold", "p0"];

#[derive(Debug, Args)]
pub struct InferArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub tmin: Option<u64>,
    #[arg(long)]
    pub tmax: Option<u64>,
    /// Also consider negated atoms as causes.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub negations: Option<bool>,
    /// defined or strict.
    #[arg(long)]
    pub divisor: Option<DivisorMode>,
    /// Minimum conditioning count for an ε term.
    #[arg(long)]
    pub min_support: Option<u64>,
    #[command(flatten)]
    pub fit: FitArgs,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

const INFER_KEYS: &[&str] = &[
    "tmin",
    "tmax",
    "negations",
    "divisor",
    "min-support",
    "out-dir",
];

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub formula: Option<String>,
    #[command(flatten)]
    pub input: InputArgs,
    /// Saved model to check instead of traces.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Write the model built from the input traces.
    #[arg(long)]
    pub export_model: Option<PathBuf>,
}

const CHECK_KEYS: &[&str] = &["formula", "model", "export-model"];

#[derive(Debug, Args)]
pub struct FdrArgs {
    /// Hypothesis table from an earlier run.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[command(flatten)]
    pub fit: FitArgs,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[command(flatten)]
    pub fit: FitArgs,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

const TABLE_KEYS: &[&str] = &["table", "out-dir"];

fn keys(groups: &[&[&'static str]]) -> Vec<&'static str> {
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}

/// Everything `infer` needs.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub inputs: Vec<PathBuf>,
    pub format: InputFormat,
    pub horizon: Option<u64>,
    pub theta_up: f64,
    pub theta_down: f64,
    pub options: InferenceOptions,
    pub out_dir: PathBuf,
}

impl PipelineConfig {
    pub fn new(inputs: Vec<PathBuf>, out_dir: PathBuf) -> Self {
        PipelineConfig {
            inputs,
            format: InputFormat::Events,
            horizon: None,
            theta_up: DEFAULT_THETA_UP,
            theta_down: DEFAULT_THETA_DOWN,
            options: InferenceOptions::default(),
            out_dir,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.inputs.is_empty() {
            return Err(CliError::Usage("at least one --input is required".into()));
        }
        let o = &self.options;
        if o.tmin < 1 || o.tmin > o.tmax {
            return Err(CliError::Usage(format!(
                "invalid window [{}, {}]: need 1 <= tmin <= tmax",
                o.tmin, o.tmax
            )));
        }
        if !(o.fdr.threshold > 0.0 && o.fdr.threshold <= 1.0) {
            return Err(CliError::Usage(format!(
                "threshold must be in (0, 1], got {}",
                o.fdr.threshold
            )));
        }
        let outputs = output_paths(&self.out_dir);
        distinct_paths(self.inputs.iter().chain(&outputs))
    }
}

fn output_paths(dir: &Path) -> Vec<PathBuf> {
    [HYPOTHESES_FILE, EDGES_FILE, PLOT_FILE, SUMMARY_FILE]
        .iter()
        .map(|f| dir.join(f))
        .collect()
}

fn distinct_paths<'a>(paths: impl Iterator<Item = &'a PathBuf>) -> Result<(), CliError> {
    let mut seen = Vec::new();
    for p in paths {
        let key = std::fs::canonicalize(p).unwrap_or_else(|_| p.clone());
        if seen.contains(&key) {
            return Err(CliError::Usage(format!(
                "path {} is used twice",
                p.display()
            )));
        }
        seen.push(key);
    }
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| io_error(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_error(path, e))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Result<(), CliError> {
    w.flush().map_err(|e| io_error(path, e))
}

/// Loads each input as one trace of a set.
pub fn load_input(
    paths: &[PathBuf],
    format: InputFormat,
    horizon: Option<u64>,
    theta_up: f64,
    theta_down: f64,
) -> Result<TraceSet, CliError> {
    let mut set: Option<TraceSet> = None;
    for path in paths {
        let source = open(path)?;
        let wrap = |e: TraceError| CliError::Data(format!("{}: {e}", path.display()));
        let next = match format {
            InputFormat::Events => load_traces(source, Format::EventCsv, horizon).map_err(wrap)?,
            InputFormat::Wide => load_traces(source, Format::WideCsv, None).map_err(wrap)?,
            InputFormat::Series => {
                let series = load_series(source).map_err(wrap)?;
                TraceSet::single(discretize(&series, theta_up, theta_down).map_err(wrap)?)
            }
        };
        match set.as_mut() {
            None => set = Some(next),
            Some(s) => s
                .extend(next)
                .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?,
        }
    }
    set.ok_or_else(|| CliError::Usage("at least one --input is required".into()))
}

fn write_outputs(
    dir: &Path,
    rows: &[TableRow],
    edges: &[(String, String)],
    stages: &StageCounts,
    fdr: Option<&FdrResult>,
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let path = dir.join(HYPOTHESES_FILE);
    let mut w = create(&path)?;
    write_table(&mut w, rows).map_err(|e| io_error(&path, e))?;
    finish(&path, w)?;

    let path = dir.join(EDGES_FILE);
    let mut w = create(&path)?;
    write_edges(&mut w, edges).map_err(|e| io_error(&path, e))?;
    finish(&path, w)?;

    let path = dir.join(PLOT_FILE);
    let mut w = create(&path)?;
    match fdr {
        Some(r) => write_plot(&mut w, &r.density, &r.null)?,
        None => writeln!(w, "center\tcount\tf\tf0").map_err(|e| io_error(&path, e))?,
    }
    finish(&path, w)?;

    let path = dir.join(SUMMARY_FILE);
    let mut w = create(&path)?;
    write_summary(&mut w, stages, fdr).map_err(|e| io_error(&path, e))?;
    finish(&path, w)
}

/// Loads the inputs, runs inference and writes the result files.
pub fn run_pipeline(config: &PipelineConfig) -> Result<Report, CliError> {
    config.validate()?;
    let data = load_input(
        &config.inputs,
        config.format,
        config.horizon,
        config.theta_up,
        config.theta_down,
    )?;
    let report = infer(&data, &config.options)?;
    write_outputs(
        &config.out_dir,
        &report.table(),
        &report.edges,
        &report.stages,
        report.fdr.as_ref(),
    )?;
    Ok(report)
}

fn fdr_options(s: &Settings, fit: &FitArgs) -> Result<FdrOptions, CliError> {
    let d = FitOptions::default();
    Ok(FdrOptions {
        fit: FitOptions {
            bins: s.or(fit.bins, "bins", d.bins)?,
            degree: s.or(fit.degree, "degree", d.degree)?,
            pad_fraction: s.or(fit.pad, "pad", d.pad_fraction)?,
        },
        threshold: s.or(fit.threshold, "threshold", FdrOptions::default().threshold)?,
        estimate_p0: s.or(fit.p0, "p0", false)?,
    })
}

struct Inputs {
    paths: Vec<PathBuf>,
    format: InputFormat,
    horizon: Option<u64>,
    theta_up: f64,
    theta_down: f64,
}

fn input_settings(s: &Settings, a: &InputArgs) -> Result<Inputs, CliError> {
    let paths = if a.input.is_empty() {
        s.get::<String>(None, "input")?
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|p| !p.is_empty())
                    .map(PathBuf::from)
                    .collect()
            })
            .unwrap_or_default()
    } else {
        a.input.clone()
    };
    Ok(Inputs {
        paths,
        format: s.or(a.format, "format", InputFormat::Events)?,
        horizon: s.get(a.horizon, "horizon")?,
        theta_up: s.or(a.theta_up, "theta-up", DEFAULT_THETA_UP)?,
        theta_down: s.or(a.theta_down, "theta-down", DEFAULT_THETA_DOWN)?,
    })
}

fn require<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
}

fn cmd_generate(a: &GenerateArgs, s: &Settings) -> Result<(), CliError> {
    let name: String = s.or(a.preset.clone(), "preset", "tree".to_string())?;
    let size = s.get(a.size, "size")?;
    let mut structure = preset(&name, size)?;
    if let Some(p) = s.get(a.trigger_prob, "trigger-prob")? {
        structure = structure.with_trigger_prob(p)?;
    }
    let seed = s.or(a.seed, "seed", 0)?;
    let mut cfg = GenConfig::new(structure, seed);
    cfg.spontaneous_rate = s.or(a.spontaneous_rate, "spontaneous-rate", cfg.spontaneous_rate)?;
    if let Some(rate) = s.get(a.internal_rate, "internal-rate")? {
        let roots: Vec<String> = cfg
            .structure
            .roots()
            .iter()
            .map(|r| r.to_string())
            .collect();
        for n in cfg.structure.neurons() {
            if !roots.contains(n) {
                cfg.rate_overrides.insert(n.clone(), rate);
            }
        }
    }
    cfg.refractory = s.or(a.refractory, "refractory", cfg.refractory)?;
    cfg.delay_min = s.or(a.delay_min, "delay-min", cfg.delay_min)?;
    cfg.delay_max = s.or(a.delay_max, "delay-max", cfg.delay_max)?;
    cfg.target_firings = s.or(a.target, "target", cfg.target_firings)?;
    let events_path: PathBuf = require(s.get(a.events.clone(), "events")?, "events")?;
    let truth_path: PathBuf = require(s.get(a.truth.clone(), "truth")?, "truth")?;
    distinct_paths([&events_path, &truth_path].into_iter())?;

    let (events, truth) = generate(&cfg)?;
    let mut w = create(&events_path)?;
    write_events(&events, &mut w).map_err(|e| io_error(&events_path, e))?;
    finish(&events_path, w)?;
    let mut w = create(&truth_path)?;
    truth.write(&mut w).map_err(|e| io_error(&truth_path, e))?;
    finish(&truth_path, w)?;
    eprintln!(
        "generated {} firings of {} neurons over {} ticks",
        events.len(),
        cfg.structure.neurons().len(),
        events.horizon()
    );
    Ok(())
}

fn cmd_infer(a: &InferArgs, s: &Settings) -> Result<(), CliError> {
    let inputs = input_settings(s, &a.input)?;
    let d = InferenceOptions::default();
    let options = InferenceOptions {
        tmin: s.or(a.tmin, "tmin", d.tmin)?,
        tmax: s.or(a.tmax, "tmax", d.tmax)?,
        include_negations: s.or(a.negations, "negations", d.include_negations)?,
        divisor: s.or(a.divisor, "divisor", d.divisor)?,
        min_support: s.or(a.min_support, "min-support", d.min_support)?,
        fdr: fdr_options(s, &a.fit)?,
    };
    let config = PipelineConfig {
        inputs: inputs.paths,
        format: inputs.format,
        horizon: inputs.horizon,
        theta_up: inputs.theta_up,
        theta_down: inputs.theta_down,
        options,
        out_dir: s.or(a.out_dir.clone(), "out-dir", PathBuf::from("."))?,
    };
    let report = run_pipeline(&config)?;
    let st = &report.stages;
    eprintln!(
        "enumerated {}, prima facie {}, scored {}, significant {} ({:.2?})",
        st.enumerated, st.prima_facie, st.scored, st.significant, report.wall_time
    );
    Ok(())
}

fn read_saved_table(path: &Path) -> Result<Vec<TableRow>, CliError> {
    read_table(open(path)?).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn cmd_fdr(a: &FdrArgs, s: &Settings) -> Result<(), CliError> {
    let table: PathBuf = require(s.get(a.table.clone(), "table")?, "table")?;
    let out_dir = s.or(a.out_dir.clone(), "out-dir", PathBuf::from("."))?;
    distinct_paths(std::iter::once(&table).chain(&output_paths(&out_dir)))?;
    let opts = fdr_options(s, &a.fit)?;
    let mut rows = read_saved_table(&table)?;
    let result = rescore(&mut rows, &opts)?;
    let edges = significant_edges(&rows);
    write_outputs(
        &out_dir,
        &rows,
        &edges,
        &stage_counts(&rows),
        result.as_ref(),
    )?;
    eprintln!(
        "{} of {} scored hypotheses significant",
        edges.len(),
        stage_counts(&rows).scored
    );
    Ok(())
}

fn cmd_report(a: &ReportArgs, s: &Settings) -> Result<(), CliError> {
    let table: PathBuf = require(s.get(a.table.clone(), "table")?, "table")?;
    let out_dir = s.or(a.out_dir.clone(), "out-dir", PathBuf::from("."))?;
    let rows = read_saved_table(&table)?;
    let mut refit = rows.clone();
    let result = rescore(&mut refit, &fdr_options(s, &a.fit)?)?;
    let outputs: Vec<PathBuf> = [EDGES_FILE, PLOT_FILE, SUMMARY_FILE]
        .iter()
        .map(|f| out_dir.join(f))
        .collect();
    distinct_paths(std::iter::once(&table).chain(&outputs))?;
    std::fs::create_dir_all(&out_dir).map_err(|e| io_error(&out_dir, e))?;

    let edges = significant_edges(&rows);
    let path = out_dir.join(EDGES_FILE);
    let mut w = create(&path)?;
    write_edges(&mut w, &edges).map_err(|e| io_error(&path, e))?;
    finish(&path, w)?;
    let path = out_dir.join(PLOT_FILE);
    let mut w = create(&path)?;
    match &result {
        Some(r) => write_plot(&mut w, &r.density, &r.null)?,
        None => writeln!(w, "center\tcount\tf\tf0").map_err(|e| io_error(&path, e))?,
    }
    finish(&path, w)?;
    let path = out_dir.join(SUMMARY_FILE);
    let mut w = create(&path)?;
    write_summary(&mut w, &stage_counts(&rows), result.as_ref()).map_err(|e| io_error(&path, e))?;
    finish(&path, w)
}

fn check_on_model(model: &Dtmc, f: &Formula) -> Result<Vec<String>, CliError> {
    let describe = |s: usize| format!("state {s} {{{}}}", model.label(s).join(", "));
    let mut out = Vec::new();
    match f {
        Formula::Until { left, right, bound } | Formula::Unless { left, right, bound } => {
            let (l, r) = (sat_set(model, left)?, sat_set(model, right)?);
            let probs = if matches!(f, Formula::Until { .. }) {
                until_prob(model, &l, &r, *bound)?
            } else {
                unless_prob(model, &l, &r, *bound)?
            };
            for (s, p) in probs.iter().enumerate() {
                out.push(format!("{}: {p}", describe(s)));
            }
            out.push(format!("initial: {}", probs[model.initial()]));
        }
        Formula::LeadsTo {
            cause,
            effect,
            tmin,
            tmax,
        } => {
            let est = leads_to_prob(model, cause, effect, *tmin, *tmax)?;
            out.push(format!(
                "leads-to probability: {} (cause weight {})",
                est.probability, est.denominator
            ));
        }
        _ => {
            let sat = sat_set(model, f)?;
            for (s, b) in sat.iter().enumerate() {
                out.push(format!("{}: {b}", describe(s)));
            }
            out.push(format!(
                "satisfied in {} of {} states",
                sat.iter().filter(|b| **b).count(),
                sat.len()
            ));
            out.push(format!("initial: {}", sat[model.initial()]));
        }
    }
    Ok(out)
}

fn check_on_traces(data: &TraceSet, f: &Formula) -> Result<Vec<String>, CliError> {
    let leads_to = |cause: &Formula, effect: &Formula, tmin: u64, tmax: leadsto_core::TimeBound| {
        let tmax = tmax.finite().ok_or_else(|| {
            CliError::Usage("leads-to on traces needs a finite upper bound".into())
        })?;
        Ok::<_, CliError>(trace_leads_to(data, cause, effect, tmin, tmax)?)
    };
    let mut out = Vec::new();
    match f {
        Formula::LeadsTo {
            cause,
            effect,
            tmin,
            tmax,
        } => {
            let est = leads_to(cause, effect, *tmin, *tmax)?;
            out.push(format!(
                "leads-to frequency: {}/{} = {}",
                est.hits(),
                est.denominator,
                est.probability
            ));
        }
        Formula::Prob { path, bound } => match path.as_ref() {
            Formula::LeadsTo {
                cause,
                effect,
                tmin,
                tmax,
            } => {
                let est = leads_to(cause, effect, *tmin, *tmax)?;
                out.push(format!(
                    "leads-to frequency: {}/{} = {}",
                    est.hits(),
                    est.denominator,
                    est.probability
                ));
                let holds = bound.cmp.holds(est.probability, bound.p);
                out.push(format!(
                    "bound {}{}: {}",
                    bound.cmp,
                    bound.p,
                    if holds { "holds" } else { "fails" }
                ));
            }
            _ => {
                return Err(CliError::Usage(
                    "probability bounds other than leads-to need a model (--model)".into(),
                ))
            }
        },
        _ => {
            let masks = evaluate(data, f)?;
            let total: usize = masks.iter().map(Vec::len).sum();
            let count: usize = masks.iter().flatten().filter(|b| **b).count();
            out.push(format!("holds at {count} of {total} ticks"));
        }
    }
    Ok(out)
}

/// Lines describing the value of `f` on a model or on traces.
pub fn check_formula(
    formula: &str,
    model: Option<&Dtmc>,
    data: Option<&TraceSet>,
) -> Result<Vec<String>, CliError> {
    let f = parse(formula).map_err(|e| CliError::Usage(format!("formula: {e}")))?;
    let violations = validate(&f);
    if let Some(v) = violations.first() {
        return Err(CliError::Usage(format!("formula: {v}")));
    }
    match (model, data) {
        (Some(m), _) => check_on_model(m, &f),
        (None, Some(d)) => check_on_traces(d, &f),
        (None, None) => Err(CliError::Usage(
            "either --model or --input is required".into(),
        )),
    }
}

fn cmd_check(a: &CheckArgs, s: &Settings) -> Result<(), CliError> {
    let formula: String = require(s.get(a.formula.clone(), "formula")?, "formula")?;
    let model_path: Option<PathBuf> = s.get(a.model.clone(), "model")?;
    let export: Option<PathBuf> = s.get(a.export_model.clone(), "export-model")?;
    let inputs = input_settings(s, &a.input)?;
    let lines = if let Some(path) = model_path {
        let model = read_model(open(&path)?)
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        check_formula(&formula, Some(&model), None)?
    } else {
        if inputs.paths.is_empty() {
            return Err(CliError::Usage(
                "either --model or --input is required".into(),
            ));
        }
        let data = load_input(
            &inputs.paths,
            inputs.format,
            inputs.horizon,
            inputs.theta_up,
            inputs.theta_down,
        )?;
        if let Some(path) = export {
            let model = build_dtmc(&data)?;
            let mut w = create(&path)?;
            write_model(&model, &mut w).map_err(|e| io_error(&path, e))?;
            finish(&path, w)?;
        }
        check_formula(&formula, None, Some(&data))?
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for l in lines {
        writeln!(out, "{l}").map_err(|e| CliError::Data(e.to_string()))?;
    }
    Ok(())
}

/// Executes a parsed command line.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let file = cli.config.as_deref().map(ConfigFile::load).transpose()?;
    let (section, allowed) = match &cli.command {
        Command::Generate(_) => ("generate", GENERATE_KEYS.to_vec()),
        Command::Infer(_) => ("infer", keys(&[INFER_KEYS, INPUT_KEYS, FIT_KEYS])),
        Command::Check(_) => ("check", keys(&[CHECK_KEYS, INPUT_KEYS])),
        Command::Fdr(_) => ("fdr", keys(&[TABLE_KEYS, FIT_KEYS])),
        Command::Report(_) => ("report", keys(&[TABLE_KEYS, FIT_KEYS])),
    };
    if let Some(f) = &file {
        let every = keys(&[
            GENERATE_KEYS,
            INFER_KEYS,
            INPUT_KEYS,
            FIT_KEYS,
            CHECK_KEYS,
            TABLE_KEYS,
        ]);
        f.check_keys(section, &allowed, &every)?;
    }
    let s = Settings {
        file: file.as_ref(),
        section,
    };
    match &cli.command {
        Command::Generate(a) => cmd_generate(a, &s),
        Command::Infer(a) => cmd_infer(a, &s),
        Command::Check(a) => cmd_check(a, &s),
        Command::Fdr(a) => cmd_fdr(a, &s),
        Command::Report(a) => cmd_report(a, &s),
    }
}

/// Parses arguments, runs, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
