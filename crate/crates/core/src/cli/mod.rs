//! Command-line front end: argument parsing, run dispatch, reports and exit codes.

pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    compare_precision, divergence, minimize_slack, universal_scan, Budget, Ensemble, EnsembleSpec, MinimizationResult,
    MinimizeProblem, PrecisionStats, ScanSpec, ScanSummary,
};
use crate::catalog::{evaluate, Count, URReport, UrId, Variant};
use crate::error::{Result, UrError};
use crate::quantum::{fock_operators, Observable, QuantumState};

pub use config::{Command, RunConfig};

pub const SEED_ENV: &str = "URLAB_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

pub fn exit_code(e: &UrError) -> i32 {
    match e {
        UrError::Config(_) => EXIT_CONFIG,
        UrError::Input(_) | UrError::NotPsd { .. } | UrError::Unsupported(_) | UrError::Truncation { .. } => EXIT_INPUT,
        UrError::Numeric(_) => EXIT_NUMERIC,
    }
}

#[derive(Debug, Parser)]
#[command(name = "urlab", version, about = "Checks ordinary and state-extended uncertainty relations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Seed; overrides the environment and the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fock-space dimension for oscillator builders.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Evaluate the selected relations once on explicit inputs.
    Check(Common),
    /// Evaluate the selected relations on a seeded random ensemble.
    Scan(Common),
    /// Minimize a slack over Gaussian states.
    Minimize(Common),
    /// Compare the slacks of two relations over an ensemble.
    Compare(Common),
    /// Observable-induced divergence between two states.
    Divergence(Common),
}

impl Sub {
    fn parts(&self) -> (Command, &Common) {
        match self {
            Sub::Check(c) => (Command::Check, c),
            Sub::Scan(c) => (Command::Scan, c),
            Sub::Minimize(c) => (Command::Minimize, c),
            Sub::Compare(c) => (Command::Compare, c),
            Sub::Divergence(c) => (Command::Divergence, c),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceResult {
    pub variant: Variant,
    pub observable: String,
    pub states: [String; 2],
    pub d_12: f64,
    pub d_21: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub evaluated: usize,
    pub violations: usize,
    pub errors: usize,
    /// Smallest slack over the evaluated rows.
    pub worst_slack: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tool: String,
    pub version: String,
    pub command: Command,
    pub seed: u64,
    pub hilbert_dim: usize,
    pub config: RunConfig,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub reports: Vec<URReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scan: Option<ScanSummary>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub minimization: Option<MinimizationResult>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub comparison: Option<PrecisionStats>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub divergence: Option<DivergenceResult>,
    pub summary: Summary,
}

impl ReportDocument {
    fn new(command: Command, config: &RunConfig, summary: Summary) -> Self {
        Self {
            tool: "urlab".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command,
            seed: config.seed.unwrap_or(0),
            hilbert_dim: config.hilbert_dim.unwrap_or(crate::quantum::DEFAULT_HILBERT_DIM),
            config: config.clone(),
            reports: Vec::new(),
            scan: None,
            minimization: None,
            comparison: None,
            divergence: None,
            summary,
        }
    }

    pub fn exit_code(&self) -> i32 {
        if self.summary.errors > 0 {
            EXIT_NUMERIC
        } else if self.summary.violations > 0 {
            EXIT_VIOLATION
        } else {
            EXIT_OK
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Seed precedence: flag, then environment, then config, then 0.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>, config: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Some(v) = env {
        return v
            .trim()
            .parse()
            .map_err(|_| UrError::Config(format!("{SEED_ENV}={v:?} is not an unsigned integer")));
    }
    Ok(config.unwrap_or(0))
}

fn select<'a, T>(items: &'a [T], count: Count, what: &str, ur: &UrId) -> Result<&'a [T]> {
    let n = match count {
        Count::Exact(k) => k,
        Count::AtLeast(k) => items.len().max(k),
    };
    items
        .get(..n)
        .ok_or_else(|| UrError::Config(format!("{ur} needs {n} {what}, config lists {}", items.len())))
}

fn pick<T: Clone>(items: &[T], idx: &[usize], what: &str) -> Result<Vec<T>> {
    idx.iter()
        .map(|&i| {
            items
                .get(i)
                .cloned()
                .ok_or_else(|| UrError::Config(format!("{what} index {i} out of range (have {})", items.len())))
        })
        .collect()
}

fn label_states(report: &mut URReport, labels: Vec<String>) {
    report.inputs_digest.states = labels;
}

fn summarize(reports: &[URReport]) -> Summary {
    Summary {
        evaluated: reports.len(),
        violations: reports.iter().filter(|r| !r.holds()).count(),
        errors: 0,
        worst_slack: reports.iter().map(|r| r.slack).min_by(f64::total_cmp),
    }
}

/// Each entry of `urs` takes a prefix of the observable and state lists;
/// each entry of `checks` names its inputs by index.
pub fn run_check(config: &RunConfig) -> Result<ReportDocument> {
    if config.urs.is_empty() && config.checks.is_empty() {
        return Err(UrError::Config("check needs `urs` or `checks`".into()));
    }
    let observables = config.build_observables()?;
    let states = config.build_states()?;
    let labels: Vec<String> = config.states.iter().map(|s| s.label()).collect();
    let mut reports = Vec::new();
    for ur in &config.urs {
        let sig = ur.signature();
        let o = select(&observables, sig.observables, "observables", ur)?;
        let s = select(&states, sig.states, "states", ur)?;
        let mut r = evaluate(ur, o, s, &config.tolerances)?;
        label_states(&mut r, labels[..s.len()].to_vec());
        reports.push(r);
    }
    for c in &config.checks {
        let o = pick(&observables, &c.observables, "observable")?;
        let s = pick(&states, &c.states, "state")?;
        let mut r = evaluate(&c.ur, &o, &s, &config.tolerances)?;
        label_states(&mut r, pick(&labels, &c.states, "state")?);
        reports.push(r);
    }
    let mut doc = ReportDocument::new(Command::Check, config, summarize(&reports));
    doc.reports = reports;
    Ok(doc)
}

pub fn run_scan(config: &RunConfig) -> Result<ReportDocument> {
    let opts = config.scan.clone().unwrap_or_default();
    let fixed: Option<Arc<[Observable]>> = if config.observables.is_empty() {
        None
    } else {
        Some(config.build_observables()?.into())
    };
    let spec = ScanSpec {
        size: config.ensemble_size.unwrap_or(1000),
        seed: config.seed.unwrap_or(0),
        dim_min: opts.dim_min,
        dim_max: opts.dim_max,
        max_observables: opts.max_observables,
        max_states: opts.max_states,
        mixed: opts.mixed,
        observables: fixed,
    };
    if spec.size == 0 {
        return Err(UrError::Config("ensemble_size must be at least 1".into()));
    }
    let urs = if config.urs.is_empty() { UrId::catalog() } else { config.urs.clone() };
    let scan = universal_scan(&urs, &spec, &config.tolerances)?;
    let summary = Summary {
        evaluated: scan.results.iter().map(|r| r.instances - r.errors.min(r.instances)).sum(),
        violations: scan.total_violations,
        errors: scan.total_errors,
        worst_slack: scan.results.iter().filter_map(|r| r.worst_report.as_ref().map(|w| w.slack)).min_by(f64::total_cmp),
    };
    let mut doc = ReportDocument::new(Command::Scan, config, summary);
    doc.scan = Some(scan);
    Ok(doc)
}

pub fn run_minimize(config: &RunConfig) -> Result<ReportDocument> {
    let opts = config
        .minimize
        .clone()
        .ok_or_else(|| UrError::Config("minimize needs a `minimize` section".into()))?;
    let dim = config.dim()?;
    let observables = if config.observables.is_empty() {
        let (q, p) = fock_operators(dim);
        vec![q, p]
    } else {
        config.build_observables()?
    };
    let problem = MinimizeProblem {
        ur: opts.ur,
        observables,
        slots: opts.slots.clone(),
        dim,
        init: opts.init.clone(),
        budget: Budget {
            max_iterations: opts.max_iterations,
            restarts: opts.restarts,
        },
        seed: config.seed.unwrap_or(0),
        tol: config.tolerances,
    };
    let result = minimize_slack(&problem)?;
    let mut doc = ReportDocument::new(Command::Minimize, config, summarize(std::slice::from_ref(&result.report)));
    doc.minimization = Some(result);
    Ok(doc)
}

pub fn run_compare(config: &RunConfig) -> Result<ReportDocument> {
    let opts = config
        .compare
        .clone()
        .ok_or_else(|| UrError::Config("compare needs a `compare` section".into()))?;
    let seed = config.seed.unwrap_or(0);
    let mut spec = opts.ensemble.clone();
    match &mut spec {
        EnsembleSpec::GaussianPairs { seed: s, .. } | EnsembleSpec::Random { seed: s, .. } => *s = seed,
        EnsembleSpec::CoherentGrid { .. } => {}
    }
    let stats = compare_precision(&opts.ur_a, &opts.ur_b, &Ensemble::new(spec)?, opts.measure, &config.tolerances)?;
    let summary = Summary {
        evaluated: stats.ensemble_size,
        violations: stats.violations,
        errors: 0,
        worst_slack: None,
    };
    let mut doc = ReportDocument::new(Command::Compare, config, summary);
    doc.comparison = Some(stats);
    Ok(doc)
}

pub fn run_divergence(config: &RunConfig) -> Result<ReportDocument> {
    let variant = config.divergence.clone().unwrap_or_default().variant;
    let observables = config.build_observables()?;
    let states: Vec<QuantumState> = config.build_states()?;
    let x = observables
        .first()
        .ok_or_else(|| UrError::Config("divergence needs one observable".into()))?;
    if states.len() < 2 {
        return Err(UrError::Config("divergence needs two states".into()));
    }
    let tol = &config.tolerances;
    let result = DivergenceResult {
        variant,
        observable: x.name().to_string(),
        states: [config.states[0].label(), config.states[1].label()],
        d_12: divergence(x, &states[0], &states[1], variant, tol)?,
        d_21: divergence(x, &states[1], &states[0], variant, tol)?,
    };
    let summary = Summary {
        evaluated: 2,
        violations: 0,
        errors: 0,
        worst_slack: None,
    };
    let mut doc = ReportDocument::new(Command::Divergence, config, summary);
    doc.divergence = Some(result);
    Ok(doc)
}

pub fn run(command: Command, config: &RunConfig) -> Result<ReportDocument> {
    match command {
        Command::Check => run_check(config),
        Command::Scan => run_scan(config),
        Command::Minimize => run_minimize(config),
        Command::Compare => run_compare(config),
        Command::Divergence => run_divergence(config),
    }
}

/// Reads the config, applies flag and environment overrides and runs.
/// Returns the report document and the output path, if any.
pub fn execute(command: Command, common: &Common, env_seed: Option<&str>) -> Result<(ReportDocument, Option<PathBuf>)> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| UrError::Config(format!("cannot read {}: {e}", common.config.display())))?;
    let mut config = RunConfig::from_json(&text)?;
    if let Some(c) = config.command {
        if c != command {
            return Err(UrError::Config(format!("config is for `{c:?}`, invoked as `{command:?}`")));
        }
    }
    config.command = Some(command);
    config.seed = Some(resolve_seed(common.seed, env_seed, config.seed)?);
    if let Some(d) = common.dim {
        config.hilbert_dim = Some(d);
    }
    let out = common.out.clone().or_else(|| config.output.clone());
    Ok((run(command, &config)?, out))
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (command, common) = cli.command.parts();
    let env_seed = std::env::var(SEED_ENV).ok();
    match execute(command, common, env_seed.as_deref()) {
        Ok((doc, out)) => {
            let json = doc.to_json();
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, json) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return EXIT_CONFIG;
                    }
                }
                None => print!("{json}"),
            }
            doc.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
