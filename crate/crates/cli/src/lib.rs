//! Command-line front end: `run`, `evaluate`, `compare` and `verify`.
//!
//! Exit status is 0 on success, 2 for configuration or usage errors and 1
//! for internal failures (including a failed verification check).

use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use restaurant_pomdp::harness::{evaluate, paired_difference, Metrics, SCHEMA_VERSION};
use restaurant_pomdp::planners::PolicyParseError;
use restaurant_pomdp::{run_episode, ConfigError, ModelError, Policy, RestaurantConfig};
use serde::Serialize;
use thiserror::Error;

pub mod verify;

#[derive(Debug, Parser)]
#[command(name = "restaurant", version, about = "Waiting-tables POMDP simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one episode and write its trace as JSON lines.
    Run(Invocation),
    /// Evaluate one policy and append a metrics row to a CSV file.
    Evaluate(Invocation),
    /// Evaluate several policies on shared seeds and write a comparison CSV.
    Compare(Invocation),
    /// Run the enumeration checks on the small built-in instance.
    Verify(Invocation),
}

#[derive(Debug, Clone, Args)]
pub struct Invocation {
    /// JSON config file; takes precedence over --scenario.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Built-in scenario used when no --config is given.
    #[arg(long, value_name = "NAME")]
    pub scenario: Option<String>,
    /// Output file (trace for run, CSV for evaluate and compare).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Episode seed; defaults to the config's `seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// NAME[:k=v,...]; repeat for compare.
    #[arg(long = "policy", value_name = "SPEC")]
    pub policies: Vec<String>,
    #[arg(long, default_value_t = 100)]
    pub episodes: usize,
    /// key=value config patch; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

impl Invocation {
    /// An invocation with every flag at its default.
    pub fn new() -> Self {
        Invocation {
            config: None,
            scenario: None,
            out: None,
            seed: None,
            policies: Vec::new(),
            episodes: 100,
            overrides: Vec::new(),
        }
    }
}

impl Default for Invocation {
    fn default() -> Self {
        Self::new()
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    ConfigRead { path: PathBuf, source: io::Error },
    #[error("config {0}")]
    Config(#[from] ConfigError),
    #[error("unknown scenario `{0}` (expected one of: {list})", list = RestaurantConfig::PRESET_NAMES.join(", "))]
    UnknownScenario(String),
    #[error(transparent)]
    Policy(#[from] PolicyParseError),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("verification failed: {0}")]
    CheckFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ConfigRead { .. }
            | CliError::Config(_)
            | CliError::UnknownScenario(_)
            | CliError::Policy(_)
            | CliError::Usage(_)
            | CliError::Model(ModelError::SupportCapExceeded { .. }) => 2,
            CliError::Output { .. } | CliError::Model(_) | CliError::CheckFailed(_) => 1,
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status. Errors are reported on `err`.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return e.exit_code();
        }
    };
    let result = match &cli.command {
        Command::Run(inv) => cmd_run(inv, out),
        Command::Evaluate(inv) => cmd_evaluate(inv, out),
        Command::Compare(inv) => cmd_compare(inv, out),
        Command::Verify(inv) => cmd_verify(inv, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Base config from `--config` or `--scenario` (falling back to
/// `default_scenario`), with overrides applied and validated.
pub fn load_config(inv: &Invocation, default_scenario: &str) -> Result<RestaurantConfig, CliError> {
    let base = match &inv.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigRead {
                path: path.clone(),
                source,
            })?;
            RestaurantConfig::from_json(&text)?
        }
        None => {
            let name = inv.scenario.as_deref().unwrap_or(default_scenario);
            RestaurantConfig::preset(name)
                .ok_or_else(|| CliError::UnknownScenario(name.to_string()))?
        }
    };
    Ok(base.with_overrides(&inv.overrides)?)
}

fn single_policy(inv: &Invocation, fallback: &str) -> Result<Policy, CliError> {
    match inv.policies.as_slice() {
        [] => Ok(fallback.parse()?),
        [one] => Ok(one.parse()?),
        _ => Err(CliError::Usage(
            "this command takes a single --policy".into(),
        )),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| CliError::Output {
            path: path.to_path_buf(),
            source,
        })
}

fn out_err(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |source| CliError::Output {
        path: path.to_path_buf(),
        source,
    }
}

fn out_path(inv: &Invocation, default: &str) -> PathBuf {
    inv.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

pub fn cmd_run(inv: &Invocation, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load_config(inv, "paper-3tables")?;
    let policy = single_policy(inv, "greedy")?;
    let path = out_path(inv, "trace.jsonl");
    let trace = run_episode(&policy, &cfg, inv.seed.unwrap_or(cfg.seed))?;
    let mut w = create(&path)?;
    trace.write_jsonl(&mut w).map_err(out_err(&path))?;
    w.flush().map_err(out_err(&path))?;
    let _ = writeln!(
        out,
        "{policy}: {} steps, discounted return {}",
        trace.steps.len(),
        trace.discounted_return
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct MetricsRow<'a> {
    schema_version: u32,
    policy: &'a str,
    n_tables: usize,
    horizon: u64,
    gamma: f64,
    episodes: usize,
    base_seed: u64,
    mean_return: f64,
    std_return: f64,
    std_error: f64,
    mean_final_satisfaction: String,
    mean_max_wait: f64,
    completion_rate: f64,
    /// Mean paired difference against the first compared policy.
    #[serde(skip_serializing_if = "Option::is_none")]
    diff_vs_first: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    paired_std_error: Option<f64>,
}

impl<'a> MetricsRow<'a> {
    fn new(m: &'a Metrics, cfg: &RestaurantConfig) -> Self {
        MetricsRow {
            schema_version: SCHEMA_VERSION,
            policy: &m.policy,
            n_tables: cfg.n_tables,
            horizon: cfg.horizon,
            gamma: cfg.gamma,
            episodes: m.episodes,
            base_seed: m.base_seed,
            mean_return: m.mean_return,
            std_return: m.std_return,
            std_error: m.std_error,
            mean_final_satisfaction: m
                .mean_final_satisfaction
                .iter()
                .map(f64::to_string)
                .collect::<Vec<_>>()
                .join(";"),
            mean_max_wait: m.mean_max_wait,
            completion_rate: m.completion_rate,
            diff_vs_first: None,
            paired_std_error: None,
        }
    }
}

pub fn cmd_evaluate(inv: &Invocation, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load_config(inv, "paper-3tables")?;
    let policy = single_policy(inv, "random")?;
    let path = out_path(inv, "metrics.csv");
    let m = evaluate(&policy, &cfg, inv.episodes, inv.seed.unwrap_or(cfg.seed))?;

    let fresh = std::fs::metadata(&path)
        .map(|md| md.len() == 0)
        .unwrap_or(true);
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(&path)
        .map_err(out_err(&path))?;
    let mut w = csv::WriterBuilder::new()
        .has_headers(fresh)
        .from_writer(file);
    w.serialize(MetricsRow::new(&m, &cfg))
        .map_err(|e| CliError::Output {
            path: path.clone(),
            source: e.into(),
        })?;
    w.flush().map_err(out_err(&path))?;
    let _ = writeln!(
        out,
        "{}: mean return {:.4} ± {:.4} over {} episodes",
        m.policy, m.mean_return, m.std_error, m.episodes
    );
    Ok(())
}

pub fn cmd_compare(inv: &Invocation, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load_config(inv, "paper-3tables")?;
    if inv.policies.is_empty() {
        return Err(CliError::Usage(
            "compare needs at least one --policy".into(),
        ));
    }
    let policies = inv
        .policies
        .iter()
        .map(|p| p.parse::<Policy>())
        .collect::<Result<Vec<_>, _>>()?;
    let path = out_path(inv, "compare.csv");
    let seed = inv.seed.unwrap_or(cfg.seed);
    let metrics = policies
        .iter()
        .map(|p| evaluate(p, &cfg, inv.episodes, seed))
        .collect::<Result<Vec<_>, _>>()?;

    let paired: Vec<(f64, f64)> = metrics
        .iter()
        .map(|m| paired_difference(&m.returns, &metrics[0].returns))
        .collect();
    let mut w = csv::Writer::from_writer(create(&path)?);
    for (m, &(diff, se)) in metrics.iter().zip(&paired) {
        let row = MetricsRow {
            diff_vs_first: Some(diff),
            paired_std_error: Some(se),
            ..MetricsRow::new(m, &cfg)
        };
        w.serialize(row).map_err(|e| CliError::Output {
            path: path.clone(),
            source: e.into(),
        })?;
    }
    w.flush().map_err(out_err(&path))?;

    let mut order: Vec<usize> = (0..metrics.len()).collect();
    order.sort_by(|&a, &b| metrics[b].mean_return.total_cmp(&metrics[a].mean_return));
    let _ = writeln!(
        out,
        "{} episodes, seeds {}..{}",
        inv.episodes,
        seed,
        seed + inv.episodes as u64
    );
    for (rank, &i) in order.iter().enumerate() {
        let m = &metrics[i];
        let _ = write!(
            out,
            "{}. {}: {:.4} ± {:.4}",
            rank + 1,
            m.policy,
            m.mean_return,
            m.std_error
        );
        if i > 0 {
            let (diff, se) = paired[i];
            let _ = write!(
                out,
                "  [vs {}: {:+.4} ± {:.4} paired]",
                metrics[0].policy, diff, se
            );
        }
        let _ = writeln!(out);
    }
    Ok(())
}

pub fn cmd_verify(inv: &Invocation, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = load_config(inv, "small")?;
    let report = verify::run_checks(&cfg, inv.seed.unwrap_or(cfg.seed))?;
    for c in &report {
        let _ = writeln!(
            out,
            "{} {}: {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    match report.iter().find(|c| !c.passed) {
        Some(c) => Err(CliError::CheckFailed(c.name.to_string())),
        None => Ok(()),
    }
}
