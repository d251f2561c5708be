//! Simulation config documents and the `simulate` driver.
//!
//! A config is either one JSON object with the [`SourceConfig`] fields, or a
//! batch `{"runs": [SourceConfig, ...], "labels": [..]}` with optional labels.
//! Output is a counts CSV plus a `<out>.truth.json` sidecar holding the
//! exact signal statistics of every run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::counts::{write_counts, CountsRecord};
use super::{read_file, write_file};
use crate::error::{Error, Result};
use crate::photon_sim::{run_experiment, source_click_probabilities, ClickProbabilities, SourceConfig};
use crate::witness::{self, ProbabilityPair};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Batch {
    runs: Vec<SourceConfig>,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

/// Parsed and validated simulation runs.
#[derive(Debug, Clone, PartialEq)]
pub struct SimDocument {
    pub runs: Vec<(String, SourceConfig)>,
}

/// Ground truth of one simulated run, as stored in the sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRecord {
    pub label: String,
    pub config: SourceConfig,
    pub probs: Vec<f64>,
    pub tail: f64,
    pub p0: f64,
    pub p1: f64,
    pub delta_w: f64,
    pub in_gaussian_region: bool,
    pub click_probabilities: ClickProbabilities,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub counts: Vec<CountsRecord>,
    pub truth: Vec<TruthRecord>,
}

fn path_error<E: std::fmt::Display>(e: serde_path_to_error::Error<E>, prefix: &str) -> Error {
    let path = e.path().to_string();
    let path = match (prefix.is_empty(), path.as_str()) {
        (true, _) => path,
        (false, ".") => prefix.to_string(),
        (false, p) => format!("{prefix}.{p}"),
    };
    Error::Config {
        path,
        reason: e.into_inner().to_string(),
    }
}

fn validation_path(e: &Error) -> &'static str {
    match e {
        Error::InvalidParameter { name, .. } | Error::OutOfRange { name, .. } => name,
        Error::TruncationOverflow { .. } => "n_max",
        Error::Config { .. } => "pair_gain",
        _ => "",
    }
}

fn validate_run(prefix: &str, cfg: &SourceConfig) -> Result<()> {
    cfg.validate().map_err(|e| {
        let field = validation_path(&e);
        Error::Config {
            path: if prefix.is_empty() {
                field.to_string()
            } else {
                format!("{prefix}.{field}")
            },
            reason: e.to_string(),
        }
    })
}

/// Parses a config document and validates every run.
pub fn parse_sim_config(text: &str) -> Result<SimDocument> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Config {
        path: format!("line {} column {}", e.line(), e.column()),
        reason: e.to_string(),
    })?;
    let is_batch = value.as_object().is_some_and(|o| o.contains_key("runs"));
    let runs = if is_batch {
        let batch: Batch = serde_path_to_error::deserialize(value).map_err(|e| path_error(e, ""))?;
        let labels = match batch.labels {
            Some(l) if l.len() != batch.runs.len() => {
                return Err(Error::Config {
                    path: "labels".into(),
                    reason: format!("{} labels for {} runs", l.len(), batch.runs.len()),
                })
            }
            Some(l) => l,
            None => (0..batch.runs.len()).map(|i| format!("run{i}")).collect(),
        };
        if batch.runs.is_empty() {
            return Err(Error::Config {
                path: "runs".into(),
                reason: "no runs".into(),
            });
        }
        labels.into_iter().zip(batch.runs).collect::<Vec<_>>()
    } else {
        let cfg: SourceConfig = serde_path_to_error::deserialize(value).map_err(|e| path_error(e, ""))?;
        vec![("run0".to_string(), cfg)]
    };
    for (i, (_, cfg)) in runs.iter().enumerate() {
        let prefix = if is_batch { format!("runs[{i}]") } else { String::new() };
        validate_run(&prefix, cfg)?;
    }
    Ok(SimDocument { runs })
}

/// Runs every configured experiment; `seed_override` reseeds run `i` with `seed + i`.
pub fn run_document(doc: &SimDocument, seed_override: Option<u64>) -> Result<SimOutcome> {
    let mut counts = Vec::with_capacity(doc.runs.len());
    let mut truth = Vec::with_capacity(doc.runs.len());
    for (i, (label, cfg)) in doc.runs.iter().enumerate() {
        let mut cfg = cfg.clone();
        if let Some(seed) = seed_override {
            cfg.seed = seed.wrapping_add(i as u64);
        }
        let (c, stats) = run_experiment(&cfg)?;
        let pair = ProbabilityPair::new(stats.p(0), stats.p(1))?;
        let rep = witness::max_delta_w(&pair)?;
        counts.push(CountsRecord::from_counts(label.clone(), &c));
        truth.push(TruthRecord {
            label: label.clone(),
            click_probabilities: source_click_probabilities(&cfg)?,
            config: cfg,
            probs: stats.probs().to_vec(),
            tail: stats.tail(),
            p0: pair.p0,
            p1: pair.p1,
            delta_w: rep.delta_w,
            in_gaussian_region: rep.delta_w <= 0.0,
        });
    }
    Ok(SimOutcome { counts, truth })
}

/// Sidecar path: `<out>.truth.json`.
pub fn truth_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".truth.json");
    PathBuf::from(name)
}

/// Reads `config`, simulates, writes the counts CSV to `out` and the truth sidecar next to it.
pub fn simulate(config: &Path, out: &Path, seed_override: Option<u64>) -> Result<SimOutcome> {
    let doc = parse_sim_config(&read_file(config)?)?;
    let outcome = run_document(&doc, seed_override)?;
    let mut buf = Vec::new();
    write_counts(&mut buf, &outcome.counts)?;
    write_file(out, &buf)?;
    let mut truth =
        serde_json::to_vec_pretty(&outcome.truth).map_err(|e| Error::io(truth_path(out), std::io::Error::other(e)))?;
    truth.push(b'\n');
    write_file(&truth_path(out), &truth)?;
    Ok(outcome)
}
