//! Per-record analysis: estimates, witness gap and auxiliary figures.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::counts::AnalysisInput;
use super::{fmt_num, ser_opt_sig9, ser_sig9};
use crate::error::{Error, Result};
use crate::estimators::{self, ClickCounts, EstimateWithError, JointEstimate};
use crate::witness::{self, ProbabilityPair, WitnessOptions, WitnessReport};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzeOptions {
    pub sigma_k: f64,
    pub r_max: f64,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            sigma_k: 3.0,
            r_max: witness::DEFAULT_R_MAX,
        }
    }
}

/// One analyzed row with its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub label: String,
    #[serde(serialize_with = "ser_sig9")]
    pub p0: f64,
    #[serde(serialize_with = "ser_sig9")]
    pub p1: f64,
    #[serde(serialize_with = "ser_sig9")]
    pub sigma_p0: f64,
    #[serde(serialize_with = "ser_sig9")]
    pub sigma_p1: f64,
    #[serde(serialize_with = "ser_opt_sig9")]
    pub t_est: Option<f64>,
    #[serde(serialize_with = "ser_sig9")]
    pub a_opt: f64,
    #[serde(serialize_with = "ser_sig9")]
    pub delta_w: f64,
    #[serde(serialize_with = "ser_sig9")]
    pub sigma_delta_w: f64,
    pub non_gaussian: bool,
    #[serde(serialize_with = "ser_opt_sig9")]
    pub g2: Option<f64>,
    #[serde(serialize_with = "ser_opt_sig9")]
    pub alpha: Option<f64>,
    #[serde(serialize_with = "ser_sig9")]
    pub wigner_origin_lower_bound: f64,
    pub flags: Vec<String>,
}

pub const REPORT_CSV_HEADER: [&str; 14] = [
    "label",
    "p0",
    "p1",
    "sigma_p0",
    "sigma_p1",
    "t_est",
    "a_opt",
    "delta_w",
    "sigma_delta_w",
    "non_gaussian",
    "g2",
    "alpha",
    "wigner_origin_lower_bound",
    "flags",
];

/// Estimates for a run with no single clicks and no coincidences: pure vacuum.
fn dark_run(counts: &ClickCounts) -> Result<JointEstimate> {
    if counts.r0 == 0 {
        return Err(Error::EmptyRun);
    }
    Ok(JointEstimate {
        p0: EstimateWithError::exact(1.0),
        p1: EstimateWithError::exact(0.0),
        t: EstimateWithError::exact(f64::NAN),
        cov_p0_p1: 0.0,
        swapped: false,
        p1_negative: false,
    })
}

/// Witness report that tolerates a negative `p1` estimate.
///
/// `a_opt` depends on `p0` only and `ΔW` is `p1` minus the boundary, so a
/// negative estimate shifts `ΔW` and `W(a)` one-for-one.
fn witness_for_estimate(pair: &ProbabilityPair, opts: &WitnessOptions) -> Result<WitnessReport> {
    if pair.p1 >= 0.0 {
        return witness::max_delta_w_with(pair, opts);
    }
    let shifted = ProbabilityPair { p1: 0.0, ..*pair };
    let mut rep = witness::max_delta_w_with(&shifted, opts)?;
    rep.w_value += pair.p1;
    rep.delta_w = rep.w_value - rep.w_bound;
    rep.non_gaussian = false;
    Ok(rep)
}

fn analyze_one(input: &AnalysisInput, opts: &AnalyzeOptions) -> Result<ReportRecord> {
    let mut flags = Vec::new();
    let (pair, cov, t_est, alpha) = match input {
        AnalysisInput::Counts { counts, .. } => {
            let est = if counts.r1a + counts.r1b + counts.r2 == 0 {
                flags.push("no_clicks".to_string());
                dark_run(counts)?
            } else {
                estimators::estimate_joint(counts)?
            };
            if est.swapped {
                flags.push("channels_swapped".to_string());
            }
            if est.p1_negative {
                flags.push("p1_negative".to_string());
            }
            let alpha = if counts.r1a > 0 && counts.r1b > 0 {
                Some(estimators::alpha_anticorrelation(counts)?.value)
            } else {
                None
            };
            let t = est.t.value;
            (est.pair(), est.cov_p0_p1, t.is_finite().then_some(t), alpha)
        }
        AnalysisInput::Pair(p) => (p.pair, p.cov_p0_p1, None, None),
    };

    let wopts = WitnessOptions {
        sigma_k: opts.sigma_k,
        cov_p0_p1: cov,
        r_max: opts.r_max,
    };
    let rep = witness_for_estimate(&pair, &wopts)?;
    if rep.clamped {
        flags.push("a_clamped".to_string());
    }
    let g2 = if pair.p1 >= 0.0 {
        estimators::g2_of_rho_t(pair.p0, pair.p1).ok()
    } else {
        None
    };

    Ok(ReportRecord {
        label: input.label().to_string(),
        p0: pair.p0,
        p1: pair.p1,
        sigma_p0: pair.sigma_p0.unwrap_or(0.0),
        sigma_p1: pair.sigma_p1.unwrap_or(0.0),
        t_est,
        a_opt: rep.a_opt,
        delta_w: rep.delta_w,
        sigma_delta_w: rep.sigma_delta_w,
        non_gaussian: rep.non_gaussian,
        g2,
        alpha,
        wigner_origin_lower_bound: witness::wigner_origin_bound(pair.p0.clamp(0.0, 1.0))?,
        flags,
    })
}

/// Analyzes every input; the output keeps the input order.
pub fn analyze(inputs: &[AnalysisInput], opts: &AnalyzeOptions) -> Result<Vec<ReportRecord>> {
    if !(opts.sigma_k.is_finite() && opts.sigma_k >= 0.0) {
        return Err(Error::param("sigma_k", "must be finite and non-negative"));
    }
    inputs
        .par_iter()
        .map(|input| {
            analyze_one(input, opts).map_err(|e| Error::Labeled {
                label: input.label().to_string(),
                source: Box::new(e),
            })
        })
        .collect()
}

pub fn write_reports_json<W: Write>(mut out: W, reports: &[ReportRecord]) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, reports)
        .map_err(|e| Error::io("<report output>", std::io::Error::other(e)))?;
    writeln!(out).map_err(|e| Error::io("<report output>", e))
}

pub fn write_reports_csv<W: Write>(out: W, reports: &[ReportRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| Error::io("<report output>", std::io::Error::other(e.to_string()));
    let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
    w.write_record(REPORT_CSV_HEADER).map_err(io_err)?;
    for r in reports {
        w.write_record([
            r.label.clone(),
            fmt_num(r.p0),
            fmt_num(r.p1),
            fmt_num(r.sigma_p0),
            fmt_num(r.sigma_p1),
            opt(r.t_est),
            fmt_num(r.a_opt),
            fmt_num(r.delta_w),
            fmt_num(r.sigma_delta_w),
            r.non_gaussian.to_string(),
            opt(r.g2),
            opt(r.alpha),
            fmt_num(r.wigner_origin_lower_bound),
            r.flags.join(";"),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::io("<report output>", e))
}
