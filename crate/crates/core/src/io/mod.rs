//! File formats, the analysis pipeline and bundled reference data.
//!
//! Bulk data is CSV (`#` lines are comments), configuration and reports are
//! JSON. Floating-point output is rounded to nine significant digits.

pub mod boundary;
pub mod counts;
pub mod golden;
pub mod report;
pub mod simulate;

use std::path::Path;

use crate::error::{Error, Result};

pub use boundary::{boundary_rows, emit_boundary, BoundaryRow};
pub use counts::{
    ingest_counts, parse_counts, parse_input, parse_pairs, write_counts, AnalysisInput, CountsRecord, PairRecord,
};
pub use report::{analyze, write_reports_csv, write_reports_json, AnalyzeOptions, ReportRecord};
pub use simulate::{parse_sim_config, simulate, SimDocument, SimOutcome};

/// Rounds to nine significant digits.
pub fn sig9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().unwrap_or(x)
}

pub(crate) fn fmt_num(x: f64) -> String {
    format!("{}", sig9(x))
}

pub(crate) fn ser_sig9<S: serde::Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(sig9(*x))
}

pub(crate) fn ser_opt_sig9<S: serde::Serializer>(x: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match x {
        Some(v) => s.serialize_some(&sig9(*v)),
        None => s.serialize_none(),
    }
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub(crate) fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}
