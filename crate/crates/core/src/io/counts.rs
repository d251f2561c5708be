//! Counts and probability-pair CSV files.
//!
//! Counts: `label,R0,R1A,R1B,R2,duration_s,inclusive`. The last two columns
//! may be left empty (or omitted entirely); `inclusive=true` marks two-fold
//! totals that also contain the three-fold events.
//!
//! Pairs: `label,p0,p1` with optional `sigma_p0,sigma_p1,cov_p0_p1`. Other
//! columns are ignored.

use std::io::Write;
use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::ClickCounts;
use crate::witness::ProbabilityPair;

pub const COUNTS_HEADER: [&str; 7] = ["label", "R0", "R1A", "R1B", "R2", "duration_s", "inclusive"];

/// One row of a counts file, as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsRecord {
    pub label: String,
    #[serde(rename = "R0")]
    pub r0: u64,
    #[serde(rename = "R1A")]
    pub r1a: u64,
    #[serde(rename = "R1B")]
    pub r1b: u64,
    #[serde(rename = "R2")]
    pub r2: u64,
    pub duration_s: Option<f64>,
    pub inclusive: bool,
}

impl CountsRecord {
    /// Exclusive click counts, converting inclusive two-fold totals.
    pub fn click_counts(&self) -> Result<ClickCounts> {
        let c = if self.inclusive {
            ClickCounts::from_inclusive(self.r0, self.r1a, self.r1b, self.r2)?
        } else {
            ClickCounts::new(self.r0, self.r1a, self.r1b, self.r2)?
        };
        Ok(match self.duration_s {
            Some(d) => c.with_duration(d),
            None => c,
        })
    }

    pub fn from_counts(label: impl Into<String>, c: &ClickCounts) -> Self {
        CountsRecord {
            label: label.into(),
            r0: c.r0,
            r1a: c.r1a,
            r1b: c.r1b,
            r2: c.r2,
            duration_s: c.duration_s,
            inclusive: false,
        }
    }
}

/// One row of a probability-pair file.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRecord {
    pub label: String,
    pub pair: ProbabilityPair,
    pub cov_p0_p1: f64,
}

/// A validated row ready for [`crate::io::analyze`].
#[derive(Debug, Clone, PartialEq)]
pub enum AnalysisInput {
    Counts { label: String, counts: ClickCounts },
    Pair(PairRecord),
}

impl AnalysisInput {
    pub fn label(&self) -> &str {
        match self {
            AnalysisInput::Counts { label, .. } => label,
            AnalysisInput::Pair(p) => &p.label,
        }
    }
}

struct Table {
    headers: StringRecord,
    rows: Vec<(usize, StringRecord)>,
}

fn read_table(text: &str) -> Result<Table> {
    let mut rdr = ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(Trim::All)
        .flexible(false)
        .from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| csv_error(e, "header"))?.clone();
    if headers.iter().all(|h| h.is_empty()) {
        return Err(Error::Parse {
            row: 1,
            column: String::new(),
            reason: "missing header".into(),
        });
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(e, ""))?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        rows.push((line, rec));
    }
    Ok(Table { headers, rows })
}

fn csv_error(e: csv::Error, column: &str) -> Error {
    let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse {
        row,
        column: column.to_string(),
        reason: e.to_string(),
    }
}

impl Table {
    fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    fn require(&self, name: &str) -> Result<usize> {
        self.column(name).ok_or_else(|| Error::Parse {
            row: 1,
            column: name.to_string(),
            reason: "missing column in header".into(),
        })
    }
}

fn field(rec: &StringRecord, idx: Option<usize>) -> &str {
    idx.and_then(|i| rec.get(i)).unwrap_or("")
}

fn parse_field<T: std::str::FromStr>(row: usize, column: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>().map_err(|e| Error::Parse {
        row,
        column: column.to_string(),
        reason: format!("`{raw}`: {e}"),
    })
}

fn parse_opt_f64(row: usize, column: &str, raw: &str) -> Result<Option<f64>> {
    if raw.is_empty() {
        return Ok(None);
    }
    let v: f64 = parse_field(row, column, raw)?;
    if !v.is_finite() || v < 0.0 {
        return Err(Error::Parse {
            row,
            column: column.to_string(),
            reason: format!("`{raw}` is not a finite non-negative number"),
        });
    }
    Ok(Some(v))
}

fn parse_bool(row: usize, column: &str, raw: &str) -> Result<bool> {
    match raw.to_ascii_lowercase().as_str() {
        "" | "false" | "0" | "no" => Ok(false),
        "true" | "1" | "yes" => Ok(true),
        _ => Err(Error::Parse {
            row,
            column: column.to_string(),
            reason: format!("`{raw}` is not a boolean"),
        }),
    }
}

fn parse_counts_table(table: &Table) -> Result<Vec<CountsRecord>> {
    let label = table.require("label")?;
    let idx: Vec<usize> = ["R0", "R1A", "R1B", "R2"]
        .iter()
        .map(|c| table.require(c))
        .collect::<Result<_>>()?;
    let duration = table.column("duration_s");
    let inclusive = table.column("inclusive");

    let mut out = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        let line = *line;
        let mut n = [0u64; 4];
        for (k, (&i, name)) in idx.iter().zip(["R0", "R1A", "R1B", "R2"]).enumerate() {
            n[k] = parse_field(line, name, field(rec, Some(i)))?;
        }
        let record = CountsRecord {
            label: field(rec, Some(label)).to_string(),
            r0: n[0],
            r1a: n[1],
            r1b: n[2],
            r2: n[3],
            duration_s: parse_opt_f64(line, "duration_s", field(rec, duration))?,
            inclusive: parse_bool(line, "inclusive", field(rec, inclusive))?,
        };
        record.click_counts().map_err(|e| Error::InvariantViolation {
            row: line,
            label: record.label.clone(),
            reason: e.to_string(),
        })?;
        out.push(record);
    }
    Ok(out)
}

fn parse_pairs_table(table: &Table) -> Result<Vec<PairRecord>> {
    let label = table.require("label")?;
    let p0 = table.require("p0")?;
    let p1 = table.require("p1")?;
    let s0 = table.column("sigma_p0");
    let s1 = table.column("sigma_p1");
    let cov = table.column("cov_p0_p1");

    let mut out = Vec::with_capacity(table.rows.len());
    for (line, rec) in &table.rows {
        let line = *line;
        let label = field(rec, Some(label)).to_string();
        let pair = ProbabilityPair {
            p0: parse_field(line, "p0", field(rec, Some(p0)))?,
            p1: parse_field(line, "p1", field(rec, Some(p1)))?,
            sigma_p0: parse_opt_f64(line, "sigma_p0", field(rec, s0))?,
            sigma_p1: parse_opt_f64(line, "sigma_p1", field(rec, s1))?,
        };
        let cov_raw = field(rec, cov);
        let cov_p0_p1 = if cov_raw.is_empty() {
            0.0
        } else {
            let c: f64 = parse_field(line, "cov_p0_p1", cov_raw)?;
            if !c.is_finite() {
                return Err(Error::Parse {
                    row: line,
                    column: "cov_p0_p1".into(),
                    reason: "not finite".into(),
                });
            }
            c
        };
        pair.validate().map_err(|e| Error::InvariantViolation {
            row: line,
            label: label.clone(),
            reason: e.to_string(),
        })?;
        out.push(PairRecord { label, pair, cov_p0_p1 });
    }
    Ok(out)
}

/// Parses and validates counts CSV text.
pub fn parse_counts(text: &str) -> Result<Vec<CountsRecord>> {
    parse_counts_table(&read_table(text)?)
}

/// Parses and validates probability-pair CSV text.
pub fn parse_pairs(text: &str) -> Result<Vec<PairRecord>> {
    parse_pairs_table(&read_table(text)?)
}

/// Parses either file kind, told apart by an `R0` or a `p0` column.
pub fn parse_input(text: &str) -> Result<Vec<AnalysisInput>> {
    let table = read_table(text)?;
    if table.column("R0").is_some() {
        parse_counts_table(&table)?
            .into_iter()
            .map(|r| {
                Ok(AnalysisInput::Counts {
                    counts: r.click_counts()?,
                    label: r.label,
                })
            })
            .collect()
    } else if table.column("p0").is_some() {
        Ok(parse_pairs_table(&table)?
            .into_iter()
            .map(AnalysisInput::Pair)
            .collect())
    } else {
        Err(Error::Parse {
            row: 1,
            column: String::new(),
            reason: "header has neither R0 (counts) nor p0 (probabilities)".into(),
        })
    }
}

/// Reads a counts file.
pub fn ingest_counts(path: &Path) -> Result<Vec<CountsRecord>> {
    parse_counts(&super::read_file(path)?)
}

/// Serializes counts records with the standard header.
pub fn write_counts<W: Write>(out: W, records: &[CountsRecord]) -> Result<()> {
    // a bare leading `#` would read back as a comment line
    let style = if records.iter().any(|r| r.label.starts_with('#')) {
        csv::QuoteStyle::NonNumeric
    } else {
        csv::QuoteStyle::Necessary
    };
    let mut w = csv::WriterBuilder::new().quote_style(style).from_writer(out);
    let io_err = |e: csv::Error| Error::io("<counts output>", std::io::Error::other(e.to_string()));
    w.write_record(COUNTS_HEADER).map_err(io_err)?;
    for r in records {
        w.write_record([
            r.label.clone(),
            r.r0.to_string(),
            r.r1a.to_string(),
            r.r1b.to_string(),
            r.r2.to_string(),
            r.duration_s.map(super::fmt_num).unwrap_or_default(),
            r.inclusive.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::io("<counts output>", e))
}
