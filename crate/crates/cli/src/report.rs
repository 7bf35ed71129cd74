//! Check records and their JSON/CSV emission.

use std::fmt::Display;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::Format;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    /// Informational: measured and printed, never fails the run.
    Report,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Report => "REPORT",
        }
    }
}

/// One check. `PASS` means `|measured - expected| ≤ tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub id: String,
    pub paper_anchor: String,
    pub inputs: String,
    /// `None` when the computation itself failed.
    pub measured: Option<f64>,
    pub expected: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl Record {
    pub fn check(
        id: impl Into<String>,
        anchor: &str,
        inputs: impl Into<String>,
        measured: f64,
        expected: f64,
        tolerance: f64,
    ) -> Self {
        let ok = measured.is_finite() && (measured - expected).abs() <= tolerance;
        Self {
            id: id.into(),
            paper_anchor: anchor.to_string(),
            inputs: inputs.into(),
            measured: measured.is_finite().then_some(measured),
            expected,
            tolerance,
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
        }
    }

    pub fn report(id: impl Into<String>, anchor: &str, inputs: impl Into<String>, measured: f64, expected: f64) -> Self {
        Self {
            id: id.into(),
            paper_anchor: anchor.to_string(),
            inputs: inputs.into(),
            measured: measured.is_finite().then_some(measured),
            expected,
            tolerance: 0.0,
            verdict: Verdict::Report,
        }
    }

    pub fn error(id: impl Into<String>, anchor: &str, inputs: impl Into<String>, err: impl Display) -> Self {
        Self {
            id: id.into(),
            paper_anchor: anchor.to_string(),
            inputs: format!("{}; error: {err}", inputs.into()),
            measured: None,
            expected: 0.0,
            tolerance: 0.0,
            verdict: Verdict::Fail,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }
}

/// Records of one run, ordered by id.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub records: Vec<Record>,
}

impl Report {
    pub fn new(mut records: Vec<Record>) -> Self {
        records.sort_by(|a, b| a.id.cmp(&b.id));
        Self { records }
    }

    pub fn count(&self, v: Verdict) -> usize {
        self.records.iter().filter(|r| r.verdict == v).count()
    }

    pub fn has_failures(&self) -> bool {
        self.count(Verdict::Fail) > 0
    }

    pub fn summary(&self) -> String {
        format!(
            "{} checks: {} PASS, {} FAIL, {} REPORT",
            self.records.len(),
            self.count(Verdict::Pass),
            self.count(Verdict::Fail),
            self.count(Verdict::Report)
        )
    }
}

pub const CSV_HEADER: [&str; 7] = ["id", "paper_anchor", "inputs", "measured", "expected", "tolerance", "verdict"];

fn number(v: f64) -> String {
    format!("{v:?}")
}

pub fn emit_report<W: Write>(report: &Report, format: Format, mut w: W) -> std::io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &report.records)?;
            writeln!(w)
        }
        Format::Csv => {
            let mut out = csv::Writer::from_writer(w);
            out.write_record(CSV_HEADER)?;
            for r in &report.records {
                out.write_record([
                    r.id.clone(),
                    r.paper_anchor.clone(),
                    r.inputs.clone(),
                    r.measured.map(number).unwrap_or_default(),
                    number(r.expected),
                    number(r.tolerance),
                    r.verdict.as_str().to_string(),
                ])?;
            }
            out.flush()
        }
    }
}

pub fn parse_json(text: &str) -> serde_json::Result<Report> {
    Ok(Report {
        records: serde_json::from_str(text)?,
    })
}
