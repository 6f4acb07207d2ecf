//! Check reports, report bundles and CSV tables.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    fn from_gap(gap: f64, tol: f64, rhs: f64) -> Self {
        if gap >= -tol * rhs.abs().max(1.0) {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

/// Outcome of one inequality (or identity) check on one instance.
///
/// Passes iff `gap >= -tol * max(1, |rhs|)`. For inequalities `lhs <= rhs`
/// the gap is `rhs - lhs`; for identities it is `-|lhs - rhs|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub tol: f64,
    pub verdict: Verdict,
    pub instance_seed: Option<u64>,
    pub instance_descriptor: String,
    pub generator: String,
}

impl CheckReport {
    /// `lhs <= rhs`.
    pub fn inequality(name: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let gap = rhs - lhs;
        Self::build(name, lhs, rhs, gap, tol)
    }

    /// `lhs == rhs`.
    pub fn equality(name: &str, lhs: f64, rhs: f64, tol: f64) -> Self {
        let gap = -(lhs - rhs).abs();
        Self::build(name, lhs, rhs, gap, tol)
    }

    fn build(name: &str, lhs: f64, rhs: f64, gap: f64, tol: f64) -> Self {
        let verdict = if gap.is_nan() {
            Verdict::Fail
        } else {
            Verdict::from_gap(gap, tol, rhs)
        };
        Self {
            name: name.to_string(),
            lhs,
            rhs,
            gap,
            tol,
            verdict,
            instance_seed: None,
            instance_descriptor: String::new(),
            generator: String::new(),
        }
    }

    pub fn with_instance(mut self, seed: Option<u64>, descriptor: impl Into<String>) -> Self {
        self.instance_seed = seed;
        self.instance_descriptor = descriptor.into();
        self
    }

    pub fn with_generator(mut self, generator: &str) -> Self {
        self.generator = generator.to_string();
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Pass/fail counts for one check name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub name: String,
    pub passed: usize,
    pub failed: usize,
}

pub fn summarize(reports: &[CheckReport]) -> Vec<CheckSummary> {
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for r in reports {
        let entry = counts.entry(&r.name).or_default();
        if r.passed() {
            entry.0 += 1;
        } else {
            entry.1 += 1;
        }
    }
    counts
        .into_iter()
        .map(|(name, (passed, failed))| CheckSummary {
            name: name.to_string(),
            passed,
            failed,
        })
        .collect()
}

/// A JSON report bundle with suite metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBundle {
    pub toolkit_version: String,
    pub generator: String,
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub tolerances: BTreeMap<String, f64>,
    pub summary: Vec<CheckSummary>,
    pub reports: Vec<CheckReport>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl ReportBundle {
    pub fn new(reports: Vec<CheckReport>) -> Self {
        Self {
            toolkit_version: TOOLKIT_VERSION.to_string(),
            generator: crate::harness::GENERATOR_NAME.to_string(),
            seed: None,
            trials: None,
            tolerances: BTreeMap::new(),
            summary: summarize(&reports),
            reports,
            extra: BTreeMap::new(),
        }
    }

    pub fn all_passed(&self) -> bool {
        self.reports.iter().all(CheckReport::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckReport> {
        self.reports.iter().filter(|r| !r.passed())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A numeric table with a header row.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Formats with 17 significant digits.
pub fn format_sig17(value: f64) -> String {
    format!("{value:.16e}")
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|&v| format_sig17(v)))?;
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// One CSV row per report, with a header.
pub fn reports_to_csv(reports: &[CheckReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "name",
        "lhs",
        "rhs",
        "gap",
        "tol",
        "verdict",
        "instance_seed",
        "instance_descriptor",
    ])?;
    for r in reports {
        let verdict = if r.passed() { "pass" } else { "fail" };
        let seed = r.instance_seed.map(|s| s.to_string()).unwrap_or_default();
        w.write_record([
            r.name.as_str(),
            &format_sig17(r.lhs),
            &format_sig17(r.rhs),
            &format_sig17(r.gap),
            &format_sig17(r.tol),
            verdict,
            &seed,
            &r.instance_descriptor,
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
