use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

use super::{Checks, ConfigEcho, LemmaReport, OutputFormat, VerifyReport};

/// A report that can be written as JSON or CSV.
pub trait Report: Serialize {
    fn csv_header(&self) -> Vec<&'static str>;
    fn csv_records(&self) -> Vec<Vec<String>>;
    /// `false` when any invariant the report covers was violated.
    fn passed(&self) -> bool;
}

/// Serializes `report`. JSON is pretty-printed with struct field order; CSV
/// is a header row followed by one row per record.
pub fn emit_report<R: Report + ?Sized>(report: &R, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            Ok(s)
        }
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(report.csv_header())?;
            for row in report.csv_records() {
                w.write_record(&row)?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| Error::ParameterOutOfRange(e.to_string()))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
    }
}

pub fn write_report<R: Report + ?Sized>(report: &R, format: OutputFormat, path: &Path) -> Result<()> {
    let text = emit_report(report, format)?;
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

const SUMMARY_HEADER: [&str; 5] = ["section", "name", "passed", "value", "count"];

fn row(section: &str, name: &str, passed: &str, value: String, count: String) -> Vec<String> {
    vec![section.into(), name.into(), passed.into(), value, count]
}

fn config_rows(c: &ConfigEcho) -> Vec<Vec<String>> {
    [
        ("n", c.n.to_string()),
        ("seed", c.seed.to_string()),
        ("samples", c.samples.to_string()),
        ("tolerance", c.tolerance.to_string()),
        ("box", c.box_bound.to_string()),
        ("mode", c.mode.to_string()),
    ]
    .into_iter()
    .map(|(k, v)| row("config", k, "", v, String::new()))
    .collect()
}

fn check_rows(section: &str, checks: &Checks) -> Vec<Vec<String>> {
    checks
        .iter()
        .map(|(name, c)| {
            row(
                section,
                name,
                &c.passed.to_string(),
                c.worst.to_string(),
                c.checked.to_string(),
            )
        })
        .collect()
}

pub(crate) fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

impl Report for VerifyReport {
    fn csv_header(&self) -> Vec<&'static str> {
        SUMMARY_HEADER.to_vec()
    }

    fn csv_records(&self) -> Vec<Vec<String>> {
        let mut rows = config_rows(&self.config);
        let ok = (self.violations == 0).to_string();
        rows.push(row("summary", "min_f", &ok, self.min_f.to_string(), self.samples_run.to_string()));
        rows.push(row("summary", "argmin", "", join(&self.argmin), self.argmin_index.to_string()));
        rows.push(row("summary", "violations", &ok, self.violations.to_string(), self.samples_run.to_string()));
        rows.push(row("summary", "probes", "", self.probes.to_string(), String::new()));
        rows.push(row(
            "summary",
            "evaluator_max_disagreement",
            "",
            self.evaluator_max_disagreement.to_string(),
            self.evaluator_points.to_string(),
        ));
        rows.extend(check_rows("check", &self.checks));
        rows.push(row("summary", "passed", &self.passed.to_string(), String::new(), String::new()));
        rows
    }

    fn passed(&self) -> bool {
        self.passed
    }
}

impl Report for LemmaReport {
    fn csv_header(&self) -> Vec<&'static str> {
        SUMMARY_HEADER.to_vec()
    }

    fn csv_records(&self) -> Vec<Vec<String>> {
        let mut rows = config_rows(&self.config);
        rows.extend(check_rows("lemma", &self.lemmas));
        rows.push(row("summary", "passed", &self.passed.to_string(), String::new(), String::new()));
        rows
    }

    fn passed(&self) -> bool {
        self.passed
    }
}
