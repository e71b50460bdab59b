//! Plain-text verification reports (`horoconv-report/1`).
//!
//! A document is the header line followed by one block per report. Every
//! numeric record carries the tolerance it was judged against, and floats are
//! printed with a fixed format so equal inputs give byte-identical output.

use std::fmt::Write as _;

pub const REPORT_HEADER: &str = "horoconv-report/1";

/// One judged quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub samples: usize,
    pub seed: u64,
}

impl CheckRecord {
    /// Passes iff `max_residual <= tolerance` (NaN fails).
    pub fn new(name: impl Into<String>, max_residual: f64, tolerance: f64, samples: usize, seed: u64) -> Self {
        CheckRecord {
            name: name.into(),
            passed: max_residual <= tolerance,
            max_residual,
            tolerance,
            samples,
            seed,
        }
    }

    /// A record whose verdict is decided elsewhere; `residual` is still
    /// printed next to `tolerance`.
    pub fn with_verdict(
        name: impl Into<String>,
        max_residual: f64,
        tolerance: f64,
        passed: bool,
        samples: usize,
        seed: u64,
    ) -> Self {
        CheckRecord {
            name: name.into(),
            max_residual,
            tolerance,
            passed,
            samples,
            seed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct VerificationReport {
    pub title: String,
    pub spec: String,
    pub records: Vec<CheckRecord>,
    /// Outcomes of comparisons between competing candidate values.
    pub adjudications: Vec<(String, String)>,
    /// Free-form key/value facts (eigenvalue multiplicities, suggestions).
    pub notes: Vec<(String, String)>,
}

impl VerificationReport {
    pub fn new(title: impl Into<String>, spec: impl Into<String>) -> Self {
        VerificationReport {
            title: title.into(),
            spec: spec.into(),
            ..Default::default()
        }
    }

    pub fn push(&mut self, record: CheckRecord) {
        self.records.push(record);
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.notes.push((key.into(), value.into()));
    }

    pub fn adjudicate(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.adjudications.push((key.into(), value.into()));
    }

    pub fn passed(&self) -> bool {
        self.records.iter().all(|r| r.passed)
    }

    pub fn record(&self, name: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn render_into(&self, out: &mut String) {
        let _ = writeln!(out, "[report {}]", self.title);
        let _ = writeln!(out, "spec = {}", self.spec);
        let _ = writeln!(out, "overall = {}", verdict(self.passed()));
        for (k, v) in &self.notes {
            let _ = writeln!(out, "note.{k} = {v}");
        }
        for (k, v) in &self.adjudications {
            let _ = writeln!(out, "adjudication.{k} = {v}");
        }
        for r in &self.records {
            let _ = writeln!(out, "[check {}]", r.name);
            let _ = writeln!(out, "  max_residual = {}", fmt_f64(r.max_residual));
            let _ = writeln!(out, "  tolerance = {}", fmt_f64(r.tolerance));
            let _ = writeln!(out, "  samples = {}", r.samples);
            let _ = writeln!(out, "  seed = {}", r.seed);
            let _ = writeln!(out, "  result = {}", verdict(r.passed));
        }
    }
}

fn verdict(p: bool) -> &'static str {
    if p {
        "pass"
    } else {
        "fail"
    }
}

/// Fixed scientific format used everywhere in reports and CSV files.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        // avoid printing "-0.000000e0"
        let v = if v == 0.0 { 0.0 } else { v };
        format!("{v:.9e}")
    }
}

pub fn fmt_list(vs: &[f64]) -> String {
    let parts: Vec<String> = vs.iter().map(|v| fmt_f64(*v)).collect();
    format!("[{}]", parts.join(", "))
}

/// Header, tool line and the given reports, in order.
pub fn render_document(command: &str, reports: &[VerificationReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{REPORT_HEADER}");
    let _ = writeln!(out, "tool = horoconv {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(out, "command = {command}");
    let overall = reports.iter().all(|r| r.passed());
    let _ = writeln!(out, "overall = {}", verdict(overall));
    for r in reports {
        out.push('\n');
        r.render_into(&mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_verdicts() {
        assert!(CheckRecord::new("a", 1e-12, 1e-9, 1, 0).passed);
        assert!(!CheckRecord::new("a", 1e-3, 1e-9, 1, 0).passed);
        assert!(!CheckRecord::new("a", f64::NAN, 1e-9, 1, 0).passed);
    }

    #[test]
    fn document_layout() {
        let mut r = VerificationReport::new("demo", "round n=3");
        r.push(CheckRecord::new("x", 0.0, 1e-9, 3, 7));
        r.note("lambda", "0.5");
        let doc = render_document("analyze", &[r.clone()]);
        assert!(doc.starts_with("horoconv-report/1\n"));
        assert!(doc.contains("[check x]\n  max_residual = 0.000000000e0\n  tolerance = 1.000000000e-9"));
        assert_eq!(doc, render_document("analyze", &[r]));
        assert_eq!(fmt_f64(-0.0), "0.000000000e0");
    }
}
