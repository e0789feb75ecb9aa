//! JSON and CSV renderings of a run.

use qe_core::Entry;

use crate::run::{CheckReport, RunReport};

pub fn json(report: &RunReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

/// The entry that speaks for a check in the one-row-per-check table: the
/// first failure, else the first entry that ran, else the first entry.
pub fn headline(check: &CheckReport) -> Option<&Entry> {
    let entries = &check.report.entries;
    entries
        .iter()
        .find(|e| e.verdict.is_fail())
        .or_else(|| entries.iter().find(|e| !matches!(e.verdict, qe_core::Verdict::Skipped(_))))
        .or_else(|| entries.first())
}

fn number(v: Option<f64>) -> String {
    v.map(|v| format!("{v:e}")).unwrap_or_default()
}

pub fn csv(report: &RunReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["check", "paper_tag", "linf", "l2", "lhs", "rhs", "tolerance", "verdict"])
        .expect("in-memory write");
    for check in &report.checks {
        let Some(e) = headline(check) else { continue };
        w.write_record([
            check.name.clone(),
            e.tag.as_str().to_string(),
            number(e.linf),
            number(e.l2),
            number(e.lhs),
            number(e.rhs),
            format!("{:e}", e.tolerance),
            e.verdict.as_str().to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("ascii fields")
}
