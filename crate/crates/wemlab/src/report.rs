//! Report emission helpers: byte-stable JSON and CSV documents.
//!
//! Reports serialize with struct-declared field order and no
//! volatile fields (timestamps, paths), so identical inputs produce
//! byte-identical artifacts.

use serde::Serialize;

use crate::blockmodel::DiscrepancyReport;

/// Pretty JSON with a trailing newline.
pub fn json_document<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports always serialize");
    text.push('\n');
    text
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// A CSV document with a header row, RFC-style quoting, LF line endings.
pub fn csv_document(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let escaped: Vec<String> = row.iter().map(|f| csv_escape(f)).collect();
        out.push_str(&escaped.join(","));
        out.push('\n');
    }
    out
}

/// CSV rows of the formula audit: one row per (kind, model, shape).
pub fn discrepancy_csv(report: &DiscrepancyReport) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let header = vec![
        "kind",
        "model",
        "n",
        "k",
        "enumerated_or_states_checked",
        "implemented_ok",
        "published_value_or_mismatches",
        "published_ok",
        "example",
    ];
    let mut rows = Vec::new();
    for row in &report.state_rows {
        rows.push(vec![
            "states".to_string(),
            row.model.to_string(),
            row.n.to_string(),
            row.k.to_string(),
            row.enumerated.to_string(),
            row.implemented_matches.to_string(),
            row.published.map(|p| p.to_string()).unwrap_or_default(),
            row.published_matches.to_string(),
            String::new(),
        ]);
    }
    for row in &report.transition_rows {
        rows.push(vec![
            "transitions".to_string(),
            row.model.to_string(),
            row.n.to_string(),
            row.k.to_string(),
            row.states_checked.to_string(),
            (row.implemented_mismatches == 0).to_string(),
            row.published_mismatches.to_string(),
            (row.published_formula_defined && row.published_mismatches == 0).to_string(),
            row.example
                .as_ref()
                .map(|e| format!("{} published={} enumerated={}", e.state, e.published, e.enumerated))
                .unwrap_or_default(),
        ]);
    }
    (header, rows)
}

/// Plain-text table of the formula audit, mismatched rows marked.
pub fn render_discrepancy_table(report: &DiscrepancyReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "formula audit up to n={} k={} (enumeration is ground truth)\n\n",
        report.max_n, report.max_k
    ));
    out.push_str("state counts:\n");
    for row in &report.state_rows {
        let flag = if row.published_matches { "  " } else { "!!" };
        out.push_str(&format!(
            "{flag} {:<24} n={} k={}  enumerated={:<8} published={:<8}{}\n",
            row.model.to_string(),
            row.n,
            row.k,
            row.enumerated,
            row.published.map(|p| p.to_string()).unwrap_or_else(|| "-".into()),
            if row.implemented_matches { "" } else { "  [implemented formula WRONG]" },
        ));
    }
    out.push_str("\ntransition counts (per-state, aggregated):\n");
    for row in &report.transition_rows {
        if !row.published_formula_defined {
            continue;
        }
        let flag = if row.published_mismatches == 0 { "  " } else { "!!" };
        out.push_str(&format!(
            "{flag} {:<24} n={} k={}  states={:<6} published formula wrong on {}{}\n",
            row.model.to_string(),
            row.n,
            row.k,
            row.states_checked,
            row.published_mismatches,
            row.example
                .as_ref()
                .map(|e| {
                    format!("  e.g. {} published={} enumerated={}", e.state, e.published, e.enumerated)
                })
                .unwrap_or_default(),
        ));
    }
    out
}
