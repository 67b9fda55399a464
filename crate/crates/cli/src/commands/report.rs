use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use shexgen_core::ErrorBreakdown;

use super::evaluate::{Aggregate, Evaluation};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Md,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "md" | "markdown" => Ok(Format::Md),
            other => Err(format!("unknown format {other:?} (expected json, csv or md)")),
        }
    }
}

pub const CATEGORIES: [&str; 5] = ["correct", "missing predicate", "wrong cardinality", "wrong node constraint", "both wrong"];

/// Shares of the five outcome categories in percent; all zero when empty.
pub fn breakdown_percentages(b: &ErrorBreakdown) -> [f64; 5] {
    let total = b.total();
    let counts = [b.correct, b.missing_predicate, b.wrong_cardinality, b.wrong_node_constraint, b.both_wrong];
    if total == 0 {
        return [0.0; 5];
    }
    counts.map(|c| c as f64 * 100.0 / total as f64)
}

fn opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".to_owned(), |x| format!("{x:.digits$}"))
}

fn score_rows(a: &Aggregate) -> Vec<[String; 9]> {
    a.criteria
        .iter()
        .map(|c| {
            [
                a.model.clone(),
                a.setting.clone(),
                c.criteria.to_string(),
                c.n.to_string(),
                format!("{:.3}", c.precision),
                format!("{:.3}", c.recall),
                format!("{:.3}", c.f1),
                opt(a.mean_ged, 2),
                opt(a.mean_nged, 3),
            ]
        })
        .collect()
}

fn md_row(cells: &[String]) -> String {
    format!("| {} |\n", cells.join(" | "))
}

fn md_header(cells: &[&str]) -> String {
    let mut s = md_row(&cells.iter().map(|c| (*c).to_owned()).collect::<Vec<_>>());
    s.push_str(&md_row(&cells.iter().map(|_| "---".to_owned()).collect::<Vec<_>>()));
    s
}

const SCORE_HEADER: [&str; 9] = ["model", "setting", "criteria", "N", "P", "R", "F1", "GED", "NGED"];

/// Error-category shares per (model, setting), then the score grid.
pub fn markdown_report(evals: &[Evaluation]) -> String {
    let mut out = String::from("## Constraint outcomes (%)\n\n");
    let mut header = vec!["model", "setting", "N"];
    header.extend(CATEGORIES);
    out.push_str(&md_header(&header));
    for e in evals {
        let a = &e.aggregate;
        let mut cells = vec![a.model.clone(), a.setting.clone(), a.n.to_string()];
        cells.extend(breakdown_percentages(&a.error_breakdown).iter().map(|p| format!("{p:.2}")));
        out.push_str(&md_row(&cells));
    }
    out.push_str("\n## Scores\n\n");
    out.push_str(&md_header(&SCORE_HEADER));
    for e in evals {
        for row in score_rows(&e.aggregate) {
            out.push_str(&md_row(&row));
        }
    }
    let flagged: Vec<String> = evals
        .iter()
        .filter(|e| !e.invalid.is_empty() || e.aggregate.n_error > 0)
        .map(|e| {
            let a = &e.aggregate;
            let mut s = format!("- {} / {}:", a.model, a.setting);
            if !e.invalid.is_empty() {
                let _ = write!(s, " INVALID {}", e.invalid.join(", "));
            }
            if a.n_error > 0 {
                let _ = write!(s, " {} not scored", a.n_error);
            }
            s
        })
        .collect();
    if !flagged.is_empty() {
        out.push_str("\n## Excluded\n\n");
        for f in flagged {
            out.push_str(&f);
            out.push('\n');
        }
    }
    out
}

/// One row per (model, setting, criteria) with the outcome shares appended.
pub fn csv_report(evals: &[Evaluation]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = SCORE_HEADER.iter().map(|s| s.to_lowercase()).collect();
    header.extend(CATEGORIES.iter().map(|c| format!("{}_pct", c.replace(' ', "_"))));
    w.write_record(&header).map_err(|e| CliError::Other(e.to_string()))?;
    for e in evals {
        let pct = breakdown_percentages(&e.aggregate.error_breakdown);
        for row in score_rows(&e.aggregate) {
            let mut cells = row.to_vec();
            cells.extend(pct.iter().map(|p| format!("{p:.2}")));
            w.write_record(&cells).map_err(|e| CliError::Other(e.to_string()))?;
        }
    }
    String::from_utf8(w.into_inner().map_err(|e| CliError::Other(e.to_string()))?).map_err(|e| CliError::Other(e.to_string()))
}

/// Per-record rows for one evaluation.
pub fn csv_records(e: &Evaluation) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = |e: csv::Error| CliError::Other(e.to_string());
    w.write_record(["class_uri", "label", "model", "setting", "status", "criteria", "precision", "recall", "f1", "ged", "nged"]).map_err(err)?;
    for r in &e.records {
        let base = [r.class_uri.to_string(), r.label.clone(), r.model.clone(), r.setting.clone(), format!("{:?}", r.status).to_uppercase()];
        let tail = [r.ged.map(|g| g.to_string()).unwrap_or_default(), r.nged.map(|n| format!("{n:.6}")).unwrap_or_default()];
        if r.reports.is_empty() {
            let mut row = base.to_vec();
            row.extend(["".into(), "".into(), "".into(), "".into()]);
            row.extend(tail.iter().cloned());
            w.write_record(&row).map_err(err)?;
        }
        for rep in &r.reports {
            let mut row = base.to_vec();
            row.extend([rep.criteria.to_string(), format!("{:.6}", rep.precision), format!("{:.6}", rep.recall), format!("{:.6}", rep.f1)]);
            row.extend(tail.iter().cloned());
            w.write_record(&row).map_err(err)?;
        }
    }
    String::from_utf8(w.into_inner().map_err(|e| CliError::Other(e.to_string()))?).map_err(|e| CliError::Other(e.to_string()))
}

/// Per-record lines followed by the aggregate grid.
pub fn markdown_evaluation(e: &Evaluation) -> String {
    let mut out = String::new();
    let a = &e.aggregate;
    let _ = writeln!(out, "# {} / {} (N={})\n", a.model, a.setting, a.n);
    let first = a.criteria.first().map(|c| format!("F1 {}", c.criteria)).unwrap_or_else(|| "F1".into());
    out.push_str(&md_header(&["class", "status", &first, "GED", "NGED"]));
    for r in &e.records {
        let f1 = r.reports.first().map(|x| format!("{:.3}", x.f1)).unwrap_or_else(|| "-".into());
        out.push_str(&md_row(&[
            r.label.clone(),
            format!("{:?}", r.status).to_uppercase(),
            f1,
            r.ged.map_or_else(|| "-".into(), |g| g.to_string()),
            opt(r.nged, 3),
        ]));
    }
    out.push('\n');
    out.push_str(&markdown_report(std::slice::from_ref(e)));
    out
}

pub fn load_evaluations(paths: &[PathBuf]) -> Result<Vec<Evaluation>, CliError> {
    if paths.is_empty() {
        return Err(CliError::Config("no result files given".into()));
    }
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))
        })
        .collect()
}

pub fn cmd_report(paths: &[PathBuf], format: Format) -> Result<String, CliError> {
    let evals = load_evaluations(paths)?;
    match format {
        Format::Md => Ok(markdown_report(&evals)),
        Format::Csv => csv_report(&evals),
        Format::Json => Ok(crate::outcome::to_json(&evals.iter().map(|e| &e.aggregate).collect::<Vec<_>>())),
    }
}
