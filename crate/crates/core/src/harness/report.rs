use std::fmt::Write as _;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::{GateTrial, MatrixReport, MatrixRow};
use crate::corpus::{DatasetSplit, Taxonomy};
use crate::error::{Error, Result};
use crate::metrics::EvalReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

pub fn write_report_csv<W: Write>(rows: &[MatrixRow], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    if rows.is_empty() {
        writer.write_record(HEADER)?;
    }
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|e| Error::io("<report>", e))?;
    Ok(())
}

const HEADER: [&str; 12] = [
    "experiment",
    "exp_type",
    "train_spec",
    "target_test",
    "precision",
    "recall",
    "f1",
    "auc",
    "train_size",
    "test_size",
    "test_set_digest",
    "error",
];

pub fn read_report_csv<R: Read>(input: R) -> Result<Vec<MatrixRow>> {
    let mut reader = csv::Reader::from_reader(input);
    let headers = reader.headers()?.clone();
    if headers.iter().ne(HEADER) {
        return Err(Error::Data(format!(
            "report header must be {}",
            HEADER.join(",")
        )));
    }
    reader
        .deserialize()
        .enumerate()
        .map(|(i, row)| row.map_err(|e| Error::Data(format!("report row {}: {e}", i + 2))))
        .collect()
}

fn cell(value: Option<f64>) -> String {
    value.map_or_else(|| "n/a".to_string(), |v| format!("{v:.2}"))
}

/// One table per target, in order of first appearance.
pub fn render_markdown(rows: &[MatrixRow]) -> String {
    let mut targets: Vec<&str> = Vec::new();
    for row in rows {
        if !targets.contains(&row.target()) {
            targets.push(row.target());
        }
    }
    let mut out = String::new();
    for (i, target) in targets.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "### Target: {target}\n");
        out.push_str(
            "| Exp. Type | Source(s): Train set (size) | Target: Test set (size) | Precision | Recall | F-measure | AUC |\n",
        );
        out.push_str("|---|---|---|---|---|---|---|\n");
        for row in rows.iter().filter(|r| r.target() == *target) {
            let train = match row.train_size {
                Some(n) => format!("{} [{n}]", row.train_spec),
                None => row.train_spec.clone(),
            };
            let _ = write!(
                out,
                "| {} | {} | {} [{}] | {} | {} | {} | {} |",
                row.exp_type,
                train.replace('|', "\\|"),
                row.target_test,
                row.test_size,
                cell(row.precision),
                cell(row.recall),
                cell(row.f1),
                cell(row.auc),
            );
            if let Some(err) = &row.error {
                let _ = write!(out, " error: {}", err.replace('|', "\\|").replace('\n', " "));
            }
            out.push('\n');
        }
    }
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `experiment,class,support,precision,recall,f1,auc,flags`, with
/// `macro_avg` and `weighted_avg` rows after each experiment's classes.
pub fn write_per_class_csv<W: Write>(
    report: &MatrixReport,
    taxonomy: &Taxonomy,
    out: W,
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["experiment", "class", "support", "precision", "recall", "f1", "auc", "flags"])?;
    for (row, eval) in report.rows.iter().zip(&report.evaluations) {
        let Some(eval) = eval else { continue };
        write_eval(&mut writer, &row.experiment, eval, taxonomy)?;
    }
    writer.flush().map_err(|e| Error::io("<per-class report>", e))?;
    Ok(())
}

fn write_eval<W: Write>(
    writer: &mut csv::Writer<W>,
    experiment: &str,
    eval: &EvalReport,
    taxonomy: &Taxonomy,
) -> Result<()> {
    for (class, report) in eval.per_class.iter().enumerate() {
        let s = &report.scores;
        writer.write_record([
            experiment.to_string(),
            taxonomy.name(class).to_string(),
            s.support.to_string(),
            s.precision.to_string(),
            s.recall.to_string(),
            s.f1.to_string(),
            fmt_opt(report.auc),
            report.flags().join(";"),
        ])?;
    }
    let total = eval.count.to_string();
    for (name, avg, auc) in [
        ("macro_avg", &eval.macro_avg, None),
        ("weighted_avg", &eval.weighted, Some(eval.weighted_auc)),
    ] {
        writer.write_record([
            experiment.to_string(),
            name.to_string(),
            total.clone(),
            avg.precision.to_string(),
            avg.recall.to_string(),
            avg.f1.to_string(),
            fmt_opt(auc),
            String::new(),
        ])?;
    }
    Ok(())
}

pub fn write_gate_audit_csv<W: Write>(trials: &[GateTrial], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record([
        "experiment",
        "target",
        "step",
        "candidate",
        "base_auc",
        "candidate_auc",
        "delta",
        "accepted",
    ])?;
    for t in trials {
        writer.write_record([
            t.experiment.clone(),
            t.target.clone(),
            t.step.to_string(),
            t.candidate.clone(),
            t.base_auc.to_string(),
            t.candidate_auc.to_string(),
            t.delta.to_string(),
            t.accepted.to_string(),
        ])?;
    }
    writer.flush().map_err(|e| Error::io("<gate audit>", e))?;
    Ok(())
}

pub fn write_splits_json<W: Write>(splits: &[DatasetSplit], out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, splits)?;
    Ok(())
}

/// Writes `report.csv` or `report.md` to `path`.
pub fn emit_report(rows: &[MatrixRow], format: ReportFormat, path: &Path) -> Result<()> {
    let bytes = match format {
        ReportFormat::Csv => {
            let mut buf = Vec::new();
            write_report_csv(rows, &mut buf)?;
            buf
        }
        ReportFormat::Markdown => render_markdown(rows).into_bytes(),
    };
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Renders all five outputs in memory, then writes them into `dir`.
pub fn write_outputs(dir: &Path, report: &MatrixReport, taxonomy: &Taxonomy, splits: &[DatasetSplit]) -> Result<()> {
    let mut files: Vec<(&str, Vec<u8>)> = Vec::new();
    let mut buf = Vec::new();
    write_report_csv(&report.rows, &mut buf)?;
    files.push(("report.csv", buf));
    files.push(("report.md", render_markdown(&report.rows).into_bytes()));
    let mut buf = Vec::new();
    write_per_class_csv(report, taxonomy, &mut buf)?;
    files.push(("per_class.csv", buf));
    let mut buf = Vec::new();
    write_gate_audit_csv(&report.gate_audit, &mut buf)?;
    files.push(("gate_audit.csv", buf));
    let mut buf = Vec::new();
    write_splits_json(splits, &mut buf)?;
    files.push(("splits.json", buf));

    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (name, bytes) in files {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
