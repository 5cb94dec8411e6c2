//! Report files: JSON-lines records, CSV summary, SVG boxplot.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use hrs_core::eval::{BaselineRecord, Method, MethodResult};
use serde::Serialize;

use crate::error::{Result, SimError};
use crate::pipeline::Evaluation;

pub const CSV_COLUMNS: [&str; 6] = ["scenario", "val_top1", "test_top1", "test_top3", "test_top5", "relative_rate"];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub val_top1: Option<f64>,
    pub test_top1: f64,
    pub test_top3: f64,
    pub test_top5: f64,
    pub relative_rate: Option<f64>,
}

impl SummaryRow {
    pub fn from_evaluation(ev: &Evaluation) -> Self {
        SummaryRow {
            scenario: ev.scenario.clone(),
            val_top1: ev.report.val_top1.last().copied(),
            test_top1: ev.report.test_top1,
            test_top3: ev.report.test_top3,
            test_top5: ev.report.test_top5,
            relative_rate: ev.relative_rate,
        }
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| SimError::io(path, e))
}

#[derive(Serialize)]
struct JsonRecord<'a> {
    scenario: &'a str,
    #[serde(flatten)]
    record: &'a BaselineRecord,
}

pub fn records_jsonl(scenario: &str, records: &[BaselineRecord]) -> String {
    let mut out = String::new();
    for record in records {
        out.push_str(&serde_json::to_string(&JsonRecord { scenario, record }).expect("records serialize"));
        out.push('\n');
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.6},{:.6},{}",
            r.scenario,
            opt(r.val_top1),
            r.test_top1,
            r.test_top3,
            r.test_top5,
            opt(r.relative_rate)
        );
    }
    out
}

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 320.0;
const MARGIN: f64 = 48.0;

/// Boxplot of per-sample sum rates, one group per method in
/// HC, NN, UNI, SING order. Whiskers span `[p1, p99]`.
pub fn boxplot_svg(title: &str, results: &[MethodResult]) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let _ = writeln!(
        svg,
        r#"<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{}" stroke="black"/>"#,
        MARGIN + plot_h
    );

    let ordered: Vec<&MethodResult> =
        Method::ALL.iter().filter_map(|m| results.iter().find(|r| r.method == *m)).collect();
    let top = ordered
        .iter()
        .flat_map(|r| r.rates.iter().copied())
        .fold(0.0f64, f64::max)
        .max(1e-9);
    let y = |v: f64| MARGIN + plot_h * (1.0 - v / top);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="end" font-size="10">{top:.2}</text>"#,
        MARGIN - 4.0,
        MARGIN + 4.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="end" font-size="10">0</text>"#,
        MARGIN - 4.0,
        MARGIN + plot_h
    );

    let slot = (WIDTH - 2.0 * MARGIN) / Method::ALL.len() as f64;
    for (i, r) in ordered.iter().enumerate() {
        let s = &r.summary;
        let cx = MARGIN + slot * (i as f64 + 0.5);
        let half = slot * 0.25;
        let _ = writeln!(svg, r#"<g class="box" data-method="{}">"#, r.method);
        let _ = writeln!(svg, r#"<line x1="{cx}" y1="{:.2}" x2="{cx}" y2="{:.2}" stroke="black"/>"#, y(s.p99), y(s.p75));
        let _ = writeln!(svg, r#"<line x1="{cx}" y1="{:.2}" x2="{cx}" y2="{:.2}" stroke="black"/>"#, y(s.p25), y(s.p1));
        for v in [s.p1, s.p99] {
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black"/>"#,
                cx - half / 2.0,
                y(v),
                cx + half / 2.0,
                y(v)
            );
        }
        let _ = writeln!(
            svg,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="blue"/>"#,
            cx - half,
            y(s.p75),
            2.0 * half,
            (y(s.p25) - y(s.p75)).max(0.0)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="black" stroke-width="2"/>"#,
            cx - half,
            y(s.median),
            cx + half,
            y(s.median)
        );
        for &v in &s.outliers {
            let _ = writeln!(svg, r#"<circle cx="{cx}" cy="{:.2}" r="2" fill="none" stroke="red"/>"#, y(v));
        }
        let _ = writeln!(
            svg,
            r#"<text x="{cx}" y="{}" text-anchor="middle" font-size="12">{}</text>"#,
            HEIGHT - MARGIN / 2.0,
            r.method
        );
        svg.push_str("</g>\n");
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `records.jsonl`, `summary.csv` and `boxplot.svg` into `dir`.
pub fn write_evaluation(dir: &Path, ev: &Evaluation) -> Result<()> {
    write(&dir.join("records.jsonl"), &records_jsonl(&ev.scenario, &ev.records))?;
    write(&dir.join("summary.csv"), &summary_csv(&[SummaryRow::from_evaluation(ev)]))?;
    write(&dir.join("boxplot.svg"), &boxplot_svg(&ev.scenario, &ev.results))
}

/// Writes a multi-scenario summary plus one boxplot and record file per
/// scenario.
pub fn write_sweep(dir: &Path, evals: &[Evaluation]) -> Result<()> {
    let rows: Vec<SummaryRow> = evals.iter().map(SummaryRow::from_evaluation).collect();
    write(&dir.join("summary.csv"), &summary_csv(&rows))?;
    for ev in evals {
        write(&dir.join(format!("{}.records.jsonl", ev.scenario)), &records_jsonl(&ev.scenario, &ev.records))?;
        write(&dir.join(format!("{}.boxplot.svg", ev.scenario)), &boxplot_svg(&ev.scenario, &ev.results))?;
    }
    Ok(())
}

/// Plain-text per-method table for the terminal.
pub fn method_table(ev: &Evaluation) -> String {
    let mut out = format!("{:<6}{:>10}{:>10}{:>10}{:>10}{:>10}\n", "method", "p1", "p25", "median", "p75", "p99");
    for r in &ev.results {
        let s = &r.summary;
        let _ = writeln!(
            out,
            "{:<6}{:>10.3}{:>10.3}{:>10.3}{:>10.3}{:>10.3}",
            r.method.name(),
            s.p1,
            s.p25,
            s.median,
            s.p75,
            s.p99
        );
    }
    if let Some(rel) = ev.relative_rate {
        let _ = writeln!(out, "relative rate (NN/HC): {rel:.4}");
    }
    out
}
