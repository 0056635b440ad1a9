//! Report serialization: CSV rows, a JSON summary and SVG heatmaps of `(α, λ)` surfaces.
//!
//! CSV numbers are written in scientific notation with 17 significant digits, which
//! round-trips every `f64`. Missing bounds and unasserted pass flags are empty fields.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::experiments::{AlphaLambdaSurface, Check, ExperimentReport, GroupSummary};

pub const CSV_HEADER: [&str; 10] = [
    "experiment",
    "variant",
    "param",
    "reset",
    "alpha",
    "theta",
    "trial",
    "measured",
    "bound",
    "pass",
];

pub fn format_f64(x: f64) -> String {
    if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn format_alpha(alpha: crate::Leak) -> String {
    if alpha.is_finite() {
        format_f64(alpha.rate())
    } else {
        "inf".to_string()
    }
}

pub fn write_csv<W: Write>(report: &ExperimentReport, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &report.records {
        w.write_record([
            r.experiment.to_string(),
            r.variant.clone(),
            format_f64(r.param),
            r.reset.to_string(),
            format_alpha(r.alpha),
            format_f64(r.theta),
            r.trial.to_string(),
            format_f64(r.measured),
            r.bound.map(format_f64).unwrap_or_default(),
            r.pass.map(|p| p.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(report: &ExperimentReport) -> String {
    let mut buf = Vec::new();
    write_csv(report, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv output is utf-8")
}

#[derive(Debug, Serialize)]
pub struct ReportSummary<'a> {
    pub experiment: &'a str,
    pub rows: usize,
    pub asserted: usize,
    pub failed: usize,
    pub all_passed: bool,
    pub checks: &'a [Check],
    pub groups: Vec<GroupSummary>,
}

pub fn summarize(report: &ExperimentReport) -> ReportSummary<'_> {
    ReportSummary {
        experiment: report.name,
        rows: report.records.len(),
        asserted: report.records.iter().filter(|r| r.pass.is_some()).count(),
        failed: report.failed_records().count(),
        all_passed: report.all_passed(),
        checks: &report.checks,
        groups: report.summaries(),
    }
}

pub fn summary_json(report: &ExperimentReport) -> String {
    serde_json::to_string_pretty(&summarize(report)).expect("summary is serializable")
}

fn lerp(a: (u8, u8, u8), b: (u8, u8, u8), t: f64) -> String {
    let mix = |x: u8, y: u8| (x as f64 + (y as f64 - x as f64) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(a.0, b.0),
        mix(a.1, b.1),
        mix(a.2, b.2)
    )
}

/// Heatmap of `surface.measured` with `α` growing upwards and `λ` to the right.
pub fn heatmap_svg(surface: &AlphaLambdaSurface) -> String {
    const CELL: usize = 12;
    const MARGIN: usize = 48;
    let rows = surface.alphas.len();
    let cols = surface.lambdas.len();
    let lo = surface
        .measured
        .iter()
        .flatten()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let hi = surface
        .measured
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (w, h) = (cols * CELL + 2 * MARGIN, rows * CELL + 2 * MARGIN);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="10">"#
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, surface.label);
    for (i, row) in surface.measured.iter().enumerate() {
        let y = MARGIN + (rows - 1 - i) * CELL;
        for (j, &v) in row.iter().enumerate() {
            let x = MARGIN + j * CELL;
            let fill = lerp((0x1b, 0x1f, 0x5c), (0xf6, 0xd3, 0x2d), (v - lo) / span);
            let _ = writeln!(
                s,
                r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}"><title>alpha={} lambda={} value={v}</title></rect>"#,
                surface.alphas[i], surface.lambdas[j]
            );
        }
    }
    let bottom = MARGIN + rows * CELL;
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">lambda</text>"#,
        MARGIN + cols * CELL / 2,
        bottom + 28
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" transform="rotate(-90 14 {0})" text-anchor="middle">alpha</text>"#,
        MARGIN + rows * CELL / 2
    );
    if let (Some(first), Some(last)) = (surface.lambdas.first(), surface.lambdas.last()) {
        let _ = writeln!(
            s,
            r#"<text x="{MARGIN}" y="{}">{first}</text>"#,
            bottom + 12
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{last}</text>"#,
            MARGIN + cols * CELL,
            bottom + 12
        );
    }
    if let (Some(first), Some(last)) = (surface.alphas.first(), surface.alphas.last()) {
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{bottom}" text-anchor="end">{first}</text>"#,
            MARGIN - 4
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="end">{last}</text>"#,
            MARGIN - 4,
            MARGIN + 10
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{MARGIN}" y="{}">range [{lo}, {hi}]</text>"#,
        MARGIN - 12
    );
    s.push_str("</svg>\n");
    s
}

/// Writes `<name>.csv`, `<name>_summary.json` and, if requested, one SVG per surface into `dir`.
pub fn write_report(
    report: &ExperimentReport,
    dir: &Path,
    svg: bool,
) -> std::io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let csv_path = dir.join(format!("{}.csv", report.name));
    fs::write(&csv_path, csv_string(report))?;
    written.push(csv_path);
    let json_path = dir.join(format!("{}_summary.json", report.name));
    fs::write(&json_path, summary_json(report) + "\n")?;
    written.push(json_path);
    if svg {
        for surface in &report.surfaces {
            let path = dir.join(format!("{}_{}.svg", report.name, surface.label));
            fs::write(&path, heatmap_svg(surface))?;
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::TrialRecord;
    use crate::{Leak, ResetMode};

    fn report() -> ExperimentReport {
        let row = |trial, pass: Option<bool>| TrialRecord {
            experiment: "demo",
            variant: "v".into(),
            param: 0.1,
            reset: ResetMode::ToMod,
            alpha: Leak::Infinite,
            theta: 1.0,
            trial,
            measured: 1.0 / 3.0,
            bound: pass.map(|_| 1.0),
            pass,
        };
        ExperimentReport {
            name: "demo",
            records: vec![row(0, Some(true)), row(1, None)],
            checks: vec![],
            surfaces: vec![],
        }
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 12345.678901234567, 0.0] {
            assert_eq!(format_f64(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(format_f64(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn csv_layout() {
        let text = csv_string(&report());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert_eq!(
            lines[1],
            "demo,v,1.0000000000000001e-1,mod,inf,1.0000000000000000e0,0,3.3333333333333331e-1,1.0000000000000000e0,true"
        );
        assert!(lines[2].ends_with("3.3333333333333331e-1,,"));
    }

    #[test]
    fn summary_counts() {
        let r = report();
        let s = summarize(&r);
        assert_eq!(
            (s.rows, s.asserted, s.failed, s.all_passed),
            (2, 1, 0, true)
        );
        assert!(summary_json(&report()).contains("\"groups\""));
    }

    #[test]
    fn svg_has_one_cell_per_entry() {
        let surface = AlphaLambdaSurface {
            label: "t".into(),
            alphas: vec![Leak::ZERO, Leak::Finite(1.0)],
            lambdas: vec![0.0, 0.5, 1.0],
            measured: vec![vec![0.0, 1.0, 2.0], vec![0.0, 0.5, 1.0]],
            bound: vec![vec![0.0; 3]; 2],
        };
        let svg = heatmap_svg(&surface);
        assert_eq!(svg.matches("<rect").count(), 6);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
}
