//! CSV, SVG and JSON output for one or more comparison reports.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::compare::ComparisonReport;
use crate::error::{MetricsError, Result};

pub const CSV_NAME: &str = "lsd.csv";
pub const SVG_NAME: &str = "lsd.svg";
pub const JSON_NAME: &str = "report.json";

const WIDTH: f64 = 1000.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 780.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 530.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportFiles {
    pub csv: PathBuf,
    pub svg: PathBuf,
    pub json: PathBuf,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn check_grids(reports: &[ComparisonReport]) -> Result<&[f64]> {
    let first = reports.first().ok_or(MetricsError::Empty("report"))?;
    let freqs = &first.lsd.frequencies;
    if reports.iter().any(|r| &r.lsd.frequencies != freqs) {
        return Err(MetricsError::GridMismatch("reports use different frequency grids".into()));
    }
    Ok(freqs)
}

/// Frequency column plus one LSD column per report. NaN cells are empty.
pub fn lsd_csv(reports: &[ComparisonReport]) -> Result<String> {
    let freqs = check_grids(reports)?;
    let mut out = String::from("frequency_hz");
    for r in reports {
        out.push(',');
        out.push_str(&csv_field(&r.label()));
    }
    out.push('\n');
    for (i, f) in freqs.iter().enumerate() {
        write!(out, "{f}").unwrap();
        for r in reports {
            let v = r.lsd.lsd_db[i];
            out.push(',');
            if !v.is_nan() {
                write!(out, "{v}").unwrap();
            }
        }
        out.push('\n');
    }
    Ok(out)
}

/// 1, 2 and 5 times powers of ten inside `[lo, hi]`.
fn log_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let mut ticks = Vec::new();
    let mut decade = 10f64.powi(lo.log10().floor() as i32);
    while decade <= hi {
        for m in [1.0, 2.0, 5.0] {
            let t = m * decade;
            if t >= lo * (1.0 - 1e-9) && t <= hi * (1.0 + 1e-9) {
                ticks.push(t);
            }
        }
        decade *= 10.0;
    }
    ticks
}

fn tick_label(f: f64) -> String {
    if f >= 1000.0 {
        format!("{}k", f / 1000.0)
    } else {
        format!("{f}")
    }
}

/// Line chart of LSD against log frequency, one polyline per report.
pub fn lsd_svg(reports: &[ComparisonReport]) -> Result<String> {
    let freqs = check_grids(reports)?;
    let positive: Vec<f64> = freqs.iter().copied().filter(|&f| f > 0.0).collect();
    let (mut f_lo, mut f_hi) = match (positive.first(), positive.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => (20.0, 20000.0),
    };
    if f_hi <= f_lo {
        f_lo /= 2.0;
        f_hi *= 2.0;
    }
    let peak = reports
        .iter()
        .flat_map(|r| r.lsd.lsd_db.iter().copied())
        .filter(|v| v.is_finite())
        .fold(0.0f64, f64::max);
    let y_max = peak.ceil().max(1.0);
    let x = |f: f64| LEFT + (RIGHT - LEFT) * (f.ln() - f_lo.ln()) / (f_hi.ln() - f_lo.ln());
    let y = |v: f64| BOTTOM - (BOTTOM - TOP) * v / y_max;

    let mut s = String::new();
    writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r##"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##).unwrap();
    writeln!(s, r##"<rect x="{LEFT}" y="{TOP}" width="{}" height="{}" fill="none" stroke="#000000"/>"##, RIGHT - LEFT, BOTTOM - TOP).unwrap();

    for t in log_ticks(f_lo, f_hi) {
        let px = x(t);
        writeln!(s, r##"<line x1="{px:.2}" y1="{TOP}" x2="{px:.2}" y2="{BOTTOM}" stroke="#dddddd"/>"##).unwrap();
        writeln!(s, r#"<text x="{px:.2}" y="{}" text-anchor="middle">{}</text>"#, BOTTOM + 18.0, tick_label(t)).unwrap();
    }
    let step = if y_max <= 10.0 { 1.0 } else { (y_max / 10.0).ceil() };
    let mut v = 0.0;
    while v <= y_max + 1e-9 {
        let py = y(v);
        writeln!(s, r##"<line x1="{LEFT}" y1="{py:.2}" x2="{RIGHT}" y2="{py:.2}" stroke="#dddddd"/>"##).unwrap();
        writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{v}</text>"#, LEFT - 8.0, py + 4.0).unwrap();
        v += step;
    }
    writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">Frequency (Hz)</text>"#, 0.5 * (LEFT + RIGHT), HEIGHT - 20.0).unwrap();
    writeln!(
        s,
        r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">LSD (dB)</text>"#,
        0.5 * (TOP + BOTTOM)
    )
    .unwrap();

    for (i, r) in reports.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = freqs
            .iter()
            .zip(&r.lsd.lsd_db)
            .filter(|(f, v)| **f > 0.0 && v.is_finite())
            .map(|(&f, &v)| format!("{:.2},{:.2}", x(f), y(v)))
            .collect();
        writeln!(s, r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#, points.join(" ")).unwrap();
        let ly = TOP + 10.0 + 20.0 * i as f64;
        writeln!(s, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/>"#, RIGHT + 20.0, RIGHT + 50.0).unwrap();
        writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, RIGHT + 58.0, ly + 4.0, xml_escape(&r.label())).unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| MetricsError::Io { path: path.display().to_string(), source })
}

/// Writes `lsd.csv`, `lsd.svg` and `report.json` into `out_dir`, creating it if needed.
pub fn emit_report(reports: &[ComparisonReport], out_dir: impl AsRef<Path>) -> Result<ReportFiles> {
    let dir = out_dir.as_ref();
    let csv = lsd_csv(reports)?;
    let svg = lsd_svg(reports)?;
    let mut json = serde_json::to_string_pretty(reports)?;
    json.push('\n');
    std::fs::create_dir_all(dir).map_err(|source| MetricsError::Io { path: dir.display().to_string(), source })?;
    let files = ReportFiles { csv: dir.join(CSV_NAME), svg: dir.join(SVG_NAME), json: dir.join(JSON_NAME) };
    write(&files.csv, &csv)?;
    write(&files.svg, &svg)?;
    write(&files.json, &json)?;
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compare::{ComparisonReport, ReportMetadata};
    use crate::cues::ItdMethod;
    use crate::lsd::LsdCurve;

    fn report(label: &str, value: f64) -> ComparisonReport {
        let frequencies: Vec<f64> = (1..=16).map(|i| 1000.0 * i as f64).collect();
        ComparisonReport {
            metadata: ReportMetadata {
                subject_id: None,
                test_source: label.into(),
                reference_source: "measured".into(),
                direction_weighting: "uniform".into(),
                lsd_band: (200.0, 15000.0),
                ild_band: (200.0, 15000.0),
                itd_method: ItdMethod::CrossCorrelation,
                itd_lowpass_hz: 3000.0,
                frequency_bins: 16,
                matched_directions: 1,
                dropped_test_directions: 0,
                dropped_reference_directions: 0,
            },
            lsd: LsdCurve {
                lsd_db: vec![value; frequencies.len()],
                per_direction: vec![vec![value; frequencies.len()]],
                frequencies,
                summary_db: value,
                band: (200.0, 15000.0),
                excluded_bins: 0,
            },
            directions: Vec::new(),
            itd_delta_s: None,
            ild_delta_db: None,
        }
    }

    #[test]
    fn two_constant_curves_two_polylines() {
        let svg = lsd_svg(&[report("PR", 3.0), report("3D", 6.0)]).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("Frequency (Hz)"));
        assert!(svg.contains("LSD (dB)"));
        assert!(svg.contains(r#"viewBox="0 0 1000 600""#));
        // Legend swatches are plain lines.
        assert!(svg.contains(r##"stroke="#1f77b4" stroke-width="2""##));
    }

    #[test]
    fn csv_shape_and_quoting() {
        let csv = lsd_csv(&[report("PR, left", 3.0), report("say \"hi\"", 6.0)]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 17);
        assert_eq!(lines[0], r#"frequency_hz,"PR, left","say ""hi""""#);
        assert_eq!(lines[1], "1000,3,6");
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn labels_are_escaped_in_svg() {
        let svg = lsd_svg(&[report("a<b & c", 1.0)]).unwrap();
        assert!(svg.contains("a&lt;b &amp; c"));
    }

    #[test]
    fn nan_cells_are_blank_and_skipped() {
        let mut r = report("x", 2.0);
        r.lsd.lsd_db[1] = f64::NAN;
        let csv = lsd_csv(&[r.clone()]).unwrap();
        assert_eq!(csv.lines().nth(2).unwrap(), "2000,");
        let svg = lsd_svg(&[r]).unwrap();
        let pts = svg.split("points=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(pts.split(' ').count(), 15);
    }

    #[test]
    fn emitted_files_are_reproducible_and_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut r = report("PR", 4.0);
        r.metadata.subject_id = Some("P0042".into());
        r.lsd.per_direction[0][0] = f64::NAN;
        let reports = vec![r];
        let a = emit_report(&reports, dir.path().join("one")).unwrap();
        let b = emit_report(&reports, dir.path().join("two")).unwrap();
        for (x, y) in [(&a.csv, &b.csv), (&a.svg, &b.svg), (&a.json, &b.json)] {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        }
        let back = crate::compare::load_reports(&a.json).unwrap();
        assert_eq!(back[0].metadata, reports[0].metadata);
        assert!(back[0].lsd.per_direction[0][0].is_nan());
        assert_eq!(back[0].lsd.lsd_db, reports[0].lsd.lsd_db);
    }

    #[test]
    fn mismatched_grids_and_empty_input_rejected() {
        let mut b = report("b", 1.0);
        b.lsd.frequencies[0] = 999.0;
        assert!(matches!(lsd_csv(&[report("a", 1.0), b]), Err(MetricsError::GridMismatch(_))));
        assert!(matches!(lsd_svg(&[]), Err(MetricsError::Empty(_))));
    }
}
