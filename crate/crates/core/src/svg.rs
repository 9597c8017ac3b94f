//! SVG plots for Bland-Altman and deviation-from-reference reports, plus
//! the plain CSV behind the Bland-Altman scatter.
//!
//! The Bland-Altman plot uses `<line>` only for its three horizontal rules
//! (mean difference and both limits). Axes are a `<path>`.

use std::fmt::Write as _;
use std::path::Path;

use crate::accuracy::DeviationReport;
use crate::agreement::BlandAltmanReport;
use crate::error::{Error, Result};

pub const WIDTH: f64 = 640.0;
pub const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 610.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 420.0;
const TICKS: usize = 5;

/// Linear map from a data range onto a pixel range.
#[derive(Debug, Clone, Copy)]
struct Scale {
    lo: f64,
    hi: f64,
    from: f64,
    to: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, from: f64, to: f64) -> Self {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
        Scale { lo, hi, from, to }
    }

    fn padded(min: f64, max: f64, from: f64, to: f64) -> Self {
        let pad = 0.05 * (max - min);
        Scale::new(min - pad, max + pad, from, to)
    }

    fn at(&self, v: f64) -> f64 {
        self.from + (v - self.lo) / (self.hi - self.lo) * (self.to - self.from)
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<title>{}</title>
<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<path class="axes" d="M{LEFT} {TOP} V{BOTTOM} H{RIGHT}" fill="none" stroke="black"/>"#,
        escape(title)
    );
}

fn ticks(out: &mut String, x: Scale, y: Scale) {
    for i in 0..TICKS {
        let t = i as f64 / (TICKS - 1) as f64;
        let xv = x.lo + t * (x.hi - x.lo);
        let yv = y.lo + t * (y.hi - y.lo);
        let px = x.at(xv);
        let py = y.at(yv);
        let _ = writeln!(
            out,
            r#"<path class="tick" d="M{px:.2} {BOTTOM} v5 M{LEFT} {py:.2} h-5" stroke="black"/>
<text x="{px:.2}" y="{:.2}" text-anchor="middle">{xv:.1}</text>
<text x="{:.2}" y="{:.2}" text-anchor="end">{yv:.1}</text>"#,
            BOTTOM + 18.0,
            LEFT - 8.0,
            py + 4.0
        );
    }
}

fn axis_labels(out: &mut String, x_label: &str, y_label: &str) {
    let cx = (LEFT + RIGHT) / 2.0;
    let cy = (TOP + BOTTOM) / 2.0;
    let _ = writeln!(
        out,
        r#"<text class="x-label" x="{cx}" y="{}" text-anchor="middle">{}</text>
<text class="y-label" x="18" y="{cy}" text-anchor="middle" transform="rotate(-90 18 {cy})">{}</text>"#,
        HEIGHT - 20.0,
        escape(x_label),
        escape(y_label)
    );
}

/// Scatter of `(pair_mean, difference)` with rules at `d_bar` and
/// `d_bar -/+ k * s_d`.
pub fn bland_altman_svg(report: &BlandAltmanReport) -> Result<String> {
    if report.points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let xs = report.points.iter().map(|p| p.pair_mean);
    let (x_min, x_max) = min_max(xs);
    let ys = report
        .points
        .iter()
        .map(|p| p.difference)
        .chain([report.lower, report.upper, report.d_bar]);
    let (y_min, y_max) = min_max(ys);
    let x = Scale::padded(x_min, x_max, LEFT, RIGHT);
    let y = Scale::padded(y_min, y_max, BOTTOM, TOP);

    let (a, b) = (&report.instrument_a, &report.instrument_b);
    let mut out = String::new();
    header(&mut out, &format!("Bland-Altman plot: {a} vs {b}"));
    ticks(&mut out, x, y);
    axis_labels(
        &mut out,
        &format!("Mean of {a} and {b}"),
        &format!("Difference ({a} - {b})"),
    );
    let rules = [
        ("lower-limit", report.lower, format!("-{} SD: {:.2}", report.k, report.lower), "4 3"),
        ("mean-difference", report.d_bar, format!("mean: {:.2}", report.d_bar), "none"),
        ("upper-limit", report.upper, format!("+{} SD: {:.2}", report.k, report.upper), "4 3"),
    ];
    for (class, v, label, dash) in rules {
        let py = y.at(v);
        let _ = writeln!(
            out,
            r#"<line class="{class}" x1="{LEFT}" y1="{py:.2}" x2="{RIGHT}" y2="{py:.2}" stroke="gray" stroke-dasharray="{dash}"/>
<text x="{:.2}" y="{:.2}" text-anchor="end" fill="gray">{}</text>"#,
            RIGHT - 2.0,
            py - 4.0,
            escape(&label)
        );
    }
    for p in &report.points {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"><title>{}</title></circle>"#,
            x.at(p.pair_mean),
            y.at(p.difference),
            escape(&p.object_id)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Scatter of `(true, measured)` on `[0, 100]` axes with the `y = x`
/// diagonal. Points outside the range are drawn at the border.
pub fn deviation_svg(report: &DeviationReport) -> Result<String> {
    if report.points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let x = Scale::new(0.0, 100.0, LEFT, RIGHT);
    let y = Scale::new(0.0, 100.0, BOTTOM, TOP);
    let mut out = String::new();
    header(&mut out, "Deviations from reference value");
    ticks(&mut out, x, y);
    axis_labels(&mut out, "True value", "Measured value");
    let _ = writeln!(
        out,
        r#"<path class="diagonal" d="M{:.2} {:.2} L{:.2} {:.2}" stroke="gray" fill="none"/>"#,
        x.at(0.0),
        y.at(0.0),
        x.at(100.0),
        y.at(100.0)
    );
    for p in &report.points {
        let _ = writeln!(
            out,
            r#"<circle class="{:?}" cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"><title>{}</title></circle>"#,
            p.side,
            x.at(p.true_value.clamp(0.0, 100.0)),
            y.at(p.measured_value.clamp(0.0, 100.0)),
            escape(&p.object_id)
        );
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// `pair_mean,difference,object_id` rows in report order.
pub fn bland_altman_plot_csv(report: &BlandAltmanReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["pair_mean", "difference", "object_id"])
        .map_err(csv_err)?;
    for p in &report.points {
        w.write_record([
            format!("{:?}", p.pair_mean),
            format!("{:?}", p.difference),
            p.object_id.clone(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv writer emits utf-8 from utf-8 input"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.into())
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)?;
    Ok(())
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}
