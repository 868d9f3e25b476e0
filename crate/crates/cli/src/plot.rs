//! Self-contained SVG line plots of CSV columns.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{usage, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const TICKS: usize = 5;

#[derive(Clone, Debug, Default)]
pub struct PlotSpec {
    pub x: String,
    pub y: String,
    pub log_x: bool,
    pub log_y: bool,
    /// Lower and upper error-bar columns, used when present.
    pub lo: String,
    pub hi: String,
}

impl PlotSpec {
    pub fn new(x: &str, y: &str) -> Self {
        PlotSpec {
            x: x.into(),
            y: y.into(),
            lo: "ci_lo".into(),
            hi: "ci_hi".into(),
            ..Default::default()
        }
    }
}

/// A point with an optional error bar, already in plot coordinates (logs
/// taken where requested).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlotPoint {
    pub x: f64,
    pub y: f64,
    pub bar: Option<(f64, f64)>,
}

/// Where a column's values come from: a header field, or a `key=value`
/// entry of the `kind-params` field.
enum Source {
    Column(usize),
    Param(usize, String),
}

impl Source {
    fn find(header: &csv::StringRecord, name: &str) -> Option<Source> {
        if let Some(i) = header.iter().position(|h| h == name) {
            return Some(Source::Column(i));
        }
        header
            .iter()
            .position(|h| h == "kind-params")
            .map(|i| Source::Param(i, name.to_string()))
    }

    fn get(&self, row: &csv::StringRecord) -> Option<f64> {
        let text = match self {
            Source::Column(i) => row.get(*i)?,
            Source::Param(i, key) => row.get(*i)?.split(';').find_map(|kv| {
                let (k, v) = kv.split_once('=')?;
                (k == key).then_some(v)
            })?,
        };
        text.trim().parse().ok()
    }
}

fn transform(v: f64, log: bool) -> Option<f64> {
    match log {
        true if v > 0.0 => Some(v.ln()),
        true => None,
        false => v.is_finite().then_some(v),
    }
}

/// Read the plotted points. Rows whose x or y is blank, unparsable or not
/// positive on a log axis are skipped.
pub fn read_points(csv_text: &str, spec: &PlotSpec) -> Result<Vec<PlotPoint>> {
    let mut r = csv::ReaderBuilder::new().from_reader(csv_text.as_bytes());
    let header = r.headers()?.clone();
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(usage("CSV input is empty"));
    }
    let rows: Vec<csv::StringRecord> = r.records().collect::<std::result::Result<_, _>>()?;
    if rows.is_empty() {
        return Err(usage("CSV input has no data rows"));
    }
    let has_param = |name: &str| {
        rows.iter().any(|row| match Source::find(&header, name) {
            Some(Source::Column(_)) => true,
            Some(src) => src.get(row).is_some(),
            None => false,
        })
    };
    for name in [&spec.x, &spec.y] {
        if !has_param(name) {
            return Err(usage(format!("column '{name}' not found in CSV input")));
        }
    }
    let x = Source::find(&header, &spec.x).expect("checked");
    let y = Source::find(&header, &spec.y).expect("checked");
    let lo = header.iter().position(|h| h == spec.lo).map(Source::Column);
    let hi = header.iter().position(|h| h == spec.hi).map(Source::Column);
    let mut pts = Vec::new();
    for row in &rows {
        let (Some(xv), Some(yv)) = (x.get(row), y.get(row)) else {
            continue;
        };
        let (Some(xv), Some(yv)) = (transform(xv, spec.log_x), transform(yv, spec.log_y)) else {
            continue;
        };
        let bar = match (&lo, &hi) {
            (Some(l), Some(h)) => match (l.get(row), h.get(row)) {
                (Some(l), Some(h)) => {
                    let floor = if spec.log_y { f64::NEG_INFINITY } else { l };
                    let l = transform(l, spec.log_y).unwrap_or(floor);
                    transform(h, spec.log_y).map(|h| (l, h))
                }
                _ => None,
            },
            _ => None,
        };
        pts.push(PlotPoint { x: xv, y: yv, bar });
    }
    if pts.is_empty() {
        return Err(usage(format!("no plottable rows for {} against {}", spec.y, spec.x)));
    }
    pts.sort_by(|a, b| a.x.total_cmp(&b.x));
    Ok(pts)
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn axis_label(name: &str, log: bool) -> String {
    if log {
        format!("log {name}")
    } else {
        name.to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// An SVG 1.1 document plotting `pts` as a polyline with markers and error
/// bars.
pub fn render_svg(pts: &[PlotPoint], spec: &PlotSpec) -> String {
    let (x0, x1) = range(pts.iter().map(|p| p.x));
    let (y0, y1) = range(pts.iter().flat_map(|p| {
        let (l, h) = p.bar.unwrap_or((p.y, p.y));
        [p.y, l, h]
    }));
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y.clamp(y0, y1) - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(svg, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (xl, yl) = (escape(&axis_label(&spec.x, spec.log_x)), escape(&axis_label(&spec.y, spec.log_y)));
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{yl} against {xl}</text>"#,
        WIDTH / 2.0
    );
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        svg,
        r#"<path d="M{left} {top} L{left} {bottom} L{right} {bottom}" fill="none" stroke="black"/>"#
    );
    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (tx, ty) = (px(xv), py(yv));
        let _ = writeln!(
            svg,
            r#"<line x1="{tx:.2}" y1="{bottom}" x2="{tx:.2}" y2="{}" stroke="black"/><text x="{tx:.2}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{xv:.3}</text>"#,
            bottom + 5.0,
            bottom + 18.0
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{ty:.2}" x2="{left}" y2="{ty:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="11">{yv:.3}</text>"#,
            left - 5.0,
            left - 8.0,
            ty + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{xl}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 16 {})">{yl}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for p in pts {
        if let Some((l, h)) = p.bar {
            let (x, yl, yh) = (px(p.x), py(l), py(h));
            let _ = writeln!(
                svg,
                r#"<path d="M{x:.2} {yl:.2} L{x:.2} {yh:.2} M{:.2} {yl:.2} L{:.2} {yl:.2} M{:.2} {yh:.2} L{:.2} {yh:.2}" stroke="gray" fill="none"/>"#,
                x - 4.0,
                x + 4.0,
                x - 4.0,
                x + 4.0
            );
        }
    }
    let coords: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", px(p.x), py(p.y))).collect();
    let _ = writeln!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
        coords.join(" ")
    );
    for p in pts {
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#,
            px(p.x),
            py(p.y)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn cmd_plot(csv_in: &Path, svg_out: &Path, spec: &PlotSpec) -> Result<usize> {
    let text = fs::read_to_string(csv_in).map_err(|e| usage(format!("cannot read {}: {e}", csv_in.display())))?;
    if text.trim().is_empty() {
        return Err(usage(format!("{} is empty", csv_in.display())));
    }
    let pts = read_points(&text, spec)?;
    fs::write(svg_out, render_svg(&pts, spec))?;
    Ok(pts.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "event,kind-params,p_hat,ci_lo,ci_hi\n\
                       one_arm,s=1;t=8,0.2,0.18,0.22\n\
                       one_arm,s=1;t=4,0.4,0.37,0.43\n\
                       arm_fit,s0=1;t=4|8;eta,0.9,,\n";

    #[test]
    fn params_serve_as_columns() {
        let pts = read_points(CSV, &PlotSpec::new("t", "p_hat")).unwrap();
        assert_eq!(pts.len(), 2);
        assert_eq!((pts[0].x, pts[0].y), (4.0, 0.4));
        assert_eq!(pts[0].bar, Some((0.37, 0.43)));
    }

    #[test]
    fn log_axes() {
        let mut spec = PlotSpec::new("t", "p_hat");
        spec.log_x = true;
        spec.log_y = true;
        let pts = read_points(CSV, &spec).unwrap();
        assert!((pts[1].x - 8f64.ln()).abs() < 1e-12);
        assert!((pts[1].y - 0.2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn missing_column_is_named() {
        let err = read_points(CSV, &PlotSpec::new("t", "phi")).unwrap_err();
        assert_eq!(err.to_string(), "column 'phi' not found in CSV input");
    }

    #[test]
    fn header_only_is_an_error() {
        assert!(read_points("s,p_hat\n", &PlotSpec::new("s", "p_hat")).is_err());
    }

    #[test]
    fn svg_is_well_formed() {
        let pts = read_points(CSV, &PlotSpec::new("t", "p_hat")).unwrap();
        let svg = render_svg(&pts, &PlotSpec::new("t", "p_hat"));
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains("<polyline"));
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.trim_end().ends_with("</svg>"));
    }
}
