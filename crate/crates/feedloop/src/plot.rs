//! Static SVG line charts of trajectory CSVs.
//!
//! The chart shows the mean model bias with a ±1 std band, the mean dataset
//! bias, and, when the CSV carries them, the exact and simplified bound
//! envelopes drawn around the round-0 dataset bias (the empirical estimate
//! of `P_0 φ`). Output is a pure function of the rows.

use std::fmt::Write;
use std::path::Path;

use crate::error::CliError;
use crate::fsutil::write_atomic;
use crate::trajectory_csv::{self, TrajectoryRow};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const TICKS: usize = 5;

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        LEFT + (v - self.x_min) / (self.x_max - self.x_min) * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - (v - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - TOP - BOTTOM)
    }
}

fn padded(lo: f64, hi: f64) -> (f64, f64) {
    let span = hi - lo;
    if span <= f64::EPSILON * hi.abs().max(1.0) {
        let pad = hi.abs().max(1.0) * 0.05;
        (lo - pad, hi + pad)
    } else {
        (lo - 0.05 * span, hi + 0.05 * span)
    }
}

fn polyline(out: &mut String, id: &str, frame: &Frame, pts: &[(f64, f64)], style: &str) {
    let _ = write!(out, r#"<polyline id="{id}" fill="none" {style} points=""#);
    for (i, &(x, y)) in pts.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{:.2},{:.2}", frame.x(x), frame.y(y));
    }
    out.push_str("\"/>\n");
}

type Points = Vec<(f64, f64)>;

struct Series {
    id: &'static str,
    label: &'static str,
    style: &'static str,
    points: Vec<(f64, f64)>,
}

fn envelope(
    rows: &[TrajectoryRow],
    anchor: f64,
    get: fn(&TrajectoryRow) -> Option<f64>,
) -> Option<(Points, Points)> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| get(r).filter(|b| b.is_finite()).map(|b| (r.round as f64, b)))
        .collect();
    if pts.is_empty() {
        return None;
    }
    let upper = pts.iter().map(|&(x, b)| (x, anchor + b)).collect();
    let lower = pts.iter().map(|&(x, b)| (x, anchor - b)).collect();
    Some((upper, lower))
}

/// Renders the chart. `rows` must be non-empty.
pub fn render(rows: &[TrajectoryRow]) -> String {
    let anchor = rows.first().map_or(0.0, |r| r.bias_dataset_mean);
    let mut series = vec![
        Series {
            id: "model-bias-mean",
            label: "model bias (mean)",
            style: r##"stroke="#1f77b4" stroke-width="2""##,
            points: rows.iter().map(|r| (r.round as f64, r.bias_model_mean)).collect(),
        },
        Series {
            id: "dataset-bias-mean",
            label: "dataset bias (mean)",
            style: r##"stroke="#2ca02c" stroke-width="1.5" stroke-dasharray="2,3""##,
            points: rows.iter().map(|r| (r.round as f64, r.bias_dataset_mean)).collect(),
        },
    ];
    if let Some((upper, lower)) = envelope(rows, anchor, |r| r.bound_exact) {
        let style = r##"stroke="#d62728" stroke-width="1.5" stroke-dasharray="6,4""##;
        series.push(Series { id: "bound-exact-upper", label: "exact bound", style, points: upper });
        series.push(Series { id: "bound-exact-lower", label: "", style, points: lower });
    }
    if let Some((upper, lower)) = envelope(rows, anchor, |r| r.bound_simplified) {
        let style = r##"stroke="#ff7f0e" stroke-width="1.5" stroke-dasharray="2,4""##;
        series.push(Series { id: "bound-simplified-upper", label: "simplified bound", style, points: upper });
        series.push(Series { id: "bound-simplified-lower", label: "", style, points: lower });
    }
    let band_upper: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.round as f64, r.bias_model_mean + r.bias_model_std))
        .collect();
    let band_lower: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (r.round as f64, r.bias_model_mean - r.bias_model_std))
        .collect();

    let ys = series
        .iter()
        .flat_map(|s| s.points.iter())
        .chain(band_upper.iter())
        .chain(band_lower.iter())
        .map(|p| p.1)
        .filter(|v| v.is_finite());
    let (y_lo, y_hi) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let (y_lo, y_hi) = if y_lo.is_finite() { padded(y_lo, y_hi) } else { (0.0, 1.0) };
    let x_lo = rows.first().map_or(0.0, |r| r.round as f64);
    let x_hi = rows.last().map_or(1.0, |r| r.round as f64);
    let (x_lo, x_hi) = if x_hi > x_lo { (x_lo, x_hi) } else { (x_lo - 0.5, x_lo + 0.5) };
    let frame = Frame { x_min: x_lo, x_max: x_hi, y_min: y_lo, y_max: y_hi };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##);

    // Axes and ticks.
    let (x0, x1) = (frame.x(x_lo), frame.x(x_hi));
    let (y0, y1) = (frame.y(y_lo), frame.y(y_hi));
    let _ = writeln!(
        out,
        r##"<g id="axes" stroke="#444444"><line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/><line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/></g>"##
    );
    out.push_str("<g id=\"ticks\">\n");
    for i in 0..=TICKS {
        let f = i as f64 / TICKS as f64;
        let xv = x_lo + f * (x_hi - x_lo);
        let yv = y_lo + f * (y_hi - y_lo);
        let (px, py) = (frame.x(xv), frame.y(yv));
        let _ = writeln!(
            out,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{xv:.1}</text>"#,
            y0 + 18.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{yv:.4}</text>"#,
            x0 - 6.0,
            py + 4.0
        );
    }
    out.push_str("</g>\n");
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">round</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">bias</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    // Std band as a closed polygon: upper edge forward, lower edge back.
    out.push_str(r##"<polygon id="model-bias-band" fill="#1f77b4" fill-opacity="0.2" stroke="none" points=""##);
    for (i, &(x, y)) in band_upper.iter().chain(band_lower.iter().rev()).enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{:.2},{:.2}", frame.x(x), frame.y(y));
    }
    out.push_str("\"/>\n");

    for s in &series {
        polyline(&mut out, s.id, &frame, &s.points, s.style);
    }

    out.push_str("<g id=\"legend\">\n");
    let mut ly = TOP + 10.0;
    let lx = WIDTH - RIGHT + 15.0;
    for s in series.iter().filter(|s| !s.label.is_empty()) {
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" {}/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 25.0,
            s.style,
            lx + 30.0,
            ly + 4.0,
            s.label
        );
        ly += 20.0;
    }
    out.push_str("</g>\n</svg>\n");
    out
}

/// Reads a trajectory CSV and writes its chart.
pub fn plot_file(csv_path: &Path, svg_path: &Path) -> Result<(), CliError> {
    let rows = trajectory_csv::read(csv_path)?;
    if rows.is_empty() {
        return Err(CliError::Csv {
            path: csv_path.to_path_buf(),
            reason: "no data rows".into(),
        });
    }
    write_atomic(svg_path, render(&rows).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(round: usize, bias: f64, bound: Option<f64>) -> TrajectoryRow {
        TrajectoryRow {
            round,
            n_t: 10 * (round + 1),
            bias_model_mean: bias,
            bias_model_std: 0.0,
            bias_dataset_mean: bias,
            bias_dataset_std: 0.0,
            accuracy_mean: 0.9,
            accuracy_std: 0.0,
            bound_exact: bound,
            bound_simplified: bound.map(|b| 2.0 * b),
            delta0: bound,
        }
    }

    fn points_of(svg: &str, id: &str) -> Vec<(f64, f64)> {
        let start = svg.find(&format!("id=\"{id}\"")).expect(id);
        let rest = &svg[start..];
        let p = rest.find("points=\"").unwrap() + 8;
        let end = rest[p..].find('"').unwrap();
        rest[p..p + end]
            .split(' ')
            .map(|xy| {
                let (x, y) = xy.split_once(',').unwrap();
                (x.parse().unwrap(), y.parse().unwrap())
            })
            .collect()
    }

    #[test]
    fn constant_series_is_flat() {
        let rows: Vec<_> = (0..5).map(|t| row(t, 0.25, None)).collect();
        let svg = render(&rows);
        let pts = points_of(&svg, "model-bias-mean");
        assert_eq!(pts.len(), 5);
        assert!(pts.iter().all(|p| p.1 == pts[0].1));
        assert!(pts.windows(2).all(|w| w[1].0 > w[0].0));
    }

    #[test]
    fn bound_series_are_optional() {
        let rows: Vec<_> = (0..3).map(|t| row(t, 0.1 * t as f64, None)).collect();
        let svg = render(&rows);
        assert!(!svg.contains("bound-exact"));
        assert!(svg.contains("model-bias-band"));

        let rows: Vec<_> = (0..3).map(|t| row(t, 0.1, Some(0.05 * (t + 1) as f64))).collect();
        let svg = render(&rows);
        // Upper bound sits above the model series (smaller y in SVG space).
        let upper = points_of(&svg, "bound-exact-upper");
        let model = points_of(&svg, "model-bias-mean");
        assert!(upper.iter().zip(&model).all(|(u, m)| u.1 < m.1));
        assert!(svg.contains("bound-simplified-lower"));
    }

    #[test]
    fn rendering_is_deterministic_and_single_row_works() {
        let rows = vec![row(0, 0.3, Some(0.01))];
        assert_eq!(render(&rows), render(&rows));
        assert!(render(&rows).ends_with("</svg>\n"));
    }

    #[test]
    fn malformed_csv_is_an_input_error() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("bad.csv");
        std::fs::write(&csv, "round,n_t\n1,2\n").unwrap();
        let err = plot_file(&csv, &dir.path().join("out.svg")).unwrap_err();
        assert_eq!(err.exit_code(), crate::ExitCode::InvalidInput);
        assert!(!dir.path().join("out.svg").exists());
    }
}
