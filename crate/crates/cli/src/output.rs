//! Result rows and their CSV, JSON and SVG renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use anyon_otto::{CycleReport, FormulaVariant, MediumKind, Regime, SweepAxis};
use serde::Serialize;

/// One evaluated cycle as it appears in output tables.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    /// Swept value; `None` for a single cycle.
    pub value: Option<f64>,
    pub efficiency: Option<f64>,
    pub q_in: Option<f64>,
    pub q_out: Option<f64>,
    pub w_out: Option<f64>,
    pub regime: Option<&'static str>,
    pub oracle_residual: Option<f64>,
    pub wall_time_s: f64,
    pub error: Option<String>,
}

impl ResultRow {
    pub fn from_report(value: Option<f64>, report: &CycleReport, wall_time_s: f64) -> Self {
        Self {
            value,
            efficiency: Some(report.efficiency),
            q_in: Some(report.q_in),
            q_out: Some(report.q_out),
            w_out: Some(report.w_out),
            regime: Some(report.regime.as_str()),
            oracle_residual: report.oracle_residual,
            wall_time_s,
            error: None,
        }
    }

    pub fn failed(value: Option<f64>, message: String, wall_time_s: f64) -> Self {
        Self {
            value,
            efficiency: None,
            q_in: None,
            q_out: None,
            w_out: None,
            regime: None,
            oracle_residual: None,
            wall_time_s,
            error: Some(message),
        }
    }
}

/// Seventeen significant digits, enough to round-trip any double.
pub fn csv_number(v: f64) -> String {
    format!("{v:.16e}")
}

/// Twelve significant digits with trailing zeros removed, for terminal output.
pub fn short_number(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let rounded: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    let magnitude = rounded.abs();
    if (1e-4..1e12).contains(&magnitude) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn csv_cell(v: Option<f64>) -> String {
    v.map(csv_number).unwrap_or_default()
}

/// Messages go into an unquoted column, so separators are replaced.
fn csv_text(s: &str) -> String {
    s.replace([',', ';'], " ").replace(['\n', '\r'], " ")
}

/// CSV table with a header row and LF line endings. Wall time is left out so
/// that reruns are byte-identical.
pub fn render_csv(value_column: &str, rows: &[ResultRow]) -> String {
    let mut out =
        format!("{value_column},efficiency,q_in,q_out,w_out,regime,oracle_residual,error\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            csv_cell(row.value),
            csv_cell(row.efficiency),
            csv_cell(row.q_in),
            csv_cell(row.q_out),
            csv_cell(row.w_out),
            row.regime.unwrap_or(""),
            csv_cell(row.oracle_residual),
            row.error.as_deref().map(csv_text).unwrap_or_default(),
        );
    }
    out
}

#[derive(Debug, Serialize)]
pub struct JsonReport<'a> {
    pub medium: &'static str,
    pub sweep: Option<&'static str>,
    pub formula_variant: &'static str,
    pub parameters: BTreeMap<&'a str, &'a str>,
    pub rows: &'a [ResultRow],
}

impl<'a> JsonReport<'a> {
    pub fn new(
        medium: MediumKind,
        sweep: Option<SweepAxis>,
        variant: FormulaVariant,
        parameters: BTreeMap<&'a str, &'a str>,
        rows: &'a [ResultRow],
    ) -> Self {
        Self {
            medium: medium.as_str(),
            sweep: sweep.map(|a| a.as_str()),
            formula_variant: variant.as_str(),
            parameters,
            rows,
        }
    }

    pub fn render(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

fn regime_of(row: &ResultRow) -> Option<Regime> {
    match row.regime? {
        "engine" => Some(Regime::Engine),
        "refrigerator" => Some(Regime::Refrigerator),
        _ => Some(Regime::Degenerate),
    }
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn marker(out: &mut String, regime: Regime, x: f64, y: f64) {
    let _ = match regime {
        Regime::Engine => writeln!(
            out,
            r##"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="#1f5fa8"/>"##
        ),
        Regime::Refrigerator => writeln!(
            out,
            r##"<rect x="{:.2}" y="{:.2}" width="8" height="8" fill="none" stroke="#c0392b" stroke-width="1.5"/>"##,
            x - 4.0,
            y - 4.0
        ),
        Regime::Degenerate => writeln!(
            out,
            r##"<path d="M{:.2},{:.2} l8,8 m0,-8 l-8,8" stroke="#707070" stroke-width="1.5"/>"##,
            x - 4.0,
            y - 4.0
        ),
    };
}

/// Self-contained SVG of efficiency against the swept value. Engine,
/// refrigerator and degenerate rows use different markers; rows whose ratio
/// falls outside the plotted band are pinned to its edge.
pub fn render_svg(axis: &str, medium: &str, rows: &[ResultRow]) -> String {
    let points: Vec<(f64, f64, Regime)> = rows
        .iter()
        .filter_map(|r| Some((r.value?, r.efficiency?, regime_of(r)?)))
        .filter(|(_, y, _)| y.is_finite())
        .collect();

    let (mut x_lo, mut x_hi) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p.0), hi.max(p.0))
        });
    if !x_lo.is_finite() {
        (x_lo, x_hi) = (0.0, 1.0);
    } else if x_lo == x_hi {
        (x_lo, x_hi) = (x_lo - 0.5, x_hi + 0.5);
    }
    let (y_lo, y_hi) = points.iter().fold((0.0_f64, 1.0_f64), |(lo, hi), p| {
        (lo.min(p.1.max(-1.0)), hi.max(p.1.min(2.0)))
    });

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| TOP + (1.0 - (y.clamp(y_lo, y_hi) - y_lo) / (y_hi - y_lo)) * plot_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        r##"<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>"##
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="14">efficiency η vs {axis} ({medium})</text>"#,
        LEFT + plot_w / 2.0
    );
    let _ = writeln!(
        out,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#000000"/>"##
    );

    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = x_lo + t * (x_hi - x_lo);
        let yv = y_lo + t * (y_hi - y_lo);
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            out,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#000000"/>"##,
            TOP + plot_h,
            TOP + plot_h + 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + plot_h + 19.0,
            tick_label(xv)
        );
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="#000000"/>"##,
            LEFT - 5.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 8.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{axis}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{0:.1}" text-anchor="middle" transform="rotate(-90 18 {0:.1})">efficiency η</text>"#,
        TOP + plot_h / 2.0
    );

    let engine: Vec<String> = points
        .iter()
        .filter(|p| p.2 == Regime::Engine)
        .map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1)))
        .collect();
    if engine.len() > 1 {
        let _ = writeln!(
            out,
            r##"<polyline points="{}" fill="none" stroke="#1f5fa8" stroke-width="1"/>"##,
            engine.join(" ")
        );
    }
    for &(x, y, regime) in &points {
        marker(&mut out, regime, sx(x), sy(y));
    }

    let legend_x = WIDTH - RIGHT + 20.0;
    for (i, regime) in [Regime::Engine, Regime::Refrigerator, Regime::Degenerate]
        .into_iter()
        .enumerate()
    {
        let y = TOP + 10.0 + 20.0 * i as f64;
        marker(&mut out, regime, legend_x, y);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            legend_x + 12.0,
            y + 4.0,
            regime.as_str()
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(value: f64, efficiency: f64, regime: &'static str) -> ResultRow {
        ResultRow {
            value: Some(value),
            efficiency: Some(efficiency),
            q_in: Some(1.0),
            q_out: Some(1.0 - efficiency),
            w_out: Some(efficiency),
            regime: Some(regime),
            oracle_residual: None,
            wall_time_s: 0.5,
            error: None,
        }
    }

    #[test]
    fn number_formats() {
        assert_eq!(short_number(0.75), "0.75");
        assert_eq!(short_number(0.1 + 0.2), "0.3");
        assert_eq!(short_number(1.0561613737121204e-7), "1.05616137371e-7");
        assert_eq!(csv_number(0.75), "7.5000000000000000e-1");
        let x = 0.1 + 0.2;
        assert_eq!(csv_number(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn csv_layout() {
        let mut failed = ResultRow::failed(Some(2.0), "bad, very bad\nindeed".into(), 0.1);
        failed.oracle_residual = None;
        let csv = render_csv("alpha2", &[row(1.0, 0.5, "engine"), failed]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "alpha2,efficiency,q_in,q_out,w_out,regime,oracle_residual,error"
        );
        assert!(lines[1].ends_with(",engine,,"));
        assert_eq!(lines[2], "2.0000000000000000e0,,,,,,,bad  very bad indeed");
        assert!(!csv.contains('\r'));
        assert!(lines.iter().all(|l| l.split(',').count() == 8));
    }

    #[test]
    fn header_only_csv() {
        assert_eq!(render_csv("beta_h", &[]).lines().count(), 1);
    }

    #[test]
    fn svg_is_self_contained() {
        let svg = render_svg(
            "alpha2",
            "cs-coupling",
            &[row(0.0, 0.0, "degenerate"), row(1.0, 0.3, "engine")],
        );
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains(">alpha2</text>"));
        assert!(svg.contains("efficiency η"));
        assert!(svg.contains("<circle") && svg.contains("<path"));
        assert!(!svg.contains("href"));
    }
}
