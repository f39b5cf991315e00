//! Hand-emitted SVG plots: scatter and line series with axes, ticks and a
//! legend. No timestamps or other run metadata, so output is a pure
//! function of the data.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 28.0;
const MARGIN_TOP: f64 = 44.0;
const MARGIN_BOTTOM: f64 = 56.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    Scatter,
    Line,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub kind: SeriesKind,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn scatter(label: &str, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.to_string(), kind: SeriesKind::Scatter, points }
    }

    pub fn line(label: &str, points: Vec<(f64, f64)>) -> Self {
        Series { label: label.to_string(), kind: SeriesKind::Line, points }
    }
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn nice_number(v: f64, span: f64) -> String {
    let decimals = if span >= 100.0 {
        0
    } else if span >= 10.0 {
        1
    } else if span >= 1.0 {
        2
    } else if span >= 0.1 {
        3
    } else {
        4
    };
    let s = format!("{v:.decimals$}");
    if s == "-0" || s.starts_with("-0.") && s[3..].chars().all(|c| c == '0') {
        s.replacen('-', "", 1)
    } else {
        s
    }
}

impl Plot {
    pub fn render(&self) -> String {
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for s in &self.series {
            for &(x, y) in &s.points {
                if x.is_finite() && y.is_finite() {
                    xs.push(x);
                    ys.push(y);
                }
            }
        }
        let (mut x_lo, mut x_hi) = bounds(&xs);
        let (mut y_lo, mut y_hi) = bounds(&ys);
        pad(&mut x_lo, &mut x_hi);
        pad(&mut y_lo, &mut y_hi);

        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let to_px = |x: f64, y: f64| -> (f64, f64) {
            (
                MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w,
                MARGIN_TOP + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h,
            )
        };

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">"#
        );
        let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="16">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );

        // frame
        let _ = writeln!(
            out,
            r##"<rect x="{MARGIN_LEFT:.1}" y="{MARGIN_TOP:.1}" width="{plot_w:.1}" height="{plot_h:.1}" fill="none" stroke="#444" stroke-width="1"/>"##
        );

        // ticks and grid
        let x_span = x_hi - x_lo;
        let y_span = y_hi - y_lo;
        for i in 0..=4 {
            let t = i as f64 / 4.0;
            let xv = x_lo + t * x_span;
            let (px, _) = to_px(xv, y_lo);
            let _ = writeln!(
                out,
                r##"<line x1="{px:.1}" y1="{:.1}" x2="{px:.1}" y2="{:.1}" stroke="#ccc" stroke-width="0.5"/>"##,
                MARGIN_TOP,
                MARGIN_TOP + plot_h
            );
            let _ = writeln!(
                out,
                r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle" font-size="11">{}</text>"#,
                MARGIN_TOP + plot_h + 16.0,
                nice_number(xv, x_span)
            );
            let yv = y_lo + t * y_span;
            let (_, py) = to_px(x_lo, yv);
            let _ = writeln!(
                out,
                r##"<line x1="{:.1}" y1="{py:.1}" x2="{:.1}" y2="{py:.1}" stroke="#ccc" stroke-width="0.5"/>"##,
                MARGIN_LEFT,
                MARGIN_LEFT + plot_w
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="11">{}</text>"#,
                MARGIN_LEFT - 6.0,
                py + 4.0,
                nice_number(yv, y_span)
            );
        }

        // axis labels
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="13">{}</text>"#,
            MARGIN_LEFT + plot_w / 2.0,
            HEIGHT - 14.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="18" y="{:.1}" text-anchor="middle" font-size="13" transform="rotate(-90 18 {:.1})">{}</text>"#,
            MARGIN_TOP + plot_h / 2.0,
            MARGIN_TOP + plot_h / 2.0,
            escape(&self.y_label)
        );

        // series
        for (idx, series) in self.series.iter().enumerate() {
            let color = PALETTE[idx % PALETTE.len()];
            match series.kind {
                SeriesKind::Scatter => {
                    for &(x, y) in &series.points {
                        if !x.is_finite() || !y.is_finite() {
                            continue;
                        }
                        let (px, py) = to_px(x, y);
                        let _ = writeln!(
                            out,
                            r#"<circle cx="{px:.2}" cy="{py:.2}" r="3" fill="{color}" fill-opacity="0.75"/>"#
                        );
                    }
                }
                SeriesKind::Line => {
                    let pts: Vec<String> = series
                        .points
                        .iter()
                        .filter(|(x, y)| x.is_finite() && y.is_finite())
                        .map(|&(x, y)| {
                            let (px, py) = to_px(x, y);
                            format!("{px:.2},{py:.2}")
                        })
                        .collect();
                    let _ = writeln!(
                        out,
                        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                        pts.join(" ")
                    );
                }
            }
        }

        // legend
        for (idx, series) in self.series.iter().enumerate() {
            let color = PALETTE[idx % PALETTE.len()];
            let ly = MARGIN_TOP + 14.0 + idx as f64 * 18.0;
            let lx = WIDTH - MARGIN_RIGHT - 150.0;
            let _ = writeln!(
                out,
                r#"<rect x="{lx:.1}" y="{:.1}" width="12" height="12" fill="{color}"/>"#,
                ly - 10.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{ly:.1}" font-size="12">{}</text>"#,
                lx + 16.0,
                escape(&series.label)
            );
        }

        out.push_str("</svg>\n");
        out
    }
}

fn bounds(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (0.0, 1.0);
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn pad(lo: &mut f64, hi: &mut f64) {
    let span = *hi - *lo;
    if span <= 0.0 {
        *lo -= 1.0;
        *hi += 1.0;
    } else {
        *lo -= 0.05 * span;
        *hi += 0.05 * span;
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
