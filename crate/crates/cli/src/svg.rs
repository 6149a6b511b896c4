//! Minimal deterministic SVG line plots: axes, ticks, legend, polylines,
//! and an optional shaded band between two series. No dependencies.

use std::fmt::Write as _;

pub struct Series {
    pub points: Vec<(f64, f64)>,
    pub color: String,
    pub width: f64,
    /// SVG dash array, e.g. `"7,4"`.
    pub dash: Option<String>,
    pub label: String,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub x_log: bool,
    pub series: Vec<Series>,
    /// Fill the region between two series (indices into `series`).
    pub shade: Option<(usize, usize, String)>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 44.0;
const MARGIN_BOTTOM: f64 = 58.0;

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let pow = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * pow)
        .find(|s| *s >= raw)
        .unwrap_or(pow * 10.0);
    let mut ticks = Vec::new();
    let mut v = (lo / step).ceil() * step;
    while v <= hi + step * 1e-9 {
        ticks.push(v);
        v += step;
    }
    ticks
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if v.abs() >= 1.0 && v.fract().abs() < 1e-9 {
        return format!("{v:.0}");
    }
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

impl Plot {
    fn x_pos(&self, x: f64) -> f64 {
        let (lo, hi) = self.x_range;
        let frac = if self.x_log {
            (x.log10() - lo.log10()) / (hi.log10() - lo.log10())
        } else {
            (x - lo) / (hi - lo)
        };
        MARGIN_LEFT + frac.clamp(0.0, 1.0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn y_pos(&self, y: f64) -> f64 {
        let (lo, hi) = self.y_range;
        let frac = (y - lo) / (hi - lo);
        HEIGHT - MARGIN_BOTTOM - frac.clamp(0.0, 1.0) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }

    pub fn to_svg(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        );
        let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);

        if let Some((a, b, fill)) = &self.shade {
            let mut d = String::new();
            for (i, &(x, y)) in self.series[*a].points.iter().enumerate() {
                let _ = write!(
                    d,
                    "{}{:.2},{:.2} ",
                    if i == 0 { "M" } else { "L" },
                    self.x_pos(x),
                    self.y_pos(y)
                );
            }
            for &(x, y) in self.series[*b].points.iter().rev() {
                let _ = write!(d, "L{:.2},{:.2} ", self.x_pos(x), self.y_pos(y));
            }
            d.push('Z');
            let _ = writeln!(out, r#"<path d="{d}" fill="{fill}" fill-opacity="0.4" stroke="none"/>"#);
        }

        // axes
        let (x0, x1) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
        let (y0, y1) = (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
        let _ = writeln!(
            out,
            r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black" stroke-width="1.2"/>"#
        );

        // ticks
        let x_ticks: Vec<f64> = if self.x_log {
            let lo = self.x_range.0.log10().round() as i32;
            let hi = self.x_range.1.log10().round() as i32;
            (lo..=hi).map(|e| 10f64.powi(e)).collect()
        } else {
            nice_ticks(self.x_range.0, self.x_range.1)
        };
        for tick in &x_ticks {
            let x = self.x_pos(*tick);
            let _ = writeln!(
                out,
                r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{:.2}" stroke="black" stroke-width="1"/>"#,
                y0 + 5.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{x:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="middle">{}</text>"#,
                y0 + 20.0,
                fmt_tick(*tick)
            );
        }
        for tick in nice_ticks(self.y_range.0, self.y_range.1) {
            let y = self.y_pos(tick);
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black" stroke-width="1"/>"#,
                x0 - 5.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13" text-anchor="end">{}</text>"#,
                x0 - 9.0,
                y + 4.5,
                fmt_tick(tick)
            );
        }

        // series
        for series in &self.series {
            let mut pts = String::new();
            for &(x, y) in &series.points {
                let _ = write!(pts, "{:.2},{:.2} ", self.x_pos(x), self.y_pos(y));
            }
            let dash = series
                .dash
                .as_ref()
                .map(|d| format!(r#" stroke-dasharray="{d}""#))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="{}"{dash}/>"#,
                pts.trim_end(),
                series.color,
                series.width
            );
        }

        // legend, top-left inside the plot area
        for (i, series) in self.series.iter().enumerate() {
            let ly = MARGIN_TOP + 16.0 + 20.0 * i as f64;
            let dash = series
                .dash
                .as_ref()
                .map(|d| format!(r#" stroke-dasharray="{d}""#))
                .unwrap_or_default();
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="{}"{dash}/>"#,
                x0 + 12.0,
                x0 + 44.0,
                series.color,
                series.width
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="13">{}</text>"#,
                x0 + 50.0,
                ly + 4.5,
                series.label
            );
        }

        // labels
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="24" font-family="sans-serif" font-size="16" font-weight="bold" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            self.title
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
            (x0 + x1) / 2.0,
            HEIGHT - 14.0,
            self.x_label
        );
        let _ = writeln!(
            out,
            r#"<text x="20" y="{:.2}" font-family="sans-serif" font-size="14" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
            (y0 + y1) / 2.0,
            (y0 + y1) / 2.0,
            self.y_label
        );
        out.push_str("</svg>\n");
        out
    }
}
