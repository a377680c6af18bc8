//! Static SVG line and stacked-area charts over a time axis.
//!
//! The root element carries `data-source` naming the CSV the chart was drawn
//! from, and each series element carries `data-column` naming its column.

use std::fmt::Write;

use cachecast::time::{Timestamp, MILLIS_PER_DAY};

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 84.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 44.0;
const BOTTOM: f64 = 52.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone)]
pub struct Series {
    pub column: String,
    pub label: String,
    pub values: Vec<f64>,
}

impl Series {
    pub fn new(column: &str, label: &str, values: Vec<f64>) -> Self {
        Series { column: column.to_owned(), label: label.to_owned(), values }
    }
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub title: String,
    pub y_label: String,
    pub source_csv: String,
    /// Bin starts, one per value of every series.
    pub x: Vec<Timestamp>,
    pub series: Vec<Series>,
    /// Draw series as areas stacked from zero in order.
    pub stacked: bool,
}

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
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

fn nice_step(span: f64, ticks: f64) -> f64 {
    let raw = span / ticks;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

pub fn compact(v: f64) -> String {
    let a = v.abs();
    let (scaled, suffix) = match a {
        a if a >= 1e15 => (v / 1e15, "P"),
        a if a >= 1e12 => (v / 1e12, "T"),
        a if a >= 1e9 => (v / 1e9, "G"),
        a if a >= 1e6 => (v / 1e6, "M"),
        a if a >= 1e4 => (v / 1e3, "k"),
        _ => (v, ""),
    };
    let text = if scaled.fract() == 0.0 { format!("{scaled:.0}") } else { format!("{scaled:.2}") };
    let text = if text.contains('.') { text.trim_end_matches('0').trim_end_matches('.').to_owned() } else { text };
    format!("{text}{suffix}")
}

fn date_label(ts: Timestamp, span_millis: i64) -> String {
    let s = ts.to_string();
    if span_millis >= 3 * MILLIS_PER_DAY {
        s[..10].to_owned()
    } else {
        s[5..16].to_owned()
    }
}

impl Chart {
    fn y_range(&self) -> (f64, f64) {
        let (mut lo, mut hi) = (0.0f64, f64::NEG_INFINITY);
        if self.stacked {
            for i in 0..self.x.len() {
                let total: f64 = self.series.iter().filter_map(|s| s.values.get(i)).filter(|v| v.is_finite()).sum();
                hi = hi.max(total);
            }
        } else {
            for v in self.series.iter().flat_map(|s| &s.values).filter(|v| v.is_finite()) {
                lo = lo.min(*v);
                hi = hi.max(*v);
            }
        }
        if !hi.is_finite() || hi <= lo {
            hi = lo + 1.0;
        }
        let step = nice_step(hi - lo, 5.0);
        ((lo / step).floor() * step, (hi / step).ceil() * step)
    }

    pub fn render(&self) -> String {
        let plot_w = WIDTH - LEFT - RIGHT;
        let plot_h = HEIGHT - TOP - BOTTOM;
        let x0 = self.x.first().map_or(0, |t| t.as_millis());
        let x1 = self.x.last().map_or(1, |t| t.as_millis());
        let span = (x1 - x0).max(1);
        let (y0, y1) = self.y_range();
        let px = |t: Timestamp| LEFT + (t.as_millis() - x0) as f64 / span as f64 * plot_w;
        let py = |v: f64| TOP + plot_h - (v - y0) / (y1 - y0) * plot_h;

        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" data-source="{}">"#,
            escape(&self.source_csv)
        );
        let _ = writeln!(svg, r#"<title>{}</title>"#, escape(&self.title));
        let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="24" font-family="sans-serif" font-size="16" text-anchor="middle">{}</text>"#,
            LEFT + plot_w / 2.0,
            escape(&self.title)
        );

        let step = nice_step(y1 - y0, 5.0);
        let mut tick = y0;
        svg.push_str("<g font-family=\"sans-serif\" font-size=\"11\">\n");
        while tick <= y1 + step * 1e-9 {
            let y = py(tick);
            let _ = writeln!(svg, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##, LEFT + plot_w);
            let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, y + 4.0, compact(tick));
            tick += step;
        }
        if !self.x.is_empty() {
            for k in 0..=4 {
                let t = Timestamp::from_millis(x0 + span * k / 4);
                let x = px(t);
                let _ = writeln!(
                    svg,
                    r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                    TOP + plot_h + 18.0,
                    date_label(t, span)
                );
            }
        }
        let _ = writeln!(
            svg,
            r#"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
            TOP + plot_h / 2.0,
            escape(&self.y_label)
        );
        svg.push_str("</g>\n");
        let _ = writeln!(svg, r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#);

        let mut base = vec![0.0; self.x.len()];
        for (k, series) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let column = escape(&series.column);
            if self.stacked {
                let top: Vec<f64> =
                    base.iter().zip(&series.values).map(|(b, v)| b + if v.is_finite() { *v } else { 0.0 }).collect();
                let mut points = String::new();
                for (t, v) in self.x.iter().zip(&top) {
                    let _ = write!(points, "{:.2},{:.2} ", px(*t), py(*v));
                }
                for (t, v) in self.x.iter().zip(&base).rev() {
                    let _ = write!(points, "{:.2},{:.2} ", px(*t), py(*v));
                }
                let _ = writeln!(
                    svg,
                    r#"<polygon class="series" data-column="{column}" points="{}" fill="{color}" fill-opacity="0.7" stroke="{color}"/>"#,
                    points.trim_end()
                );
                base = top;
            } else {
                let mut d = String::new();
                let mut pen_down = false;
                for (t, v) in self.x.iter().zip(&series.values) {
                    if !v.is_finite() {
                        pen_down = false;
                        continue;
                    }
                    let _ = write!(d, "{}{:.2} {:.2} ", if pen_down { "L" } else { "M" }, px(*t), py(*v));
                    pen_down = true;
                }
                let _ = writeln!(
                    svg,
                    r#"<path class="series" data-column="{column}" d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                    d.trim_end()
                );
            }
            let ly = TOP + 14.0 + 20.0 * k as f64;
            let lx = LEFT + plot_w + 14.0;
            let _ = writeln!(svg, r#"<rect x="{lx}" y="{:.2}" width="14" height="10" fill="{color}"/>"#, ly - 9.0);
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{ly:.2}" font-family="sans-serif" font-size="12">{}</text>"#,
                lx + 20.0,
                escape(&series.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}
