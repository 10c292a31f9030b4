//! Minimal SVG charts. Output depends only on the inputs; coordinates are
//! printed with two decimals.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

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

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

/// Linear map from data range onto pixel range.
#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    from: f64,
    to: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, from: f64, to: f64) -> Self {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        Axis { lo, hi, from, to }
    }

    fn map(&self, v: f64) -> f64 {
        self.from + (v - self.lo) / (self.hi - self.lo) * (self.to - self.from)
    }

    fn ticks(&self) -> Vec<f64> {
        (0..=4).map(|i| self.lo + (self.hi - self.lo) * i as f64 / 4.0).collect()
    }
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn frame(out: &mut String, x: Axis, y: Axis, xlabel: &str, ylabel: &str, x_ticks: bool) {
    let _ = writeln!(
        out,
        r#"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    );
    if x_ticks {
        for t in x.ticks() {
            let px = x.map(t);
            let _ = writeln!(
                out,
                r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                HEIGHT - BOTTOM + 16.0,
                tick_label(t)
            );
        }
    }
    for t in y.ticks() {
        let py = y.map(t);
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#dddddd"/>"##,
            WIDTH - RIGHT
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            py + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + (WIDTH - LEFT - RIGHT) / 2.0,
        HEIGHT - 18.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{0:.2}" text-anchor="middle" transform="rotate(-90 18 {0:.2})">{1}</text>"#,
        TOP + (HEIGHT - TOP - BOTTOM) / 2.0,
        escape(ylabel)
    );
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Line chart of several series; `limits` fixes both axes when given.
pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, series: &[Series], limits: Option<((f64, f64), (f64, f64))>) -> String {
    let ((x0, x1), (y0, y1)) = limits.unwrap_or_else(|| {
        let all = || series.iter().flat_map(|s| s.points.iter());
        (bounds(all().map(|p| p.0)), bounds(all().map(|p| p.1)))
    });
    let (x0, x1) = if x0.is_finite() { (x0, x1) } else { (0.0, 1.0) };
    let (y0, y1) = if y0.is_finite() { (y0, y1) } else { (0.0, 1.0) };
    let x = Axis::new(x0, x1, LEFT, WIDTH - RIGHT);
    let y = Axis::new(y0, y1, HEIGHT - BOTTOM, TOP);

    let mut out = String::new();
    header(&mut out, title);
    frame(&mut out, x, y, xlabel, ylabel, true);
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|&(a, b)| format!("{:.2},{:.2}", x.map(a), y.map(b)))
            .collect();
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="2"{dash} points="{}"/>"#,
            pts.join(" ")
        );
        let ly = TOP + 16.0 + 16.0 * k as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"{dash}/>"#,
            LEFT + 10.0,
            LEFT + 34.0
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{}</text>"#,
            LEFT + 40.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Five-number summary `[min, q1, median, q3, max]` of one box.
pub struct BoxStats {
    pub label: String,
    pub stats: [f64; 5],
}

pub fn boxplot(title: &str, ylabel: &str, boxes: &[BoxStats]) -> String {
    let (lo, hi) = bounds(boxes.iter().flat_map(|b| b.stats));
    let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
    let pad = 0.05 * (hi - lo).max(1e-9);
    let y = Axis::new(lo - pad, hi + pad, HEIGHT - BOTTOM, TOP);
    let x = Axis::new(0.0, boxes.len().max(1) as f64, LEFT, WIDTH - RIGHT);

    let mut out = String::new();
    header(&mut out, title);
    frame(&mut out, x, y, "", ylabel, false);
    let slot = (WIDTH - LEFT - RIGHT) / boxes.len().max(1) as f64;
    let half = (slot * 0.3).min(30.0);
    for (k, b) in boxes.iter().enumerate() {
        let cx = x.map(k as f64 + 0.5);
        let [mn, q1, md, q3, mx] = b.stats.map(|v| y.map(v));
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(out, r#"<line x1="{cx:.2}" y1="{mn:.2}" x2="{cx:.2}" y2="{q1:.2}" stroke="black"/>"#);
        let _ = writeln!(out, r#"<line x1="{cx:.2}" y1="{q3:.2}" x2="{cx:.2}" y2="{mx:.2}" stroke="black"/>"#);
        for w in [mn, mx] {
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{w:.2}" x2="{:.2}" y2="{w:.2}" stroke="black"/>"#,
                cx - half / 2.0,
                cx + half / 2.0
            );
        }
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{q3:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.35" stroke="black"/>"#,
            cx - half,
            2.0 * half,
            (q1 - q3).max(0.0)
        );
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{md:.2}" x2="{:.2}" y2="{md:.2}" stroke="black" stroke-width="2"/>"#,
            cx - half,
            cx + half
        );
        let _ = writeln!(
            out,
            r#"<text x="{cx:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#,
            HEIGHT - BOTTOM + 16.0 + 12.0 * (k % 2) as f64,
            escape(&b.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_markup() {
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }

    #[test]
    fn charts_are_deterministic() {
        let s = || {
            vec![Series {
                label: "curve".into(),
                points: vec![(0.0, 0.0), (0.5, 0.7), (1.0, 1.0)],
                dashed: false,
            }]
        };
        assert_eq!(line_chart("t", "x", "y", &s(), None), line_chart("t", "x", "y", &s(), None));
        let b = [BoxStats {
            label: "m".into(),
            stats: [0.0, 1.0, 2.0, 3.0, 4.0],
        }];
        assert!(boxplot("t", "y", &b).ends_with("</svg>\n"));
    }

    #[test]
    fn flat_series_does_not_divide_by_zero() {
        let s = [Series {
            label: "flat".into(),
            points: vec![(0.0, 1.0), (1.0, 1.0)],
            dashed: false,
        }];
        assert!(!line_chart("t", "x", "y", &s, None).contains("NaN"));
    }
}
