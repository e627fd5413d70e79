//! Minimal log–log SVG line plots.

use std::fmt::Write as _;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    /// Non-positive or non-finite points break the curve.
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogLogPlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn usable(p: &(f64, f64)) -> bool {
    p.0 > 0.0 && p.1 > 0.0 && p.0.is_finite() && p.1.is_finite()
}

/// Whole decades `[10^lo, 10^hi]` enclosing `values`.
fn decade_range(values: impl Iterator<Item = f64>) -> (i32, i32) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        let l = v.log10();
        lo = lo.min(l);
        hi = hi.max(l);
    }
    if !lo.is_finite() {
        return (0, 1);
    }
    let (mut lo, mut hi) = (lo.floor() as i32, hi.ceil() as i32);
    if lo == hi {
        lo -= 1;
        hi += 1;
    }
    (lo, hi)
}

/// Decade exponents to label, thinned so at most ~10 are shown.
pub fn decade_ticks(lo: i32, hi: i32) -> Vec<i32> {
    let step = ((hi - lo) as usize).div_ceil(10).max(1);
    (lo..=hi).step_by(step).collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl LogLogPlot {
    pub fn render(&self) -> String {
        let pts = || self.series.iter().flat_map(|s| s.points.iter()).filter(|p| usable(p));
        let (x0, x1) = decade_range(pts().map(|p| p.0));
        let (y0, y1) = decade_range(pts().map(|p| p.1));
        let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
        let sx = |x: f64| LEFT + (x.log10() - x0 as f64) / (x1 - x0) as f64 * pw;
        let sy = |y: f64| TOP + ph - (y.log10() - y0 as f64) / (y1 - y0) as f64 * ph;

        let mut svg = String::new();
        let w = &mut svg;
        writeln!(w, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#).unwrap();
        writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
        writeln!(w, r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, escape(&self.title)).unwrap();

        for e in decade_ticks(x0, x1) {
            let x = sx(10f64.powi(e));
            writeln!(w, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#e0e0e0"/>"##, TOP + ph).unwrap();
            writeln!(w, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">1e{e}</text>"#, TOP + ph + 18.0).unwrap();
        }
        for e in decade_ticks(y0, y1) {
            let y = sy(10f64.powi(e));
            writeln!(w, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#e0e0e0"/>"##, LEFT + pw).unwrap();
            writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">1e{e}</text>"#, LEFT - 6.0, y + 4.0).unwrap();
        }
        writeln!(w, r#"<rect x="{LEFT}" y="{TOP}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#).unwrap();
        writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 16.0, escape(&self.x_label)).unwrap();
        writeln!(
            w,
            r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0,
            escape(&self.y_label)
        )
        .unwrap();

        for (k, series) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            for run in series.points.split(|p| !usable(p)).filter(|r| !r.is_empty()) {
                let coords: Vec<String> = run.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
                writeln!(w, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, coords.join(" ")).unwrap();
            }
            let ly = TOP + 16.0 + 20.0 * k as f64;
            let lx = LEFT + pw + 14.0;
            writeln!(w, r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#, lx + 24.0).unwrap();
            writeln!(w, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 30.0, ly + 4.0, escape(&series.label)).unwrap();
        }
        svg.push_str("</svg>\n");
        svg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_cover_the_data_decades() {
        assert_eq!(decade_range([2e-3, 0.5].into_iter()), (-3, 0));
        assert_eq!(decade_range([1.0].into_iter()), (-1, 1));
        assert_eq!(decade_ticks(-3, 0), vec![-3, -2, -1, 0]);
        assert_eq!(decade_ticks(-30, 0).len(), 11);
    }

    #[test]
    fn one_polyline_per_unbroken_run() {
        let plot = LogLogPlot {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![
                Series { label: "a".into(), points: vec![(1.0, 1.0), (2.0, 4.0)] },
                Series { label: "b<c".into(), points: vec![(1.0, 2.0), (2.0, f64::NAN), (3.0, 3.0), (4.0, 5.0)] },
            ],
        };
        let svg = plot.render();
        assert_eq!(svg.matches("<polyline").count(), 3);
        assert!(svg.contains("b&lt;c"));
        assert!(svg.ends_with("</svg>\n"));
    }
}
