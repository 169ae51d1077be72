//! Probability-paper rendering as plain SVG text.
//!
//! The horizontal axis carries the observations, the vertical axis the
//! reduced variate on the left and the matching non-exceedance probability
//! on the right. Every coordinate is printed with a fixed number of
//! decimals, so identical input produces identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::distributions::Family;
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 70.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;

/// Probabilities offered as right-axis labels when they fall in range.
const PROBABILITY_TICKS: [f64; 15] = [
    0.0001, 0.001, 0.01, 0.05, 0.1, 0.2, 0.3, 0.5, 0.7, 0.8, 0.9, 0.95, 0.99, 0.999, 0.9999,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotSpec {
    pub title: String,
    /// Family whose quantile function linearises the vertical axis.
    pub family: Family,
    /// `(y_reduced, x_observed)`, sorted by `y`.
    pub points: Vec<(f64, f64)>,
    /// `x = a + b y`; `None` draws markers only.
    pub fitted_line: Option<(f64, f64)>,
    pub x_label: String,
    /// Non-exceedance probabilities labelled on the right axis.
    pub probability_ticks: Vec<f64>,
}

impl PlotSpec {
    /// Sorts the points by `y` and chooses the probability ticks that fall
    /// inside the plotted range of the reduced variate.
    pub fn new(
        title: impl Into<String>,
        family: Family,
        mut points: Vec<(f64, f64)>,
        fitted_line: Option<(f64, f64)>,
        x_label: impl Into<String>,
    ) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput(
                "a probability paper needs at least 2 points".into(),
            ));
        }
        if points.iter().any(|(y, x)| !y.is_finite() || !x.is_finite()) {
            return Err(Error::InvalidInput("plot points must be finite".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let (lo, hi) = padded(points.iter().map(|p| p.0));
        let probability_ticks = PROBABILITY_TICKS
            .iter()
            .copied()
            .filter(|p| {
                let y = family.quantile_unchecked(*p);
                y >= lo && y <= hi
            })
            .collect();
        Ok(Self {
            title: title.into(),
            family,
            points,
            fitted_line,
            x_label: x_label.into(),
            probability_ticks,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::InvalidInput(
                "a probability paper needs at least 2 points".into(),
            ));
        }
        if self.points.windows(2).any(|w| w[0].0 > w[1].0) {
            return Err(Error::InvalidInput("plot points must be sorted by y".into()));
        }
        if self.probability_ticks.iter().any(|p| !(*p > 0.0 && *p < 1.0))
            || self.probability_ticks.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidInput(
                "probability ticks must increase strictly inside (0, 1)".into(),
            ));
        }
        if let Some((a, b)) = self.fitted_line {
            if !(a.is_finite() && b.is_finite() && b > 0.0) {
                return Err(Error::InvalidInput("fitted line needs finite a and b > 0".into()));
            }
        }
        Ok(())
    }
}

/// Range of the values widened by 5% on each side (or by 1 if flat).
fn padded(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    let pad = if hi > lo { 0.05 * (hi - lo) } else { 1.0 };
    (lo - pad, hi + pad)
}

/// Round-number ticks covering `[lo, hi]`, roughly `target` of them.
fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let raw = (hi - lo) / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Shortest decimal form of a probability label.
fn probability_label(p: f64) -> String {
    let s = format!("{p:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

/// Renders the probability paper.
pub fn render_probability_paper(spec: &PlotSpec) -> Result<String> {
    spec.validate()?;
    let (x_lo, x_hi) = padded(spec.points.iter().map(|p| p.1));
    let (y_lo, y_hi) = padded(spec.points.iter().map(|p| p.0));
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut s = String::new();
    let w = &mut s;
    // Writing into a String cannot fail.
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(w, r#"<title>{}</title>"#, escape(&spec.title));
    let _ = writeln!(
        w,
        r#"<defs><clipPath id="area"><rect x="{LEFT:.3}" y="{TOP:.3}" width="{plot_w:.3}" height="{plot_h:.3}"/></clipPath></defs>"#
    );
    let _ = writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<text x="{:.3}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(&spec.title)
    );

    let _ = writeln!(w, r#"<g class="grid" stroke="gainsboro" stroke-width="1">"#);
    for p in &spec.probability_ticks {
        let y = sy(spec.family.quantile_unchecked(*p));
        let _ = writeln!(
            w,
            r#"<line x1="{LEFT:.3}" y1="{y:.3}" x2="{:.3}" y2="{y:.3}"/>"#,
            WIDTH - RIGHT
        );
    }
    for x in nice_ticks(x_lo, x_hi, 6) {
        let x = sx(x);
        let _ = writeln!(
            w,
            r#"<line x1="{x:.3}" y1="{TOP:.3}" x2="{x:.3}" y2="{:.3}"/>"#,
            HEIGHT - BOTTOM
        );
    }
    let _ = writeln!(w, "</g>");

    let _ = writeln!(
        w,
        r#"<rect class="frame" x="{LEFT:.3}" y="{TOP:.3}" width="{plot_w:.3}" height="{plot_h:.3}" fill="none" stroke="black"/>"#
    );

    let _ = writeln!(w, r#"<g class="x-axis" text-anchor="middle">"#);
    for x in nice_ticks(x_lo, x_hi, 6) {
        let _ = writeln!(
            w,
            r#"<text x="{:.3}" y="{:.3}">{}</text>"#,
            sx(x),
            HEIGHT - BOTTOM + 16.0,
            tick_label(x)
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="{:.3}" y="{:.3}">{}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0,
        escape(&spec.x_label)
    );
    let _ = writeln!(w, "</g>");

    let _ = writeln!(w, r#"<g class="reduced-axis" text-anchor="end">"#);
    for y in nice_ticks(y_lo, y_hi, 6) {
        let _ = writeln!(
            w,
            r#"<text x="{:.3}" y="{:.3}">{}</text>"#,
            LEFT - 6.0,
            sy(y) + 4.0,
            tick_label(y)
        );
    }
    let _ = writeln!(
        w,
        r#"<text transform="translate(18 {:.3}) rotate(-90)" text-anchor="middle">reduced variate ({})</text>"#,
        TOP + plot_h / 2.0,
        spec.family
    );
    let _ = writeln!(w, "</g>");

    let _ = writeln!(w, r#"<g class="probability-axis" text-anchor="start">"#);
    for p in &spec.probability_ticks {
        let y = sy(spec.family.quantile_unchecked(*p));
        let _ = writeln!(
            w,
            r#"<text x="{:.3}" y="{:.3}">{}</text>"#,
            WIDTH - RIGHT + 6.0,
            y + 4.0,
            probability_label(*p)
        );
    }
    let _ = writeln!(
        w,
        r#"<text transform="translate({:.3} {:.3}) rotate(90)" text-anchor="middle">F</text>"#,
        WIDTH - 14.0,
        TOP + plot_h / 2.0
    );
    let _ = writeln!(w, "</g>");

    if let Some((a, b)) = spec.fitted_line {
        // Endpoints at the horizontal limits; the clip path trims the rest.
        let (y1, y2) = ((x_lo - a) / b, (x_hi - a) / b);
        let _ = writeln!(
            w,
            r#"<line class="fit" clip-path="url(#area)" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="crimson" stroke-width="1.5"/>"#,
            sx(x_lo),
            sy(y1),
            sx(x_hi),
            sy(y2)
        );
    }

    let _ = writeln!(w, r#"<g class="points" fill="steelblue">"#);
    for (y, x) in &spec.points {
        let _ = writeln!(w, r#"<circle cx="{:.3}" cy="{:.3}" r="3"/>"#, sx(*x), sy(*y));
    }
    let _ = writeln!(w, "</g>");
    let _ = writeln!(w, "</svg>");
    Ok(s)
}

/// Renders `spec` and writes it to `path`.
pub fn emit_probability_paper(spec: &PlotSpec, path: &Path) -> Result<()> {
    let svg = render_probability_paper(spec)?;
    std::fs::write(path, svg)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn attr(tag: &str, name: &str) -> f64 {
        let key = format!(" {name}=\"");
        let start = tag.find(&key).unwrap() + key.len();
        let end = start + tag[start..].find('"').unwrap();
        tag[start..end].parse().unwrap()
    }

    fn elements<'a>(svg: &'a str, prefix: &str) -> Vec<&'a str> {
        svg.lines().filter(|l| l.trim_start().starts_with(prefix)).collect()
    }

    #[test]
    fn line_passes_through_collinear_points() {
        let spec = PlotSpec::new(
            "two",
            Family::Gumbel,
            vec![(-1.0, 1.0), (2.0, 7.0)],
            Some((3.0, 2.0)),
            "x",
        )
        .unwrap();
        let svg = render_probability_paper(&spec).unwrap();
        let line = elements(&svg, "<line class=\"fit\"")[0];
        let (x1, y1, x2, y2) = (attr(line, "x1"), attr(line, "y1"), attr(line, "x2"), attr(line, "y2"));
        let circles = elements(&svg, "<circle");
        assert_eq!(circles.len(), 2);
        for c in circles {
            let (cx, cy) = (attr(c, "cx"), attr(c, "cy"));
            let cross = (x2 - x1) * (cy - y1) - (y2 - y1) * (cx - x1);
            let len = ((x2 - x1).powi(2) + (y2 - y1).powi(2)).sqrt();
            assert!((cross / len).abs() < 0.01, "distance {}", cross / len);
        }
    }

    #[test]
    fn markers_only_and_deterministic() {
        let pts: Vec<(f64, f64)> = (1..=20).map(|i| (i as f64 / 5.0 - 2.0, (i * i) as f64)).collect();
        let spec = PlotSpec::new("<m&i>", Family::Normal, pts, None, "value").unwrap();
        let a = render_probability_paper(&spec).unwrap();
        let b = render_probability_paper(&spec.clone()).unwrap();
        assert_eq!(a, b);
        assert!(elements(&a, "<line class=\"fit\"").is_empty());
        assert_eq!(elements(&a, "<circle").len(), 20);
        assert!(a.contains("&lt;m&amp;i&gt;"));
        assert!(spec.probability_ticks.contains(&0.5));
    }

    #[test]
    fn ticks_and_validation() {
        let spec = PlotSpec::new("t", Family::Normal, vec![(1.0, 0.0), (-1.0, 1.0)], None, "x").unwrap();
        assert!(spec.points[0].0 < spec.points[1].0);
        assert!(spec.probability_ticks.windows(2).all(|w| w[0] < w[1]));
        assert!(PlotSpec::new("t", Family::Normal, vec![(1.0, 0.0)], None, "x").is_err());
        let mut bad = spec.clone();
        bad.fitted_line = Some((0.0, -1.0));
        assert!(render_probability_paper(&bad).is_err());
        assert_eq!(
            nice_ticks(0.0, 1.0, 5),
            vec![0.0, 0.2, 0.4, 0.6000000000000001, 0.8, 1.0]
        );
    }

    #[test]
    fn writes_file() {
        let dir = std::env::temp_dir().join(format!("ppbench-plot-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("p.svg");
        let spec = PlotSpec::new("f", Family::Gumbel, vec![(0.0, 1.0), (1.0, 2.0)], Some((1.0, 1.0)), "x").unwrap();
        emit_probability_paper(&spec, &path).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            render_probability_paper(&spec).unwrap()
        );
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
