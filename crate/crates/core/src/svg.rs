//! Deterministic SVG emitters for the standard plot layouts: line plots
//! with reference and envelope curves, red-to-white heat grids, scatter
//! plots, replicate histograms, and point maps.
//!
//! Output is plain string assembly with stable float formatting, so the
//! same inputs always produce the same bytes.

use crate::intensity::Raster;
use crate::patterns::{Mark, MarkedPattern, PointPattern};
use crate::secondorder::FunctionEstimate;
use crate::spacetime::STGrid;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 56.0;

fn f(v: f64) -> String {
    if !v.is_finite() {
        return "0".into();
    }
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-" {
        "0".into()
    } else {
        s.to_string()
    }
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    let a = v.abs();
    if (1e-3..1e5).contains(&a) {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

struct Frame {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn from_ranges(x: (f64, f64), y: (f64, f64)) -> Frame {
        let pad = |lo: f64, hi: f64| {
            let span = (hi - lo).abs();
            if span == 0.0 {
                (lo - 1.0, hi + 1.0)
            } else {
                (lo - 0.05 * span, hi + 0.05 * span)
            }
        };
        let (x_min, x_max) = pad(x.0, x.1);
        let (y_min, y_max) = pad(y.0, y.1);
        Frame {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x_min) / (self.x_max - self.x_min) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM
            - (y - self.y_min) / (self.y_max - self.y_min) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn header(out: &mut String, title: &str) {
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{}\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
        f(WIDTH / 2.0),
        xml_escape(title)
    ));
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = HEIGHT - MARGIN_BOTTOM;
    let y1 = MARGIN_TOP;
    out.push_str(&format!(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
        f(x0),
        f(y1),
        f(x1 - x0),
        f(y0 - y1)
    ));
    for k in 0..=4 {
        let fx = frame.x_min + (frame.x_max - frame.x_min) * k as f64 / 4.0;
        let px = frame.px(fx);
        out.push_str(&format!(
            "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n",
            f(px),
            f(y0),
            f(y0 + 5.0)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
            f(px),
            f(y0 + 18.0),
            tick_label(fx)
        ));
        let fy = frame.y_min + (frame.y_max - frame.y_min) * k as f64 / 4.0;
        let py = frame.py(fy);
        out.push_str(&format!(
            "<line x1=\"{1}\" y1=\"{0}\" x2=\"{2}\" y2=\"{0}\" stroke=\"black\"/>\n",
            f(py),
            f(x0 - 5.0),
            f(x0)
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
            f(x0 - 8.0),
            f(py + 4.0),
            tick_label(fy)
        ));
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">{}</text>\n",
        f((x0 + x1) / 2.0),
        f(HEIGHT - 14.0),
        xml_escape(x_label)
    ));
    out.push_str(&format!(
        "<text x=\"18\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
        f((y0 + y1) / 2.0),
        f((y0 + y1) / 2.0),
        xml_escape(y_label)
    ));
}

fn polyline(out: &mut String, frame: &Frame, xs: &[f64], ys: &[f64], style: &str) {
    let mut points = String::new();
    for (&x, &y) in xs.iter().zip(ys) {
        if !y.is_finite() {
            continue;
        }
        points.push_str(&format!("{},{} ", f(frame.px(x)), f(frame.py(y))));
    }
    out.push_str(&format!(
        "<polyline fill=\"none\" points=\"{}\" {style}/>\n",
        points.trim_end()
    ));
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Line plot of a function estimate: estimate solid, reference dotted,
/// envelope dashed.
pub fn function_plot(est: &FunctionEstimate, title: &str, x_label: &str, y_label: &str) -> String {
    let mut y_lo = f64::INFINITY;
    let mut y_hi = f64::NEG_INFINITY;
    let mut scan = |vals: &[f64]| {
        for &v in vals {
            if v.is_finite() {
                y_lo = y_lo.min(v);
                y_hi = y_hi.max(v);
            }
        }
    };
    scan(&est.values);
    if let Some(env) = &est.envelope {
        scan(&env.lower);
        scan(&env.upper);
    }
    if let Some(t) = &est.theoretical {
        scan(t);
    }
    if !y_lo.is_finite() {
        y_lo = 0.0;
        y_hi = 1.0;
    }
    let x_lo = est.grid.first().copied().unwrap_or(0.0).min(0.0);
    let x_hi = est.grid.last().copied().unwrap_or(1.0);
    let frame = Frame::from_ranges((x_lo, x_hi), (y_lo, y_hi));

    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &frame, x_label, y_label);
    if let Some(theo) = &est.theoretical {
        polyline(
            &mut out,
            &frame,
            &est.grid,
            theo,
            "stroke=\"black\" stroke-width=\"1\" stroke-dasharray=\"2,3\"",
        );
    }
    if let Some(env) = &est.envelope {
        for band in [&env.lower, &env.upper] {
            polyline(
                &mut out,
                &frame,
                &est.grid,
                band,
                "stroke=\"#555555\" stroke-width=\"1\" stroke-dasharray=\"6,4\"",
            );
        }
    }
    polyline(
        &mut out,
        &frame,
        &est.grid,
        &est.values,
        "stroke=\"#b22222\" stroke-width=\"1.6\"",
    );
    out.push_str("</svg>\n");
    out
}

fn ramp_color(v: f64, lo: f64, hi: f64) -> String {
    // Low-to-high runs red to white.
    let t = if hi > lo { ((v - lo) / (hi - lo)).clamp(0.0, 1.0) } else { 0.0 };
    let g = (255.0 * t).round() as u8;
    format!("rgb(255,{g},{g})")
}

fn grid_cells(out: &mut String, frame: &Frame, xs: &[f64], ys: &[f64], value: impl Fn(usize, usize) -> f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for iy in 0..ys.len() {
        for ix in 0..xs.len() {
            let v = value(ix, iy);
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    let edges = |vals: &[f64]| -> Vec<f64> {
        // Cell edges: midpoints between grid values, extended at each end.
        let n = vals.len();
        let mut e = Vec::with_capacity(n + 1);
        let first_w = if n > 1 { vals[1] - vals[0] } else { vals[0].abs().max(1.0) };
        e.push(vals[0] - first_w / 2.0);
        for i in 1..n {
            e.push((vals[i - 1] + vals[i]) / 2.0);
        }
        let last_w = if n > 1 { vals[n - 1] - vals[n - 2] } else { first_w };
        e.push(vals[n - 1] + last_w / 2.0);
        e
    };
    let xe = edges(xs);
    let ye = edges(ys);
    for iy in 0..ys.len() {
        for ix in 0..xs.len() {
            let v = value(ix, iy);
            let fill = if v.is_finite() {
                ramp_color(v, lo, hi)
            } else {
                "rgb(180,180,180)".into()
            };
            let x0 = frame.px(xe[ix]);
            let x1 = frame.px(xe[ix + 1]);
            let y0 = frame.py(ye[iy + 1]);
            let y1 = frame.py(ye[iy]);
            out.push_str(&format!(
                "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{fill}\"/>\n",
                f(x0),
                f(y0),
                f(x1 - x0),
                f(y1 - y0)
            ));
        }
    }
}

/// Red-to-white heat map of an `(s, t)` grid; no-data cells are gray.
pub fn st_grid_heatmap(grid: &STGrid, title: &str, x_label: &str, y_label: &str) -> String {
    let s = grid.s_values();
    let t = grid.t_values();
    let frame = Frame::from_ranges(
        (s[0] - (s.last().unwrap() - s[0]) * 0.1, *s.last().unwrap()),
        (t[0] - (t.last().unwrap() - t[0]) * 0.1, *t.last().unwrap()),
    );
    let mut out = String::new();
    header(&mut out, title);
    grid_cells(&mut out, &frame, s, t, |ix, iy| grid.get(ix, iy));
    axes(&mut out, &frame, x_label, y_label);
    out.push_str("</svg>\n");
    out
}

/// Red-to-white heat image of a raster (intensity surface or ratio).
pub fn raster_heatmap(raster: &Raster, title: &str) -> String {
    let xs: Vec<f64> = (0..raster.nx)
        .map(|ix| raster.origin.x + (ix as f64 + 0.5) * raster.cell_width)
        .collect();
    let ys: Vec<f64> = (0..raster.ny)
        .map(|iy| raster.origin.y + (iy as f64 + 0.5) * raster.cell_height)
        .collect();
    let frame = Frame::from_ranges(
        (raster.origin.x, raster.origin.x + raster.nx as f64 * raster.cell_width),
        (raster.origin.y, raster.origin.y + raster.ny as f64 * raster.cell_height),
    );
    let mut out = String::new();
    header(&mut out, title);
    grid_cells(&mut out, &frame, &xs, &ys, |ix, iy| raster.get(ix, iy));
    axes(&mut out, &frame, "x", "y");
    out.push_str("</svg>\n");
    out
}

/// Scatter plot of paired values (residuals against the factorization
/// benchmark, and similar diagnostics).
pub fn scatter_plot(
    xs: &[f64],
    ys: &[f64],
    title: &str,
    x_label: &str,
    y_label: &str,
) -> String {
    let finite: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| x.is_finite() && y.is_finite())
        .map(|(&x, &y)| (x, y))
        .collect();
    let (mut x_lo, mut x_hi, mut y_lo, mut y_hi) = (0.0f64, 1.0f64, 0.0f64, 1.0f64);
    if !finite.is_empty() {
        x_lo = finite.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        x_hi = finite.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        y_lo = finite.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        y_hi = finite.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    }
    let frame = Frame::from_ranges((x_lo, x_hi), (y_lo.min(0.0), y_hi.max(0.0)));
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &frame, x_label, y_label);
    let zero_y = frame.py(0.0);
    out.push_str(&format!(
        "<line x1=\"{}\" y1=\"{zero}\" x2=\"{}\" y2=\"{zero}\" stroke=\"black\" stroke-dasharray=\"2,3\"/>\n",
        f(MARGIN_LEFT),
        f(WIDTH - MARGIN_RIGHT),
        zero = f(zero_y)
    ));
    for (x, y) in finite {
        out.push_str(&format!(
            "<circle cx=\"{}\" cy=\"{}\" r=\"3\" fill=\"#1f4e9c\" fill-opacity=\"0.75\"/>\n",
            f(frame.px(x)),
            f(frame.py(y))
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Histogram of replicate statistics with the observed value marked by a
/// vertical line.
pub fn replicate_histogram(replicates: &[f64], observed: f64, title: &str, x_label: &str) -> String {
    let mut lo = observed;
    let mut hi = observed;
    for &v in replicates {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo == hi {
        lo -= 1.0;
        hi += 1.0;
    }
    let bins = 30usize;
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in replicates {
        let mut k = ((v - lo) / width).floor() as usize;
        if k >= bins {
            k = bins - 1;
        }
        counts[k] += 1;
    }
    let max_count = counts.iter().copied().max().unwrap_or(1).max(1);
    let frame = Frame::from_ranges((lo, hi), (0.0, max_count as f64));
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &frame, x_label, "count");
    for (k, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let x0 = frame.px(lo + k as f64 * width);
        let x1 = frame.px(lo + (k + 1) as f64 * width);
        let y0 = frame.py(c as f64);
        let y1 = frame.py(0.0);
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#7799cc\" stroke=\"#335588\"/>\n",
            f(x0),
            f(y0),
            f(x1 - x0),
            f(y1 - y0)
        ));
    }
    let px = frame.px(observed);
    out.push_str(&format!(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#b22222\" stroke-width=\"2\"/>\n",
        f(px),
        f(frame.py(0.0)),
        f(MARGIN_TOP)
    ));
    out.push_str("</svg>\n");
    out
}

/// Bar chart of a temporal frequency histogram.
pub fn histogram_bars(counts: &[u64], bin_width: f64, title: &str, x_label: &str) -> String {
    let max_count = counts.iter().copied().max().unwrap_or(1).max(1);
    let hi = counts.len() as f64 * bin_width;
    let frame = Frame::from_ranges((0.0, hi.max(bin_width)), (0.0, max_count as f64));
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &frame, x_label, "count");
    for (k, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        let x0 = frame.px(k as f64 * bin_width) + 1.0;
        let x1 = frame.px((k + 1) as f64 * bin_width) - 1.0;
        let y0 = frame.py(c as f64);
        let y1 = frame.py(0.0);
        out.push_str(&format!(
            "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#cc6644\" stroke=\"#884422\"/>\n",
            f(x0),
            f(y0),
            f((x1 - x0).max(0.5)),
            f(y1 - y0)
        ));
    }
    out.push_str("</svg>\n");
    out
}

/// Map of event locations; cases and controls get distinct glyphs.
pub fn point_map(pattern: &PointPattern, marks: Option<&MarkedPattern>, title: &str) -> String {
    let (lo, hi) = pattern.window().bounding_box();
    let frame = Frame::from_ranges((lo.x, hi.x), (lo.y, hi.y));
    let mut out = String::new();
    header(&mut out, title);
    axes(&mut out, &frame, "x", "y");
    if let Some(vertices) = pattern.window().vertices() {
        let mut pts = String::new();
        for v in vertices.iter().chain(std::iter::once(&vertices[0])) {
            pts.push_str(&format!("{},{} ", f(frame.px(v.x)), f(frame.py(v.y))));
        }
        out.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"black\" points=\"{}\"/>\n",
            pts.trim_end()
        ));
    }
    match marks {
        Some(m) => {
            for (p, mk) in m.base().points().iter().zip(m.marks()) {
                let (color, r) = match mk {
                    Mark::Case => ("#b22222", 3.0),
                    Mark::Control => ("#888888", 2.0),
                };
                out.push_str(&format!(
                    "<circle cx=\"{}\" cy=\"{}\" r=\"{r}\" fill=\"{color}\" fill-opacity=\"0.7\"/>\n",
                    f(frame.px(p.x)),
                    f(frame.py(p.y))
                ));
            }
        }
        None => {
            for p in pattern.points() {
                out.push_str(&format!(
                    "<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"#1f4e9c\" fill-opacity=\"0.7\"/>\n",
                    f(frame.px(p.x)),
                    f(frame.py(p.y))
                ));
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::secondorder::EstimateMeta;

    #[test]
    fn function_plot_is_deterministic_and_well_formed() {
        let est = FunctionEstimate {
            grid: vec![0.1, 0.2, 0.3],
            values: vec![0.01, 0.05, 0.2],
            envelope: Some(crate::secondorder::Envelope {
                lower: vec![0.0, 0.01, 0.1],
                upper: vec![0.02, 0.09, 0.3],
            }),
            theoretical: Some(vec![0.03, 0.12, 0.28]),
            meta: EstimateMeta::default(),
        };
        let a = function_plot(&est, "estimate", "s", "K(s)");
        let b = function_plot(&est, "estimate", "s", "K(s)");
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.trim_end().ends_with("</svg>"));
        assert_eq!(a.matches("<polyline").count(), 4);
    }

    #[test]
    fn heatmap_marks_no_data_gray() {
        let grid = STGrid::new(
            vec![1.0, 2.0],
            vec![1.0, 2.0],
            vec![0.5, f64::NAN, 1.0, 2.0],
        )
        .unwrap();
        let svg = st_grid_heatmap(&grid, "se", "s", "t");
        assert!(svg.contains("rgb(180,180,180)"));
        assert!(svg.contains("rgb(255,"));
    }

    #[test]
    fn replicate_histogram_draws_observed_line() {
        let reps: Vec<f64> = (0..100).map(|i| (i as f64) / 10.0 - 5.0).collect();
        let svg = replicate_histogram(&reps, 4.2, "null distribution", "U");
        assert!(svg.contains("stroke=\"#b22222\""));
    }
}
