//! Minimal SVG line charts: one polyline per series, broken at gaps.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

pub struct Series {
    pub label: String,
    /// `(x, y)`; `None` breaks the line.
    pub points: Vec<(f64, Option<f64>)>,
}

/// `y_floor` clips the vertical range from below (points under it break
/// the line), which keeps curves with poles readable.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series], y_floor: Option<f64>) -> String {
    let keep = |y: f64| y.is_finite() && y_floor.is_none_or(|f| y >= f);
    let xs = series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let ys = series
        .iter()
        .flat_map(|s| s.points.iter().filter_map(|p| p.1))
        .filter(|&y| keep(y));
    let (x0, x1) = bounds(xs);
    let (y0, y1) = bounds(ys);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    );
    let text = |out: &mut String, x: f64, y: f64, anchor: &str, s: &str| {
        let _ = writeln!(
            out,
            r#"<text x="{x:.1}" y="{y:.1}" font-family="sans-serif" font-size="12" text-anchor="{anchor}">{}</text>"#,
            escape(s)
        );
    };
    text(&mut out, WIDTH / 2.0, MARGIN / 2.0, "middle", title);
    text(&mut out, WIDTH / 2.0, HEIGHT - 12.0, "middle", x_label);
    text(&mut out, 12.0, HEIGHT / 2.0, "start", y_label);
    text(&mut out, MARGIN, HEIGHT - MARGIN + 16.0, "middle", &short(x0));
    text(&mut out, WIDTH - MARGIN, HEIGHT - MARGIN + 16.0, "middle", &short(x1));
    text(&mut out, MARGIN - 4.0, HEIGHT - MARGIN, "end", &short(y0));
    text(&mut out, MARGIN - 4.0, MARGIN + 4.0, "end", &short(y1));

    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut run: Vec<String> = Vec::new();
        let flush = |out: &mut String, run: &mut Vec<String>| {
            if run.len() > 1 {
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    run.join(" ")
                );
            }
            run.clear();
        };
        for &(x, y) in &s.points {
            match y.filter(|&y| keep(y)) {
                Some(y) => run.push(format!("{:.2},{:.2}", sx(x), sy(y))),
                None => flush(&mut out, &mut run),
            }
        }
        flush(&mut out, &mut run);
        let ly = MARGIN + 16.0 + 16.0 * i as f64;
        let lx = WIDTH - MARGIN - 110.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="1.5"/>"#,
            ly - 4.0,
            lx + 20.0,
            ly - 4.0
        );
        text(&mut out, lx + 26.0, ly, "start", &s.label);
    }
    out.push_str("</svg>\n");
    out
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn short(x: f64) -> String {
    format!("{x:.3}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
