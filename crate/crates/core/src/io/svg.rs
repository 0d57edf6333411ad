//! Minimal self-contained SVG charts.

use std::fmt::Write as _;

use crate::metrics::{ConfusionMatrix, RocCurve};

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
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

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>) -> Self {
        let mut x = (f64::INFINITY, f64::NEG_INFINITY);
        let mut y = x;
        for (px, py) in points.filter(|(a, b)| a.is_finite() && b.is_finite()) {
            x = (x.0.min(px), x.1.max(px));
            y = (y.0.min(py), y.1.max(py));
        }
        let pad = |r: (f64, f64)| {
            if !r.0.is_finite() {
                (0.0, 1.0)
            } else if r.1 - r.0 <= 0.0 {
                (r.0 - 0.5, r.1 + 0.5)
            } else {
                r
            }
        };
        Self { x: pad(x), y: pad(y) }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }
}

fn open(out: &mut String, title: &str) {
    writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        W / 2.0,
        escape(title)
    )
    .expect("string write");
}

fn axes(out: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    writeln!(
        out,
        r#"<path d="M{x0} {y0} L{x0} {y1} L{x1} {y1}" fill="none" stroke="black"/>"#
    )
    .expect("string write");
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let xv = f.x.0 + t * (f.x.1 - f.x.0);
        let yv = f.y.0 + t * (f.y.1 - f.y.0);
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>
<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            f.px(xv),
            y1 + 18.0,
            tick(xv),
            x0 - 6.0,
            f.py(yv) + 4.0,
            tick(yv)
        )
        .expect("string write");
    }
    writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>
<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (x0 + x1) / 2.0,
        H - 16.0,
        escape(xlabel),
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(ylabel)
    )
    .expect("string write");
}

fn tick(v: f64) -> String {
    if v.abs() >= 1e4 || (v != 0.0 && v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{:.3}", v).trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn legend(out: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = TOP + 8.0 + 16.0 * i as f64;
        writeln!(
            out,
            r#"<rect x="{:.1}" y="{:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            W - RIGHT - 150.0,
            y - 9.0,
            PALETTE[i % PALETTE.len()],
            W - RIGHT - 135.0,
            y,
            escape(name)
        )
        .expect("string write");
    }
}

pub struct LineSeries<'a> {
    pub name: &'a str,
    pub points: Vec<(f64, f64)>,
}

pub fn line_plot_svg(title: &str, xlabel: &str, ylabel: &str, series: &[LineSeries]) -> String {
    let f = Frame::fit(series.iter().flat_map(|s| s.points.iter().copied()));
    let mut out = String::new();
    open(&mut out, title);
    axes(&mut out, &f, xlabel, ylabel);
    for (i, s) in series.iter().enumerate() {
        let mut d = String::new();
        let mut pen_up = true;
        for &(x, y) in &s.points {
            if !(x.is_finite() && y.is_finite()) {
                pen_up = true;
                continue;
            }
            write!(d, "{}{:.2} {:.2} ", if pen_up { "M" } else { "L" }, f.px(x), f.py(y)).expect("string write");
            pen_up = false;
        }
        writeln!(
            out,
            r#"<path d="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            d.trim_end(),
            PALETTE[i % PALETTE.len()]
        )
        .expect("string write");
    }
    if series.len() > 1 {
        legend(&mut out, &series.iter().map(|s| s.name).collect::<Vec<_>>());
    }
    out.push_str("</svg>\n");
    out
}

pub struct ScatterPoint {
    pub x: f64,
    pub y: f64,
    /// Colour group, also used for the legend.
    pub group: usize,
    pub label: Option<String>,
}

pub fn scatter_svg(title: &str, xlabel: &str, ylabel: &str, points: &[ScatterPoint], groups: &[&str]) -> String {
    let f = Frame::fit(points.iter().map(|p| (p.x, p.y)));
    let mut out = String::new();
    open(&mut out, title);
    axes(&mut out, &f, xlabel, ylabel);
    for p in points.iter().filter(|p| p.x.is_finite() && p.y.is_finite()) {
        let (cx, cy) = (f.px(p.x), f.py(p.y));
        writeln!(
            out,
            r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3.5" fill="{}" fill-opacity="0.8"/>"#,
            PALETTE[p.group % PALETTE.len()]
        )
        .expect("string write");
        if let Some(label) = &p.label {
            writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" font-size="10">{}</text>"#,
                cx + 5.0,
                cy - 5.0,
                escape(label)
            )
            .expect("string write");
        }
    }
    if !groups.is_empty() {
        legend(&mut out, groups);
    }
    out.push_str("</svg>\n");
    out
}

pub fn roc_svg(curve: &RocCurve, auc: f64) -> String {
    let chance = LineSeries {
        name: "chance",
        points: vec![(0.0, 0.0), (1.0, 1.0)],
    };
    let roc = LineSeries {
        name: "ROC",
        points: curve.points.clone(),
    };
    line_plot_svg(
        &format!("ROC curve (AUC = {auc:.4})"),
        "false positive rate",
        "true positive rate",
        &[roc, chance],
    )
}

pub fn confusion_svg(matrix: &ConfusionMatrix, class_names: &[String]) -> String {
    let k = matrix.classes();
    let cell = ((W.min(H) - 120.0) / k.max(1) as f64).clamp(8.0, 60.0);
    let (x0, y0) = (110.0, 60.0);
    let width = x0 + cell * k as f64 + 20.0;
    let height = y0 + cell * k as f64 + 90.0;
    let max = (0..k).flat_map(|a| (0..k).map(move |p| (a, p))).map(|(a, p)| matrix.get(a, p)).max().unwrap_or(0).max(1);
    let name = |i: usize| class_names.get(i).cloned().unwrap_or_else(|| i.to_string());
    let mut out = String::new();
    writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">
<rect width="100%" height="100%" fill="white"/>
<text x="{:.1}" y="24" text-anchor="middle" font-size="15">Confusion matrix</text>"#,
        width / 2.0
    )
    .expect("string write");
    for a in 0..k {
        for p in 0..k {
            let v = matrix.get(a, p);
            let shade = 255 - (v as f64 / max as f64 * 200.0).round() as u8;
            let (x, y) = (x0 + p as f64 * cell, y0 + a as f64 * cell);
            writeln!(
                out,
                r#"<rect x="{x:.1}" y="{y:.1}" width="{cell:.1}" height="{cell:.1}" fill="rgb({shade},{shade},255)" stroke="gray"/>
<text x="{:.1}" y="{:.1}" text-anchor="middle">{v}</text>"#,
                x + cell / 2.0,
                y + cell / 2.0 + 4.0
            )
            .expect("string write");
        }
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>
<text x="{:.1}" y="{:.1}" text-anchor="end" transform="rotate(-45 {:.1} {:.1})">{}</text>"#,
            x0 - 6.0,
            y0 + a as f64 * cell + cell / 2.0 + 4.0,
            escape(&name(a)),
            x0 + a as f64 * cell + cell / 2.0,
            y0 + k as f64 * cell + 14.0,
            x0 + a as f64 * cell + cell / 2.0,
            y0 + k as f64 * cell + 14.0,
            escape(&name(a))
        )
        .expect("string write");
    }
    writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">predicted</text>
<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">actual</text>"#,
        x0 + cell * k as f64 / 2.0,
        height - 8.0,
        y0 + cell * k as f64 / 2.0,
        y0 + cell * k as f64 / 2.0
    )
    .expect("string write");
    out.push_str("</svg>\n");
    out
}
