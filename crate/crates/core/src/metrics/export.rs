//! Delimited DET and summary exports, and a small SVG DET plot.

use std::fmt::Write as _;

use statrs::distribution::{ContinuousCDF, Normal};

use super::{DetCurve, Summary};
use crate::model::fmt_f64;

pub const DET_HEADER: &str = "threshold,apcer,bpcer,apcer_nd,bpcer_nd";
pub const SUMMARY_HEADER: &str = "strategy,eer,bpcer10,bpcer20,bpcer100";

/// Standard normal deviate of a rate; infinite at 0 and 1.
pub fn normal_deviate(p: f64) -> f64 {
    if p <= 0.0 {
        f64::NEG_INFINITY
    } else if p >= 1.0 {
        f64::INFINITY
    } else {
        Normal::standard().inverse_cdf(p)
    }
}

pub fn write_det_table(curve: &DetCurve) -> String {
    let mut out = String::from(DET_HEADER);
    out.push('\n');
    for p in &curve.points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(p.threshold),
            fmt_f64(p.apcer),
            fmt_f64(p.bpcer),
            fmt_f64(normal_deviate(p.apcer)),
            fmt_f64(normal_deviate(p.bpcer)),
        );
    }
    out
}

pub fn write_summary_table(rows: &[Summary]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.strategy,
            fmt_f64(r.eer),
            fmt_f64(r.bpcer10),
            fmt_f64(r.bpcer20),
            fmt_f64(r.bpcer100)
        );
    }
    out
}

const TICKS: [f64; 8] = [0.001, 0.01, 0.05, 0.1, 0.2, 0.4, 0.6, 0.8];
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// DET curves on normal-deviate axes (APCER horizontal, BPCER vertical).
pub fn det_svg(curves: &[(&str, &DetCurve)]) -> String {
    const SIZE: f64 = 480.0;
    const MARGIN: f64 = 60.0;
    let (lo, hi) = (normal_deviate(TICKS[0]), normal_deviate(TICKS[TICKS.len() - 1]));
    let scale = |p: f64| {
        let z = normal_deviate(p.clamp(TICKS[0], TICKS[TICKS.len() - 1]));
        (z - lo) / (hi - lo) * SIZE
    };
    let px = |p: f64| MARGIN + scale(p);
    let py = |p: f64| MARGIN + SIZE - scale(p);

    let total = SIZE + 2.0 * MARGIN;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#
    );
    for t in TICKS {
        let (x, y) = (px(t), py(t));
        let label = format!("{}", t * 100.0);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{MARGIN}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"##,
            MARGIN + SIZE,
            MARGIN + SIZE + 16.0
        );
        let _ = writeln!(
            svg,
            r##"<line x1="{MARGIN}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"##,
            MARGIN + SIZE,
            MARGIN - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">APCER (%)</text>"#,
        MARGIN + SIZE / 2.0,
        total - 12.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">BPCER (%)</text>"#,
        MARGIN + SIZE / 2.0,
        MARGIN + SIZE / 2.0
    );
    for (i, (name, curve)) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = curve
            .points
            .iter()
            .map(|p| format!("{:.2},{:.2}", px(p.apcer), py(p.bpcer)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" fill="{color}">{}</text>"#,
            MARGIN + SIZE - 150.0,
            MARGIN + 16.0 + 14.0 * i as f64,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
