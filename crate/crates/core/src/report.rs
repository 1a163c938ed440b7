//! CSV, JSON and SVG renderings of results.
//!
//! Everything here is a pure function of its inputs with fixed number
//! formatting, so repeated runs produce byte-identical files.

use std::fmt::Write as _;

use crate::ablation::{AblationReport, Protocol};
use crate::data::ElectrodeLayout;
use crate::error::{Error, Result};

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| format!("{x:.6}"))
}

/// One line per unit: `unit,accuracy,precision,recall,f1,auc,delta,balanced_accuracy,error`.
pub fn ablation_csv(report: &AblationReport) -> String {
    let mut out = String::from("unit,accuracy,precision,recall,f1,auc,delta,balanced_accuracy,error\n");
    for row in &report.rows {
        let m = row.metrics;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            row.unit,
            opt(m.map(|m| m.accuracy)),
            opt(m.map(|m| m.precision)),
            opt(m.map(|m| m.recall)),
            opt(m.map(|m| m.f1)),
            opt(m.and_then(|m| m.auc_roc)),
            opt(row.delta),
            opt(m.map(|m| m.balanced_accuracy)),
            row.error.as_deref().unwrap_or("").replace([',', '\n'], ";"),
        );
    }
    out
}

pub fn ablation_json(report: &AblationReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

/// `(unit, accuracy)` for every successful row.
pub fn unit_accuracies(report: &AblationReport) -> Vec<(String, f64)> {
    report
        .rows
        .iter()
        .filter_map(|r| r.metrics.map(|m| (r.unit.clone(), m.accuracy)))
        .collect()
}

pub fn topomap_csv(values: &[(String, f64)]) -> String {
    let mut out = String::from("channel,value\n");
    for (name, v) in values {
        let _ = writeln!(out, "{name},{v:.6}");
    }
    out
}

pub fn parse_topomap_csv(text: &str) -> Result<Vec<(String, f64)>> {
    let bad = |line: usize, reason: String| Error::Config(format!("topomap input line {line}: {reason}"));
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("channel")) {
            continue;
        }
        let (name, value) = line
            .split_once(',')
            .ok_or_else(|| bad(i + 1, "expected `channel,value`".into()))?;
        let value: f64 = value.trim().parse().map_err(|e| bad(i + 1, format!("{e}")))?;
        if !value.is_finite() {
            return Err(bad(i + 1, "non-finite value".into()));
        }
        values.push((name.trim().to_string(), value));
    }
    Ok(values)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Linear white-to-red ramp; `t` in [0,1].
fn heat(t: f64) -> String {
    let gb = (255.0 * (1.0 - t.clamp(0.0, 1.0))).round() as u8;
    format!("#ff{gb:02x}{gb:02x}")
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Scalp map: one circle per listed electrode at its layout position,
/// colored from white (lowest value) to red (highest).
pub fn topomap_svg(layout: &ElectrodeLayout, values: &[(String, f64)], title: &str) -> Result<String> {
    let mut placed = Vec::with_capacity(values.len());
    for (name, v) in values {
        let i = layout
            .index_of(name)
            .ok_or_else(|| Error::Config(format!("channel `{name}` is not in the layout")))?;
        placed.push((name, layout.position(i), *v));
    }
    let (lo, hi) = range(placed.iter().map(|p| p.2));
    let span = hi - lo;
    let (size, c, scale) = (420.0, 210.0, 160.0);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{h}" viewBox="0 0 {size} {h}">"#,
        h = size + 30.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{c}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        escape(title)
    );
    let _ = writeln!(svg, r#"<g transform="translate(0,20)">"#);
    let _ = writeln!(
        svg,
        r#"<path class="head" d="M {l} {c} A {scale} {scale} 0 1 1 {r} {c} A {scale} {scale} 0 1 1 {l} {c} Z M {nl} {nb} L {c} {nt} L {nr} {nb}" fill="none" stroke="black"/>"#,
        l = c - scale,
        r = c + scale,
        nl = c - 12.0,
        nr = c + 12.0,
        nb = c - scale + 2.0,
        nt = c - scale - 14.0,
    );
    for (name, [x, y], v) in &placed {
        let t = if span > 0.0 { (v - lo) / span } else { 0.5 };
        let (px, py) = (c + scale * x, c - scale * y);
        let _ = writeln!(
            svg,
            r#"<circle class="electrode" cx="{px:.2}" cy="{py:.2}" r="11" fill="{}" stroke="black"><title>{} {v:.4}</title></circle>"#,
            heat(t),
            escape(name)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle" font-size="7">{}</text>"#,
            py + 2.5,
            escape(name)
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(
        svg,
        r#"<text x="10" y="{:.0}" font-size="11">min {lo:.4}  max {hi:.4}</text>"#,
        size + 20.0
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Vertical bar chart; negative values hang below the zero line.
pub fn bar_chart_svg(bars: &[(String, f64)], title: &str) -> String {
    let (lo, hi) = range(bars.iter().map(|b| b.1));
    let (lo, hi) = (lo.min(0.0), hi.max(0.0));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let (bar_w, gap, plot_h, top, left) = (36.0, 12.0, 240.0, 40.0, 50.0);
    let width = left + bars.len() as f64 * (bar_w + gap) + gap;
    let zero_y = top + plot_h * hi / span;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{h}" viewBox="0 0 {width} {h}">"#,
        h = top + plot_h + 60.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        width / 2.0,
        escape(title)
    );
    for (i, (label, v)) in bars.iter().enumerate() {
        let x = left + gap + i as f64 * (bar_w + gap);
        let h = plot_h * v.abs() / span;
        let y = if *v >= 0.0 { zero_y - h } else { zero_y };
        let _ = writeln!(
            svg,
            r##"<rect class="bar" x="{x:.2}" y="{y:.2}" width="{bar_w}" height="{h:.2}" fill="#c0392b"><title>{} {v:.4}</title></rect>"##,
            escape(label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="9">{}</text>"#,
            x + bar_w / 2.0,
            top + plot_h + 16.0,
            escape(label)
        );
    }
    let _ = writeln!(
        svg,
        r#"<line x1="{left}" y1="{zero_y:.2}" x2="{width}" y2="{zero_y:.2}" stroke="black"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="4" y="{:.2}" font-size="9">{hi:.3}</text><text x="4" y="{:.2}" font-size="9">{lo:.3}</text>"#,
        top + 4.0,
        top + plot_h
    );
    svg.push_str("</svg>\n");
    svg
}

/// Topomap of unit accuracy for channel protocols, bar chart of deltas otherwise.
pub fn ablation_figure(report: &AblationReport, layout: &ElectrodeLayout) -> Result<String> {
    let title = format!(
        "{} (baseline accuracy {:.3})",
        report.protocol, report.baseline.accuracy
    );
    match report.protocol {
        Protocol::ChannelOnly | Protocol::ChannelRemoved => topomap_svg(layout, &unit_accuracies(report), &title),
        _ => {
            let bars: Vec<(String, f64)> = report
                .rows
                .iter()
                .filter_map(|r| r.delta.map(|d| (r.unit.clone(), d)))
                .collect();
            Ok(bar_chart_svg(&bars, &title))
        }
    }
}
