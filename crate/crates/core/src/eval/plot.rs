//! Two-class scatter plots as standalone SVG.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const SIZE: f64 = 480.0;
const MARGIN: f64 = 24.0;
const RADIUS: f64 = 2.5;
/// Colors for label 0 and label 1.
const COLORS: [&str; 2] = ["#ff7f0e", "#1f77b4"];
const NAMES: [&str; 2] = ["negative", "positive"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// SVG text with one `circle` per point, a legend and no axes. Output bytes
/// depend only on the inputs.
pub fn render_svg(coords: &[[f64; 2]], labels: &[u8], title: Option<&str>) -> Result<String> {
    if coords.len() != labels.len() {
        return Err(Error::shape("emit_plot", &[coords.len()], &[labels.len()]));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::InvalidLabel(bad as i64));
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for c in coords {
        for k in 0..2 {
            lo[k] = lo[k].min(c[k]);
            hi[k] = hi[k].max(c[k]);
        }
    }
    let span = |k: usize| {
        let s = hi[k] - lo[k];
        if s.is_finite() && s > 0.0 {
            s
        } else {
            1.0
        }
    };
    let inner = SIZE - 2.0 * MARGIN;
    let scale = inner / span(0).max(span(1));

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if let Some(t) = title {
        let _ = writeln!(
            svg,
            r#"<text x="{MARGIN}" y="16" font-family="sans-serif" font-size="12">{}</text>"#,
            escape(t)
        );
    }
    for (c, &l) in coords.iter().zip(labels) {
        let x = MARGIN + (c[0] - lo[0]) * scale;
        let y = SIZE - MARGIN - (c[1] - lo[1]) * scale;
        let _ = writeln!(
            svg,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="{RADIUS}" fill="{}" fill-opacity="0.7"/>"#,
            COLORS[l as usize]
        );
    }
    for (k, (color, name)) in COLORS.iter().zip(NAMES).enumerate() {
        let y = MARGIN + 14.0 * k as f64;
        let x = SIZE - MARGIN - 70.0;
        let _ = writeln!(svg, r#"<rect x="{x}" y="{}" width="8" height="8" fill="{color}"/>"#, y - 7.0);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{y}" font-family="sans-serif" font-size="11">{name}</text>"#,
            x + 12.0
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

pub fn emit_plot(coords: &[[f64; 2]], labels: &[u8], title: Option<&str>, path: &Path) -> Result<()> {
    let svg = render_svg(coords, labels, title)?;
    fs::write(path, svg).map_err(|e| Error::io(path, e))
}
