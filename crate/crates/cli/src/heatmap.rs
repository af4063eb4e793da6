//! Self-contained SVG heatmap of a correlation matrix.
//!
//! Colour map, anchored at fixed endpoints: `+1` is pure blue `rgb(0,0,255)`,
//! `0` is white, `-1` is pure red `rgb(255,0,0)`, linear in between with each
//! channel rounded to the nearest integer. Undefined entries are grey
//! `rgb(128,128,128)`. Every cell is a `<rect class="cell">` carrying
//! `data-row`/`data-col` indices into the displayed problem order; cluster
//! boundaries are black `<line class="separator">` elements, one vertical and
//! one horizontal per boundary, tagged with `data-boundary`.

use std::fmt::Write as _;

use infosel_core::{Clustering, CorrelationMatrix};

pub const UNDEFINED_RGB: (u8, u8, u8) = (128, 128, 128);
const CELL: usize = 14;
const CHAR_W: usize = 7;

pub fn color_for(r: f64) -> (u8, u8, u8) {
    let r = r.clamp(-1.0, 1.0);
    if r >= 0.0 {
        let v = (255.0 * (1.0 - r)).round() as u8;
        (v, v, 255)
    } else {
        let v = (255.0 * (1.0 + r)).round() as u8;
        (255, v, v)
    }
}

/// Inverse of [`color_for`], exact up to channel rounding (`0.5 / 255`).
pub fn invert_color((r, g, b): (u8, u8, u8)) -> Option<f64> {
    if b == 255 && r == g {
        Some(1.0 - f64::from(r) / 255.0)
    } else if r == 255 && g == b {
        Some(f64::from(g) / 255.0 - 1.0)
    } else {
        None
    }
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c if (c as u32) < 0x20 && c != '\t' => out.push(' '),
            c => out.push(c),
        }
    }
    out
}

/// Renders `matrix` with problems in cluster display order.
pub fn render(matrix: &CorrelationMatrix, clustering: &Clustering, title: &str) -> infosel_core::Result<String> {
    let order = clustering.display_order();
    let m = matrix.reordered(&order)?;
    let n = m.len();
    let label_w = order.iter().map(|p| p.chars().count()).max().unwrap_or(1) * CHAR_W + 10;
    let (left, top) = (label_w, label_w + 24);
    let (width, height) = (left + n * CELL + 10, top + n * CELL + 10);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="10">"#
    );
    let _ = writeln!(s, r#"<title>{}</title>"#, escape(title));
    let _ = writeln!(s, r#"<text x="{left}" y="14" font-size="12">{}</text>"#, escape(title));
    for (i, p) in order.iter().enumerate() {
        let y = top + i * CELL + CELL / 2 + 3;
        let _ = writeln!(s, r#"<text class="row-label" x="{}" y="{y}" text-anchor="end">{}</text>"#, left - 4, escape(p));
        let x = left + i * CELL + CELL / 2 + 3;
        let _ = writeln!(
            s,
            r#"<text class="col-label" x="{x}" y="{}" text-anchor="start" transform="rotate(-90 {x} {})">{}</text>"#,
            top - 4,
            top - 4,
            escape(p)
        );
    }
    for i in 0..n {
        for j in 0..n {
            let value = m.get(i, j);
            let (r, g, b) = value.map_or(UNDEFINED_RGB, color_for);
            let class = if value.is_some() { "cell" } else { "cell undefined" };
            let label = value.map_or_else(|| "undefined".to_string(), |v| format!("{v:.4}"));
            let _ = writeln!(
                s,
                r#"<rect class="{class}" data-row="{i}" data-col="{j}" x="{}" y="{}" width="{CELL}" height="{CELL}" fill="rgb({r},{g},{b})"><title>{} / {}: {label}</title></rect>"#,
                left + j * CELL,
                top + i * CELL,
                escape(&order[i]),
                escape(&order[j]),
            );
        }
    }
    let mut boundaries = Vec::new();
    let mut acc = 0;
    for c in &clustering.clusters {
        acc += c.len();
        boundaries.push(acc);
    }
    boundaries.retain(|&b| b > 0 && b < n);
    for b in boundaries {
        let p = b * CELL;
        let _ = writeln!(
            s,
            r#"<line class="separator" data-boundary="{b}" x1="{x}" y1="{top}" x2="{x}" y2="{}" stroke="black" stroke-width="1.5"/>"#,
            top + n * CELL,
            x = left + p
        );
        let _ = writeln!(
            s,
            r#"<line class="separator" data-boundary="{b}" x1="{left}" y1="{y}" x2="{}" y2="{y}" stroke="black" stroke-width="1.5"/>"#,
            left + n * CELL,
            y = top + p
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors() {
        assert_eq!(color_for(1.0), (0, 0, 255));
        assert_eq!(color_for(0.0), (255, 255, 255));
        assert_eq!(color_for(-1.0), (255, 0, 0));
        assert_eq!(invert_color((255, 255, 255)), Some(0.0));
        assert_eq!(invert_color(UNDEFINED_RGB), None);
    }

    #[test]
    fn inversion_within_rounding() {
        for i in -1000..=1000 {
            let r = f64::from(i) / 1000.0;
            let back = invert_color(color_for(r)).unwrap();
            assert!((back - r).abs() <= 0.5 / 255.0 + 1e-12, "{r} -> {back}");
        }
    }

    #[test]
    fn escapes_markup() {
        assert_eq!(escape("a<b>&\"c'"), "a&lt;b&gt;&amp;&quot;c&apos;");
    }
}
