//! Deterministic SVG snapshots of a configuration.

use std::fmt::Write as _;

use crate::geometry::{PointConfiguration, Window};

/// Longest side of the drawing in SVG user units.
const CANVAS: f64 = 600.0;
/// Dot radius in user units when no ball radius is given.
const DOT: f64 = 2.0;

/// One `<circle>` per point, in configuration order, inside a frame of the
/// window. With `radius` the circles are the balls `B(x, R)` (so the union
/// shows `L_R(γ)`), otherwise fixed-size dots. The y axis points up.
pub fn render_svg(config: &PointConfiguration, window: &Window, radius: Option<f64>) -> String {
    let scale = CANVAS / window.width().max(window.height());
    let (w, h) = (window.width() * scale, window.height() * scale);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.3}" height="{h:.3}" viewBox="0 0 {w:.3} {h:.3}">"#
    );
    let _ = writeln!(
        s,
        r##"<rect x="0" y="0" width="{w:.3}" height="{h:.3}" fill="none" stroke="#000" stroke-width="1"/>"##
    );
    let (r, style) = match radius {
        Some(r) => (r * scale, r##"fill="#4a7ab5" fill-opacity="0.35" stroke="#1f3f66" stroke-width="0.5""##),
        None => (DOT, r##"fill="#1f3f66""##),
    };
    for p in config.points() {
        let cx = (p.x - window.lo[0]) * scale;
        let cy = h - (p.y - window.lo[1]) * scale;
        let _ = writeln!(s, r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="{r:.3}" {style}/>"#);
    }
    s.push_str("</svg>\n");
    s
}
