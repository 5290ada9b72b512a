//! Deterministic SVG rendering of plane arrangements.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::arrangement::PlaneArrangement;
use crate::error::{Error, Result};
use crate::region::{Provenance, Trajectory};

#[derive(Clone, Debug, PartialEq)]
pub struct SvgOptions {
    /// Plot area size in pixels; the window is stretched to fill it.
    pub width: f64,
    pub height: f64,
    pub a_label: String,
    pub b_label: String,
    /// Draw thin polygon outlines.
    pub outlines: bool,
}

impl Default for SvgOptions {
    fn default() -> Self {
        Self {
            width: 480.0,
            height: 480.0,
            a_label: "a".into(),
            b_label: "b".into(),
            outlines: true,
        }
    }
}

const LEFT: f64 = 64.0;
const TOP: f64 = 16.0;
const RIGHT: f64 = 16.0;
const BOTTOM: f64 = 48.0;

/// Pattern hash to an RGB color through HSL.
fn color(hash: u64) -> String {
    let h = (hash % 360) as f64;
    let s = 0.55 + ((hash >> 16) % 30) as f64 / 100.0;
    let l = 0.45 + ((hash >> 32) % 25) as f64 / 100.0;
    let c = (1.0 - (2.0 * l - 1.0).abs()) * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp % 2.0 - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    let to = |v: f64| ((v + m) * 255.0).round().clamp(0.0, 255.0) as u8;
    format!("#{:02x}{:02x}{:02x}", to(r), to(g), to(b))
}

fn trajectory_style(p: Provenance) -> &'static str {
    match p {
        Provenance::Fixed => "#000000",
        Provenance::Current => "#d62728",
        Provenance::Random => "#555555",
        Provenance::External => "#1f1f7a",
    }
}

/// SVG document for the arrangement with optional trajectory overlays
/// (projected onto the plane). Polygons are `<polygon>` elements, overlays
/// `<polyline>` with a `<circle>` marking each start state.
pub fn svg_string(arr: &PlaneArrangement, overlays: &[Trajectory], opts: &SvgOptions) -> String {
    let w = arr.window();
    let (pw, ph) = (opts.width, opts.height);
    let sx = pw / (w.a_max - w.a_min);
    let sy = ph / (w.b_max - w.b_min);
    let px = |a: f64| LEFT + (a - w.a_min) * sx;
    let py = |b: f64| TOP + (w.b_max - b) * sy;
    let total_w = LEFT + pw + RIGHT;
    let total_h = TOP + ph + BOTTOM;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{total_w:.0}" height="{total_h:.0}" viewBox="0 0 {total_w:.0} {total_h:.0}">"#
    );
    let _ = writeln!(
        s,
        r#"<defs><clipPath id="plot"><rect x="{LEFT:.3}" y="{TOP:.3}" width="{pw:.3}" height="{ph:.3}"/></clipPath></defs>"#
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{total_w:.0}" height="{total_h:.0}" fill="#ffffff"/>"##);
    let stroke = if opts.outlines {
        r##" stroke="#ffffff" stroke-width="0.3""##
    } else {
        r#" stroke="none""#
    };
    let _ = writeln!(s, r#"<g id="regions" clip-path="url(#plot)">"#);
    for poly in &arr.polygons {
        let pts: Vec<String> = poly
            .vertices
            .iter()
            .map(|v| format!("{:.3},{:.3}", px(v[0]), py(v[1])))
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="{}"{stroke}/>"#,
            pts.join(" "),
            color(poly.color)
        );
    }
    let _ = writeln!(s, "</g>");

    if !overlays.is_empty() {
        let _ = writeln!(s, r#"<g id="trajectories" clip-path="url(#plot)">"#);
        for traj in overlays {
            let pts: Vec<[f64; 2]> = traj.states().iter().map(|x| arr.frame.project(x)).collect();
            let line: Vec<String> = pts
                .iter()
                .map(|p| format!("{:.3},{:.3}", px(p[0]), py(p[1])))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
                line.join(" "),
                trajectory_style(traj.provenance())
            );
            let start = pts[0];
            let _ = writeln!(
                s,
                r##"<circle cx="{:.3}" cy="{:.3}" r="4" fill="#1f77b4"/>"##,
                px(start[0]),
                py(start[1])
            );
        }
        let _ = writeln!(s, "</g>");
    }

    let _ = writeln!(s, r##"<g id="axes" font-family="sans-serif" font-size="11" fill="#000000">"##);
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT:.3}" y="{TOP:.3}" width="{pw:.3}" height="{ph:.3}" fill="none" stroke="#000000"/>"##
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let a = w.a_min + f * (w.a_max - w.a_min);
        let b = w.b_min + f * (w.b_max - w.b_min);
        let x = px(a);
        let y = py(b);
        let _ = writeln!(
            s,
            r##"<line x1="{x:.3}" y1="{:.3}" x2="{x:.3}" y2="{:.3}" stroke="#000000"/><text x="{x:.3}" y="{:.3}" text-anchor="middle">{}</text>"##,
            TOP + ph,
            TOP + ph + 4.0,
            TOP + ph + 16.0,
            tick(a)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{:.3}" y1="{y:.3}" x2="{LEFT:.3}" y2="{y:.3}" stroke="#000000"/><text x="{:.3}" y="{:.3}" text-anchor="end">{}</text>"##,
            LEFT - 4.0,
            LEFT - 6.0,
            y + 4.0,
            tick(b)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        TOP + ph + 36.0,
        escape(&opts.a_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.3}" text-anchor="middle" transform="rotate(-90 14 {:.3})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&opts.b_label)
    );
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}

fn tick(v: f64) -> String {
    let t = format!("{v:.3}");
    let t = t.trim_end_matches('0').trim_end_matches('.');
    if t == "-0" { "0".into() } else { t.to_string() }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_svg(
    arr: &PlaneArrangement,
    overlays: &[Trajectory],
    opts: &SvgOptions,
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, svg_string(arr, overlays, opts)).map_err(|e| Error::file(path, e))
}
