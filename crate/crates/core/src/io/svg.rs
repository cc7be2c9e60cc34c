//! Static SVG plots of nodal vector fields over the top face.
//!
//! * `displacement` and `tangential-force` draw one arrow per top node from
//!   the in-plane components. Arrows are scaled so the longest one is
//!   1.5 x the node spacing (the smaller in-plane element size); nodes with a
//!   zero vector are drawn as dots, so a zero field is a grid of dots.
//! * `normal-force-heatmap` fills one cell per top node colored by the
//!   compressive normal force `-fz`: white at zero, saturated red at the
//!   largest compression, blue for tension.
//!
//! The contact patch, when given, is overlaid as a green circle. Gel-plane
//! `+y` points up in the drawing.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::mesh::HexMesh;
use crate::optics::ContactPatch;

/// Longest arrow as a multiple of the node spacing.
pub const MAX_ARROW_SPACINGS: f64 = 1.5;
const CANVAS_WIDTH_PX: f64 = 800.0;
const MARGIN_PX: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotStyle {
    Displacement,
    TangentialForce,
    NormalForceHeatmap,
}

impl FromStr for PlotStyle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "displacement" => Ok(Self::Displacement),
            "tangential-force" => Ok(Self::TangentialForce),
            "normal-force-heatmap" => Ok(Self::NormalForceHeatmap),
            other => Err(Error::invalid(format!(
                "unknown plot style `{other}` (displacement, tangential-force, normal-force-heatmap)"
            ))),
        }
    }
}

/// Vectors per top node, from a field over all nodes or over the top nodes
/// in [`HexMesh::top_nodes`] order.
fn top_vectors(field: &[[f64; 3]], mesh: &HexMesh) -> Result<Vec<[f64; 3]>> {
    let top = mesh.top_nodes();
    if field.len() == mesh.node_count() {
        Ok(top.iter().map(|&i| field[i]).collect())
    } else if field.len() == top.len() {
        Ok(field.to_vec())
    } else {
        Err(Error::Conformance(format!(
            "field has {} entries; mesh has {} nodes ({} on top)",
            field.len(),
            mesh.node_count(),
            top.len()
        )))
    }
}

/// Renders the plot to an SVG document.
pub fn quiver_svg(
    field: &[[f64; 3]],
    mesh: &HexMesh,
    style: PlotStyle,
    overlay: Option<&ContactPatch>,
) -> Result<String> {
    let vectors = top_vectors(field, mesh)?;
    if vectors.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Conformance("field has non-finite entries".into()));
    }
    let b = mesh.bounds();
    let [dx, dy, _] = mesh.element_size();
    let pad = MAX_ARROW_SPACINGS * dx.max(dy);
    let (x0, y1) = (b.min[0] - pad, b.max[1] + pad);
    let scale = (CANVAS_WIDTH_PX - 2.0 * MARGIN_PX) / (b.width() + 2.0 * pad);
    let height = (b.height() + 2.0 * pad) * scale + 2.0 * MARGIN_PX;
    let sx = |x: f64| MARGIN_PX + (x - x0) * scale;
    let sy = |y: f64| MARGIN_PX + (y1 - y) * scale;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS_WIDTH_PX}" height="{height:.0}" viewBox="0 0 {CANVAS_WIDTH_PX} {height:.0}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    let top = mesh.top_nodes();
    match style {
        PlotStyle::NormalForceHeatmap => {
            let peak = vectors.iter().map(|v| v[2].abs()).fold(0.0, f64::max);
            let (w, h) = (dx * scale, dy * scale);
            for (&node, v) in top.iter().zip(&vectors) {
                let p = mesh.xy(node);
                let level = if peak > 0.0 { -v[2] / peak } else { 0.0 };
                let fade = (255.0 * (1.0 - level.abs())).round() as u8;
                let color = if level >= 0.0 {
                    format!("rgb(255,{fade},{fade})")
                } else {
                    format!("rgb({fade},{fade},255)")
                };
                writeln!(
                    s,
                    r#"<rect class="cell" x="{:.3}" y="{:.3}" width="{w:.3}" height="{h:.3}" fill="{color}"/>"#,
                    sx(p[0]) - w / 2.0,
                    sy(p[1]) - h / 2.0
                )
                .unwrap();
            }
        }
        PlotStyle::Displacement | PlotStyle::TangentialForce => {
            let color = if style == PlotStyle::Displacement {
                "#1f4fd8"
            } else {
                "#d62728"
            };
            let peak = vectors.iter().map(|v| v[0].hypot(v[1])).fold(0.0, f64::max);
            let gain = if peak > 0.0 {
                MAX_ARROW_SPACINGS * dx.min(dy) / peak
            } else {
                0.0
            };
            for (&node, v) in top.iter().zip(&vectors) {
                let p = mesh.xy(node);
                let (ax, ay) = (sx(p[0]), sy(p[1]));
                let len = v[0].hypot(v[1]);
                if len == 0.0 {
                    writeln!(
                        s,
                        r#"<circle class="dot" cx="{ax:.3}" cy="{ay:.3}" r="1" fill="gray"/>"#
                    )
                    .unwrap();
                    continue;
                }
                let (bx, by) = (sx(p[0] + gain * v[0]), sy(p[1] + gain * v[1]));
                let (ux, uy) = (
                    (bx - ax) / (len * gain * scale),
                    (by - ay) / (len * gain * scale),
                );
                let head = (0.3 * len * gain * scale).min(6.0);
                let (lx, ly) = (bx - head * (ux + 0.5 * uy), by - head * (uy - 0.5 * ux));
                let (rx, ry) = (bx - head * (ux - 0.5 * uy), by - head * (uy + 0.5 * ux));
                writeln!(
                    s,
                    r#"<g class="arrow" stroke="{color}" fill="{color}"><line x1="{ax:.3}" y1="{ay:.3}" x2="{bx:.3}" y2="{by:.3}" stroke-width="1"/><polygon points="{bx:.3},{by:.3} {lx:.3},{ly:.3} {rx:.3},{ry:.3}"/></g>"#
                )
                .unwrap();
            }
        }
    }
    if let Some(p) = overlay {
        writeln!(
            s,
            r##"<circle class="contact" cx="{:.3}" cy="{:.3}" r="{:.3}" fill="none" stroke="#2ca02c" stroke-width="2"/>"##,
            sx(p.center[0]),
            sy(p.center[1]),
            p.radius * scale
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes [`quiver_svg`] output to `path`.
pub fn emit_quiver_svg(
    field: &[[f64; 3]],
    mesh: &HexMesh,
    style: PlotStyle,
    overlay: Option<&ContactPatch>,
    path: &Path,
) -> Result<()> {
    let svg = quiver_svg(field, mesh, style, overlay)?;
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}
