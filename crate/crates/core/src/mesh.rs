//! Single-layer Hex-8 discretization of the gel pad.
//!
//! The pad is meshed as a regular grid one element thick. Bottom-face nodes
//! are bonded to the rigid backing plate and carry fixed boundary conditions;
//! top-face nodes form the observable contact surface. Every node is on one
//! of the two faces.
//!
//! Corner ordering inside an element follows the usual isoparametric
//! convention: bottom face counterclockwise seen from +z, then the top face
//! in the same order.
//!
//! ```text
//!        7-------6
//!       /|      /|
//!      4-------5 |
//!      | 3-----|-2
//!      |/      |/
//!      0-------1
//! ```

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::element;

/// Isotropic linear-elastic material constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    youngs_modulus: f64,
    poisson_ratio: f64,
}

impl MaterialParams {
    /// Gel constants measured by tensile testing of the reference pad.
    pub const GEL_DEFAULT_YOUNGS_MODULUS_PA: f64 = 147.0e6;
    pub const GEL_DEFAULT_POISSON_RATIO: f64 = 0.3223;

    pub fn new(youngs_modulus: f64, poisson_ratio: f64) -> Result<Self> {
        if !(youngs_modulus.is_finite() && youngs_modulus > 0.0) {
            return Err(Error::invalid(format!(
                "youngs modulus must be positive, got {youngs_modulus}"
            )));
        }
        if !(poisson_ratio.is_finite() && (0.0..0.5).contains(&poisson_ratio)) {
            return Err(Error::invalid(format!(
                "poisson ratio must lie in [0, 0.5), got {poisson_ratio}"
            )));
        }
        Ok(Self {
            youngs_modulus,
            poisson_ratio,
        })
    }

    pub fn gel_default() -> Self {
        Self {
            youngs_modulus: Self::GEL_DEFAULT_YOUNGS_MODULUS_PA,
            poisson_ratio: Self::GEL_DEFAULT_POISSON_RATIO,
        }
    }

    pub fn youngs_modulus(&self) -> f64 {
        self.youngs_modulus
    }

    pub fn poisson_ratio(&self) -> f64 {
        self.poisson_ratio
    }

    /// Lamé parameters `(lambda, mu)`.
    pub fn lame(&self) -> (f64, f64) {
        let (e, nu) = (self.youngs_modulus, self.poisson_ratio);
        let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
        let mu = e / (2.0 * (1.0 + nu));
        (lambda, mu)
    }

    /// Constrained (P-wave) modulus `E(1-nu)/((1+nu)(1-2nu))`.
    pub fn constrained_modulus(&self) -> f64 {
        let (e, nu) = (self.youngs_modulus, self.poisson_ratio);
        e * (1.0 - nu) / ((1.0 + nu) * (1.0 - 2.0 * nu))
    }
}

/// Axis-aligned rectangle in the gel plane (m).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rect {
    pub fn new(min: [f64; 2], max: [f64; 2]) -> Self {
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.min[0] && p[0] <= self.max[0] && p[1] >= self.min[1] && p[1] <= self.max[1]
    }
}

/// Simple polygon in the gel plane used to trim the rectangular grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CropMask {
    polygon: Vec<[f64; 2]>,
}

impl CropMask {
    pub fn new(polygon: Vec<[f64; 2]>) -> Result<Self> {
        if polygon.len() < 3 {
            return Err(Error::invalid("crop polygon needs at least 3 vertices"));
        }
        if polygon.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::invalid("crop polygon has non-finite vertices"));
        }
        if is_self_intersecting(&polygon) {
            return Err(Error::invalid("crop polygon is self-intersecting"));
        }
        Ok(Self { polygon })
    }

    pub fn rectangle(rect: Rect) -> Self {
        Self {
            polygon: vec![
                rect.min,
                [rect.max[0], rect.min[1]],
                rect.max,
                [rect.min[0], rect.max[1]],
            ],
        }
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.polygon
    }

    /// Even-odd ray casting test.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let poly = &self.polygon;
        let mut inside = false;
        let mut j = poly.len() - 1;
        for i in 0..poly.len() {
            let (a, b) = (poly[i], poly[j]);
            if (a[1] > p[1]) != (b[1] > p[1]) {
                let x_cross = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                if p[0] < x_cross {
                    inside = !inside;
                }
            }
            j = i;
        }
        inside
    }
}

fn is_self_intersecting(poly: &[[f64; 2]]) -> bool {
    let n = poly.len();
    let edge = |i: usize| (poly[i], poly[(i + 1) % n]);
    for i in 0..n {
        for j in (i + 1)..n {
            // adjacent edges share a vertex
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (p1, p2) = edge(i);
            let (q1, q2) = edge(j);
            if segments_intersect(p1, p2, q1, q2) {
                return true;
            }
        }
    }
    false
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0])
        && p[0] <= a[0].max(b[0])
        && p[1] >= a[1].min(b[1])
        && p[1] <= a[1].max(b[1])
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// One-element-thick hexahedral mesh of the gel pad.
#[derive(Clone, Debug, PartialEq)]
pub struct HexMesh {
    nodes: Vec<[f64; 3]>,
    elements: Vec<[usize; 8]>,
    fixed_nodes: Vec<usize>,
    top_nodes: Vec<usize>,
    element_size: [f64; 3],
    /// Position of each node inside `top_nodes`, `usize::MAX` for fixed nodes.
    top_slot: Vec<usize>,
}

impl HexMesh {
    /// Builds a mesh from raw tables, checking every structural invariant.
    ///
    /// `fixed_nodes` and `top_nodes` are sorted; together they must partition
    /// the node set.
    pub fn new(
        nodes: Vec<[f64; 3]>,
        elements: Vec<[usize; 8]>,
        mut fixed_nodes: Vec<usize>,
        mut top_nodes: Vec<usize>,
        element_size: [f64; 3],
    ) -> Result<Self> {
        let n = nodes.len();
        if n == 0 || elements.is_empty() {
            return Err(Error::EmptyMesh);
        }
        if nodes.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::invalid("non-finite node coordinate"));
        }
        if element_size.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::invalid("element size components must be positive"));
        }
        for (e, conn) in elements.iter().enumerate() {
            for (a, &i) in conn.iter().enumerate() {
                if i >= n {
                    return Err(Error::invalid(format!(
                        "element {e} references node {i} >= {n}"
                    )));
                }
                if conn[..a].contains(&i) {
                    return Err(Error::invalid(format!("element {e} repeats node {i}")));
                }
            }
        }
        fixed_nodes.sort_unstable();
        top_nodes.sort_unstable();
        let mut seen = vec![0u8; n];
        for &i in &fixed_nodes {
            if i >= n {
                return Err(Error::invalid(format!("fixed node {i} out of range")));
            }
            seen[i] |= 1;
        }
        let mut top_slot = vec![usize::MAX; n];
        for (slot, &i) in top_nodes.iter().enumerate() {
            if i >= n {
                return Err(Error::invalid(format!("top node {i} out of range")));
            }
            seen[i] |= 2;
            top_slot[i] = slot;
        }
        if let Some(i) = seen.iter().position(|&s| s != 1 && s != 2) {
            return Err(Error::invalid(format!(
                "node {i} must be exactly one of fixed or top"
            )));
        }
        let mesh = Self {
            nodes,
            elements,
            fixed_nodes,
            top_nodes,
            element_size,
            top_slot,
        };
        for e in 0..mesh.elements.len() {
            element::check_jacobian(&mesh.element_corners(e)).map_err(|err| match err {
                Error::InvertedElement { point, det, .. } => Error::InvertedElement {
                    element: e,
                    point,
                    det,
                },
                other => other,
            })?;
        }
        Ok(mesh)
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 8]] {
        &self.elements
    }

    pub fn fixed_nodes(&self) -> &[usize] {
        &self.fixed_nodes
    }

    pub fn top_nodes(&self) -> &[usize] {
        &self.top_nodes
    }

    pub fn element_size(&self) -> [f64; 3] {
        self.element_size
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    pub fn is_top(&self, node: usize) -> bool {
        self.top_slot[node] != usize::MAX
    }

    /// Index of `node` within [`HexMesh::top_nodes`].
    pub fn top_slot(&self, node: usize) -> Option<usize> {
        self.top_slot
            .get(node)
            .copied()
            .filter(|&s| s != usize::MAX)
    }

    pub fn element_corners(&self, e: usize) -> [[f64; 3]; 8] {
        self.elements[e].map(|i| self.nodes[i])
    }

    /// Height of the observable surface (m).
    pub fn top_z(&self) -> f64 {
        self.nodes[self.top_nodes[0]][2]
    }

    /// In-plane position of a node.
    pub fn xy(&self, node: usize) -> [f64; 2] {
        let p = self.nodes[node];
        [p[0], p[1]]
    }

    /// In-plane bounding box of the mesh.
    pub fn bounds(&self) -> Rect {
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in &self.nodes {
            for k in 0..2 {
                min[k] = min[k].min(p[k]);
                max[k] = max[k].max(p[k]);
            }
        }
        Rect { min, max }
    }

    /// Centroid of the top face of element `e` in the gel plane.
    pub fn top_face_centroid(&self, e: usize) -> [f64; 2] {
        let conn = &self.elements[e];
        let mut c = [0.0; 2];
        for &i in &conn[4..] {
            c[0] += self.nodes[i][0];
            c[1] += self.nodes[i][1];
        }
        [c[0] / 4.0, c[1] / 4.0]
    }

    /// Top-surface node closest to `point` in the gel plane; ties go to the
    /// lowest node index.
    pub fn nearest_node(&self, point: [f64; 2]) -> usize {
        let mut best = self.top_nodes[0];
        let mut best_d2 = f64::INFINITY;
        for &i in &self.top_nodes {
            let p = self.nodes[i];
            let d2 = (p[0] - point[0]).powi(2) + (p[1] - point[1]).powi(2);
            if d2 < best_d2 {
                best_d2 = d2;
                best = i;
            }
        }
        best
    }

    /// Keeps the elements whose top-face centroid lies inside `mask`.
    ///
    /// Orphaned nodes are dropped and the survivors renumbered contiguously in
    /// their original relative order.
    pub fn crop(&self, mask: &CropMask) -> Result<HexMesh> {
        let kept: Vec<usize> = (0..self.elements.len())
            .filter(|&e| mask.contains(self.top_face_centroid(e)))
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyMesh);
        }
        let mut used = vec![false; self.nodes.len()];
        for &e in &kept {
            for &i in &self.elements[e] {
                used[i] = true;
            }
        }
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for (i, &u) in used.iter().enumerate() {
            if u {
                remap[i] = nodes.len();
                nodes.push(self.nodes[i]);
            }
        }
        let elements = kept
            .iter()
            .map(|&e| self.elements[e].map(|i| remap[i]))
            .collect();
        let pick = |set: &[usize]| -> Vec<usize> {
            set.iter()
                .filter(|&&i| used[i])
                .map(|&i| remap[i])
                .collect()
        };
        HexMesh::new(
            nodes,
            elements,
            pick(&self.fixed_nodes),
            pick(&self.top_nodes),
            self.element_size,
        )
    }

    /// Lattice of occupied grid cells, for in-plane coverage and point
    /// location queries.
    pub fn footprint(&self) -> Footprint {
        let b = self.bounds();
        let [dx, dy, _] = self.element_size;
        let cells = (0..self.elements.len())
            .map(|e| {
                let c = self.top_face_centroid(e);
                let key = (
                    ((c[0] - b.min[0]) / dx).floor() as i64,
                    ((c[1] - b.min[1]) / dy).floor() as i64,
                );
                (key, e)
            })
            .collect();
        Footprint {
            origin: b.min,
            pitch: [dx, dy],
            cells,
        }
    }

    /// Bilinear interpolation of per-node values over the top face of
    /// `element` at local coordinates `st` in `[0, 1]^2`.
    pub fn interpolate_top<const N: usize>(
        &self,
        element: usize,
        st: [f64; 2],
        values: &[[f64; N]],
    ) -> [f64; N] {
        let conn = &self.elements[element];
        let [s, t] = st;
        let w = [(1.0 - s) * (1.0 - t), s * (1.0 - t), s * t, (1.0 - s) * t];
        let mut out = [0.0; N];
        for (k, &wk) in w.iter().enumerate() {
            let v = values[conn[4 + k]];
            for c in 0..N {
                out[c] += wk * v[c];
            }
        }
        out
    }
}

/// Occupied grid cells of a mesh, keyed by lattice index.
#[derive(Clone, Debug)]
pub struct Footprint {
    origin: [f64; 2],
    pitch: [f64; 2],
    cells: HashMap<(i64, i64), usize>,
}

impl Footprint {
    const EDGE_TOLERANCE: f64 = 1e-7;

    /// Element whose top face contains `p`, with local coordinates in
    /// `[0, 1]^2`. Points on shared edges resolve to the lower cell.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 2])> {
        let u = (p[0] - self.origin[0]) / self.pitch[0];
        let v = (p[1] - self.origin[1]) / self.pitch[1];
        let candidates = |w: f64| {
            let i = w.floor();
            if w - i < Self::EDGE_TOLERANCE {
                [i as i64 - 1, i as i64]
            } else if i + 1.0 - w < Self::EDGE_TOLERANCE {
                [i as i64, i as i64 + 1]
            } else {
                [i as i64, i as i64]
            }
        };
        for i in candidates(u) {
            for j in candidates(v) {
                if let Some(&e) = self.cells.get(&(i, j)) {
                    let st = [
                        (u - i as f64).clamp(0.0, 1.0),
                        (v - j as f64).clamp(0.0, 1.0),
                    ];
                    return Some((e, st));
                }
            }
        }
        None
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        self.locate(p).is_some()
    }
}

/// Generates a regular one-element-thick grid covering `bounds`.
///
/// Cell counts use ceiling division, so the grid may overhang the upper edges
/// of `bounds` by less than one cell. Nodes are numbered bottom layer first,
/// then top layer, each row-major in x.
pub fn generate_grid(bounds: Rect, pitch: [f64; 2], thickness: f64) -> Result<HexMesh> {
    let (w, h) = (bounds.width(), bounds.height());
    if !(w.is_finite() && h.is_finite() && w > 0.0 && h > 0.0) {
        return Err(Error::invalid("bounds must have positive width and height"));
    }
    if pitch.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
        return Err(Error::invalid("element size components must be positive"));
    }
    if !(thickness.is_finite() && thickness > 0.0) {
        return Err(Error::invalid("thickness must be positive"));
    }
    let cells = |len: f64, step: f64| ((len / step) - 1e-9).ceil().max(1.0) as usize;
    let nx = cells(w, pitch[0]);
    let ny = cells(h, pitch[1]);
    let per_layer = (nx + 1) * (ny + 1);

    let mut nodes = Vec::with_capacity(2 * per_layer);
    for z in [0.0, thickness] {
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push([
                    bounds.min[0] + i as f64 * pitch[0],
                    bounds.min[1] + j as f64 * pitch[1],
                    z,
                ]);
            }
        }
    }
    let id = |i: usize, j: usize, layer: usize| layer * per_layer + j * (nx + 1) + i;
    let mut elements = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            elements.push([
                id(i, j, 0),
                id(i + 1, j, 0),
                id(i + 1, j + 1, 0),
                id(i, j + 1, 0),
                id(i, j, 1),
                id(i + 1, j, 1),
                id(i + 1, j + 1, 1),
                id(i, j + 1, 1),
            ]);
        }
    }
    HexMesh::new(
        nodes,
        elements,
        (0..per_layer).collect(),
        (per_layer..2 * per_layer).collect(),
        [pitch[0], pitch[1], thickness],
    )
}

/// Gel-pad preset at the scale of the reference sensor: a 48 mm x 44 mm pad
/// with chamfered corners, meshed with 1 mm x 1 mm x 2 mm elements.
pub fn reference_pad() -> HexMesh {
    let bounds = Rect::new([0.0, 0.0], [0.048, 0.044]);
    let mesh = generate_grid(bounds, [0.001, 0.001], 0.002).expect("valid preset");
    mesh.crop(&reference_pad_outline()).expect("valid preset")
}

/// Outline polygon used by [`reference_pad`].
pub fn reference_pad_outline() -> CropMask {
    let (w, h, c) = (0.048, 0.044, 0.0075);
    CropMask::new(vec![
        [c, 0.0],
        [w - c, 0.0],
        [w, c],
        [w, h - c],
        [w - c, h],
        [c, h],
        [0.0, h - c],
        [0.0, c],
    ])
    .expect("valid preset")
}
