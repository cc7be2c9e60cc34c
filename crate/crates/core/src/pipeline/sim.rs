//! Synthetic sphere contacts with exact ground-truth forces.
//!
//! A sphere of radius `R` pressed to `depth` and dragged by `shift` is
//! modelled by prescribing displacements on the top face:
//!
//! * every top node moves along the normal by the spherical cap depth
//!   (zero outside the contact patch);
//! * top nodes inside the patch stick to the indenter and move by `shift`;
//! * the in-plane motion of the remaining top nodes is whatever leaves them
//!   traction-free, found by solving the clamped elastic problem restricted
//!   to those degrees of freedom.
//!
//! The ground-truth force is then `K U` exactly. Markers ride on the top
//! face (bilinear interpolation of the nodal motion) and are imaged through
//! the camera model, including the refraction-induced apparent shift.

use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fem::sparse::{SkylineCholesky, SolverKind};
use crate::fem::{
    operator::solve_spd, resultant, DisplacementField, ForceField, StiffnessOperator,
};
use crate::mesh::{Footprint, HexMesh, Rect};
use crate::optics::{projection_error, CameraModel, ContactPatch};
use crate::raster::{BinaryGrid, PixelFrame};
use crate::tracking::{FrameSource, MarkerFrame};

/// Regular marker lattice printed on the gel surface. Only lattice points
/// over the meshed footprint carry markers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkerGrid {
    pub spacing_m: f64,
    pub origin_m: [f64; 2],
}

impl MarkerGrid {
    /// Reference marker positions over the mesh, row-major.
    pub fn positions(&self, mesh: &HexMesh) -> Result<Vec<[f64; 2]>> {
        if !(self.spacing_m.is_finite() && self.spacing_m > 0.0) {
            return Err(Error::invalid("marker spacing must be positive"));
        }
        let b = mesh.bounds();
        let footprint = mesh.footprint();
        let first = |lo: f64, o: f64| ((lo - o) / self.spacing_m - 1e-9).ceil() as i64;
        let last = |hi: f64, o: f64| ((hi - o) / self.spacing_m + 1e-9).floor() as i64;
        let mut out = Vec::new();
        for j in first(b.min[1], self.origin_m[1])..=last(b.max[1], self.origin_m[1]) {
            for i in first(b.min[0], self.origin_m[0])..=last(b.max[0], self.origin_m[0]) {
                let p = [
                    self.origin_m[0] + i as f64 * self.spacing_m,
                    self.origin_m[1] + j as f64 * self.spacing_m,
                ];
                if footprint.contains(p) {
                    out.push(p);
                }
            }
        }
        Ok(out)
    }
}

/// Indenter placement: patch center in the gel plane, indentation depth and
/// commanded tangential motion (all meters).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpherePose {
    pub center_m: [f64; 2],
    pub depth_m: f64,
    pub shift_m: [f64; 2],
}

/// Independent Gaussian noise added to every marker centroid of both frames.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarkerNoise {
    pub sigma_m: f64,
    pub seed: u64,
}

/// Everything a simulated contact produces.
#[derive(Clone, Debug)]
pub struct SimulatedContact {
    pub reference: MarkerFrame,
    pub current: MarkerFrame,
    pub contact_mask: BinaryGrid,
    /// `None` for a zero-depth pose.
    pub patch: Option<ContactPatch>,
    pub displacement: DisplacementField,
    pub force: ForceField,
    /// Sum of the top-node forces (N).
    pub resultant: [f64; 3],
}

/// Fixed scene around which contacts are simulated.
pub struct ContactSimulator<'a> {
    mesh: &'a HexMesh,
    operator: &'a StiffnessOperator,
    camera: CameraModel,
    indenter_radius: f64,
    pixels: PixelFrame,
    image_size: [usize; 2],
    footprint: Footprint,
    markers: Vec<[f64; 2]>,
}

impl<'a> ContactSimulator<'a> {
    pub fn new(
        mesh: &'a HexMesh,
        operator: &'a StiffnessOperator,
        camera: CameraModel,
        indenter_radius: f64,
        markers: MarkerGrid,
        pixels: PixelFrame,
    ) -> Result<Self> {
        if !operator.conforms_to(mesh) {
            return Err(Error::Conformance(
                "stiffness operator was built for another mesh".into(),
            ));
        }
        if !(indenter_radius.is_finite() && indenter_radius > 0.0) {
            return Err(Error::invalid("indenter radius must be positive"));
        }
        let image_size = image_size_for(mesh, &pixels)?;
        Ok(Self {
            mesh,
            operator,
            camera,
            indenter_radius,
            pixels,
            image_size,
            footprint: mesh.footprint(),
            markers: markers.positions(mesh)?,
        })
    }

    pub fn marker_positions(&self) -> &[[f64; 2]] {
        &self.markers
    }

    pub fn image_size(&self) -> [usize; 2] {
        self.image_size
    }

    pub fn pixel_frame(&self) -> PixelFrame {
        self.pixels
    }

    /// Whether `p` lies over the meshed footprint.
    pub fn covers(&self, p: [f64; 2]) -> bool {
        self.footprint.contains(p)
    }

    pub fn bounds(&self) -> Rect {
        self.mesh.bounds()
    }

    pub fn indenter_radius(&self) -> f64 {
        self.indenter_radius
    }

    /// Simulates one contact. Noise, when given, perturbs both frames.
    pub fn simulate_contact(
        &self,
        pose: &SpherePose,
        noise: Option<MarkerNoise>,
    ) -> Result<SimulatedContact> {
        if !self.footprint.contains(pose.center_m) {
            return Err(Error::NoContact(format!(
                "indenter center {:?} is outside the gel",
                pose.center_m
            )));
        }
        if !(pose.depth_m.is_finite() && pose.depth_m >= 0.0) {
            return Err(Error::NoContact(format!(
                "depth {} does not touch the gel",
                pose.depth_m
            )));
        }
        if pose.shift_m.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("shift must be finite"));
        }
        let n = self.mesh.node_count();
        let [w, h] = self.image_size;
        let (patch, u) = if pose.depth_m == 0.0 {
            (None, vec![[0.0; 3]; n])
        } else {
            let patch =
                ContactPatch::from_depth(pose.center_m, self.indenter_radius, pose.depth_m)?;
            (Some(patch), self.prescribe(&patch, pose.shift_m)?)
        };
        let displacement = DisplacementField::from_vec(u)?;
        let force = self.operator.reconstruct_force(&displacement)?;
        let total = resultant(&force, self.mesh.top_nodes());

        let contact_mask = match &patch {
            None => BinaryGrid::new(w, h),
            Some(p) => BinaryGrid::from_fn(w, h, |c, r| {
                p.contains(self.pixels.to_metric([c as f64, r as f64]))
            }),
        };

        let top_z = self.mesh.top_z();
        let mut current = Vec::with_capacity(self.markers.len());
        for &p in &self.markers {
            let (e, st) = self
                .footprint
                .locate(p)
                .expect("markers lie on the footprint");
            let t = self.mesh.interpolate_top(e, st, displacement.as_slice());
            let d = patch.map_or(0.0, |pt| pt.depth_at(p));
            let x = [p[0] + t[0], p[1] + t[1]];
            let err = projection_error([x[0], x[1], top_z - d], d, &self.camera)?;
            current.push([x[0] + err[0], x[1] + err[1]]);
        }
        let mut reference = self.markers.clone();
        if let Some(noise) = noise {
            let normal = Normal::new(0.0, noise.sigma_m)
                .map_err(|e| Error::invalid(format!("noise sigma: {e}")))?;
            let mut rng = StdRng::seed_from_u64(noise.seed);
            for p in reference.iter_mut().chain(current.iter_mut()) {
                p[0] += normal.sample(&mut rng);
                p[1] += normal.sample(&mut rng);
            }
        }
        Ok(SimulatedContact {
            reference: MarkerFrame::new(reference, FrameSource::Reference),
            current: MarkerFrame::new(current, FrameSource::Current),
            contact_mask,
            patch,
            displacement,
            force,
            resultant: total,
        })
    }

    /// Nodal displacements for a sticking sphere contact.
    fn prescribe(&self, patch: &ContactPatch, shift: [f64; 2]) -> Result<Vec<[f64; 3]>> {
        let mesh = self.mesh;
        let mut u = vec![[0.0; 3]; mesh.node_count()];
        let mut free = Vec::new();
        for &node in mesh.top_nodes() {
            let p = mesh.xy(node);
            u[node][2] = -patch.depth_at(p);
            if patch.contains(p) {
                u[node][0] = shift[0];
                u[node][1] = shift[1];
            } else {
                free.extend_from_slice(&[3 * node, 3 * node + 1]);
            }
        }
        if free.is_empty() {
            return Ok(u);
        }
        let k = self.operator.matrix();
        let ku = k.matvec(u.as_flattened());
        let rhs: Vec<f64> = free.iter().map(|&i| -ku[i]).collect();
        let k_ff = k.extract(&free, &free);
        let chol = SkylineCholesky::factor(&k_ff)?;
        let x = solve_spd(&k_ff, &rhs, SolverKind::Direct, || Ok(&chol))?;
        for (&dof, v) in free.iter().zip(x) {
            u[dof / 3][dof % 3] = v;
        }
        Ok(u)
    }
}

/// Image size in pixels that covers the mesh footprint.
pub fn image_size_for(mesh: &HexMesh, pixels: &PixelFrame) -> Result<[usize; 2]> {
    if !(pixels.pitch_m.is_finite() && pixels.pitch_m > 0.0) {
        return Err(Error::invalid("pixel pitch must be positive"));
    }
    let b = mesh.bounds();
    let far = pixels.to_pixel(b.max);
    if far.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::invalid("image origin lies beyond the gel"));
    }
    Ok([far[0].floor() as usize + 1, far[1].floor() as usize + 1])
}
