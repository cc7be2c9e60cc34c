//! Refraction-aware projection model and contact-patch geometry.
//!
//! The camera views the markers through the backing plate and the gel. When
//! a marker moves along the surface normal by `d` toward the camera, the
//! camera sees it shifted in-plane by `d * tan(beta)` along the direction
//! from the camera foot point to the marker, where `beta` is the refraction
//! angle inside the gel. That apparent shift has to be removed from the
//! observed marker motion before the tangential displacement can be used.
//!
//! Sign convention: `d > 0` means motion toward the camera, which is the
//! direction an indenter pushes the surface.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{connected_components, BinaryGrid, PixelFrame};

/// Virtual (mirror-unfolded) camera and the refractive index of the gel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraModel {
    virtual_camera: [f64; 3],
    refractive_index: f64,
}

impl CameraModel {
    pub fn new(virtual_camera: [f64; 3], refractive_index: f64) -> Result<Self> {
        if virtual_camera.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("camera position must be finite"));
        }
        if !(refractive_index.is_finite() && refractive_index >= 1.0) {
            return Err(Error::invalid(format!(
                "refractive index must be >= 1, got {refractive_index}"
            )));
        }
        Ok(Self {
            virtual_camera,
            refractive_index,
        })
    }

    pub fn position(&self) -> [f64; 3] {
        self.virtual_camera
    }

    pub fn refractive_index(&self) -> f64 {
        self.refractive_index
    }
}

/// Apparent in-plane displacement produced purely by a normal displacement
/// `d` of the marker currently at `marker`.
pub fn projection_error(marker: [f64; 3], d: f64, cam: &CameraModel) -> Result<[f64; 2]> {
    let c = cam.virtual_camera;
    let r = [marker[0] - c[0], marker[1] - c[1]];
    let r_len = r[0].hypot(r[1]);
    let height = (marker[2] - c[2]).abs();
    if height == 0.0 {
        return Err(Error::Domain("marker lies in the camera plane".into()));
    }
    if d == 0.0 || r_len == 0.0 {
        return Ok([0.0, 0.0]);
    }
    // incidence angle from the in-plane offset and height above the camera
    let alpha = (r_len / height).atan();
    let s = alpha.sin() / cam.refractive_index;
    if s > 1.0 {
        return Err(Error::Domain("total internal reflection".into()));
    }
    let beta = s.asin();
    let scale = d * beta.tan() / r_len;
    Ok([r[0] * scale, r[1] * scale])
}

/// Removes the projection error from an observed in-plane displacement.
pub fn compensate(
    observed: [f64; 2],
    marker: [f64; 3],
    d: f64,
    cam: &CameraModel,
) -> Result<[f64; 2]> {
    let e = projection_error(marker, d, cam)?;
    Ok([observed[0] - e[0], observed[1] - e[1]])
}

/// Fixed-point iterations used by [`compensate_tracked`]; each one shrinks
/// the error by roughly `d / camera height`.
pub const COMPENSATION_ITERATIONS: usize = 6;

/// Recovers the tangential motion of a marker tracked from `reference` to
/// `reference + observed`, when the current marker position is unknown.
///
/// The true displaced position `x` satisfies
/// `x + projection_error((x, surface_z - d), d) = reference + observed`,
/// which is solved by fixed-point iteration starting from the observed
/// position.
pub fn compensate_tracked(
    reference: [f64; 2],
    observed: [f64; 2],
    surface_z: f64,
    d: f64,
    cam: &CameraModel,
) -> Result<[f64; 2]> {
    if d == 0.0 {
        return Ok(observed);
    }
    let seen = [reference[0] + observed[0], reference[1] + observed[1]];
    let mut x = seen;
    for _ in 0..COMPENSATION_ITERATIONS {
        let e = projection_error([x[0], x[1], surface_z - d], d, cam)?;
        x = [seen[0] - e[0], seen[1] - e[1]];
    }
    Ok([x[0] - reference[0], x[1] - reference[1]])
}

/// Circular contact between the gel and a spherical indenter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContactPatch {
    pub center: [f64; 2],
    pub radius: f64,
    pub indenter_radius: f64,
}

impl ContactPatch {
    pub fn new(center: [f64; 2], radius: f64, indenter_radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius <= indenter_radius && indenter_radius.is_finite()) {
            return Err(Error::invalid(format!(
                "patch radius {radius} must satisfy 0 < a <= R = {indenter_radius}"
            )));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("patch center must be finite"));
        }
        Ok(Self {
            center,
            radius,
            indenter_radius,
        })
    }

    /// Patch produced by pressing a sphere of radius `indenter_radius` to
    /// `depth`.
    pub fn from_depth(center: [f64; 2], indenter_radius: f64, depth: f64) -> Result<Self> {
        if !(depth > 0.0 && depth <= indenter_radius) {
            return Err(Error::invalid(format!(
                "depth {depth} must lie in (0, R = {indenter_radius}]"
            )));
        }
        let a = (depth * (2.0 * indenter_radius - depth)).sqrt();
        Self::new(center, a, indenter_radius)
    }

    /// Maximum indentation, at the patch center.
    pub fn max_depth(&self) -> f64 {
        let (a, r) = (self.radius, self.indenter_radius);
        r - (r * r - a * a).sqrt()
    }

    /// Spherical-cap indentation at `p`: zero outside the patch.
    pub fn depth_at(&self, p: [f64; 2]) -> f64 {
        let rho2 = (p[0] - self.center[0]).powi(2) + (p[1] - self.center[1]).powi(2);
        let (a, r) = (self.radius, self.indenter_radius);
        if rho2 > a * a {
            return 0.0;
        }
        ((r * r - rho2).sqrt() - (r * r - a * a).sqrt()).max(0.0)
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        (p[0] - self.center[0]).powi(2) + (p[1] - self.center[1]).powi(2) <= self.radius.powi(2)
    }
}

/// Normal indentation at each query point.
pub fn sphere_depth_field(patch: &ContactPatch, query_points: &[[f64; 2]]) -> Vec<f64> {
    query_points.iter().map(|&p| patch.depth_at(p)).collect()
}

/// Circle found in a contact mask (metric units).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FittedCircle {
    pub center: [f64; 2],
    pub radius: f64,
}

impl FittedCircle {
    pub fn into_patch(self, indenter_radius: f64) -> Result<ContactPatch> {
        ContactPatch::new(
            self.center,
            self.radius.min(indenter_radius),
            indenter_radius,
        )
    }
}

/// Algebraic (Kasa) least-squares circle through `points`.
pub fn kasa_fit(points: &[[f64; 2]]) -> Result<FittedCircle> {
    if points.len() < 3 {
        return Err(Error::FitFailure(format!(
            "need at least 3 boundary points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mean = points
        .iter()
        .fold([0.0; 2], |m, p| [m[0] + p[0] / n, m[1] + p[1] / n]);
    // x^2 + y^2 + D x + E y + F = 0 in centered coordinates
    let mut a = Matrix3::zeros();
    let mut b = Vector3::zeros();
    let mut spread = 0.0f64;
    for p in points {
        let (x, y) = (p[0] - mean[0], p[1] - mean[1]);
        spread = spread.max(x.abs()).max(y.abs());
        let row = Vector3::new(x, y, 1.0);
        let rhs = -(x * x + y * y);
        a += row * row.transpose();
        b += row * rhs;
    }
    if spread == 0.0 {
        return Err(Error::FitFailure("all boundary points coincide".into()));
    }
    // scale-free collinearity test on the 2x2 scatter block
    let sxx = a[(0, 0)] / n;
    let syy = a[(1, 1)] / n;
    let sxy = a[(0, 1)] / n;
    if (sxx * syy - sxy * sxy) <= 1e-12 * (sxx + syy).powi(2) {
        return Err(Error::FitFailure("boundary points are collinear".into()));
    }
    let sol = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::FitFailure("singular normal equations".into()))?;
    let (cx, cy) = (-sol[0] / 2.0, -sol[1] / 2.0);
    let r2 = cx * cx + cy * cy - sol[2];
    if !(r2 > 0.0) {
        return Err(Error::FitFailure("degenerate circle".into()));
    }
    Ok(FittedCircle {
        center: [cx + mean[0], cy + mean[1]],
        radius: r2.sqrt(),
    })
}

/// Boundary of the largest connected region of `mask`, as midpoints of the
/// pixel edges separating the region from its complement (pixel units).
pub fn region_boundary(mask: &BinaryGrid) -> Vec<[f64; 2]> {
    let comps = connected_components(mask);
    let Some(largest) = comps
        .iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then(b[0].cmp(&a[0])))
    else {
        return Vec::new();
    };
    let (w, h) = (mask.width(), mask.height());
    let mut in_region = vec![false; w * h];
    for &(c, r) in largest {
        in_region[r * w + c] = true;
    }
    let inside = |c: i64, r: i64| {
        c >= 0 && r >= 0 && c < w as i64 && r < h as i64 && in_region[r as usize * w + c as usize]
    };
    let mut pts = Vec::new();
    for &(c, r) in largest {
        for (dc, dr) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
            if !inside(c as i64 + dc, r as i64 + dr) {
                pts.push([c as f64 + 0.5 * dc as f64, r as f64 + 0.5 * dr as f64]);
            }
        }
    }
    pts
}

/// Fits a circle to the largest region in a binary contact mask.
pub fn fit_contact_circle(mask: &BinaryGrid, frame: &PixelFrame) -> Result<FittedCircle> {
    let boundary = region_boundary(mask);
    let px = kasa_fit(&boundary)?;
    Ok(FittedCircle {
        center: frame.to_metric(px.center),
        radius: px.radius * frame.pitch_m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cam(gamma: f64) -> CameraModel {
        CameraModel::new([0.0, 0.0, -0.03], gamma).unwrap()
    }

    #[test]
    fn zero_depth_and_axis_singularity() {
        let c = cam(1.4);
        assert_eq!(
            projection_error([0.01, 0.02, 0.0], 0.0, &c).unwrap(),
            [0.0, 0.0]
        );
        assert_eq!(
            projection_error([0.0, 0.0, 0.0], 1e-3, &c).unwrap(),
            [0.0, 0.0]
        );
    }

    #[test]
    fn error_is_parallel_to_offset() {
        let c = cam(1.41);
        let e = projection_error([0.012, -0.005, 0.002], 4e-4, &c).unwrap();
        let cross = e[0] * -0.005 - e[1] * 0.012;
        assert!(cross.abs() < 1e-18);
        assert!(e[0] > 0.0);
    }

    #[test]
    fn camera_validation() {
        assert!(CameraModel::new([0.0; 3], 0.9).is_err());
        assert!(CameraModel::new([f64::NAN, 0.0, 0.0], 1.2).is_err());
        let c = CameraModel::new([0.0, 0.0, 0.0], 1.2).unwrap();
        assert!(projection_error([1.0, 0.0, 0.0], 1.0, &c).is_err());
    }

    #[test]
    fn compensate_identities() {
        let c = cam(1.3);
        let m = [0.01, 0.004, 0.0];
        assert_eq!(compensate([1e-4, 2e-4], m, 0.0, &c).unwrap(), [1e-4, 2e-4]);
        let e = projection_error(m, 3e-4, &c).unwrap();
        assert_eq!(compensate(e, m, 3e-4, &c).unwrap(), [0.0, 0.0]);
    }

    #[test]
    fn cap_geometry() {
        let p = ContactPatch::new([0.0, 0.0], 3.0, 10.0).unwrap();
        assert_eq!(p.depth_at([3.0, 0.0]), 0.0);
        assert_eq!(p.depth_at([5.0, 0.0]), 0.0);
        assert!((p.depth_at([0.0, 0.0]) - (10.0 - 91f64.sqrt())).abs() < 1e-12);
        let full = ContactPatch::new([0.0, 0.0], 2.0, 2.0).unwrap();
        assert_eq!(full.depth_at([0.0, 0.0]), 2.0);
        assert!(ContactPatch::new([0.0, 0.0], 3.0, 2.0).is_err());
        assert!(ContactPatch::new([0.0, 0.0], 0.0, 2.0).is_err());
    }

    #[test]
    fn from_depth_inverts_max_depth() {
        let p = ContactPatch::from_depth([1.0, 2.0], 0.01, 4e-4).unwrap();
        assert!((p.max_depth() - 4e-4).abs() < 1e-15);
    }

    #[test]
    fn empty_and_collinear_masks_fail() {
        let frame = PixelFrame {
            origin_m: [0.0, 0.0],
            pitch_m: 1.0,
        };
        assert!(matches!(
            fit_contact_circle(&BinaryGrid::new(10, 10), &frame),
            Err(Error::FitFailure(_))
        ));
        assert!(kasa_fit(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]).is_err());
    }

    #[test]
    fn exact_circle_points() {
        let pts: Vec<[f64; 2]> = (0..12)
            .map(|k| {
                let t = k as f64 * 0.5;
                [3.0 + 2.0 * t.cos(), -1.0 + 2.0 * t.sin()]
            })
            .collect();
        let c = kasa_fit(&pts).unwrap();
        assert!((c.center[0] - 3.0).abs() < 1e-12);
        assert!((c.center[1] + 1.0).abs() < 1e-12);
        assert!((c.radius - 2.0).abs() < 1e-12);
    }
}
