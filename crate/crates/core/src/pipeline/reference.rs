//! Reference setup at the scale of the physical sensor: the chamfered
//! 48 mm x 44 mm pad, a 1 mm marker lattice imaged at 0.1 mm per pixel, an
//! off-axis virtual camera under the pad and a 10 mm spherical indenter.

use std::path::PathBuf;

use crate::config::PipelineConfig;
use crate::error::Result;
use crate::fem::assemble;
use crate::mesh::{reference_pad, MaterialParams};
use crate::optics::CameraModel;
use crate::pipeline::estimator::ForceEstimator;
use crate::pipeline::sim::{ContactSimulator, MarkerGrid};
use crate::tracking::DetectParams;

pub const REFERENCE_CAMERA_M: [f64; 3] = [0.024, 0.018, -0.048];
pub const REFERENCE_REFRACTIVE_INDEX: f64 = 1.41;
pub const REFERENCE_MARKER_SPACING_M: f64 = 1.0e-3;
pub const REFERENCE_PIXEL_PITCH_M: f64 = 1.0e-4;
pub const REFERENCE_SPHERE_RADIUS_M: f64 = 1.0e-2;

/// Configuration matching [`reference_pad`] with the default gel material.
pub fn reference_config(mesh_path: PathBuf, stiffness_path: Option<PathBuf>) -> PipelineConfig {
    PipelineConfig {
        mesh_path,
        stiffness_path,
        material: MaterialParams::gel_default(),
        camera: CameraModel::new(REFERENCE_CAMERA_M, REFERENCE_REFRACTIVE_INDEX)
            .expect("valid preset"),
        marker_spacing_m: REFERENCE_MARKER_SPACING_M,
        pixel_pitch_m: REFERENCE_PIXEL_PITCH_M,
        image_origin_m: [0.0, 0.0],
        match_radius_m: 0.5 * REFERENCE_MARKER_SPACING_M,
        idw_cutoff_m: 2.0 * REFERENCE_MARKER_SPACING_M,
        sphere_radius_m: REFERENCE_SPHERE_RADIUS_M,
        detection: DetectParams::default(),
    }
}

/// Assembles the reference pad in memory.
pub fn reference_estimator() -> Result<ForceEstimator> {
    let mesh = reference_pad();
    let config = reference_config(PathBuf::from("reference-pad.mesh"), None);
    let op = assemble(&mesh, &config.material)?;
    ForceEstimator::new(mesh, op, config)
}

/// Marker lattice of the configured spacing anchored at the image origin.
pub fn marker_grid(config: &PipelineConfig) -> MarkerGrid {
    MarkerGrid {
        spacing_m: config.marker_spacing_m,
        origin_m: config.image_origin_m,
    }
}

/// Simulator sharing the estimator's mesh, stiffness, camera and pixels.
pub fn simulator_for(estimator: &ForceEstimator, grid: MarkerGrid) -> Result<ContactSimulator<'_>> {
    let c = estimator.config();
    ContactSimulator::new(
        estimator.mesh(),
        estimator.operator(),
        c.camera,
        c.sphere_radius_m,
        grid,
        c.pixel_frame(),
    )
}
