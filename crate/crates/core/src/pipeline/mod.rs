//! The force estimation loop and the synthetic-contact oracle that scores it.

mod estimator;
mod reference;
mod render;
mod sim;
mod stream;
mod validation;

use std::path::Path;

use crate::config::PipelineConfig;
use crate::error::Result;
use crate::exec::Execution;
use crate::fem::{assemble_with, save_operator, StiffnessOperator};
use crate::io::read_mesh;

pub use estimator::{ForceEstimator, FrameResult, StageTimings, MIN_MATCHES};
pub use reference::{
    marker_grid, reference_config, reference_estimator, simulator_for, REFERENCE_CAMERA_M,
    REFERENCE_MARKER_SPACING_M, REFERENCE_PIXEL_PITCH_M, REFERENCE_REFRACTIVE_INDEX,
    REFERENCE_SPHERE_RADIUS_M,
};
pub use render::render_markers;
pub use sim::{
    image_size_for, ContactSimulator, MarkerGrid, MarkerNoise, SimulatedContact, SpherePose,
};
pub use stream::{process_batch, run_stream, FrameInput};
pub use validation::{draw_pose, sphere_suite, CaseReport, SuiteParams};

/// Assembles the configured mesh and writes the stiffness dump to `out`.
/// Returns the operator and the dump's SHA-256.
pub fn precompute(
    config: &PipelineConfig,
    out: &Path,
    exec: Execution,
) -> Result<(StiffnessOperator, String)> {
    let mesh = read_mesh(&config.mesh_path)?;
    let op = assemble_with(&mesh, &config.material, exec)?;
    let sum = save_operator(&op, out)?;
    Ok((op, sum))
}
