//! Per-frame force estimation: track, fit the contact, compensate,
//! interpolate and apply `F = K U`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fem::{self, resultant, DisplacementField, ForceField, StiffnessOperator};
use crate::io::read_mesh;
use crate::mesh::HexMesh;
use crate::optics::{compensate_tracked, fit_contact_circle, ContactPatch};
use crate::raster::BinaryGrid;
use crate::tracking::{interpolate_scattered, match_markers, MarkerFrame};

/// Fewest matched markers a frame needs to be reconstructed.
pub const MIN_MATCHES: usize = 3;

/// Wall time per stage in milliseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StageTimings {
    pub matching_ms: f64,
    pub contact_fit_ms: f64,
    pub compensation_ms: f64,
    pub interpolation_ms: f64,
    pub reconstruction_ms: f64,
    pub total_ms: f64,
}

impl StageTimings {
    pub fn stage_sum(&self) -> f64 {
        self.matching_ms
            + self.contact_fit_ms
            + self.compensation_ms
            + self.interpolation_ms
            + self.reconstruction_ms
    }
}

/// Output of one processed frame.
#[derive(Clone, Debug)]
pub struct FrameResult {
    pub timestamp: f64,
    /// `false` for degraded frames; the fields are then zero and `note`
    /// says why.
    pub valid: bool,
    pub note: Option<String>,
    pub patch: Option<ContactPatch>,
    pub matched: usize,
    pub displacement: DisplacementField,
    pub force: ForceField,
    /// Sum of the top-node forces (N).
    pub resultant: [f64; 3],
    /// Sum of the bottom-node reactions (N).
    pub reaction: [f64; 3],
    pub timings: StageTimings,
}

impl FrameResult {
    fn degraded(timestamp: f64, node_count: usize, matched: usize, note: String) -> Self {
        Self {
            timestamp,
            valid: false,
            note: Some(note),
            patch: None,
            matched,
            displacement: DisplacementField::zeros(node_count),
            force: ForceField::zeros(node_count),
            resultant: [0.0; 3],
            reaction: [0.0; 3],
            timings: StageTimings::default(),
        }
    }

    /// Recomputes the resultant from the force field and compares it with
    /// the stored value.
    pub fn resultant_consistent(&self, top_nodes: &[usize], tolerance: f64) -> bool {
        let r = resultant(&self.force, top_nodes);
        (0..3).all(|c| (r[c] - self.resultant[c]).abs() <= tolerance)
    }

    /// Equality of everything except the wall-clock timings.
    pub fn same_outcome(&self, other: &FrameResult) -> bool {
        self.timestamp == other.timestamp
            && self.valid == other.valid
            && self.note == other.note
            && self.patch == other.patch
            && self.matched == other.matched
            && self.displacement == other.displacement
            && self.force == other.force
            && self.resultant == other.resultant
            && self.reaction == other.reaction
    }
}

fn ms_since(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Mesh, stiffness and configuration bundled for repeated frame processing.
pub struct ForceEstimator {
    mesh: HexMesh,
    operator: StiffnessOperator,
    config: PipelineConfig,
    exec: Execution,
    top_xy: Vec<[f64; 2]>,
}

impl ForceEstimator {
    pub fn new(mesh: HexMesh, operator: StiffnessOperator, config: PipelineConfig) -> Result<Self> {
        config.validate()?;
        if !operator.conforms_to(&mesh) {
            return Err(Error::Conformance(
                "stiffness operator was built for another mesh".into(),
            ));
        }
        let top_xy = mesh.top_nodes().iter().map(|&i| mesh.xy(i)).collect();
        Ok(Self {
            mesh,
            operator,
            config,
            exec: Execution::default(),
            top_xy,
        })
    }

    /// Reads the mesh and loads the stiffness dump when the configured file
    /// exists; otherwise assembles the stiffness in memory.
    pub fn from_config(config: PipelineConfig) -> Result<Self> {
        let mesh = read_mesh(&config.mesh_path)?;
        let operator = match &config.stiffness_path {
            Some(p) if p.exists() => fem::load_operator(p, None)?,
            _ => fem::assemble(&mesh, &config.material)?,
        };
        Self::new(mesh, operator, config)
    }

    /// Execution policy for the matvec and interpolation inside a frame.
    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn mesh(&self) -> &HexMesh {
        &self.mesh
    }

    pub fn operator(&self) -> &StiffnessOperator {
        &self.operator
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    /// Estimates the contact force field between two marker frames.
    ///
    /// `contact_mask` is in the configured pixel frame; `None` or a blank
    /// mask means no normal indentation. Frames that cannot be reconstructed
    /// (too few matches, unfittable contact mask) come back with
    /// `valid == false` instead of an error.
    pub fn process_frame(
        &self,
        reference: &MarkerFrame,
        current: &MarkerFrame,
        contact_mask: Option<&BinaryGrid>,
        timestamp: f64,
    ) -> FrameResult {
        let n = self.mesh.node_count();
        let start = Instant::now();
        let mut timings = StageTimings::default();

        let t = Instant::now();
        let corr = match_markers(reference, current, self.config.match_radius_m);
        timings.matching_ms = ms_since(t);
        let matched = corr.pairs.len();
        if matched < MIN_MATCHES {
            let note = format!("only {matched} markers matched, need {MIN_MATCHES}");
            return FrameResult::degraded(timestamp, n, matched, note);
        }

        let t = Instant::now();
        let patch = match contact_mask.filter(|m| !m.is_blank()) {
            None => None,
            Some(mask) => match fit_contact_circle(mask, &self.config.pixel_frame())
                .and_then(|c| c.into_patch(self.config.sphere_radius_m))
            {
                Ok(p) => Some(p),
                Err(e) => return FrameResult::degraded(timestamp, n, matched, e.to_string()),
            },
        };
        let depth_at = |p: [f64; 2]| patch.map_or(0.0, |pt| pt.depth_at(p));
        timings.contact_fit_ms = ms_since(t);

        // Depth is evaluated at each marker's reference position for the
        // compensation and at node positions for the normal displacement.
        let t = Instant::now();
        let top_z = self.mesh.top_z();
        let mut sites = Vec::with_capacity(matched);
        let mut values = Vec::with_capacity(matched);
        for pair in &corr.pairs {
            let d = depth_at(pair.reference);
            match compensate_tracked(
                pair.reference,
                pair.displacement(),
                top_z,
                d,
                &self.config.camera,
            ) {
                Ok(v) => {
                    sites.push(pair.reference);
                    values.push(v);
                }
                Err(e) => return FrameResult::degraded(timestamp, n, matched, e.to_string()),
            }
        }
        timings.compensation_ms = ms_since(t);

        let t = Instant::now();
        let tangential = match interpolate_scattered(
            &sites,
            &values,
            &self.top_xy,
            &self.config.idw(),
            self.exec,
        ) {
            Ok(v) => v,
            Err(e) => return FrameResult::degraded(timestamp, n, matched, e.to_string()),
        };
        timings.interpolation_ms = ms_since(t);

        let t = Instant::now();
        let mut u = vec![[0.0; 3]; n];
        for ((&node, xy), tv) in self
            .mesh
            .top_nodes()
            .iter()
            .zip(&self.top_xy)
            .zip(&tangential)
        {
            u[node] = [tv[0], tv[1], -depth_at(*xy)];
        }
        let displacement = DisplacementField::from_vec(u).expect("finite displacements");
        let force = self
            .operator
            .reconstruct_force_with(&displacement, self.exec)
            .expect("field conforms to the operator");
        let top = resultant(&force, self.mesh.top_nodes());
        let reaction = resultant(&force, self.mesh.fixed_nodes());
        timings.reconstruction_ms = ms_since(t);
        timings.total_ms = ms_since(start);

        FrameResult {
            timestamp,
            valid: true,
            note: None,
            patch,
            matched,
            displacement,
            force,
            resultant: top,
            reaction,
            timings,
        }
    }
}
