use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::mesh::HexMesh;
use crate::tracking::{MarkerCorrespondence, PointIndex};

/// Nodes closer than this to a sample take the sample value unchanged.
pub const PASS_THROUGH_DISTANCE: f64 = 1e-9;

/// Inverse-distance weighting settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdwParams {
    pub neighbors: usize,
    pub power: f64,
    /// Targets with no sample within this distance get zero.
    pub cutoff: f64,
}

impl IdwParams {
    /// k = 4, power 2, cutoff at twice the marker spacing.
    pub fn for_spacing(marker_spacing: f64) -> Self {
        Self {
            neighbors: 4,
            power: 2.0,
            cutoff: 2.0 * marker_spacing,
        }
    }
}

/// Interpolates 2D sample vectors at `targets`.
pub fn interpolate_scattered(
    sites: &[[f64; 2]],
    values: &[[f64; 2]],
    targets: &[[f64; 2]],
    params: &IdwParams,
    exec: Execution,
) -> Result<Vec<[f64; 2]>> {
    if sites.is_empty() {
        return Err(Error::InsufficientData(
            "no displacement samples to interpolate".into(),
        ));
    }
    if sites.len() != values.len() {
        return Err(Error::Conformance(
            "sample sites and values differ in length".into(),
        ));
    }
    if params.neighbors == 0 || !(params.cutoff > 0.0) {
        return Err(Error::invalid(
            "IDW needs at least one neighbour and a positive cutoff",
        ));
    }
    let index = PointIndex::new(sites, params.cutoff * 0.5);
    Ok(exec.map_slice(targets, |&t| {
        let near = index.k_nearest(t, params.neighbors);
        let (first, d0) = near[0];
        if d0 < PASS_THROUGH_DISTANCE {
            return values[first];
        }
        if d0 > params.cutoff {
            return [0.0, 0.0];
        }
        let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
        for &(i, d) in &near {
            let w = d.powf(-params.power);
            sw += w;
            sx += w * values[i][0];
            sy += w * values[i][1];
        }
        [sx / sw, sy / sw]
    }))
}

/// Interpolates matched marker displacements onto the top-surface nodes,
/// in [`HexMesh::top_nodes`] order. Samples sit at the reference positions.
pub fn interpolate_to_nodes(
    corr: &MarkerCorrespondence,
    mesh: &HexMesh,
    params: &IdwParams,
) -> Result<Vec<[f64; 2]>> {
    let sites: Vec<[f64; 2]> = corr.pairs.iter().map(|p| p.reference).collect();
    let values: Vec<[f64; 2]> = corr.pairs.iter().map(|p| p.displacement()).collect();
    let targets: Vec<[f64; 2]> = mesh.top_nodes().iter().map(|&i| mesh.xy(i)).collect();
    interpolate_scattered(&sites, &values, &targets, params, Execution::default())
}
