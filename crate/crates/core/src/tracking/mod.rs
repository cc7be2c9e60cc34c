//! Marker tracking: blob detection, frame-to-frame matching and
//! interpolation of the marker displacement field onto the mesh surface.

mod detect;
mod index;
mod interp;
mod matching;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Rect;

pub use detect::{detect_markers, DetectParams};
pub use index::PointIndex;
pub use interp::{interpolate_scattered, interpolate_to_nodes, IdwParams};
pub use matching::match_markers;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameSource {
    Reference,
    Current,
}

/// Marker centroids of one frame in gel-plane metric coordinates (m).
#[derive(Clone, Debug, PartialEq)]
pub struct MarkerFrame {
    pub centroids: Vec<[f64; 2]>,
    pub source: FrameSource,
}

impl MarkerFrame {
    pub fn new(centroids: Vec<[f64; 2]>, source: FrameSource) -> Self {
        Self { centroids, source }
    }

    pub fn len(&self) -> usize {
        self.centroids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centroids.is_empty()
    }

    /// Checks that every centroid is inside `bounds` and that no two are
    /// closer than a quarter of the nominal spacing.
    pub fn check(&self, bounds: &Rect, nominal_spacing: f64) -> Result<()> {
        if let Some(p) = self.centroids.iter().find(|p| !bounds.contains(**p)) {
            return Err(Error::invalid(format!(
                "marker at {p:?} lies outside the gel"
            )));
        }
        let min_sep = 0.25 * nominal_spacing;
        let index = PointIndex::new(&self.centroids, nominal_spacing);
        for (i, &p) in self.centroids.iter().enumerate() {
            if let Some(&(j, d)) = index.k_nearest(p, 2).get(1) {
                if d < min_sep {
                    return Err(Error::invalid(format!(
                        "markers {i} and {j} are only {d:e} m apart"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One matched marker.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MarkerPair {
    pub reference_index: usize,
    pub current_index: usize,
    pub reference: [f64; 2],
    pub current: [f64; 2],
}

impl MarkerPair {
    pub fn displacement(&self) -> [f64; 2] {
        [
            self.current[0] - self.reference[0],
            self.current[1] - self.reference[1],
        ]
    }
}

/// Result of matching a current frame against the reference frame.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MarkerCorrespondence {
    pub pairs: Vec<MarkerPair>,
    pub unmatched_reference: Vec<usize>,
    pub unmatched_current: Vec<usize>,
}
