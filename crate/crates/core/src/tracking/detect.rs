use serde::{Deserialize, Serialize};

use crate::raster::{connected_components, BinaryGrid, GrayImage, PixelFrame};
use crate::tracking::{FrameSource, MarkerFrame};

/// Dark-blob detector settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectParams {
    /// Pixels strictly darker than this belong to a marker.
    pub threshold: u8,
    pub min_area_px: usize,
    pub max_area_px: usize,
}

impl Default for DetectParams {
    fn default() -> Self {
        Self {
            threshold: 128,
            min_area_px: 3,
            max_area_px: 400,
        }
    }
}

/// Finds dark blobs and returns their intensity-weighted centroids, weighted
/// by how far each pixel falls below the threshold.
pub fn detect_markers(
    image: &GrayImage,
    params: &DetectParams,
    frame: &PixelFrame,
    source: FrameSource,
) -> MarkerFrame {
    let t = params.threshold;
    let dark = BinaryGrid::from_fn(image.width(), image.height(), |c, r| image.get(c, r) < t);
    let mut centroids = Vec::new();
    for comp in connected_components(&dark) {
        if comp.len() < params.min_area_px || comp.len() > params.max_area_px {
            continue;
        }
        let (mut sw, mut sx, mut sy) = (0.0, 0.0, 0.0);
        for &(c, r) in &comp {
            let w = f64::from(t - image.get(c, r));
            sw += w;
            sx += w * c as f64;
            sy += w * r as f64;
        }
        centroids.push(frame.to_metric([sx / sw, sy / sw]));
    }
    MarkerFrame::new(centroids, source)
}

#[cfg(test)]
mod tests {
    use super::*;

    const UNIT: PixelFrame = PixelFrame {
        origin_m: [0.0, 0.0],
        pitch_m: 1.0,
    };

    #[test]
    fn uniform_image_has_no_markers() {
        let img = GrayImage::filled(40, 30, 200);
        let f = detect_markers(
            &img,
            &DetectParams::default(),
            &UNIT,
            FrameSource::Reference,
        );
        assert!(f.is_empty());
    }

    #[test]
    fn area_bounds_filter() {
        let mut img = GrayImage::filled(20, 20, 255);
        img.set(3, 3, 0);
        for r in 10..13 {
            for c in 10..13 {
                img.set(c, r, 0);
            }
        }
        let f = detect_markers(&img, &DetectParams::default(), &UNIT, FrameSource::Current);
        assert_eq!(f.len(), 1);
        assert!((f.centroids[0][0] - 11.0).abs() < 1e-12);
    }
}
