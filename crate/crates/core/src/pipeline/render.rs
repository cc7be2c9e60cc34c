//! Synthetic marker images: dark Gaussian dots on a bright background.

use crate::raster::{GrayImage, PixelFrame};

pub const BACKGROUND_LEVEL: f64 = 230.0;
pub const DOT_CONTRAST: f64 = 200.0;

/// Renders one dot per centroid with the given blur (pixels).
pub fn render_markers(
    centroids: &[[f64; 2]],
    frame: &PixelFrame,
    size: [usize; 2],
    dot_sigma_px: f64,
) -> GrayImage {
    let [w, h] = size;
    let mut shade = vec![0.0f64; w * h];
    let reach = (4.0 * dot_sigma_px).ceil() as i64;
    let inv = 1.0 / (2.0 * dot_sigma_px * dot_sigma_px);
    for &c in centroids {
        let [cx, cy] = frame.to_pixel(c);
        let (ic, ir) = (cx.round() as i64, cy.round() as i64);
        for r in (ir - reach).max(0)..=(ir + reach).min(h as i64 - 1) {
            for col in (ic - reach).max(0)..=(ic + reach).min(w as i64 - 1) {
                let d2 = (col as f64 - cx).powi(2) + (r as f64 - cy).powi(2);
                let s = &mut shade[r as usize * w + col as usize];
                *s = s.max((-d2 * inv).exp());
            }
        }
    }
    let data = shade
        .iter()
        .map(|s| {
            (BACKGROUND_LEVEL - DOT_CONTRAST * s)
                .round()
                .clamp(0.0, 255.0) as u8
        })
        .collect();
    GrayImage::new(w, h, data).expect("buffer sized to image")
}
