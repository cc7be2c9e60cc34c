//! Grayscale images, binary masks, pixel-to-metric mapping and connected
//! component labelling.
//!
//! Pixel `(col, row)` has its center at `origin + (col, row) * pitch` in the
//! gel plane; column index grows with +x and row index with +y.

use std::collections::VecDeque;
use std::path::Path;

use image::ImageFormat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Placement of a pixel grid in the gel plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PixelFrame {
    pub origin_m: [f64; 2],
    pub pitch_m: f64,
}

impl PixelFrame {
    pub fn to_metric(&self, px: [f64; 2]) -> [f64; 2] {
        [
            self.origin_m[0] + px[0] * self.pitch_m,
            self.origin_m[1] + px[1] * self.pitch_m,
        ]
    }

    pub fn to_pixel(&self, p: [f64; 2]) -> [f64; 2] {
        [
            (p[0] - self.origin_m[0]) / self.pitch_m,
            (p[1] - self.origin_m[1]) / self.pitch_m,
        ]
    }
}

/// 8-bit grayscale image, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::invalid(format!(
                "image buffer has {} bytes, expected {width}x{height}",
                data.len()
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, col: usize, row: usize) -> u8 {
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, v: u8) {
        self.data[row * self.width + col] = v;
    }

    pub fn pixels(&self) -> &[u8] {
        &self.data
    }

    pub fn read_pgm(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::decode_pgm(&bytes)
    }

    pub fn decode_pgm(bytes: &[u8]) -> Result<Self> {
        let img = image::load_from_memory_with_format(bytes, ImageFormat::Pnm)
            .map_err(|e| Error::format("pgm", e.to_string()))?
            .into_luma8();
        let (w, h) = img.dimensions();
        Self::new(w as usize, h as usize, img.into_raw())
    }

    /// Binary (P5) portable graymap.
    pub fn encode_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.data);
        out
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.encode_pgm()).map_err(|e| Error::io(path, e))
    }
}

/// Binary grid, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryGrid {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

pub const GRID_TEXT_HEADER: &str = "gelgrid 1";

impl BinaryGrid {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            data: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Self {
        let mut g = Self::new(width, height);
        for row in 0..height {
            for col in 0..width {
                g.data[row * width + col] = f(col, row);
            }
        }
        g
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, col: usize, row: usize) -> bool {
        self.data[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, v: bool) {
        self.data[row * self.width + col] = v;
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_blank(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    /// Pixels brighter than `threshold` are set.
    pub fn from_image(img: &GrayImage, threshold: u8) -> Self {
        Self {
            width: img.width,
            height: img.height,
            data: img.data.iter().map(|&v| v > threshold).collect(),
        }
    }

    pub fn to_image(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&b| if b { 255 } else { 0 }).collect(),
        }
    }

    /// Text form: the header line, then `width height`, then one line of
    /// `0`/`1` characters per row.
    pub fn to_text(&self) -> String {
        let mut s = format!("{GRID_TEXT_HEADER}\n{} {}\n", self.width, self.height);
        for row in self.data.chunks(self.width.max(1)) {
            s.extend(row.iter().map(|&b| if b { '1' } else { '0' }));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let err = |m: &str| Error::format("binary grid", m.to_string());
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some(GRID_TEXT_HEADER) {
            return Err(err("missing header"));
        }
        let dims: Vec<usize> = lines
            .next()
            .ok_or_else(|| err("missing dimensions"))?
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| err("bad dimension")))
            .collect::<Result<_>>()?;
        let [width, height] = dims[..] else {
            return Err(err("expected `width height`"));
        };
        let mut g = Self::new(width, height);
        for row in 0..height {
            let line = lines.next().ok_or_else(|| err("too few rows"))?.trim();
            if line.len() != width {
                return Err(err("row length does not match width"));
            }
            for (col, ch) in line.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => g.set(col, row, true),
                    _ => return Err(err("rows may contain only 0 and 1")),
                }
            }
        }
        Ok(g)
    }

    /// Loads a mask from a `.pgm` image (non-zero pixels set) or the text
    /// grid format (any other extension).
    pub fn read(path: &Path) -> Result<Self> {
        if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
        {
            Ok(Self::from_image(&GrayImage::read_pgm(path)?, 0))
        } else {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            Self::from_text(&text)
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
        {
            self.to_image().write_pgm(path)
        } else {
            std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
        }
    }
}

/// Marks pixels whose intensity changed by more than `threshold` between two
/// frames.
pub fn difference_mask(
    reference: &GrayImage,
    current: &GrayImage,
    threshold: u8,
) -> Result<BinaryGrid> {
    if reference.width != current.width || reference.height != current.height {
        return Err(Error::Conformance("images differ in size".into()));
    }
    Ok(BinaryGrid {
        width: reference.width,
        height: reference.height,
        data: reference
            .data
            .iter()
            .zip(&current.data)
            .map(|(&a, &b)| a.abs_diff(b) > threshold)
            .collect(),
    })
}

/// 8-connected components of the set pixels, each as a list of `(col, row)`
/// in scan order. Components are ordered by their first pixel in scan order.
pub fn connected_components(mask: &BinaryGrid) -> Vec<Vec<(usize, usize)>> {
    let (w, h) = (mask.width, mask.height);
    let mut visited = vec![false; w * h];
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if !mask.data[start] || visited[start] {
            continue;
        }
        visited[start] = true;
        queue.push_back(start);
        let mut comp = Vec::new();
        while let Some(idx) = queue.pop_front() {
            let (col, row) = (idx % w, idx / w);
            comp.push((col, row));
            for dr in -1i64..=1 {
                for dc in -1i64..=1 {
                    let (c, r) = (col as i64 + dc, row as i64 + dr);
                    if c < 0 || r < 0 || c >= w as i64 || r >= h as i64 {
                        continue;
                    }
                    let n = r as usize * w + c as usize;
                    if mask.data[n] && !visited[n] {
                        visited[n] = true;
                        queue.push_back(n);
                    }
                }
            }
        }
        comp.sort_unstable_by_key(|&(c, r)| (r, c));
        out.push(comp);
    }
    out
}
