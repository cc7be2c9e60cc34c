//! Frame sources for the stream and reconstruct commands.
//!
//! A frame is either an 8-bit PGM image (markers are detected) or a marker
//! table (`.csv`). A contact mask is picked up from a companion file next to
//! the frame: `<stem>.mask.pgm` or `<stem>.mask.txt`. Frames without a
//! companion mask carry no normal indentation.

use std::path::{Path, PathBuf};

use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::io::markers::read_frame_file;
use crate::pipeline::FrameInput;
use crate::raster::{BinaryGrid, GrayImage};
use crate::tracking::{detect_markers, FrameSource, MarkerFrame};

fn is_mask(path: &Path) -> bool {
    path.file_stem()
        .and_then(|s| s.to_str())
        .is_some_and(|s| s.ends_with(".mask"))
}

fn has_ext(path: &Path, ext: &str) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case(ext))
}

/// Frame files in `dir`, sorted by file name. Masks are skipped.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut out = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && (has_ext(&path, "pgm") || has_ext(&path, "csv")) && !is_mask(&path) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Companion contact mask of a frame file, if one exists.
pub fn companion_mask(frame: &Path) -> Option<PathBuf> {
    let stem = frame.file_stem()?.to_str()?;
    ["pgm", "txt"]
        .iter()
        .map(|ext| frame.with_file_name(format!("{stem}.mask.{ext}")))
        .find(|p| p.is_file())
}

/// Marker centroids of a frame file (metric coordinates).
pub fn load_markers(
    path: &Path,
    config: &PipelineConfig,
    source: FrameSource,
) -> Result<MarkerFrame> {
    if has_ext(path, "pgm") {
        let image = GrayImage::read_pgm(path)?;
        Ok(detect_markers(
            &image,
            &config.detection,
            &config.pixel_frame(),
            source,
        ))
    } else if has_ext(path, "csv") {
        read_frame_file(path, source)
    } else {
        Err(Error::format(
            "frame",
            format!("{} is neither .pgm nor .csv", path.display()),
        ))
    }
}

/// Loads a frame and its companion mask.
pub fn load_frame_input(
    path: &Path,
    config: &PipelineConfig,
    timestamp: f64,
) -> Result<FrameInput> {
    Ok(FrameInput {
        timestamp,
        markers: load_markers(path, config, FrameSource::Current)?,
        mask: companion_mask(path)
            .map(|m| BinaryGrid::read(&m))
            .transpose()?,
    })
}

/// Lazily loads `paths` in order; frame `k` is stamped `k / fps` seconds.
pub fn frame_source<'a>(
    paths: &'a [PathBuf],
    config: &'a PipelineConfig,
    fps: f64,
) -> impl Iterator<Item = Result<FrameInput>> + 'a {
    paths
        .iter()
        .enumerate()
        .map(move |(k, p)| load_frame_input(p, config, k as f64 / fps))
}
