//! Delimited text for marker frames and correspondences.
//!
//! Frames: `id,x_m,y_m`. Correspondences: `id,x_m,y_m,dx_m,dy_m` where the
//! position is the reference centroid and `id` its index in the reference
//! frame.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tracking::{FrameSource, MarkerCorrespondence, MarkerFrame, MarkerPair};

#[derive(Serialize, Deserialize)]
struct MarkerRow {
    id: usize,
    x_m: f64,
    y_m: f64,
}

#[derive(Serialize, Deserialize)]
struct PairRow {
    id: usize,
    x_m: f64,
    y_m: f64,
    dx_m: f64,
    dy_m: f64,
}

fn csv_err(e: csv::Error) -> Error {
    Error::format("marker csv", e.to_string())
}

pub fn write_frame<W: Write>(frame: &MarkerFrame, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for (id, p) in frame.centroids.iter().enumerate() {
        w.serialize(MarkerRow {
            id,
            x_m: p[0],
            y_m: p[1],
        })
        .map_err(csv_err)?;
    }
    w.flush()
        .map_err(|e| Error::format("marker csv", e.to_string()))
}

/// Rows are placed by `id`; ids must be exactly `0..n`.
pub fn read_frame<R: Read>(input: R, source: FrameSource) -> Result<MarkerFrame> {
    let mut rows: Vec<MarkerRow> = csv::Reader::from_reader(input)
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_err)?;
    rows.sort_by_key(|r| r.id);
    if rows.iter().enumerate().any(|(k, r)| r.id != k) {
        return Err(Error::format("marker csv", "ids must be 0..n without gaps"));
    }
    Ok(MarkerFrame::new(
        rows.into_iter().map(|r| [r.x_m, r.y_m]).collect(),
        source,
    ))
}

pub fn write_frame_file(frame: &MarkerFrame, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_frame(frame, std::io::BufWriter::new(f))
}

pub fn read_frame_file(path: &Path, source: FrameSource) -> Result<MarkerFrame> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_frame(f, source)
}

pub fn write_correspondence<W: Write>(corr: &MarkerCorrespondence, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in &corr.pairs {
        let d = p.displacement();
        w.serialize(PairRow {
            id: p.reference_index,
            x_m: p.reference[0],
            y_m: p.reference[1],
            dx_m: d[0],
            dy_m: d[1],
        })
        .map_err(csv_err)?;
    }
    w.flush()
        .map_err(|e| Error::format("marker csv", e.to_string()))
}

/// Reads matched pairs back; the current position is rebuilt as reference
/// plus displacement and unmatched lists are not part of the format.
pub fn read_correspondence<R: Read>(input: R) -> Result<MarkerCorrespondence> {
    let pairs = csv::Reader::from_reader(input)
        .deserialize::<PairRow>()
        .enumerate()
        .map(|(k, row)| {
            row.map(|r| MarkerPair {
                reference_index: r.id,
                current_index: k,
                reference: [r.x_m, r.y_m],
                current: [r.x_m + r.dx_m, r.y_m + r.dy_m],
            })
        })
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_err)?;
    Ok(MarkerCorrespondence {
        pairs,
        ..Default::default()
    })
}
