//! Frame sequences processed against a fixed reference frame.

use crate::error::Result;
use crate::exec::Execution;
use crate::pipeline::estimator::{ForceEstimator, FrameResult};
use crate::raster::BinaryGrid;
use crate::tracking::MarkerFrame;

/// One frame of a stream: detected markers and an optional contact mask.
#[derive(Clone, Debug)]
pub struct FrameInput {
    pub timestamp: f64,
    pub markers: MarkerFrame,
    pub mask: Option<BinaryGrid>,
}

/// Lazily processes `frames`. The first frame becomes the reference and
/// also yields its own (zero) result. Source errors are passed through as
/// items; the stream ends when the source is exhausted.
pub fn run_stream<'a, I>(
    estimator: &'a ForceEstimator,
    frames: I,
) -> impl Iterator<Item = Result<FrameResult>> + 'a
where
    I: IntoIterator<Item = Result<FrameInput>>,
    I::IntoIter: 'a,
{
    let mut reference: Option<MarkerFrame> = None;
    frames.into_iter().map(move |frame| {
        let frame = frame?;
        let reference = reference.get_or_insert_with(|| frame.markers.clone());
        Ok(estimator.process_frame(
            reference,
            &frame.markers,
            frame.mask.as_ref(),
            frame.timestamp,
        ))
    })
}

/// Processes independent frames against one reference, possibly in
/// parallel. Results keep the input order.
pub fn process_batch(
    estimator: &ForceEstimator,
    reference: &MarkerFrame,
    frames: &[FrameInput],
    exec: Execution,
) -> Vec<FrameResult> {
    exec.map_slice(frames, |f| {
        estimator.process_frame(reference, &f.markers, f.mask.as_ref(), f.timestamp)
    })
}
