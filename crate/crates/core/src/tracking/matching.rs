use crate::tracking::{MarkerCorrespondence, MarkerFrame, MarkerPair, PointIndex};

/// Mutual nearest-neighbour matching within `match_radius`.
///
/// A reference marker is paired with its nearest current marker only if that
/// marker's nearest reference marker is the original one and the two lie
/// within `match_radius`. Ties resolve to the lowest index, which makes the
/// result deterministic and symmetric under swapping the frames.
pub fn match_markers(
    reference: &MarkerFrame,
    current: &MarkerFrame,
    match_radius: f64,
) -> MarkerCorrespondence {
    let cell = if match_radius.is_finite() && match_radius > 0.0 {
        match_radius
    } else {
        1.0
    };
    let ref_index = PointIndex::new(&reference.centroids, cell);
    let cur_index = PointIndex::new(&current.centroids, cell);
    let mut cur_taken = vec![false; current.len()];
    let mut out = MarkerCorrespondence::default();
    for (i, &p) in reference.centroids.iter().enumerate() {
        let candidate = cur_index.nearest(p).filter(|&(_, d)| d <= match_radius);
        let mutual = candidate.filter(|&(j, _)| {
            ref_index
                .nearest(current.centroids[j])
                .is_some_and(|(back, _)| back == i)
        });
        match mutual {
            Some((j, _)) => {
                cur_taken[j] = true;
                out.pairs.push(MarkerPair {
                    reference_index: i,
                    current_index: j,
                    reference: p,
                    current: current.centroids[j],
                });
            }
            None => out.unmatched_reference.push(i),
        }
    }
    out.unmatched_current = (0..current.len()).filter(|&j| !cur_taken[j]).collect();
    out
}
