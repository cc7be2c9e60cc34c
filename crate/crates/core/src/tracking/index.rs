//! Uniform bucket grid for nearest-neighbour queries on 2D point sets.

/// Static spatial index over a point set.
#[derive(Clone, Debug)]
pub struct PointIndex {
    points: Vec<[f64; 2]>,
    origin: [f64; 2],
    cell: f64,
    nx: i64,
    ny: i64,
    buckets: Vec<Vec<u32>>,
}

impl PointIndex {
    /// Builds the index with buckets of side `cell` (a good choice is about
    /// the typical point spacing).
    pub fn new(points: &[[f64; 2]], cell: f64) -> Self {
        assert!(
            cell > 0.0 && cell.is_finite(),
            "bucket size must be positive"
        );
        let mut min = [f64::INFINITY; 2];
        let mut max = [f64::NEG_INFINITY; 2];
        for p in points {
            for k in 0..2 {
                min[k] = min[k].min(p[k]);
                max[k] = max[k].max(p[k]);
            }
        }
        if points.is_empty() {
            min = [0.0; 2];
            max = [0.0; 2];
        }
        let nx = ((max[0] - min[0]) / cell).floor() as i64 + 1;
        let ny = ((max[1] - min[1]) / cell).floor() as i64 + 1;
        let mut buckets = vec![Vec::new(); (nx * ny) as usize];
        let mut index = Self {
            points: points.to_vec(),
            origin: min,
            cell,
            nx,
            ny,
            buckets: Vec::new(),
        };
        for (i, p) in points.iter().enumerate() {
            let (cx, cy) = index.cell_of(*p);
            buckets[(cy * nx + cx) as usize].push(i as u32);
        }
        index.buckets = buckets;
        index
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> [f64; 2] {
        self.points[i]
    }

    fn cell_of(&self, p: [f64; 2]) -> (i64, i64) {
        (
            ((p[0] - self.origin[0]) / self.cell).floor() as i64,
            ((p[1] - self.origin[1]) / self.cell).floor() as i64,
        )
    }

    /// The `k` nearest points as `(index, distance)`, closest first; equal
    /// distances are ordered by index.
    pub fn k_nearest(&self, p: [f64; 2], k: usize) -> Vec<(usize, f64)> {
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        if k == 0 || self.points.is_empty() {
            return Vec::new();
        }
        let (cx, cy) = self.cell_of(p);
        let reach = [
            cx.abs(),
            cy.abs(),
            (self.nx - 1 - cx).abs(),
            (self.ny - 1 - cy).abs(),
        ]
        .into_iter()
        .max()
        .unwrap_or(0);
        let consider = |i: usize, best: &mut Vec<(f64, usize)>| {
            let q = self.points[i];
            let d2 = (q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2);
            let key = (d2, i);
            if best.len() == k && key >= best[k - 1] {
                return;
            }
            let pos = best.partition_point(|e| *e < key);
            best.insert(pos, key);
            best.truncate(k);
        };
        for ring in 0..=reach {
            for gy in (cy - ring)..=(cy + ring) {
                if gy < 0 || gy >= self.ny {
                    continue;
                }
                let on_edge_row = gy == cy - ring || gy == cy + ring;
                let step = if on_edge_row { 1 } else { (2 * ring).max(1) };
                let mut gx = cx - ring;
                while gx <= cx + ring {
                    if gx >= 0 && gx < self.nx {
                        for &i in &self.buckets[(gy * self.nx + gx) as usize] {
                            consider(i as usize, &mut best);
                        }
                    }
                    gx += step;
                }
            }
            if best.len() == k {
                // anything not yet visited is at least `ring * cell` away
                let bound = ring as f64 * self.cell;
                if best[k - 1].0 < bound * bound {
                    break;
                }
            }
        }
        best.into_iter().map(|(d2, i)| (i, d2.sqrt())).collect()
    }

    pub fn nearest(&self, p: [f64; 2]) -> Option<(usize, f64)> {
        self.k_nearest(p, 1).into_iter().next()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(points: &[[f64; 2]], p: [f64; 2], k: usize) -> Vec<usize> {
        let mut all: Vec<(f64, usize)> = points
            .iter()
            .enumerate()
            .map(|(i, q)| ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2), i))
            .collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        all.into_iter().take(k).map(|(_, i)| i).collect()
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let pts = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
        let idx = PointIndex::new(&pts, 0.5);
        let got: Vec<usize> = idx
            .k_nearest([0.0, 0.0], 4)
            .into_iter()
            .map(|e| e.0)
            .collect();
        assert_eq!(got, vec![0, 1, 2, 3]);
    }

    #[test]
    fn empty_index() {
        let idx = PointIndex::new(&[], 1.0);
        assert!(idx.nearest([0.0, 0.0]).is_none());
    }

    proptest! {
        #[test]
        fn matches_brute_force(
            pts in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 1..60),
            q in (-8.0f64..8.0, -8.0f64..8.0),
            cell in 0.1f64..3.0,
            k in 1usize..6,
        ) {
            let pts: Vec<[f64; 2]> = pts.into_iter().map(|(x, y)| [x, y]).collect();
            let idx = PointIndex::new(&pts, cell);
            let got: Vec<usize> = idx.k_nearest([q.0, q.1], k).into_iter().map(|e| e.0).collect();
            prop_assert_eq!(got, brute(&pts, [q.0, q.1], k));
        }
    }
}
