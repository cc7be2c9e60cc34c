//! Independent reference implementations used as test oracles. None of these
//! call into the library's numerical code.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};

/// Natural-coordinate signs of the eight corners: bottom face
/// counterclockwise, then top face counterclockwise.
pub const CORNERS: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

/// Five-point Gauss-Legendre rule on [-1, 1].
pub fn gauss5() -> [(f64, f64); 5] {
    let a = (5.0 - 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
    let b = (5.0 + 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
    let wa = (322.0 + 13.0 * 70.0f64.sqrt()) / 900.0;
    let wb = (322.0 - 13.0 * 70.0f64.sqrt()) / 900.0;
    [(-b, wb), (-a, wa), (0.0, 128.0 / 225.0), (a, wa), (b, wb)]
}

/// Element stiffness from the fourth-order elasticity tensor
/// `C_ijkl = lambda d_ij d_kl + mu (d_ik d_jl + d_il d_jk)`, integrated with
/// the 5x5x5 rule. Rows/columns are node-major, then x, y, z.
pub fn oracle_element_stiffness(corners: &[[f64; 3]; 8], e: f64, nu: f64) -> DMatrix<f64> {
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    let delta = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    let c = |i: usize, j: usize, k: usize, l: usize| {
        lambda * delta(i, j) * delta(k, l)
            + mu * (delta(i, k) * delta(j, l) + delta(i, l) * delta(j, k))
    };
    let rule = gauss5();
    let mut k = DMatrix::zeros(24, 24);
    for &(xi, wx) in &rule {
        for &(eta, wy) in &rule {
            for &(zeta, wz) in &rule {
                let nat = [xi, eta, zeta];
                // dN_a / d(natural_m)
                let mut dn = [[0.0; 3]; 8];
                for (a, s) in CORNERS.iter().enumerate() {
                    for m in 0..3 {
                        let mut v = s[m] / 8.0;
                        for q in 0..3 {
                            if q != m {
                                v *= 1.0 + s[q] * nat[q];
                            }
                        }
                        dn[a][m] = v;
                    }
                }
                let mut jac = DMatrix::<f64>::zeros(3, 3);
                for a in 0..8 {
                    for m in 0..3 {
                        for x in 0..3 {
                            jac[(m, x)] += dn[a][m] * corners[a][x];
                        }
                    }
                }
                let det = jac.determinant();
                let inv = jac.try_inverse().expect("non-singular");
                // dN_a / dx
                let mut g = [[0.0; 3]; 8];
                for a in 0..8 {
                    for x in 0..3 {
                        g[a][x] = (0..3).map(|m| inv[(x, m)] * dn[a][m]).sum();
                    }
                }
                let w = wx * wy * wz * det;
                for a in 0..8 {
                    for b in 0..8 {
                        for i in 0..3 {
                            for j in 0..3 {
                                let mut s = 0.0;
                                for kk in 0..3 {
                                    for l in 0..3 {
                                        s += g[a][kk] * c(i, kk, j, l) * g[b][l];
                                    }
                                }
                                k[(3 * a + i, 3 * b + j)] += w * s;
                            }
                        }
                    }
                }
            }
        }
    }
    k
}

/// The six infinitesimal rigid-body motions of the given points.
pub fn rigid_modes(points: &[[f64; 3]]) -> Vec<DVector<f64>> {
    let n = points.len();
    let mut modes = Vec::new();
    for axis in 0..3 {
        let mut v = DVector::zeros(3 * n);
        for a in 0..n {
            v[3 * a + axis] = 1.0;
        }
        modes.push(v);
    }
    for axis in 0..3 {
        let w = nalgebra::Vector3::from_fn(|i, _| if i == axis { 1.0 } else { 0.0 });
        let mut v = DVector::zeros(3 * n);
        for (a, p) in points.iter().enumerate() {
            let r = w.cross(&nalgebra::Vector3::new(p[0], p[1], p[2]));
            for i in 0..3 {
                v[3 * a + i] = r[i];
            }
        }
        modes.push(v);
    }
    modes
}

pub fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Box with corner `origin` and extents `size`, in the standard ordering.
pub fn box_corners(origin: [f64; 3], size: [f64; 3]) -> [[f64; 3]; 8] {
    CORNERS.map(|s| {
        [
            origin[0] + 0.5 * (s[0] + 1.0) * size[0],
            origin[1] + 0.5 * (s[1] + 1.0) * size[1],
            origin[2] + 0.5 * (s[2] + 1.0) * size[2],
        ]
    })
}

/// Winding-number point-in-polygon test.
pub fn winding_inside(poly: &[[f64; 2]], p: [f64; 2]) -> bool {
    let mut winding = 0i32;
    for k in 0..poly.len() {
        let a = poly[k];
        let b = poly[(k + 1) % poly.len()];
        let cross = (b[0] - a[0]) * (p[1] - a[1]) - (p[0] - a[0]) * (b[1] - a[1]);
        if a[1] <= p[1] {
            if b[1] > p[1] && cross > 0.0 {
                winding += 1;
            }
        } else if b[1] <= p[1] && cross < 0.0 {
            winding -= 1;
        }
    }
    winding != 0
}

/// Apparent in-plane shift of a marker that moved toward a pinhole camera by
/// `d`, found by intersecting the camera ray through the displaced marker
/// with the undisplaced surface plane.
pub fn pinhole_shift(camera: [f64; 3], displaced: [f64; 3], d: f64) -> [f64; 2] {
    let dir = [
        displaced[0] - camera[0],
        displaced[1] - camera[1],
        displaced[2] - camera[2],
    ];
    // march along the ray from the displaced marker to the plane, which
    // avoids cancelling the camera position against the hit point
    let plane_z = displaced[2] + d * dir[2].signum();
    let step = (plane_z - displaced[2]) / dir[2];
    [step * dir[0], step * dir[1]]
}

/// Same construction with refraction: the camera ray is bent at a surface
/// of normal `z` using the vector form of Snell's law, and the refracted ray
/// is continued from the displaced marker to the undisplaced plane.
pub fn snell_shift(camera: [f64; 3], displaced: [f64; 3], d: f64, gamma: f64) -> [f64; 2] {
    let v = nalgebra::Vector3::new(
        displaced[0] - camera[0],
        displaced[1] - camera[1],
        displaced[2] - camera[2],
    )
    .normalize();
    let n = nalgebra::Vector3::new(0.0, 0.0, -v[2].signum());
    let eta = 1.0 / gamma;
    let cos_i = -n.dot(&v);
    let sin_t2 = eta * eta * (1.0 - cos_i * cos_i);
    let t = eta * v + (eta * cos_i - (1.0 - sin_t2).sqrt()) * n;
    let s = d / t[2].abs();
    [t[0] * s, t[1] * s]
}

/// Dense `3n x 3n` assembly by direct scatter of dense element matrices.
pub fn dense_assembly(
    node_count: usize,
    elements: &[[usize; 8]],
    element_matrices: &[DMatrix<f64>],
) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(3 * node_count, 3 * node_count);
    for (conn, ke) in elements.iter().zip(element_matrices) {
        for a in 0..8 {
            for b in 0..8 {
                for i in 0..3 {
                    for j in 0..3 {
                        k[(3 * conn[a] + i, 3 * conn[b] + j)] += ke[(3 * a + i, 3 * b + j)];
                    }
                }
            }
        }
    }
    k
}
