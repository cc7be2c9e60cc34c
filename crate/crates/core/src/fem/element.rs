//! Trilinear Hex-8 element with 2x2x2 Gauss integration.

use nalgebra::{Matrix3, SMatrix, Vector3};

use crate::error::{Error, Result};
use crate::mesh::MaterialParams;

pub type Matrix24 = SMatrix<f64, 24, 24>;
type Matrix6 = SMatrix<f64, 6, 6>;
type Matrix6x24 = SMatrix<f64, 6, 24>;

/// Natural coordinates of the 8 corners, in mesh corner order.
pub const CORNER_SIGNS: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

const GAUSS: f64 = 0.577_350_269_189_625_8; // 1/sqrt(3)

fn gauss_points() -> [[f64; 3]; 8] {
    CORNER_SIGNS.map(|s| [s[0] * GAUSS, s[1] * GAUSS, s[2] * GAUSS])
}

/// Trilinear shape function values at natural coordinates `xi`.
pub fn shape_values(xi: [f64; 3]) -> [f64; 8] {
    CORNER_SIGNS.map(|s| 0.125 * (1.0 + s[0] * xi[0]) * (1.0 + s[1] * xi[1]) * (1.0 + s[2] * xi[2]))
}

/// Shape function derivatives with respect to natural coordinates,
/// `d[k][a] = dN_a / dxi_k`.
pub fn shape_derivatives(xi: [f64; 3]) -> [[f64; 8]; 3] {
    let mut d = [[0.0; 8]; 3];
    for (a, s) in CORNER_SIGNS.iter().enumerate() {
        let f = [1.0 + s[0] * xi[0], 1.0 + s[1] * xi[1], 1.0 + s[2] * xi[2]];
        d[0][a] = 0.125 * s[0] * f[1] * f[2];
        d[1][a] = 0.125 * s[1] * f[0] * f[2];
        d[2][a] = 0.125 * s[2] * f[0] * f[1];
    }
    d
}

fn jacobian(corners: &[[f64; 3]; 8], dn: &[[f64; 8]; 3]) -> Matrix3<f64> {
    // J[k][j] = sum_a dN_a/dxi_k * x_a[j]
    let mut j = Matrix3::zeros();
    for k in 0..3 {
        for (a, x) in corners.iter().enumerate() {
            for c in 0..3 {
                j[(k, c)] += dn[k][a] * x[c];
            }
        }
    }
    j
}

/// Fails with [`Error::InvertedElement`] (element index 0) if the Jacobian
/// determinant is not positive at some Gauss point.
pub fn check_jacobian(corners: &[[f64; 3]; 8]) -> Result<()> {
    for (p, xi) in gauss_points().iter().enumerate() {
        let det = jacobian(corners, &shape_derivatives(*xi)).determinant();
        if !(det > 0.0) {
            return Err(Error::InvertedElement {
                element: 0,
                point: p,
                det,
            });
        }
    }
    Ok(())
}

/// Isotropic constitutive matrix in Voigt order (xx, yy, zz, xy, yz, zx) with
/// engineering shear strains.
pub fn constitutive_matrix(material: &MaterialParams) -> Matrix6 {
    let (lambda, mu) = material.lame();
    let mut d = Matrix6::zeros();
    for i in 0..3 {
        for j in 0..3 {
            d[(i, j)] = lambda;
        }
        d[(i, i)] = lambda + 2.0 * mu;
        d[(i + 3, i + 3)] = mu;
    }
    d
}

/// 24x24 element stiffness (N/m). Rows and columns are node-major, then x, y, z.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementStiffness(pub Matrix24);

impl ElementStiffness {
    pub fn matrix(&self) -> &Matrix24 {
        &self.0
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[(row, col)]
    }
}

/// Integrates `B^T D B det(J)` over the element with 2x2x2 Gauss quadrature.
pub fn element_stiffness(
    corners: &[[f64; 3]; 8],
    material: &MaterialParams,
) -> Result<ElementStiffness> {
    let d = constitutive_matrix(material);
    let mut k = Matrix24::zeros();
    for (p, xi) in gauss_points().iter().enumerate() {
        let dn = shape_derivatives(*xi);
        let j = jacobian(corners, &dn);
        let det = j.determinant();
        if !(det > 0.0) {
            return Err(Error::InvertedElement {
                element: 0,
                point: p,
                det,
            });
        }
        let j_inv = j.try_inverse().ok_or(Error::InvertedElement {
            element: 0,
            point: p,
            det,
        })?;
        let mut b = Matrix6x24::zeros();
        for a in 0..8 {
            let g = j_inv * Vector3::new(dn[0][a], dn[1][a], dn[2][a]);
            let c = 3 * a;
            b[(0, c)] = g[0];
            b[(1, c + 1)] = g[1];
            b[(2, c + 2)] = g[2];
            b[(3, c)] = g[1];
            b[(3, c + 1)] = g[0];
            b[(4, c + 1)] = g[2];
            b[(4, c + 2)] = g[1];
            b[(5, c)] = g[2];
            b[(5, c + 2)] = g[0];
        }
        // unit weights for the 2-point rule
        k += b.transpose() * d * b * det;
    }
    // exact symmetry regardless of rounding in the triple product
    let k = (k + k.transpose()) * 0.5;
    Ok(ElementStiffness(k))
}
