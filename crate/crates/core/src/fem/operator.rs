//! Global stiffness operator: assembly, the inverse map `F = K U` and the
//! forward solve used as the ground-truth oracle.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::fem::element::element_stiffness;
use crate::fem::field::{DisplacementField, ForceField};
use crate::fem::sparse::{conjugate_gradient, norm, CsrMatrix, SkylineCholesky, SolverKind};
use crate::mesh::{HexMesh, MaterialParams};

/// Relative residual required of every forward solve.
pub const FORWARD_SOLVE_TOLERANCE: f64 = 1e-10;

/// Sparse symmetric `3n x 3n` stiffness matrix with the top (observable) and
/// bottom (fixed) partitions cached.
#[derive(Debug)]
pub struct StiffnessOperator {
    k: CsrMatrix,
    node_count: usize,
    top_nodes: Vec<usize>,
    fixed_nodes: Vec<usize>,
    top_dofs: Vec<usize>,
    bottom_dofs: Vec<usize>,
    k_tt: CsrMatrix,
    k_bt: CsrMatrix,
    factor: OnceLock<std::result::Result<SkylineCholesky, String>>,
}

impl StiffnessOperator {
    /// Wraps an assembled matrix and builds the partition blocks.
    pub(crate) fn from_parts(
        k: CsrMatrix,
        top_nodes: Vec<usize>,
        fixed_nodes: Vec<usize>,
    ) -> Result<Self> {
        if !k.dim().is_multiple_of(3) || k.dim() != k.cols() {
            return Err(Error::Conformance(
                "stiffness matrix dimension is not 3n".into(),
            ));
        }
        let node_count = k.dim() / 3;
        if top_nodes.len() + fixed_nodes.len() != node_count
            || top_nodes
                .iter()
                .chain(&fixed_nodes)
                .any(|&i| i >= node_count)
        {
            return Err(Error::Conformance(
                "partition maps do not cover the nodes".into(),
            ));
        }
        let dofs = |nodes: &[usize]| -> Vec<usize> {
            nodes
                .iter()
                .flat_map(|&i| [3 * i, 3 * i + 1, 3 * i + 2])
                .collect()
        };
        let top_dofs = dofs(&top_nodes);
        let bottom_dofs = dofs(&fixed_nodes);
        let k_tt = k.extract(&top_dofs, &top_dofs);
        let k_bt = k.extract(&bottom_dofs, &top_dofs);
        Ok(Self {
            k,
            node_count,
            top_nodes,
            fixed_nodes,
            top_dofs,
            bottom_dofs,
            k_tt,
            k_bt,
            factor: OnceLock::new(),
        })
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.k
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn top_nodes(&self) -> &[usize] {
        &self.top_nodes
    }

    pub fn fixed_nodes(&self) -> &[usize] {
        &self.fixed_nodes
    }

    pub fn top_dofs(&self) -> &[usize] {
        &self.top_dofs
    }

    pub fn bottom_dofs(&self) -> &[usize] {
        &self.bottom_dofs
    }

    /// Top-top block.
    pub fn k_tt(&self) -> &CsrMatrix {
        &self.k_tt
    }

    /// Bottom-top block.
    pub fn k_bt(&self) -> &CsrMatrix {
        &self.k_bt
    }

    /// Whether this operator was assembled for `mesh`.
    pub fn conforms_to(&self, mesh: &HexMesh) -> bool {
        self.node_count == mesh.node_count()
            && self.top_nodes == mesh.top_nodes()
            && self.fixed_nodes == mesh.fixed_nodes()
    }

    fn cholesky(&self) -> Result<&SkylineCholesky> {
        self.factor
            .get_or_init(|| SkylineCholesky::factor(&self.k_tt).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(|reason| Error::NumericalFailure {
                reason: reason.clone(),
                residual: f64::NAN,
            })
    }

    /// `F = K U`. Top-node entries are the external contact forces, bottom
    /// entries the reactions at the bonded face.
    pub fn reconstruct_force(&self, u: &DisplacementField) -> Result<ForceField> {
        self.reconstruct_force_with(u, Execution::default())
    }

    pub fn reconstruct_force_with(
        &self,
        u: &DisplacementField,
        exec: Execution,
    ) -> Result<ForceField> {
        if u.len() != self.node_count {
            return Err(Error::Conformance(format!(
                "displacement field has {} nodes, operator expects {}",
                u.len(),
                self.node_count
            )));
        }
        if let Some(&i) = self.fixed_nodes.iter().find(|&&i| u[i] != [0.0; 3]) {
            return Err(Error::Conformance(format!(
                "fixed node {i} has non-zero displacement"
            )));
        }
        Ok(ForceField::from_flat(&self.k.matvec_with(u.flat(), exec)))
    }

    /// Solves `K_tt u_top = f_top` with the bottom face clamped. `f_top` is
    /// ordered like [`StiffnessOperator::top_nodes`].
    pub fn forward_solve(&self, f_top: &[[f64; 3]]) -> Result<DisplacementField> {
        self.forward_solve_with(f_top, SolverKind::Direct)
    }

    pub fn forward_solve_with(
        &self,
        f_top: &[[f64; 3]],
        solver: SolverKind,
    ) -> Result<DisplacementField> {
        if f_top.len() != self.top_nodes.len() {
            return Err(Error::Conformance(format!(
                "force has {} top nodes, operator expects {}",
                f_top.len(),
                self.top_nodes.len()
            )));
        }
        let b = f_top.as_flattened();
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::Conformance("non-finite force entries".into()));
        }
        let u_top = solve_spd(&self.k_tt, b, solver, || self.cholesky())?;
        let mut u = vec![[0.0; 3]; self.node_count];
        for (slot, &node) in self.top_nodes.iter().enumerate() {
            u[node] = [u_top[3 * slot], u_top[3 * slot + 1], u_top[3 * slot + 2]];
        }
        DisplacementField::from_vec(u)
    }
}

/// Solves an SPD system and verifies the relative residual.
pub(crate) fn solve_spd<'a>(
    a: &CsrMatrix,
    b: &[f64],
    solver: SolverKind,
    factor: impl FnOnce() -> Result<&'a SkylineCholesky>,
) -> Result<Vec<f64>> {
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(vec![0.0; b.len()]);
    }
    let x = match solver {
        SolverKind::Direct => {
            let chol = factor()?;
            let mut x = chol.solve(b);
            // one step of iterative refinement
            let r: Vec<f64> = a.matvec(&x).iter().zip(b).map(|(ax, b)| b - ax).collect();
            if norm(&r) > FORWARD_SOLVE_TOLERANCE * 1e-2 * b_norm {
                let dx = chol.solve(&r);
                x.iter_mut().zip(dx).for_each(|(x, d)| *x += d);
            }
            x
        }
        SolverKind::ConjugateGradient => conjugate_gradient(
            a,
            b,
            FORWARD_SOLVE_TOLERANCE * 1e-2,
            20 * b.len().max(100),
            Execution::default(),
        )?,
    };
    let r: Vec<f64> = a.matvec(&x).iter().zip(b).map(|(ax, b)| b - ax).collect();
    let residual = norm(&r) / b_norm;
    if !(residual <= FORWARD_SOLVE_TOLERANCE) {
        return Err(Error::NumericalFailure {
            reason: "forward solve residual above tolerance".into(),
            residual,
        });
    }
    Ok(x)
}

/// Assembles the global stiffness matrix of `mesh`.
pub fn assemble(mesh: &HexMesh, material: &MaterialParams) -> Result<StiffnessOperator> {
    assemble_with(mesh, material, Execution::default())
}

/// Element matrices are integrated under `exec`; the scatter-add always runs
/// in element order so the result is bit-identical across policies.
pub fn assemble_with(
    mesh: &HexMesh,
    material: &MaterialParams,
    exec: Execution,
) -> Result<StiffnessOperator> {
    let k = assemble_matrix(mesh, material, exec)?;
    StiffnessOperator::from_parts(k, mesh.top_nodes().to_vec(), mesh.fixed_nodes().to_vec())
}

fn sparsity_pattern(mesh: &HexMesh) -> CsrMatrix {
    let n = mesh.node_count();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for conn in mesh.elements() {
        for &a in conn {
            adjacency[a].extend_from_slice(conn);
        }
    }
    let mut row_ptr = Vec::with_capacity(3 * n + 1);
    let mut col_idx = Vec::new();
    row_ptr.push(0);
    for adj in &mut adjacency {
        adj.sort_unstable();
        adj.dedup();
        for _ in 0..3 {
            for &j in adj.iter() {
                col_idx.extend_from_slice(&[3 * j, 3 * j + 1, 3 * j + 2]);
            }
            row_ptr.push(col_idx.len());
        }
    }
    let nnz = col_idx.len();
    CsrMatrix::from_parts(3 * n, row_ptr, col_idx, vec![0.0; nnz]).expect("pattern is well formed")
}

fn assemble_matrix(
    mesh: &HexMesh,
    material: &MaterialParams,
    exec: Execution,
) -> Result<CsrMatrix> {
    let element_matrices = exec.map_range(mesh.element_count(), |e| {
        element_stiffness(&mesh.element_corners(e), material).map_err(|err| match err {
            Error::InvertedElement { point, det, .. } => Error::InvertedElement {
                element: e,
                point,
                det,
            },
            other => other,
        })
    });
    let mut k = sparsity_pattern(mesh);
    for (conn, ke) in mesh.elements().iter().zip(element_matrices) {
        let ke = ke?;
        let dofs: [usize; 24] = std::array::from_fn(|d| 3 * conn[d / 3] + d % 3);
        for (a, &row) in dofs.iter().enumerate() {
            for (b, &col) in dofs.iter().enumerate() {
                let off = k.offset(row, col).expect("entry in pattern");
                k.values_mut()[off] += ke.get(a, b);
            }
        }
    }
    Ok(k)
}
