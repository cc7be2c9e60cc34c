mod common;

use common::{dense_assembly, oracle_element_stiffness};
use gelforce::fem::{
    assemble, assemble_with, decode_operator, encode_operator, load_operator, resultant,
    save_operator, DisplacementField, SolverKind,
};
use gelforce::mesh::{generate_grid, HexMesh, MaterialParams, Rect};
use gelforce::Execution;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn grid(nx: usize, ny: usize, h: f64) -> HexMesh {
    generate_grid(
        Rect::new([0.0, 0.0], [nx as f64 * 1e-3, ny as f64 * 1e-3]),
        [1e-3, 1e-3],
        h,
    )
    .unwrap()
}

fn random_top_forces(rng: &mut StdRng, n: usize) -> Vec<[f64; 3]> {
    (0..n)
        .map(|_| {
            [
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            ]
        })
        .collect()
}

#[test]
fn two_element_assembly_matches_dense_oracle() {
    let mesh = grid(2, 1, 1.5e-3);
    let mat = MaterialParams::new(2.0e6, 0.35).unwrap();
    let op = assemble(&mesh, &mat).unwrap();
    let kes: Vec<_> = (0..2)
        .map(|e| oracle_element_stiffness(&mesh.element_corners(e), 2.0e6, 0.35))
        .collect();
    let dense = dense_assembly(mesh.node_count(), mesh.elements(), &kes);
    let scale = dense.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let k = op.matrix();
    for r in 0..dense.nrows() {
        for c in 0..dense.ncols() {
            assert!(
                (k.get(r, c) - dense[(r, c)]).abs() <= 1e-10 * scale,
                "entry ({r},{c})"
            );
        }
    }
}

#[test]
fn global_matrix_is_symmetric_with_zero_row_sums() {
    let mesh = grid(4, 3, 2e-3);
    let op = assemble(&mesh, &MaterialParams::gel_default()).unwrap();
    let k = op.matrix();
    let diag = (0..k.dim()).map(|i| k.get(i, i)).fold(0.0f64, f64::max);
    for r in 0..k.dim() {
        let (cols, vals) = k.row(r);
        for (&c, &v) in cols.iter().zip(vals) {
            assert!((v - k.get(c, r)).abs() <= 1e-10 * diag);
        }
        // translation along each axis is a zero-energy mode
        for axis in 0..3 {
            let s: f64 = cols
                .iter()
                .zip(vals)
                .filter(|(c, _)| *c % 3 == axis)
                .map(|(_, v)| v)
                .sum();
            assert!(s.abs() <= 1e-8 * diag, "row {r} axis {axis}: {s:e}");
        }
    }
}

#[test]
fn forward_inverse_roundtrip_and_equilibrium() {
    let mesh = grid(10, 10, 1e-3);
    let op = assemble(&mesh, &MaterialParams::gel_default()).unwrap();
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..10 {
        let f_top = random_top_forces(&mut rng, mesh.top_nodes().len());
        let u = op.forward_solve(&f_top).unwrap();
        let f = op.reconstruct_force(&u).unwrap();
        let num: f64 = mesh
            .top_nodes()
            .iter()
            .zip(&f_top)
            .map(|(&i, g)| (0..3).map(|c| (f[i][c] - g[c]).powi(2)).sum::<f64>())
            .sum();
        let den: f64 = f_top.iter().flatten().map(|v| v * v).sum();
        assert!((num / den).sqrt() <= 1e-6);
        let load: f64 = f_top
            .iter()
            .map(|g| (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt())
            .sum();
        let top = resultant(&f, mesh.top_nodes());
        let bottom = resultant(&f, mesh.fixed_nodes());
        for c in 0..3 {
            assert!((top[c] + bottom[c]).abs() <= 1e-6 * load);
        }
    }
}

#[test]
fn reconstruction_is_linear() {
    let mesh = grid(3, 3, 1e-3);
    let op = assemble(&mesh, &MaterialParams::gel_default()).unwrap();
    let mut rng = StdRng::seed_from_u64(3);
    let mut field = || {
        let mut u = vec![[0.0; 3]; mesh.node_count()];
        for &i in mesh.top_nodes() {
            u[i] = [
                rng.random_range(-1e-5..1e-5),
                rng.random_range(-1e-5..1e-5),
                rng.random_range(-1e-5..1e-5),
            ];
        }
        u
    };
    let (a, b) = (field(), field());
    let sum: Vec<[f64; 3]> = a
        .iter()
        .zip(&b)
        .map(|(x, y)| [2.0 * x[0] + y[0], 2.0 * x[1] + y[1], 2.0 * x[2] + y[2]])
        .collect();
    let fa = op
        .reconstruct_force(&DisplacementField::from_vec(a).unwrap())
        .unwrap();
    let fb = op
        .reconstruct_force(&DisplacementField::from_vec(b).unwrap())
        .unwrap();
    let fs = op
        .reconstruct_force(&DisplacementField::from_vec(sum).unwrap())
        .unwrap();
    let scale = fs
        .as_slice()
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..mesh.node_count() {
        for c in 0..3 {
            assert!((2.0 * fa[i][c] + fb[i][c] - fs[i][c]).abs() <= 1e-12 * scale);
        }
    }
}

#[test]
fn conjugate_gradient_agrees_with_direct_solve() {
    let mesh = grid(6, 5, 2e-3);
    let op = assemble(&mesh, &MaterialParams::gel_default()).unwrap();
    let f = random_top_forces(&mut StdRng::seed_from_u64(11), mesh.top_nodes().len());
    let a = op.forward_solve_with(&f, SolverKind::Direct).unwrap();
    let b = op
        .forward_solve_with(&f, SolverKind::ConjugateGradient)
        .unwrap();
    let scale = a
        .as_slice()
        .iter()
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
        for c in 0..3 {
            assert!((x[c] - y[c]).abs() <= 1e-8 * scale);
        }
    }
}

#[test]
fn assembly_is_deterministic_across_policies() {
    let mesh = grid(12, 9, 2e-3);
    let mat = MaterialParams::gel_default();
    let seq = assemble_with(&mesh, &mat, Execution::Sequential).unwrap();
    let par = assemble_with(&mesh, &mat, Execution::Parallel).unwrap();
    assert_eq!(encode_operator(&seq).0, encode_operator(&par).0);
    assert_eq!(
        encode_operator(&seq).0,
        encode_operator(&assemble(&mesh, &mat).unwrap()).0
    );
}

#[test]
fn loaded_operator_reproduces_matvec_bit_for_bit() {
    let mesh = grid(8, 6, 2e-3);
    let op = assemble(&mesh, &MaterialParams::gel_default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("k.bin");
    let sum = save_operator(&op, &path).unwrap();
    let loaded = load_operator(&path, Some(&sum)).unwrap();
    assert!(load_operator(&path, Some("00")).is_err());
    let mut rng = StdRng::seed_from_u64(5);
    let mut u = vec![[0.0; 3]; mesh.node_count()];
    for &i in mesh.top_nodes() {
        u[i] = [
            rng.random_range(-1e-4..1e-4),
            rng.random_range(-1e-4..1e-4),
            rng.random_range(-1e-4..1e-4),
        ];
    }
    let u = DisplacementField::from_vec(u).unwrap();
    assert_eq!(
        op.reconstruct_force(&u).unwrap(),
        loaded.reconstruct_force(&u).unwrap()
    );
    assert!(decode_operator(&encode_operator(&loaded).0).is_ok());
}

#[test]
fn nonconforming_inputs_rejected() {
    let mesh = grid(2, 2, 1e-3);
    let op = assemble(&mesh, &MaterialParams::gel_default()).unwrap();
    assert!(op.reconstruct_force(&DisplacementField::zeros(3)).is_err());
    let mut u = vec![[0.0; 3]; mesh.node_count()];
    u[mesh.fixed_nodes()[0]] = [1e-6, 0.0, 0.0];
    assert!(op
        .reconstruct_force(&DisplacementField::from_vec(u).unwrap())
        .is_err());
    assert!(op.forward_solve(&[[0.0; 3]; 2]).is_err());
}
