//! Compressed sparse row storage and the symmetric solvers used by the
//! forward (oracle) path.

use crate::error::{Error, Result};
use crate::exec::Execution;

/// CSR matrix with sorted column indices in every row.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_parts(
        n: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != n + 1 || row_ptr[0] != 0 || row_ptr[n] != col_idx.len() {
            return Err(Error::format("csr", "row pointer table is inconsistent"));
        }
        if col_idx.len() != values.len() {
            return Err(Error::format(
                "csr",
                "column and value arrays differ in length",
            ));
        }
        for r in 0..n {
            if row_ptr[r] > row_ptr[r + 1] {
                return Err(Error::format("csr", "row pointers decrease"));
            }
            let cols = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) || cols.iter().any(|&c| c >= n) {
                return Err(Error::format(
                    "csr",
                    format!("row {r} columns unsorted or out of range"),
                ));
            }
        }
        Ok(Self {
            nrows: n,
            ncols: n,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Row count (the dimension for square matrices).
    pub fn dim(&self) -> usize {
        self.nrows
    }

    pub fn cols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let s = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[s.clone()], &self.values[s])
    }

    /// Entry `(r, c)`, zero if outside the pattern.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map(|k| vals[k]).unwrap_or(0.0)
    }

    /// Storage offset of `(r, c)` in the value array.
    pub(crate) fn offset(&self, r: usize, c: usize) -> Option<usize> {
        let (cols, _) = self.row(r);
        cols.binary_search(&c).ok().map(|k| self.row_ptr[r] + k)
    }

    fn row_dot(&self, r: usize, x: &[f64]) -> f64 {
        let (cols, vals) = self.row(r);
        cols.iter().zip(vals).map(|(&c, &v)| v * x[c]).sum()
    }

    /// `y = A x`. Each row is reduced left to right, so the result is
    /// independent of the execution policy.
    pub fn matvec_with(&self, x: &[f64], exec: Execution) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "matvec dimension mismatch");
        let mut y = vec![0.0; self.nrows];
        exec.fill(&mut y, |r| self.row_dot(r, x));
        y
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        self.matvec_with(x, Execution::Sequential)
    }

    /// Submatrix with the given rows and columns (both index lists sorted
    /// ascending), renumbered densely.
    pub fn extract(&self, rows: &[usize], cols: &[usize]) -> CsrMatrix {
        let mut col_map = vec![usize::MAX; self.ncols];
        for (k, &c) in cols.iter().enumerate() {
            col_map[c] = k;
        }
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for &r in rows {
            let (rc, rv) = self.row(r);
            for (&c, &v) in rc.iter().zip(rv) {
                let m = col_map[c];
                if m != usize::MAX {
                    col_idx.push(m);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        // the column map preserves ordering because `cols` is ascending
        CsrMatrix {
            nrows: rows.len(),
            ncols: cols.len(),
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.nrows
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows())
            .map(|r| self.row(r).1.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Solver choice for symmetric positive definite systems.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SolverKind {
    /// Envelope (skyline) Cholesky factorization.
    #[default]
    Direct,
    /// Jacobi-preconditioned conjugate gradients.
    ConjugateGradient,
}

/// Variable-band Cholesky factor `A = L L^T` of a symmetric positive
/// definite matrix. Row `i` stores `L[i][first[i]..=i]`.
#[derive(Clone, Debug)]
pub struct SkylineCholesky {
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.rows();
        let mut first = vec![0usize; n];
        for (i, f) in first.iter_mut().enumerate() {
            let (cols, _) = a.row(i);
            *f = cols.first().copied().unwrap_or(i).min(i);
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut len = 0;
        for (i, &f) in first.iter().enumerate() {
            start.push(len);
            len += i - f + 1;
        }
        start.push(len);
        let mut data = vec![0.0; len];
        for i in 0..n {
            let (cols, vals) = a.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                if c <= i {
                    data[start[i] + c - first[i]] = v;
                }
            }
        }
        let max_diag = (0..n).map(|i| a.get(i, i).abs()).fold(0.0, f64::max);
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let lo = fi.max(fj);
                let mut s = data[start[i] + j - fi];
                let ri = &data[start[i] + lo - fi..start[i] + j - fi];
                let rj = &data[start[j] + lo - fj..start[j] + j - fj];
                s -= ri.iter().zip(rj).map(|(x, y)| x * y).sum::<f64>();
                if j == i {
                    if !(s > 1e-14 * max_diag) {
                        return Err(Error::NumericalFailure {
                            reason: format!("matrix not positive definite at pivot {i}"),
                            residual: f64::NAN,
                        });
                    }
                    data[start[i] + i - fi] = s.sqrt();
                } else {
                    data[start[i] + j - fi] = s / data[start[j] + j - fj];
                }
            }
        }
        Ok(Self { first, start, data })
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let s: f64 = row[..i - fi]
                .iter()
                .zip(&y[fi..i])
                .map(|(l, y)| l * y)
                .sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            y[i] /= row[i - fi];
            let yi = y[i];
            for (k, l) in row[..i - fi].iter().enumerate() {
                y[fi + k] -= l * yi;
            }
        }
        y
    }
}

/// Jacobi-preconditioned conjugate gradients. Converges when
/// `||b - A x|| <= tol * ||b||`.
pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &[f64],
    tol: f64,
    max_iter: usize,
    exec: Execution,
) -> Result<Vec<f64>> {
    let n = a.rows();
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let inv_diag: Vec<f64> = (0..n)
        .map(|i| {
            let d = a.get(i, i);
            if d > 0.0 {
                1.0 / d
            } else {
                1.0
            }
        })
        .collect();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..max_iter {
        let ap = a.matvec_with(&p, exec);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::NumericalFailure {
                reason: "conjugate gradient breakdown (matrix not positive definite)".into(),
                residual: norm(&r) / b_norm,
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if norm(&r) <= tol * b_norm {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::NumericalFailure {
        reason: format!("conjugate gradient did not converge in {max_iter} iterations"),
        residual: norm(&r) / b_norm,
    })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
