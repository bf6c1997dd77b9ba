//! Small sparse-matrix helpers shared by the solver modules.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::factorization::CscCholesky;
use nalgebra_sparse::{CooMatrix, CscMatrix};

/// y = A x for a CSC matrix.
pub fn spmv(a: &CscMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
    assert_eq!(a.ncols(), x.len(), "spmv dimension mismatch");
    let mut y = DVector::zeros(a.nrows());
    for j in 0..a.ncols() {
        let col = a.col(j);
        let xj = x[j];
        if xj == 0.0 {
            continue;
        }
        for (&i, &v) in col.row_indices().iter().zip(col.values()) {
            y[i] += v * xj;
        }
    }
    y
}

/// y = A' x for a CSC matrix (column-wise dot products).
pub fn spmv_transpose(a: &CscMatrix<f64>, x: &DVector<f64>) -> DVector<f64> {
    assert_eq!(a.nrows(), x.len(), "spmv_transpose dimension mismatch");
    let mut y = DVector::zeros(a.ncols());
    for j in 0..a.ncols() {
        let col = a.col(j);
        let mut acc = 0.0;
        for (&i, &v) in col.row_indices().iter().zip(col.values()) {
            acc += v * x[i];
        }
        y[j] = acc;
    }
    y
}

/// Extracts the submatrix `a[rows, cols]` with rows/cols renumbered to
/// 0..len. Index lists must be sorted and duplicate-free.
pub fn extract_block(a: &CscMatrix<f64>, rows: &[usize], cols: &[usize]) -> CscMatrix<f64> {
    let mut row_pos = vec![usize::MAX; a.nrows()];
    for (k, &r) in rows.iter().enumerate() {
        row_pos[r] = k;
    }
    let mut coo = CooMatrix::new(rows.len(), cols.len());
    for (k, &j) in cols.iter().enumerate() {
        let col = a.col(j);
        for (&i, &v) in col.row_indices().iter().zip(col.values()) {
            let r = row_pos[i];
            if r != usize::MAX {
                coo.push(r, k, v);
            }
        }
    }
    CscMatrix::from(&coo)
}

/// Solves `A x = b` with a precomputed sparse Cholesky factorization.
pub fn chol_solve(chol: &CscCholesky<f64>, b: &DVector<f64>) -> DVector<f64> {
    let mut rhs = DMatrix::from_column_slice(b.len(), 1, b.as_slice());
    chol.solve_mut(&mut rhs);
    DVector::from_column_slice(rhs.column(0).as_slice())
}

/// Dense copy of a sparse matrix (small problems / tests).
pub fn to_dense(a: &CscMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(a.nrows(), a.ncols());
    for (i, j, v) in a.triplet_iter() {
        m[(i, j)] += v;
    }
    m
}

/// CSC from a dense matrix, dropping exact zeros (tests and toy inputs).
pub fn from_dense(m: &DMatrix<f64>) -> CscMatrix<f64> {
    let mut coo = CooMatrix::new(m.nrows(), m.ncols());
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            if m[(i, j)] != 0.0 {
                coo.push(i, j, m[(i, j)]);
            }
        }
    }
    CscMatrix::from(&coo)
}
