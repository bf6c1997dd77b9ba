//! Row-sparse interface interpolators.
//!
//! Each row carries the interpolation weights of one fine interface DOF over
//! the coarse interface DOFs of the same subdomain; the transpose transfers
//! reactions back to the coarse side.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Sparse rectangular interpolation operator (fine rows over coarse columns).
#[derive(Debug, Clone, PartialEq)]
pub struct SparseInterp {
    ncols: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl SparseInterp {
    pub fn new(ncols: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        for (r, entries) in rows.iter().enumerate() {
            if let Some((c, _)) = entries.iter().find(|(c, _)| *c >= ncols) {
                return Err(Error::DimensionMismatch(format!(
                    "interpolator row {r} references column {c}, but there are only {ncols}"
                )));
            }
        }
        Ok(SparseInterp { ncols, rows })
    }

    /// Identity over `n` DOFs (matching coarse/fine meshes).
    pub fn identity(n: usize) -> Self {
        SparseInterp {
            ncols: n,
            rows: (0..n).map(|k| vec![(k, 1.0)]).collect(),
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, r: usize) -> &[(usize, f64)] {
        &self.rows[r]
    }

    /// True when the operator is a permutation with unit weights.
    pub fn is_identity_permutation(&self) -> bool {
        self.nrows() == self.ncols
            && self
                .rows
                .iter()
                .all(|row| row.len() == 1 && row[0].1 == 1.0)
    }

    /// Fine values from coarse values.
    pub fn apply(&self, coarse: &DVector<f64>) -> DVector<f64> {
        assert_eq!(coarse.len(), self.ncols, "interpolator input length");
        DVector::from_iterator(
            self.rows.len(),
            self.rows
                .iter()
                .map(|row| row.iter().map(|&(c, w)| w * coarse[c]).sum()),
        )
    }

    /// Coarse accumulation of fine values (reaction transfer).
    pub fn apply_transpose(&self, fine: &DVector<f64>) -> DVector<f64> {
        assert_eq!(fine.len(), self.rows.len(), "interpolator transpose input length");
        let mut out = DVector::zeros(self.ncols);
        for (r, row) in self.rows.iter().enumerate() {
            let v = fine[r];
            for &(c, w) in row {
                out[c] += w * v;
            }
        }
        out
    }

    /// Maximum deviation of the row sums from one.
    pub fn partition_of_unity_defect(&self) -> f64 {
        self.rows
            .iter()
            .map(|row| (row.iter().map(|&(_, w)| w).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_roundtrip() {
        let j = SparseInterp::identity(4);
        assert!(j.is_identity_permutation());
        let x = DVector::from_vec(vec![1.0, -2.0, 3.0, 0.5]);
        assert_eq!(j.apply(&x), x);
        assert_eq!(j.apply_transpose(&x), x);
    }

    #[test]
    fn transpose_is_adjoint() {
        let j = SparseInterp::new(
            2,
            vec![vec![(0, 1.0)], vec![(0, 0.5), (1, 0.5)], vec![(1, 1.0)]],
        )
        .unwrap();
        let x = DVector::from_vec(vec![2.0, -4.0]);
        let y = DVector::from_vec(vec![1.0, 3.0, -2.0]);
        let lhs = j.apply(&x).dot(&y);
        let rhs = x.dot(&j.apply_transpose(&y));
        assert!((lhs - rhs).abs() <= 1e-14 * lhs.abs().max(1.0));
        assert!(j.partition_of_unity_defect() <= 1e-15);
    }

    #[test]
    fn out_of_range_column_rejected() {
        assert!(SparseInterp::new(1, vec![vec![(1, 1.0)]]).is_err());
    }
}
