use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative pivot below which a column is treated as linearly dependent.
pub const PIVOT_TOL: f64 = 1e-12;

/// Modified Gram-Schmidt with one re-orthogonalization pass.
///
/// Preserves the span of `v`. A column whose norm collapses below `PIVOT_TOL` times its original norm is reported as
/// rank deficient.
pub fn gram_schmidt(v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (n, k) = v.shape();
    let mut q = DMatrix::<f64>::zeros(n, k);
    for j in 0..k {
        let mut col: DVector<f64> = v.column(j).into_owned();
        let original = col.norm();
        if !original.is_finite() {
            return Err(Error::EigenDivergence(format!("column {j} is not finite")));
        }
        for _pass in 0..2 {
            for i in 0..j {
                let qi = q.column(i);
                let c = qi.dot(&col);
                col.axpy(-c, &qi, 1.0);
            }
        }
        let norm = col.norm();
        if original == 0.0 || norm <= PIVOT_TOL * original {
            return Err(Error::RankDeficient {
                column: j,
                residual: norm,
            });
        }
        q.set_column(j, &(col / norm));
    }
    Ok(q)
}

/// Orthonormalizes the columns of `candidates` against the orthonormal
/// columns of `basis` and against each other, silently dropping columns that
/// become numerically dependent (relative norm below `drop_tol`).
///
/// Returns the kept orthonormal columns (possibly zero of them).
pub(crate) fn orthonormalize_against(
    basis: &DMatrix<f64>,
    candidates: &DMatrix<f64>,
    drop_tol: f64,
) -> DMatrix<f64> {
    let n = candidates.nrows();
    let mut kept: Vec<DVector<f64>> = Vec::with_capacity(candidates.ncols());
    for j in 0..candidates.ncols() {
        let mut col: DVector<f64> = candidates.column(j).into_owned();
        let original = col.norm();
        if !(original > 0.0 && original.is_finite()) {
            continue;
        }
        for _pass in 0..2 {
            for i in 0..basis.ncols() {
                let b = basis.column(i);
                let c = b.dot(&col);
                col.axpy(-c, &b, 1.0);
            }
            for q in &kept {
                let c = q.dot(&col);
                col.axpy(-c, q, 1.0);
            }
        }
        let norm = col.norm();
        if norm > drop_tol * original {
            kept.push(col / norm);
        }
    }
    let mut out = DMatrix::zeros(n, kept.len());
    for (j, c) in kept.iter().enumerate() {
        out.set_column(j, c);
    }
    out
}
