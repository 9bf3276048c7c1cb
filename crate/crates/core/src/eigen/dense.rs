use nalgebra::{DMatrix, SymmetricEigen};

use super::{canonicalize, residual_norms, EigenResult, HvOperator};
use crate::error::{Error, Result};

/// Largest matrix accepted by the dense solvers.
pub const DENSE_DIM_LIMIT: usize = 5000;

const SYMMETRY_TOL: f64 = 1e-10;

/// The `k` algebraically smallest eigenpairs of a dense symmetric matrix
/// (Householder tridiagonalization followed by implicit QR).
pub fn eigensol_dense(h: &DMatrix<f64>, k: usize) -> Result<EigenResult> {
    check_symmetric(h)?;
    let n = h.nrows();
    if k > n {
        return Err(Error::InvalidParameter(format!(
            "requested {k} eigenpairs of a {n}x{n} matrix"
        )));
    }
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut vectors = DMatrix::zeros(n, k);
    let mut values = Vec::with_capacity(k);
    for (dst, &src) in order.iter().take(k).enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
        values.push(eig.eigenvalues[src]);
    }
    let images = h * &vectors;
    let (values, vectors, images) = canonicalize(values, vectors, images);
    let residuals = residual_norms(&values, &vectors, &images);
    Ok(EigenResult {
        vectors,
        values,
        residuals,
        inner_iters_used: 0,
        dropped_blocks: 0,
        ritz_sums: Vec::new(),
    })
}

/// Dense solve of an operator, assembled from its action on the unit
/// vectors and symmetrized.
pub fn eigensol_dense_op(op: &HvOperator<'_>, k: usize) -> Result<EigenResult> {
    let n = op.dim();
    if n > DENSE_DIM_LIMIT {
        return Err(Error::TooLarge {
            dim: n,
            limit: DENSE_DIM_LIMIT,
        });
    }
    let h = op.apply_block(&DMatrix::identity(n, n));
    let h = (&h + h.transpose()) * 0.5;
    eigensol_dense(&h, k)
}

/// All eigenvalues of a dense symmetric matrix, ascending.
pub fn symmetric_eigenvalues(h: &DMatrix<f64>) -> Result<Vec<f64>> {
    check_symmetric(h)?;
    let mut vals: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    Ok(vals)
}

fn check_symmetric(h: &DMatrix<f64>) -> Result<()> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: h.ncols(),
        });
    }
    if n > DENSE_DIM_LIMIT {
        return Err(Error::TooLarge {
            dim: n,
            limit: DENSE_DIM_LIMIT,
        });
    }
    let scale = h.amax().max(1.0);
    let mut asym = 0.0f64;
    for j in 0..n {
        for i in (j + 1)..n {
            asym = asym.max((h[(i, j)] - h[(j, i)]).abs());
        }
    }
    if asym > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric(asym));
    }
    if h.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure("matrix has non-finite entries".into()));
    }
    Ok(())
}
