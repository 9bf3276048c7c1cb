use nalgebra::{DMatrix, DVector};

use super::{canonicalize, gram_schmidt, residual_norms, EigenResult, HvOperator};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct SirqitOptions {
    /// Maximum number of sweeps.
    pub inner_iters: usize,
    /// Relaxation step.
    pub zeta: f64,
    /// Sweeps stop once every residual is at most `tol`.
    pub tol: f64,
}

/// Simultaneous Rayleigh-quotient iterative minimization.
///
/// Each sweep relaxes the columns in order,
///
/// ```text
/// v_i <- v_i - zeta (I - v_i v_i^T - 2 sum_{j<i} v_j v_j^T) H v_i,
/// ```
///
/// using the already-updated `v_j` for `j < i`, and then re-orthonormalizes
/// the block. `H v_i` is evaluated once per column per sweep, plus once more
/// for the returned residuals.
pub fn eigensol_sirqit(
    op: &HvOperator<'_>,
    v0: &DMatrix<f64>,
    opts: SirqitOptions,
) -> Result<EigenResult> {
    let (n, k) = v0.shape();
    if n != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: n,
        });
    }
    if k == 0 {
        return Ok(EigenResult::empty(n));
    }
    if !(opts.zeta > 0.0 && opts.zeta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "SIRQIT needs a positive zeta, got {}",
            opts.zeta
        )));
    }

    let mut v = v0.clone();
    let mut hv = op.apply_block(&v);
    let mut used = 0;
    for _ in 0..opts.inner_iters {
        let values = rayleigh(&v, &hv);
        let res = residual_norms(&values, &v, &hv);
        if res.iter().all(|r| *r <= opts.tol) {
            break;
        }
        for i in 0..k {
            let w: DVector<f64> = hv.column(i).into_owned();
            let vi: DVector<f64> = v.column(i).into_owned();
            let mut dir = &w - &vi * vi.dot(&w);
            for j in 0..i {
                let vj = v.column(j);
                let c = vj.dot(&w);
                dir.axpy(-2.0 * c, &vj, 1.0);
            }
            v.set_column(i, &(vi - dir * opts.zeta));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::EigenDivergence(format!(
                "non-finite frame after SIRQIT sweep with zeta = {:e}",
                opts.zeta
            )));
        }
        v = gram_schmidt(&v).map_err(|e| {
            Error::EigenDivergence(format!("frame collapsed during SIRQIT sweep: {e}"))
        })?;
        hv = op.apply_block(&v);
        used += 1;
    }

    let values = rayleigh(&v, &hv);
    let (values, v, hv) = canonicalize(values, v, hv);
    let residuals = residual_norms(&values, &v, &hv);
    if values.iter().chain(residuals.iter()).any(|x| !x.is_finite()) {
        return Err(Error::EigenDivergence("non-finite Rayleigh quotient".into()));
    }
    Ok(EigenResult {
        vectors: v,
        values,
        residuals,
        inner_iters_used: used,
        dropped_blocks: 0,
        ritz_sums: Vec::new(),
    })
}

fn rayleigh(v: &DMatrix<f64>, hv: &DMatrix<f64>) -> Vec<f64> {
    (0..v.ncols())
        .map(|i| v.column(i).dot(&hv.column(i)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::eigensol_dense;
    use crate::frame::orthonormality_error;

    fn diag(vals: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(vals))
    }

    fn opts(inner_iters: usize, zeta: f64) -> SirqitOptions {
        SirqitOptions {
            inner_iters,
            zeta,
            tol: 1e-13,
        }
    }

    #[test]
    fn invariant_warm_start_is_kept() {
        let h = diag(&[-2.0, -1.0, 3.0]);
        let op = HvOperator::from_matrix(&h);
        let v0 = DMatrix::<f64>::identity(3, 2);
        let r = eigensol_sirqit(&op, &v0, opts(5, 0.1)).unwrap();
        assert_eq!(r.values, vec![-2.0, -1.0]);
        assert_eq!(r.residuals, vec![0.0, 0.0]);
        assert_eq!(r.vectors, v0);
        assert_eq!(r.inner_iters_used, 0);
    }

    #[test]
    fn converges_to_dense_subspace() {
        let h = diag(&[3.0, -1.0, -2.0]);
        let op = HvOperator::from_matrix(&h);
        let v0 = gram_schmidt(&DMatrix::from_column_slice(
            3,
            2,
            &[0.52, -0.31, 0.79, 0.13, 0.88, -0.44],
        ))
        .unwrap();
        let r = eigensol_sirqit(&op, &v0, opts(200, 0.1)).unwrap();
        let oracle = eigensol_dense(&h, 2).unwrap();
        let p_iter = &r.vectors * r.vectors.transpose();
        let p_dense = &oracle.vectors * oracle.vectors.transpose();
        assert!((p_iter - p_dense).norm() <= 1e-6);
        assert!((r.values[0] + 2.0).abs() < 1e-9 && (r.values[1] + 1.0).abs() < 1e-9);
        assert!(orthonormality_error(&r.vectors) <= 1e-10);
        assert!(r.inner_iters_used <= 200);
    }

    #[test]
    fn empty_frame_needs_no_products() {
        let h = diag(&[1.0, 2.0]);
        let op = HvOperator::from_matrix(&h);
        let r = eigensol_sirqit(&op, &DMatrix::zeros(2, 0), opts(10, 0.1)).unwrap();
        assert!(r.values.is_empty());
        assert_eq!(op.applications(), 0);
    }

    #[test]
    fn oversized_zeta_reports_divergence() {
        let h = diag(&[1e300, -1e300, 2.0]);
        let op = HvOperator::from_matrix(&h);
        let v0 = gram_schmidt(&DMatrix::from_column_slice(3, 1, &[1.0, 1.0, 1.0])).unwrap();
        let err = eigensol_sirqit(&op, &v0, opts(3, 1e10)).unwrap_err();
        assert!(matches!(err, Error::EigenDivergence(_)), "{err}");
        assert!(err.to_string().contains("smaller zeta"));
    }
}
