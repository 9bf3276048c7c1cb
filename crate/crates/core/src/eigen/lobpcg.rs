use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::orth::orthonormalize_against;
use super::{canonicalize, eigensol_dense_op, gram_schmidt, residual_norms, EigenResult, HvOperator};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct LobpcgOptions {
    pub inner_iters: usize,
    /// Converged when `max_i ||r_i|| <= tol * ||H||_est`, where the norm
    /// estimate is the largest Ritz magnitude seen so far.
    pub tol: f64,
}

/// Relative norm below which an expansion vector is dropped from the basis.
const DROP_TOL: f64 = 1e-10;

/// Unpreconditioned block LOBPCG for the `k` smallest eigenpairs.
///
/// Each iteration performs Rayleigh-Ritz on `span[X, R, P]` (current
/// vectors, residuals, previous search directions). Expansion vectors that
/// become numerically dependent are dropped for that iteration instead of
/// aborting; such iterations are counted in `dropped_blocks`. Falls back to a
/// dense solve when `dim < 3k`.
pub fn eigensol_lobpcg(
    op: &HvOperator<'_>,
    v0: &DMatrix<f64>,
    opts: LobpcgOptions,
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
    if n < 3 * k {
        return eigensol_dense_op(op, k);
    }

    let x0 = gram_schmidt(v0)?;
    let ax0 = op.apply_block(&x0);
    let (mut theta, c) = ritz(&x0, &ax0, k)?;
    let mut x = &x0 * &c;
    let mut ax = &ax0 * &c;
    let mut hnorm = max_abs(&theta);
    let mut prev: Option<(DMatrix<f64>, DMatrix<f64>)> = None;
    let mut ritz_sums = vec![theta.iter().sum::<f64>()];
    let mut dropped_blocks = 0;
    let mut used = 0;

    for it in 1..=opts.inner_iters {
        used = it;
        let r = &ax - &x * DMatrix::from_diagonal(&DVector::from_column_slice(&theta));
        let max_res = (0..k).map(|j| r.column(j).norm()).fold(0.0f64, f64::max);
        if !max_res.is_finite() {
            return Err(Error::EigenDivergence("non-finite LOBPCG residual".into()));
        }
        if max_res <= opts.tol * hnorm.max(f64::MIN_POSITIVE) {
            break;
        }

        let r_new = orthonormalize_against(&x, &r, DROP_TOL);
        let mut dropped = r_new.ncols() < k;
        let mut basis_cols = vec![x.clone(), r_new.clone()];
        let mut image_cols = vec![ax.clone(), op.apply_block(&r_new)];
        if let Some((p, _)) = &prev {
            let xr = hcat(&[x.clone(), r_new.clone()]);
            let p_new = orthonormalize_against(&xr, p, DROP_TOL);
            dropped |= p_new.ncols() < p.ncols();
            image_cols.push(op.apply_block(&p_new));
            basis_cols.push(p_new);
        }
        if dropped {
            dropped_blocks += 1;
        }
        let s = hcat(&basis_cols);
        let as_ = hcat(&image_cols);
        if s.ncols() == k {
            // nothing to expand with: X already spans an invariant subspace
            break;
        }

        let (all_theta, c_all) = ritz(&s, &as_, s.ncols())?;
        hnorm = hnorm.max(max_abs(&all_theta));
        let c = c_all.columns(0, k).into_owned();
        theta = all_theta[..k].to_vec();
        let x_new = &s * &c;
        let ax_new = &as_ * &c;
        let tail = s.ncols() - k;
        let c_tail = c.rows(k, tail);
        let p = s.columns(k, tail) * c_tail;
        let ap = as_.columns(k, tail) * c_tail;
        prev = Some((p, ap));
        x = x_new;
        ax = ax_new;

        if super::super::frame::orthonormality_error(&x) > 1e-12 {
            x = gram_schmidt(&x)?;
            ax = op.apply_block(&x);
            let (t, c) = ritz(&x, &ax, k)?;
            x = &x * &c;
            ax = &ax * &c;
            theta = t;
        }
        ritz_sums.push(theta.iter().sum());
    }

    let (values, vectors, images) = canonicalize(theta, x, ax);
    let residuals = residual_norms(&values, &vectors, &images);
    Ok(EigenResult {
        vectors,
        values,
        residuals,
        inner_iters_used: used,
        dropped_blocks,
        ritz_sums,
    })
}

/// Rayleigh-Ritz on an orthonormal basis `s` with images `as_`: returns the
/// `m` smallest Ritz values (ascending) and their coefficient vectors.
fn ritz(s: &DMatrix<f64>, as_: &DMatrix<f64>, m: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let g = s.tr_mul(as_);
    let g = (&g + g.transpose()) * 0.5;
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenDivergence("non-finite Rayleigh-Ritz matrix".into()));
    }
    let eig = SymmetricEigen::new(g);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().take(m).map(|&i| eig.eigenvalues[i]).collect();
    let mut c = DMatrix::zeros(s.ncols(), m);
    for (dst, &src) in order.iter().take(m).enumerate() {
        c.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((vals, c))
}

fn hcat(blocks: &[DMatrix<f64>]) -> DMatrix<f64> {
    let n = blocks.first().map_or(0, |b| b.nrows());
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = DMatrix::zeros(n, cols);
    let mut at = 0;
    for b in blocks {
        out.columns_mut(at, b.ncols()).copy_from(b);
        at += b.ncols();
    }
    out
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
