//! Hessian-vector operators and the eigensolvers that refresh the unstable
//! frame between position updates.

mod dense;
mod hv;
mod lobpcg;
mod orth;
mod sirqit;

pub use dense::{eigensol_dense, eigensol_dense_op, symmetric_eigenvalues, DENSE_DIM_LIMIT};
pub use hv::{dimer_hv, HvKind, HvOperator};
pub use lobpcg::{eigensol_lobpcg, LobpcgOptions};
pub use orth::{gram_schmidt, PIVOT_TOL};
pub use sirqit::{eigensol_sirqit, SirqitOptions};

use nalgebra::{DMatrix, DVector};

use crate::frame::SpectralFrame;

/// Output of every eigensolver: the `k` algebraically smallest eigenpairs
/// found, sorted ascending, with residuals `||H v_i - lambda_i v_i||`.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub vectors: DMatrix<f64>,
    pub values: Vec<f64>,
    pub residuals: Vec<f64>,
    pub inner_iters_used: usize,
    /// LOBPCG iterations in which the residual / previous-direction block was
    /// dropped because the Ritz basis became ill-conditioned.
    pub dropped_blocks: usize,
    /// Sum of the Ritz values after each LOBPCG iteration (empty for the
    /// other solvers).
    pub ritz_sums: Vec<f64>,
}

impl EigenResult {
    pub fn empty(dim: usize) -> Self {
        Self {
            vectors: DMatrix::zeros(dim, 0),
            values: Vec::new(),
            residuals: Vec::new(),
            inner_iters_used: 0,
            dropped_blocks: 0,
            ritz_sums: Vec::new(),
        }
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0f64, |m, r| m.max(*r))
    }

    pub fn into_frame(self) -> SpectralFrame {
        SpectralFrame {
            vectors: self.vectors,
            rayleigh: self.values,
        }
    }
}

/// Sorts pairs ascending by value and fixes each vector's sign so that its
/// largest-magnitude component is positive. `images` (H applied to the
/// vectors) is permuted and flipped alongside.
pub(crate) fn canonicalize(
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    images: DMatrix<f64>,
) -> (Vec<f64>, DMatrix<f64>, DMatrix<f64>) {
    let k = values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let n = vectors.nrows();
    let mut out_v = DMatrix::zeros(n, k);
    let mut out_h = DMatrix::zeros(n, k);
    let mut out_vals = Vec::with_capacity(k);
    for (dst, &src) in order.iter().enumerate() {
        let col = vectors.column(src);
        let mut pivot = 0;
        for i in 1..n {
            if col[i].abs() > col[pivot].abs() {
                pivot = i;
            }
        }
        let sign = if n > 0 && col[pivot] < 0.0 { -1.0 } else { 1.0 };
        out_v.set_column(dst, &(col * sign));
        out_h.set_column(dst, &(images.column(src) * sign));
        out_vals.push(values[src]);
    }
    (out_vals, out_v, out_h)
}

/// Residual norms `||h_i - lambda_i v_i||`.
pub(crate) fn residual_norms(values: &[f64], vectors: &DMatrix<f64>, images: &DMatrix<f64>) -> Vec<f64> {
    values
        .iter()
        .enumerate()
        .map(|(i, &lam)| (images.column(i) - vectors.column(i) * lam).norm())
        .collect()
}

/// Estimate of `||H||_2` from `steps` power iterations on a fixed start
/// vector.
pub fn power_norm_estimate(op: &HvOperator<'_>, steps: usize) -> f64 {
    let n = op.dim();
    if n == 0 {
        return 0.0;
    }
    // Deterministic, non-degenerate start: mixes all coordinates.
    let mut v = DVector::from_fn(n, |i, _| 1.0 + ((i as f64) * 0.7548776662466927).fract());
    v.normalize_mut();
    let mut est = 0.0;
    for _ in 0..steps.max(1) {
        let w = op.apply(&v);
        est = w.norm();
        if !(est > 0.0 && est.is_finite()) {
            break;
        }
        v = w / est;
    }
    est
}
