//! The energy landscape abstraction and finite-difference oracles.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A twice-differentiable energy surface `E: R^d -> R`.
///
/// Landscapes are immutable after construction and may be shared across
/// concurrent runs. Hessian access is tiered: solvers ask for
/// [`hessian_vec`](Self::hessian_vec) first and fall back to the dimer
/// approximation when it is absent; the dense [`hessian`](Self::hessian) is
/// reserved for oracles and the stability verifier.
pub trait EnergyLandscape: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    fn energy(&self, x: &DVector<f64>) -> f64;

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;

    fn hessian(&self, _x: &DVector<f64>) -> Option<DMatrix<f64>> {
        None
    }

    fn has_hessian_vec(&self) -> bool {
        false
    }

    fn hessian_vec(&self, _x: &DVector<f64>, _v: &DVector<f64>) -> Option<DVector<f64>> {
        None
    }

    fn known_saddle(&self) -> Option<&SaddleTarget> {
        None
    }

    /// True for landscapes whose critical points carry zero Hessian
    /// eigenvalues (the linear network loss).
    fn degenerate(&self) -> bool {
        false
    }
}

/// A reference critical point with its Morse index.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleTarget {
    pub x_star: DVector<f64>,
    pub index_k: usize,
    /// `max |lambda| / min |lambda|` of the Hessian at `x_star`.
    pub kappa: Option<f64>,
    /// Hessian eigenvalues at `x_star`, ascending.
    pub eigvals: Option<Vec<f64>>,
}

/// Relative magnitude below which a Hessian eigenvalue counts as zero.
pub const ZERO_EIGENVALUE_REL_TOL: f64 = 1e-10;

impl SaddleTarget {
    pub fn new(x_star: DVector<f64>, index_k: usize) -> Self {
        Self {
            x_star,
            index_k,
            kappa: None,
            eigvals: None,
        }
    }

    /// Builds a target from an ascending Hessian spectrum; the index counts
    /// eigenvalues below `-rel_tol * max|lambda|`.
    pub fn from_spectrum(x_star: DVector<f64>, mut eigvals: Vec<f64>, rel_tol: f64) -> Self {
        eigvals.sort_by(|a, b| a.total_cmp(b));
        let scale = eigvals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let index_k = eigvals.iter().filter(|&&v| v < -rel_tol * scale).count();
        let min_abs = eigvals.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        let kappa = (min_abs > 0.0).then(|| scale / min_abs);
        Self {
            x_star,
            index_k,
            kappa,
            eigvals: Some(eigvals),
        }
    }

    /// Number of eigenvalues within `rel_tol * max|lambda|` of zero.
    pub fn near_zero_count(&self, rel_tol: f64) -> Option<usize> {
        let vals = self.eigvals.as_ref()?;
        let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Some(vals.iter().filter(|v| v.abs() <= rel_tol * scale).count())
    }
}

/// Per-coordinate finite-difference step `h * (1 + |x_i|)`.
fn fd_step(h: f64, xi: f64) -> f64 {
    h * (1.0 + xi.abs())
}

/// Central-difference gradient of the energy with per-coordinate step
/// `h * (1 + |x_i|)`.
pub fn finite_diff_gradient(
    land: &dyn EnergyLandscape,
    x: &DVector<f64>,
    h: f64,
) -> Result<DVector<f64>> {
    check_fd_args(land, x, h)?;
    let mut g = DVector::zeros(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let step = fd_step(h, x[i]);
        probe[i] = x[i] + step;
        let plus = land.energy(&probe);
        probe[i] = x[i] - step;
        let minus = land.energy(&probe);
        probe[i] = x[i];
        g[i] = (plus - minus) / (2.0 * step);
    }
    Ok(g)
}

/// Central differences of the analytic gradient, symmetrized as `(H + H^T)/2`.
pub fn finite_diff_hessian(
    land: &dyn EnergyLandscape,
    x: &DVector<f64>,
    h: f64,
) -> Result<DMatrix<f64>> {
    check_fd_args(land, x, h)?;
    let n = x.len();
    let mut hess = DMatrix::zeros(n, n);
    let mut probe = x.clone();
    for j in 0..n {
        let step = fd_step(h, x[j]);
        probe[j] = x[j] + step;
        let plus = land.gradient(&probe);
        probe[j] = x[j] - step;
        let minus = land.gradient(&probe);
        probe[j] = x[j];
        hess.set_column(j, &((plus - minus) / (2.0 * step)));
    }
    Ok((&hess + hess.transpose()) * 0.5)
}

fn check_fd_args(land: &dyn EnergyLandscape, x: &DVector<f64>, h: f64) -> Result<()> {
    if x.len() != land.dim() {
        return Err(Error::DimensionMismatch {
            expected: land.dim(),
            found: x.len(),
        });
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "finite-difference step must be positive, got {h}"
        )));
    }
    Ok(())
}

/// Dense Hessian from the landscape if available, otherwise assembled column
/// by column from Hessian-vector products.
pub fn dense_hessian(land: &dyn EnergyLandscape, x: &DVector<f64>) -> Option<DMatrix<f64>> {
    if let Some(h) = land.hessian(x) {
        return Some(h);
    }
    if !land.has_hessian_vec() {
        return None;
    }
    let n = land.dim();
    let mut hess = DMatrix::zeros(n, n);
    let mut e = DVector::zeros(n);
    for j in 0..n {
        e[j] = 1.0;
        hess.set_column(j, &land.hessian_vec(x, &e)?);
        e[j] = 0.0;
    }
    Some((&hess + hess.transpose()) * 0.5)
}
