use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::landscape::{EnergyLandscape, SaddleTarget, ZERO_EIGENVALUE_REL_TOL};

/// Separable quadratic `E(x) = 1/2 sum_i lambda_i x_i^2` with its critical
/// point at the origin.
#[derive(Debug, Clone)]
pub struct QuadraticLandscape {
    eigvals: Vec<f64>,
    target: SaddleTarget,
}

impl QuadraticLandscape {
    pub fn new(eigvals: Vec<f64>) -> Result<Self> {
        if eigvals.is_empty() {
            return Err(Error::InvalidParameter("quadratic needs at least one eigenvalue".into()));
        }
        if let Some(bad) = eigvals.iter().find(|v| **v == 0.0 || !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "quadratic eigenvalues must be nonzero and finite, got {bad}"
            )));
        }
        let target = SaddleTarget::from_spectrum(
            DVector::zeros(eigvals.len()),
            eigvals.clone(),
            ZERO_EIGENVALUE_REL_TOL,
        );
        Ok(Self { eigvals, target })
    }

    pub fn eigvals(&self) -> &[f64] {
        &self.eigvals
    }
}

pub fn quadratic_landscape(eigvals: Vec<f64>) -> Result<QuadraticLandscape> {
    QuadraticLandscape::new(eigvals)
}

impl EnergyLandscape for QuadraticLandscape {
    fn name(&self) -> &str {
        "quadratic"
    }

    fn dim(&self) -> usize {
        self.eigvals.len()
    }

    fn energy(&self, x: &DVector<f64>) -> f64 {
        0.5 * self.eigvals.iter().zip(x.iter()).map(|(l, xi)| l * xi * xi).sum::<f64>()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.dim(), |i, _| self.eigvals[i] * x[i])
    }

    fn hessian(&self, _x: &DVector<f64>) -> Option<DMatrix<f64>> {
        Some(DMatrix::from_diagonal(&DVector::from_column_slice(&self.eigvals)))
    }

    fn has_hessian_vec(&self) -> bool {
        true
    }

    fn hessian_vec(&self, _x: &DVector<f64>, v: &DVector<f64>) -> Option<DVector<f64>> {
        Some(DVector::from_fn(self.dim(), |i, _| self.eigvals[i] * v[i]))
    }

    fn known_saddle(&self) -> Option<&SaddleTarget> {
        Some(&self.target)
    }
}
