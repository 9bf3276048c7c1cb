use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// The `k` orthonormal directions tracked alongside the position, with their
/// current Rayleigh quotients (ascending).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralFrame {
    pub vectors: DMatrix<f64>,
    pub rayleigh: Vec<f64>,
}

impl SpectralFrame {
    pub fn empty(dim: usize) -> Self {
        Self {
            vectors: DMatrix::zeros(dim, 0),
            rayleigh: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn k(&self) -> usize {
        self.vectors.ncols()
    }

    /// `max |V^T V - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.vectors)
    }
}

pub fn orthonormality_error(v: &DMatrix<f64>) -> f64 {
    let gram = v.tr_mul(v);
    let k = gram.nrows();
    let mut worst = 0.0f64;
    for i in 0..k {
        for j in 0..k {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).abs());
        }
    }
    worst
}

/// Applies `I - 2 V V^T` to `g` without forming the projector: `g - 2 V (V^T g)`.
///
/// An empty `V` (k = 0) is the identity.
pub fn reflect(g: &DVector<f64>, v: &DMatrix<f64>) -> Result<DVector<f64>> {
    if g.len() != v.nrows() {
        return Err(Error::DimensionMismatch {
            expected: v.nrows(),
            found: g.len(),
        });
    }
    if v.ncols() == 0 {
        return Ok(g.clone());
    }
    let coeffs = v.tr_mul(g);
    let mut out = g.clone();
    out.gemv(-2.0, v, &coeffs, 1.0);
    Ok(out)
}
