use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::landscape::{EnergyLandscape, SaddleTarget, ZERO_EIGENVALUE_REL_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Convex2Params {
    pub d: usize,
    pub k: usize,
}

impl Default for Convex2Params {
    fn default() -> Self {
        Self { d: 100, k: 5 }
    }
}

/// `S(x) = sum_i s_i a_i (e^{x_i} - x_i) / 10` with `a_i = 1 + 5(i-1)`,
/// `s_i = -1` for the first `k` coordinates and `+1` otherwise. The origin
/// is an index-`k` saddle.
#[derive(Debug, Clone)]
pub struct Convex2 {
    params: Convex2Params,
    /// `s_i a_i / 10`
    coef: Vec<f64>,
    target: SaddleTarget,
}

pub fn convex2(params: Convex2Params) -> Result<Convex2> {
    if params.d == 0 || params.k > params.d {
        return Err(Error::InvalidParameter(format!(
            "convex2 needs 0 <= k <= d and d >= 1, got d = {}, k = {}",
            params.d, params.k
        )));
    }
    let coef: Vec<f64> = (0..params.d)
        .map(|i| {
            let a = 1.0 + 5.0 * i as f64;
            let s = if i < params.k { -1.0 } else { 1.0 };
            s * a / 10.0
        })
        .collect();
    let target =
        SaddleTarget::from_spectrum(DVector::zeros(params.d), coef.clone(), ZERO_EIGENVALUE_REL_TOL);
    Ok(Convex2 {
        params,
        coef,
        target,
    })
}

impl Convex2 {
    pub fn params(&self) -> Convex2Params {
        self.params
    }
}

impl EnergyLandscape for Convex2 {
    fn name(&self) -> &str {
        "convex2"
    }

    fn dim(&self) -> usize {
        self.params.d
    }

    fn energy(&self, x: &DVector<f64>) -> f64 {
        self.coef
            .iter()
            .zip(x.iter())
            .map(|(c, xi)| c * (xi.exp() - xi))
            .sum()
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.dim(), |i, _| self.coef[i] * x[i].exp_m1())
    }

    fn hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        let diag = DVector::from_fn(self.dim(), |i, _| self.coef[i] * x[i].exp());
        Some(DMatrix::from_diagonal(&diag))
    }

    fn has_hessian_vec(&self) -> bool {
        true
    }

    fn hessian_vec(&self, x: &DVector<f64>, v: &DVector<f64>) -> Option<DVector<f64>> {
        Some(DVector::from_fn(self.dim(), |i, _| self.coef[i] * x[i].exp() * v[i]))
    }

    fn known_saddle(&self) -> Option<&SaddleTarget> {
        Some(&self.target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_is_critical_with_expected_spectrum() {
        let s = convex2(Convex2Params::default()).unwrap();
        let zero = DVector::zeros(100);
        assert_eq!(s.gradient(&zero), DVector::zeros(100));
        let t = s.known_saddle().unwrap();
        assert_eq!(t.index_k, 5);
        let vals = t.eigvals.as_ref().unwrap();
        let first: Vec<f64> = vals[..5].to_vec();
        for (got, want) in first.iter().zip([-2.1, -1.6, -1.1, -0.6, -0.1]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((vals[99] - 49.6).abs() < 1e-12);
    }
}
