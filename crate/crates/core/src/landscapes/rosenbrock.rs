use nalgebra::{DMatrix, DVector};

use crate::eigen::{symmetric_eigenvalues, DENSE_DIM_LIMIT};
use crate::error::{Error, Result};
use crate::landscape::{EnergyLandscape, SaddleTarget, ZERO_EIGENVALUE_REL_TOL};

#[derive(Debug, Clone, PartialEq)]
pub struct RosenbrockModParams {
    pub d: usize,
    /// Weights of the `s_i arctan^2(x_i - x*_i)` terms.
    pub s: Vec<f64>,
    pub x_star: DVector<f64>,
}

impl RosenbrockModParams {
    /// `s_i = s_head` for the first five coordinates and 1 elsewhere,
    /// centered at all ones.
    pub fn with_head(d: usize, s_head: f64) -> Self {
        let s = (0..d).map(|i| if i < 5 { s_head } else { 1.0 }).collect();
        Self {
            d,
            s,
            x_star: DVector::from_element(d, 1.0),
        }
    }

    /// Index-3 case.
    pub fn case_i(d: usize) -> Self {
        Self::with_head(d, -500.0)
    }

    /// Index-5 case.
    pub fn case_ii(d: usize) -> Self {
        Self::with_head(d, -50000.0)
    }
}

/// `R_m(x) = sum_{i<d} [100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2] + sum_i s_i arctan^2(x_i - x*_i)`.
///
/// The Hessian is tridiagonal; products and the dense matrix are built from
/// its bands.
#[derive(Debug, Clone)]
pub struct RosenbrockMod {
    params: RosenbrockModParams,
    target: SaddleTarget,
}

pub fn rosenbrock_mod(params: RosenbrockModParams) -> Result<RosenbrockMod> {
    let d = params.d;
    if d < 2 {
        return Err(Error::InvalidParameter(format!("rosenbrock needs d >= 2, got {d}")));
    }
    if params.s.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: params.s.len(),
        });
    }
    if params.x_star.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: params.x_star.len(),
        });
    }
    if d > DENSE_DIM_LIMIT {
        return Err(Error::TooLarge {
            dim: d,
            limit: DENSE_DIM_LIMIT,
        });
    }
    let mut land = RosenbrockMod {
        target: SaddleTarget::new(params.x_star.clone(), 0),
        params,
    };
    let x = land.params.x_star.clone();
    let vals = symmetric_eigenvalues(&land.dense(&x))?;
    land.target = SaddleTarget::from_spectrum(x, vals, ZERO_EIGENVALUE_REL_TOL);
    Ok(land)
}

impl RosenbrockMod {
    pub fn params(&self) -> &RosenbrockModParams {
        &self.params
    }

    /// Diagonal and superdiagonal of the Hessian.
    fn bands(&self, x: &DVector<f64>) -> (Vec<f64>, Vec<f64>) {
        let d = self.params.d;
        let mut diag = vec![0.0; d];
        let mut off = vec![0.0; d - 1];
        for i in 0..d - 1 {
            diag[i] += 1200.0 * x[i] * x[i] - 400.0 * x[i + 1] + 2.0;
            diag[i + 1] += 200.0;
            off[i] = -400.0 * x[i];
        }
        for i in 0..d {
            let u = x[i] - self.params.x_star[i];
            let w = 1.0 + u * u;
            diag[i] += self.params.s[i] * (2.0 - 4.0 * u * u.atan()) / (w * w);
        }
        (diag, off)
    }

    fn dense(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let d = self.params.d;
        let (diag, off) = self.bands(x);
        let mut h = DMatrix::zeros(d, d);
        for i in 0..d {
            h[(i, i)] = diag[i];
        }
        for i in 0..d - 1 {
            h[(i, i + 1)] = off[i];
            h[(i + 1, i)] = off[i];
        }
        h
    }
}

impl EnergyLandscape for RosenbrockMod {
    fn name(&self) -> &str {
        "rosenbrock_mod"
    }

    fn dim(&self) -> usize {
        self.params.d
    }

    fn energy(&self, x: &DVector<f64>) -> f64 {
        let d = self.params.d;
        let mut e = 0.0;
        for i in 0..d - 1 {
            let t = x[i + 1] - x[i] * x[i];
            e += 100.0 * t * t + (1.0 - x[i]) * (1.0 - x[i]);
        }
        for i in 0..d {
            let a = (x[i] - self.params.x_star[i]).atan();
            e += self.params.s[i] * a * a;
        }
        e
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        let d = self.params.d;
        let mut g = DVector::zeros(d);
        for i in 0..d - 1 {
            let t = x[i + 1] - x[i] * x[i];
            g[i] += -400.0 * x[i] * t - 2.0 * (1.0 - x[i]);
            g[i + 1] += 200.0 * t;
        }
        for i in 0..d {
            let u = x[i] - self.params.x_star[i];
            g[i] += self.params.s[i] * 2.0 * u.atan() / (1.0 + u * u);
        }
        g
    }

    fn hessian(&self, x: &DVector<f64>) -> Option<DMatrix<f64>> {
        Some(self.dense(x))
    }

    fn has_hessian_vec(&self) -> bool {
        true
    }

    fn hessian_vec(&self, x: &DVector<f64>, v: &DVector<f64>) -> Option<DVector<f64>> {
        let d = self.params.d;
        let (diag, off) = self.bands(x);
        let mut out = DVector::from_fn(d, |i, _| diag[i] * v[i]);
        for i in 0..d - 1 {
            out[i] += off[i] * v[i + 1];
            out[i + 1] += off[i] * v[i];
        }
        Some(out)
    }

    fn known_saddle(&self) -> Option<&SaddleTarget> {
        Some(&self.target)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_ones_is_critical() {
        let r = rosenbrock_mod(RosenbrockModParams::case_i(20)).unwrap();
        let ones = DVector::from_element(20, 1.0);
        assert_eq!(r.energy(&ones), 0.0);
        assert_eq!(r.gradient(&ones), DVector::zeros(20));
    }

    #[test]
    fn small_case_i_is_index_three() {
        let r = rosenbrock_mod(RosenbrockModParams::case_i(50)).unwrap();
        let t = r.known_saddle().unwrap();
        assert_eq!(t.index_k, 3);
        assert!((t.kappa.unwrap() - 721.20).abs() < 0.5, "{:?}", t.kappa);
    }

    #[test]
    fn product_matches_dense() {
        let r = rosenbrock_mod(RosenbrockModParams::case_ii(12)).unwrap();
        let x = DVector::from_fn(12, |i, _| 0.9 + 0.03 * i as f64);
        let v = DVector::from_fn(12, |i, _| ((i * 5 % 7) as f64) - 3.0);
        let dense = r.hessian(&x).unwrap() * &v;
        let hv = r.hessian_vec(&x, &v).unwrap();
        assert!((dense - &hv).norm() <= 1e-12 * hv.norm());
    }
}
