//! Linear stability of the continuous A-HiSD system
//!
//! ```text
//! x'   = m
//! m'   = -alpha1 m - alpha2 (I - 2 sum_i v_i v_i^T) grad E(x)
//! v_i' = -zeta (I - v_i v_i^T - 2 sum_{j<i} v_j v_j^T) H(x, v_i, l)
//! l'   = -l
//! ```
//!
//! at a steady state with `m = 0` and `l = 0`. The dimer `H(x, v, l)` is
//! replaced by its `l -> 0` limits: `H -> hess E(x) v`, `d_v H -> hess E(x)`,
//! `d_l H -> 0`.

use nalgebra::{Complex, DMatrix, DVector};

use crate::eigen::DENSE_DIM_LIMIT;
use crate::error::{Error, Result};
use crate::frame::orthonormality_error;
use crate::landscape::{dense_hessian, EnergyLandscape};

/// Default margin: stable iff every eigenvalue has real part below `-1e-8`.
pub const DEFAULT_TOL_MARGIN: f64 = 1e-8;

const STEADY_TOL: f64 = 1e-8;
const GAP_WARNING: f64 = 1e-8;
const JX_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub zeta: f64,
}

impl ContinuousParams {
    fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha1", self.alpha1), ("alpha2", self.alpha2), ("zeta", self.zeta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub x: DVector<f64>,
    pub m: DVector<f64>,
    /// `d x k`, orthonormal columns.
    pub v: DMatrix<f64>,
    pub l: f64,
}

impl SteadyState {
    /// `m = 0`, `l = 0`.
    pub fn new(x: DVector<f64>, v: DMatrix<f64>) -> Self {
        Self {
            m: DVector::zeros(x.len()),
            x,
            v,
            l: 0.0,
        }
    }

    pub fn k(&self) -> usize {
        self.v.ncols()
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumReport {
    /// Full Jacobian spectrum, `d (k + 2) + 1` values.
    pub eigvals: Vec<Complex<f64>>,
    pub max_real: f64,
    pub stable: bool,
    /// `min |v_i^T H v_i|` over the frame; `None` for `k = 0`.
    pub mu_star: Option<f64>,
    /// `alpha1^2 <= 4 alpha2 mu*`.
    pub hypothesis_holds: bool,
    /// Smallest gap between consecutive frame Rayleigh quotients.
    pub min_unstable_gap: Option<f64>,
    /// Set when that gap is below `1e-8`, where the equivalence is not
    /// established.
    pub gap_warning: bool,
}

fn rayleigh_quotients(h: &DMatrix<f64>, v: &DMatrix<f64>) -> Vec<f64> {
    (0..v.ncols())
        .map(|i| v.column(i).dot(&(h * v.column(i))))
        .collect()
}

/// `I - 2 sum_{j<s} v_j v_j^T`.
fn reflector(v: &DMatrix<f64>, s: usize) -> DMatrix<f64> {
    let d = v.nrows();
    let vs = v.columns(0, s);
    DMatrix::identity(d, d) - (&vs * vs.transpose()) * 2.0
}

/// Jacobian of the continuous system at `state`, block order
/// `(x, m, v_1, ..., v_k, l)`.
pub fn assemble_jacobian(
    land: &dyn EnergyLandscape,
    state: &SteadyState,
    cp: &ContinuousParams,
) -> Result<DMatrix<f64>> {
    cp.validate()?;
    let d = land.dim();
    let k = state.k();
    if state.x.len() != d || state.m.len() != d || state.v.nrows() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: state.x.len(),
        });
    }
    let n = d * (k + 2) + 1;
    if n > DENSE_DIM_LIMIT {
        return Err(Error::TooLarge {
            dim: n,
            limit: DENSE_DIM_LIMIT,
        });
    }
    let h = dense_hessian(land, &state.x).ok_or_else(|| Error::MissingHessian(land.name().into()))?;
    let h = (&h + h.transpose()) * 0.5;
    let g = land.gradient(&state.x);
    check_steady(&h, &g, state)?;

    let v = &state.v;
    let (a1, a2, zeta) = (cp.alpha1, cp.alpha2, cp.zeta);
    let vb = |i: usize| 2 * d + i * d;
    let mut j = DMatrix::zeros(n, n);

    // x' = m
    j.view_mut((0, d), (d, d)).fill_with_identity();
    // m' row
    j.view_mut((d, 0), (d, d)).copy_from(&(reflector(v, k) * &h * -a2));
    j.view_mut((d, d), (d, d)).fill_with_identity();
    j.view_mut((d, d), (d, d)).scale_mut(-a1);
    for i in 0..k {
        let vi = v.column(i);
        let blk = DMatrix::identity(d, d) * (2.0 * a2 * vi.dot(&g)) + &vi * g.transpose() * (2.0 * a2);
        j.view_mut((d, vb(i)), (d, d)).copy_from(&blk);
    }
    // v_i' rows
    for i in 0..k {
        let vi = v.column(i).into_owned();
        let w = &h * &vi;
        let proj = reflector(v, i) - &vi * vi.transpose();
        let diag = -(&proj * &h) * zeta
            + DMatrix::identity(d, d) * (zeta * vi.dot(&w))
            + &vi * w.transpose() * zeta;
        j.view_mut((vb(i), vb(i)), (d, d)).copy_from(&diag);
        for jj in 0..i {
            let vj = v.column(jj);
            let blk = DMatrix::identity(d, d) * (2.0 * zeta * vj.dot(&w)) + &vj * w.transpose() * (2.0 * zeta);
            j.view_mut((vb(i), vb(jj)), (d, d)).copy_from(&blk);
        }
        let jx = v_rate_x_derivative(land, &state.x, v, i, zeta);
        j.view_mut((vb(i), 0), (d, d)).copy_from(&jx);
    }
    // l' = -l
    j[(n - 1, n - 1)] = -1.0;
    Ok(j)
}

/// Central-difference `d/dx` of `-zeta (I - v_i v_i^T - 2 sum_{j<i} v_j v_j^T) hess E(x) v_i`.
fn v_rate_x_derivative(
    land: &dyn EnergyLandscape,
    x: &DVector<f64>,
    v: &DMatrix<f64>,
    i: usize,
    zeta: f64,
) -> DMatrix<f64> {
    let d = x.len();
    let vi = v.column(i).into_owned();
    let proj = reflector(v, i) - &vi * vi.transpose();
    let hv = |p: &DVector<f64>| -> DVector<f64> {
        match land.hessian_vec(p, &vi) {
            Some(r) => r,
            None => dense_hessian(land, p).map(|h| h * &vi).unwrap_or_else(|| DVector::zeros(d)),
        }
    };
    let mut out = DMatrix::zeros(d, d);
    let mut probe = x.clone();
    for c in 0..d {
        let step = JX_STEP * (1.0 + x[c].abs());
        probe[c] = x[c] + step;
        let plus = hv(&probe);
        probe[c] = x[c] - step;
        let minus = hv(&probe);
        probe[c] = x[c];
        out.set_column(c, &(&proj * ((plus - minus) / (2.0 * step)) * -zeta));
    }
    out
}

fn check_steady(h: &DMatrix<f64>, g: &DVector<f64>, state: &SteadyState) -> Result<()> {
    if state.l != 0.0 {
        return Err(Error::NotSteadyState(format!("dimer length is {}, expected 0", state.l)));
    }
    if state.m.amax() != 0.0 {
        return Err(Error::NotSteadyState(format!("|m| = {:e}, expected 0", state.m.norm())));
    }
    let scale = h.amax().max(1.0);
    if g.norm() > STEADY_TOL * scale {
        return Err(Error::NotSteadyState(format!("|grad E| = {:e}", g.norm())));
    }
    if orthonormality_error(&state.v) > 1e-10 {
        return Err(Error::NotSteadyState("frame is not orthonormal".into()));
    }
    for i in 0..state.k() {
        let vi = state.v.column(i);
        let w = h * vi;
        let res = (&w - vi * vi.dot(&w)).norm();
        if res > STEADY_TOL * scale {
            return Err(Error::NotSteadyState(format!(
                "frame column {i} is not an eigenvector (residual {res:e})"
            )));
        }
    }
    Ok(())
}

/// Full nonsymmetric eigensolve of the Jacobian; stable iff every real part
/// is below `-tol_margin`.
pub fn check_linear_stability(
    land: &dyn EnergyLandscape,
    state: &SteadyState,
    cp: &ContinuousParams,
    tol_margin: f64,
) -> Result<SpectrumReport> {
    let j = assemble_jacobian(land, state, cp)?;
    let eigvals: Vec<Complex<f64>> = j
        .complex_eigenvalues()
        .iter()
        .copied()
        .collect();
    if eigvals.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::EigenFailure("non-finite Jacobian eigenvalue".into()));
    }
    let max_real = eigvals.iter().fold(f64::NEG_INFINITY, |m, z| m.max(z.re));

    let h = dense_hessian(land, &state.x).ok_or_else(|| Error::MissingHessian(land.name().into()))?;
    let mut rq = rayleigh_quotients(&h, &state.v);
    rq.sort_by(|a, b| a.total_cmp(b));
    let mu_star = rq.iter().map(|l| l.abs()).reduce(f64::min);
    let hypothesis_holds = mu_star.map_or(true, |mu| cp.alpha1 * cp.alpha1 <= 4.0 * cp.alpha2 * mu);
    let min_unstable_gap = rq.windows(2).map(|w| w[1] - w[0]).reduce(f64::min);
    Ok(SpectrumReport {
        eigvals,
        max_real,
        stable: max_real < -tol_margin,
        mu_star,
        hypothesis_holds,
        min_unstable_gap,
        gap_warning: min_unstable_gap.is_some_and(|g| g < GAP_WARNING),
    })
}
