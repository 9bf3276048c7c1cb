//! Outer iterations: HiSD, heavy-ball A-HiSD and the Barzilai-Borwein
//! variant, plus the momentum schedule and empirical rate estimation.
//!
//! One step of A-HiSD at index `k` is
//!
//! ```text
//! x_{n+1} = x_n - beta (I - 2 V_n V_n^T) grad E(x_n) + gamma (x_n - x_{n-1})
//! V_{n+1} = EigenSol(H(x_{n+1}), warm start V_n)
//! ```
//!
//! with `x_{-1} = x_0`. HiSD is the `gamma = 0` case.

mod rate;
mod schedule;

pub use rate::{estimate_rate, RateEstimate};
pub use schedule::{select_parameters, theta_bound, ParamChoice};

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::eigen::{
    eigensol_dense, eigensol_dense_op, eigensol_lobpcg, eigensol_sirqit, gram_schmidt,
    power_norm_estimate, HvOperator, LobpcgOptions, SirqitOptions,
};
use crate::error::{Error, Result};
use crate::frame::{reflect, SpectralFrame};
use crate::landscape::EnergyLandscape;
use crate::params::{EigSolverKind, FrameInit, SolverParams, StepKind, StopMetric, ZETA_SCALE};
use crate::trace::{IterationTrace, TraceRecord};

/// Power steps used for the default `zeta`.
const ZETA_POWER_STEPS: usize = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub x: DVector<f64>,
    pub x_prev: DVector<f64>,
    /// `grad E(x)`.
    pub grad: DVector<f64>,
    /// `grad E(x_prev)`; equal to `grad` at iteration 0.
    pub grad_prev: DVector<f64>,
    pub frame: SpectralFrame,
    pub iter: usize,
    /// Step size used by the previous BB step (the configured `beta` before
    /// the first one).
    pub last_beta: f64,
    pub bb_fallbacks: usize,
}

impl SolverState {
    /// State at iteration 0 with `x_prev = x`.
    pub fn new(land: &dyn EnergyLandscape, x: DVector<f64>, frame: SpectralFrame, beta: f64) -> Result<Self> {
        if x.len() != land.dim() {
            return Err(Error::DimensionMismatch {
                expected: land.dim(),
                found: x.len(),
            });
        }
        if frame.dim() != x.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: frame.dim(),
            });
        }
        let grad = land.gradient(&x);
        Ok(Self {
            x_prev: x.clone(),
            grad_prev: grad.clone(),
            x,
            grad,
            frame,
            iter: 0,
            last_beta: beta,
            bb_fallbacks: 0,
        })
    }
}

/// SIRQIT relaxation: the configured value, or `ZETA_SCALE / ||H(x)||_est`.
pub fn resolve_zeta(land: &dyn EnergyLandscape, x: &DVector<f64>, params: &SolverParams) -> Result<f64> {
    if let Some(z) = params.zeta {
        return Ok(z);
    }
    let op = HvOperator::for_landscape(land, x, params.dimer_l, params.force_dimer)?;
    let est = power_norm_estimate(&op, ZETA_POWER_STEPS);
    if !(est > 0.0 && est.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "cannot derive zeta: Hessian norm estimate is {est}"
        )));
    }
    Ok(ZETA_SCALE / est)
}

/// One eigensolver call at `x`, warm-started from `frame`, with `inner`
/// iterations.
fn eigen_refresh(
    land: &dyn EnergyLandscape,
    x: &DVector<f64>,
    frame: &SpectralFrame,
    params: &SolverParams,
    inner: usize,
) -> Result<SpectralFrame> {
    if frame.k() == 0 {
        return Ok(SpectralFrame::empty(x.len()));
    }
    let op = HvOperator::for_landscape(land, x, params.dimer_l, params.force_dimer)?;
    let res = match params.eig_solver {
        EigSolverKind::Sirqit => {
            let zeta = match params.zeta {
                Some(z) => z,
                None => resolve_zeta(land, x, params)?,
            };
            eigensol_sirqit(
                &op,
                &frame.vectors,
                SirqitOptions {
                    inner_iters: inner,
                    zeta,
                    tol: params.eig_tol,
                },
            )?
        }
        EigSolverKind::Lobpcg => eigensol_lobpcg(
            &op,
            &frame.vectors,
            LobpcgOptions {
                inner_iters: inner,
                tol: params.eig_tol,
            },
        )?,
        EigSolverKind::Dense => dense_frame(land, x, frame.k(), &op)?,
    };
    Ok(res.into_frame())
}

fn dense_frame(
    land: &dyn EnergyLandscape,
    x: &DVector<f64>,
    k: usize,
    op: &HvOperator<'_>,
) -> Result<crate::eigen::EigenResult> {
    match land.hessian(x) {
        Some(h) => eigensol_dense(&((&h + h.transpose()) * 0.5), k),
        None => eigensol_dense_op(op, k),
    }
}

/// Refreshes the frame at `x` using the configured eigensolver and
/// `eig_inner_iters`.
pub fn refresh_frame(
    land: &dyn EnergyLandscape,
    x: &DVector<f64>,
    frame: &SpectralFrame,
    params: &SolverParams,
) -> Result<SpectralFrame> {
    eigen_refresh(land, x, frame, params, params.eig_inner_iters)
}

/// Initial frame at `x0`: seeded Gaussian columns, orthonormalized and
/// refined with `eig_warmup_iters` eigensolver iterations, or the exact
/// dense eigenvectors.
pub fn initial_frame(land: &dyn EnergyLandscape, x0: &DVector<f64>, params: &SolverParams) -> Result<SpectralFrame> {
    let (d, k) = (x0.len(), params.k);
    if k > d {
        return Err(Error::InvalidParameter(format!("index k = {k} exceeds dimension {d}")));
    }
    if k == 0 {
        return Ok(SpectralFrame::empty(d));
    }
    match params.init_frame {
        FrameInit::Dense => {
            let op = HvOperator::for_landscape(land, x0, params.dimer_l, params.force_dimer)?;
            Ok(dense_frame(land, x0, k, &op)?.into_frame())
        }
        FrameInit::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            let g = DMatrix::from_fn(d, k, |_, _| StandardNormal.sample(&mut rng));
            let start = SpectralFrame {
                vectors: gram_schmidt(&g)?,
                rayleigh: vec![0.0; k],
            };
            eigen_refresh(land, x0, &start, params, params.eig_warmup_iters.max(1))
        }
    }
}

fn finish_step(
    land: &dyn EnergyLandscape,
    state: &SolverState,
    x_next: DVector<f64>,
    params: &SolverParams,
    beta_used: f64,
    fallback: bool,
) -> Result<SolverState> {
    let iter = state.iter + 1;
    if x_next.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence { iter });
    }
    let grad = land.gradient(&x_next);
    if grad.iter().any(|v| !v.is_finite()) {
        return Err(Error::Divergence { iter });
    }
    let frame = refresh_frame(land, &x_next, &state.frame, params)?;
    Ok(SolverState {
        x_prev: state.x.clone(),
        grad_prev: state.grad.clone(),
        x: x_next,
        grad,
        frame,
        iter,
        last_beta: beta_used,
        bb_fallbacks: state.bb_fallbacks + usize::from(fallback),
    })
}

/// `x_next = x - beta reflect(grad E(x), V)`, then a frame refresh at
/// `x_next`.
pub fn hisd_step(land: &dyn EnergyLandscape, state: &SolverState, params: &SolverParams) -> Result<SolverState> {
    let r = reflect(&state.grad, &state.frame.vectors)?;
    let x_next = &state.x - r * params.beta;
    finish_step(land, state, x_next, params, params.beta, false)
}

/// `x_next = x - beta reflect(grad E(x), V) + gamma (x - x_prev)`.
pub fn ahisd_step(land: &dyn EnergyLandscape, state: &SolverState, params: &SolverParams) -> Result<SolverState> {
    let r = reflect(&state.grad, &state.frame.vectors)?;
    let mut x_next = &state.x - r * params.beta;
    x_next += (&state.x - &state.x_prev) * params.gamma;
    finish_step(land, state, x_next, params, params.beta, false)
}

/// HiSD with the Barzilai-Borwein step
/// `beta_n = min(tau / ||g_n||, dx^T dg / ||dg||^2)`.
///
/// The configured `beta` is used at iteration 0; when the BB quotient is
/// undefined the previous step size is reused and counted in
/// `bb_fallbacks`.
pub fn hisd_bb_step(land: &dyn EnergyLandscape, state: &SolverState, params: &SolverParams) -> Result<SolverState> {
    let (beta, fallback) = if state.iter == 0 {
        (params.beta, false)
    } else {
        match bb_step_size(&state.grad, &state.grad_prev, &state.x, &state.x_prev, params.bb_tau) {
            Some(b) => (b, false),
            None => (state.last_beta, true),
        }
    };
    let r = reflect(&state.grad, &state.frame.vectors)?;
    let x_next = &state.x - r * beta;
    finish_step(land, state, x_next, params, beta, fallback)
}

/// `min(tau / ||g_now||, dx^T dg / ||dg||^2)`, passed through without
/// clamping (it may be negative). `None` when `dg = 0` or `g_now = 0`.
pub fn bb_step_size(
    grad_now: &DVector<f64>,
    grad_prev: &DVector<f64>,
    x_now: &DVector<f64>,
    x_prev: &DVector<f64>,
    tau: f64,
) -> Option<f64> {
    let dx = x_now - x_prev;
    let dg = grad_now - grad_prev;
    let dg2 = dg.norm_squared();
    let gn = grad_now.norm();
    if dg2 == 0.0 || gn == 0.0 {
        return None;
    }
    Some((tau / gn).min(dx.dot(&dg) / dg2))
}

pub fn step(
    kind: StepKind,
    land: &dyn EnergyLandscape,
    state: &SolverState,
    params: &SolverParams,
) -> Result<SolverState> {
    match kind {
        StepKind::Hisd => hisd_step(land, state, params),
        StepKind::Ahisd => ahisd_step(land, state, params),
        StepKind::HisdBb => hisd_bb_step(land, state, params),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunOutcome {
    Converged,
    MaxIter,
    /// The iterate, gradient or frame became non-finite at `iter`.
    Diverged { iter: usize },
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub trace: IterationTrace,
    pub outcome: RunOutcome,
    /// Last finite state.
    pub state: SolverState,
    /// Parameters actually used (`zeta` filled in).
    pub params: SolverParams,
}

impl RunResult {
    /// Iteration index of the final record.
    pub fn iterations(&self) -> usize {
        self.trace.last().map_or(0, |r| r.iter)
    }

    pub fn converged(&self) -> bool {
        self.outcome == RunOutcome::Converged
    }
}

/// Iterates `kind` from `x0` until the stop metric drops to `stop_tol`, the
/// iteration budget runs out, or the iterate diverges. One trace record is
/// written per iterate, starting with `x0` at iteration 0.
pub fn run(
    land: &dyn EnergyLandscape,
    params: &SolverParams,
    x0: &DVector<f64>,
    kind: StepKind,
) -> Result<RunResult> {
    params.validate()?;
    if x0.len() != land.dim() {
        return Err(Error::DimensionMismatch {
            expected: land.dim(),
            found: x0.len(),
        });
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("x0 has non-finite entries".into()));
    }
    let known = land.known_saddle().map(|t| t.x_star.clone());
    if params.stop_metric == StopMetric::DistanceToKnown && known.is_none() {
        return Err(Error::MissingKnownSaddle(land.name().to_string()));
    }

    let mut params = params.clone();
    if params.eig_solver == EigSolverKind::Sirqit && params.k > 0 && params.zeta.is_none() {
        params.zeta = Some(resolve_zeta(land, x0, &params)?);
    }
    let frame = initial_frame(land, x0, &params)?;
    let mut state = SolverState::new(land, x0.clone(), frame, params.beta)?;

    let start = Instant::now();
    let mut trace = IterationTrace::new();
    let record = |s: &SolverState, start: &Instant| TraceRecord {
        iter: s.iter,
        err: known.as_ref().map(|k| (&s.x - k).norm()),
        grad_norm: s.grad.norm(),
        energy: land.energy(&s.x),
        wall_ns: start.elapsed().as_nanos() as u64,
    };
    let stop = |r: &TraceRecord| match params.stop_metric {
        StopMetric::DistanceToKnown => r.err.is_some_and(|e| e <= params.stop_tol),
        StopMetric::GradNorm => r.grad_norm <= params.stop_tol,
    };

    let first = record(&state, &start);
    trace.push(first);
    if stop(&first) {
        return Ok(RunResult {
            trace,
            outcome: RunOutcome::Converged,
            state,
            params,
        });
    }
    let mut outcome = RunOutcome::MaxIter;
    while state.iter < params.max_iter {
        match step(kind, land, &state, &params) {
            Ok(next) => state = next,
            Err(Error::Divergence { iter }) => {
                outcome = RunOutcome::Diverged { iter };
                break;
            }
            Err(Error::EigenDivergence(_)) | Err(Error::RankDeficient { .. }) => {
                outcome = RunOutcome::Diverged {
                    iter: state.iter + 1,
                };
                break;
            }
            Err(e) => return Err(e),
        }
        let rec = record(&state, &start);
        trace.push(rec);
        if stop(&rec) {
            outcome = RunOutcome::Converged;
            break;
        }
    }
    Ok(RunResult {
        trace,
        outcome,
        state,
        params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscapes::QuadraticLandscape;

    fn scalar_state(x: f64, x_prev: f64, land: &QuadraticLandscape) -> SolverState {
        let frame = SpectralFrame {
            vectors: DMatrix::from_element(1, 1, 1.0),
            rayleigh: vec![-1.0],
        };
        let mut s = SolverState::new(land, DVector::from_element(1, x), frame, 0.1).unwrap();
        s.x_prev = DVector::from_element(1, x_prev);
        s
    }

    fn scalar_params(gamma: f64) -> SolverParams {
        SolverParams {
            beta: 0.1,
            gamma,
            k: 1,
            eig_solver: EigSolverKind::Dense,
            ..SolverParams::default()
        }
    }

    #[test]
    fn hisd_scalar_step() {
        let land = QuadraticLandscape::new(vec![-1.0]).unwrap();
        let s = scalar_state(1.0, 1.0, &land);
        let next = hisd_step(&land, &s, &scalar_params(0.0)).unwrap();
        assert!((next.x[0] - 0.9).abs() < 1e-15);
        assert_eq!(next.x_prev[0], 1.0);
        assert_eq!(next.iter, 1);
    }

    #[test]
    fn ahisd_scalar_step() {
        let land = QuadraticLandscape::new(vec![-1.0]).unwrap();
        let s = scalar_state(1.0, 0.8, &land);
        let next = ahisd_step(&land, &s, &scalar_params(0.5)).unwrap();
        assert!((next.x[0] - 1.0).abs() < 1e-15, "{}", next.x[0]);
    }

    #[test]
    fn first_momentum_step_equals_hisd() {
        let land = QuadraticLandscape::new(vec![-1.0, 3.0]).unwrap();
        let frame = SpectralFrame {
            vectors: DMatrix::from_column_slice(2, 1, &[1.0, 0.0]),
            rayleigh: vec![-1.0],
        };
        let s = SolverState::new(&land, DVector::from_vec(vec![0.4, -0.7]), frame, 0.1).unwrap();
        let p = scalar_params(0.9);
        assert_eq!(hisd_step(&land, &s, &p).unwrap().x, ahisd_step(&land, &s, &p).unwrap().x);
    }

    #[test]
    fn index_zero_is_gradient_descent() {
        let land = QuadraticLandscape::new(vec![2.0, 5.0]).unwrap();
        let x = DVector::from_vec(vec![1.0, -1.0]);
        let s = SolverState::new(&land, x.clone(), SpectralFrame::empty(2), 0.1).unwrap();
        let p = SolverParams {
            k: 0,
            ..scalar_params(0.0)
        };
        let next = hisd_step(&land, &s, &p).unwrap();
        assert_eq!(next.x, &x - land.gradient(&x) * 0.1);
    }

    #[test]
    fn bb_examples() {
        let x_prev = DVector::from_vec(vec![0.0, 0.0]);
        let x_now = DVector::from_vec(vec![0.3, 0.4]);
        let g_prev = DVector::from_vec(vec![1.0, 0.0]);
        // dg = dx, ||g_now|| = 1
        let g_now = DVector::from_vec(vec![0.0, 1.0]);
        let g_now = &g_now * (1.0 / g_now.norm());
        let dg = &x_now - &x_prev;
        let g_prev2 = &g_now - &dg;
        assert_eq!(bb_step_size(&g_now, &g_prev2, &x_now, &x_prev, 0.5), Some(0.5));
        let g2 = &g_prev + (&x_now - &x_prev) * 2.0;
        let b = bb_step_size(&g2, &g_prev, &x_now, &x_prev, 1e6).unwrap();
        assert!((b - 0.5).abs() < 1e-15);
        let perp = &g_prev + DVector::from_vec(vec![0.4, -0.3]);
        assert!(bb_step_size(&perp, &g_prev, &x_now, &x_prev, 0.5).unwrap().abs() < 1e-15);
        assert_eq!(bb_step_size(&g_prev, &g_prev, &x_now, &x_prev, 0.5), None);
    }

    #[test]
    fn run_stops_at_known_saddle_immediately() {
        let land = QuadraticLandscape::new(vec![-1.0, 2.0]).unwrap();
        let p = SolverParams {
            k: 1,
            init_frame: FrameInit::Dense,
            ..SolverParams::default()
        };
        let r = run(&land, &p, &DVector::zeros(2), StepKind::Ahisd).unwrap();
        assert_eq!(r.outcome, RunOutcome::Converged);
        assert_eq!(r.iterations(), 0);
    }

    #[test]
    fn run_requires_known_saddle_for_distance_metric() {
        struct NoSaddle;
        impl EnergyLandscape for NoSaddle {
            fn name(&self) -> &str {
                "no_saddle"
            }
            fn dim(&self) -> usize {
                1
            }
            fn energy(&self, x: &DVector<f64>) -> f64 {
                x[0] * x[0]
            }
            fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
                x * 2.0
            }
        }
        let p = SolverParams {
            k: 0,
            ..SolverParams::default()
        };
        assert!(matches!(
            run(&NoSaddle, &p, &DVector::zeros(1), StepKind::Hisd),
            Err(Error::MissingKnownSaddle(_))
        ));
    }
}
