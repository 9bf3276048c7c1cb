use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigSolverKind {
    /// Simultaneous Rayleigh-quotient iterative minimization.
    Sirqit,
    Lobpcg,
    /// Full dense eigendecomposition (exact eigenvectors).
    Dense,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopMetric {
    DistanceToKnown,
    GradNorm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    Hisd,
    Ahisd,
    HisdBb,
}

/// How the initial frame is chosen at `x0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameInit {
    /// Seeded Gaussian vectors, orthonormalized, then `eig_warmup_iters`
    /// eigensolver iterations at `x0`.
    Random,
    /// Exact eigenvectors from a dense eigendecomposition at `x0`.
    Dense,
}

/// Scale for the default eigenvector relaxation: `zeta = ZETA_SCALE / ||H||_est`.
pub const ZETA_SCALE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverParams {
    /// Position step size.
    pub beta: f64,
    /// Momentum coefficient, `0 <= gamma < 1`.
    pub gamma: f64,
    /// Eigenvector relaxation for SIRQIT. `None` derives it from a power
    /// estimate of the Hessian norm at `x0`.
    pub zeta: Option<f64>,
    /// Dimer length, used only when the landscape has no analytic
    /// Hessian-vector product (or `force_dimer` is set).
    pub dimer_l: f64,
    pub force_dimer: bool,
    /// Target index.
    pub k: usize,
    /// Slack in the momentum schedule `sqrt(gamma) = 1 - 2/(sqrt(kappa)+1) + eps`.
    pub eps: f64,
    pub eig_solver: EigSolverKind,
    pub eig_inner_iters: usize,
    pub eig_tol: f64,
    pub eig_warmup_iters: usize,
    pub init_frame: FrameInit,
    pub max_iter: usize,
    pub stop_tol: f64,
    pub stop_metric: StopMetric,
    /// Cap numerator for the BB step, `tau / ||grad||`.
    pub bb_tau: f64,
    pub seed: u64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            beta: 1e-3,
            gamma: 0.0,
            zeta: None,
            dimer_l: 1e-3,
            force_dimer: false,
            k: 1,
            eps: 0.1,
            eig_solver: EigSolverKind::Sirqit,
            eig_inner_iters: 1,
            eig_tol: 1e-10,
            eig_warmup_iters: 200,
            init_frame: FrameInit::Random,
            max_iter: 60_000,
            stop_tol: 1e-8,
            stop_metric: StopMetric::DistanceToKnown,
            bb_tau: 0.5,
            seed: 0,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad(format!("beta must be positive, got {}", self.beta));
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return bad(format!("gamma must lie in [0, 1), got {}", self.gamma));
        }
        if !(self.dimer_l > 0.0 && self.dimer_l.is_finite()) {
            return bad(format!("dimer_l must be positive, got {}", self.dimer_l));
        }
        if !(self.stop_tol > 0.0) {
            return bad(format!("stop_tol must be positive, got {}", self.stop_tol));
        }
        if let Some(z) = self.zeta {
            if !(z > 0.0 && z.is_finite()) {
                return bad(format!("zeta must be positive, got {z}"));
            }
        }
        if self.eig_inner_iters == 0 {
            return bad("eig_inner_iters must be at least 1".into());
        }
        if !(self.eig_tol > 0.0) {
            return bad(format!("eig_tol must be positive, got {}", self.eig_tol));
        }
        if !(self.bb_tau > 0.0) {
            return bad(format!("bb_tau must be positive, got {}", self.bb_tau));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SolverParams::default().validate().unwrap();
    }

    #[test]
    fn rejects_out_of_range() {
        let cases = [
            SolverParams { beta: 0.0, ..Default::default() },
            SolverParams { gamma: 1.0, ..Default::default() },
            SolverParams { gamma: -0.1, ..Default::default() },
            SolverParams { dimer_l: 0.0, ..Default::default() },
            SolverParams { stop_tol: 0.0, ..Default::default() },
            SolverParams { zeta: Some(-1.0), ..Default::default() },
        ];
        for p in cases {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }
}
