use crate::error::{Error, Result};

/// Step size and momentum from the local spectrum bounds `mu <= |lambda| <= L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamChoice {
    pub beta: f64,
    pub gamma: f64,
    pub mu: f64,
    pub l: f64,
    pub kappa: f64,
    pub eps: f64,
}

impl ParamChoice {
    /// Rate bound `1 - 2/(sqrt(kappa)+1) + 2 eps`.
    pub fn theta(&self) -> f64 {
        theta_bound(self.kappa, self.eps)
    }
}

pub fn theta_bound(kappa: f64, eps: f64) -> f64 {
    1.0 - 2.0 / (kappa.sqrt() + 1.0) + 2.0 * eps
}

/// `sqrt(beta) = 2 / (sqrt(L) + sqrt(mu))`,
/// `sqrt(gamma) = 1 - 2/(sqrt(kappa)+1) + eps` with `kappa = L / mu`.
///
/// `eps` must lie in `(0, 1/(sqrt(kappa)+1))`.
pub fn select_parameters(mu: f64, l: f64, eps: f64) -> Result<ParamChoice> {
    if !(mu > 0.0 && mu.is_finite() && l.is_finite() && mu <= l) {
        return Err(Error::InvalidParameter(format!(
            "need 0 < mu <= L, got mu = {mu}, L = {l}"
        )));
    }
    let kappa = l / mu;
    let upper = 1.0 / (kappa.sqrt() + 1.0);
    if !(eps > 0.0 && eps < upper) {
        return Err(Error::EpsOutOfRange { eps, upper });
    }
    let sqrt_beta = 2.0 / (l.sqrt() + mu.sqrt());
    let sqrt_gamma = 1.0 - 2.0 / (kappa.sqrt() + 1.0) + eps;
    Ok(ParamChoice {
        beta: sqrt_beta * sqrt_beta,
        gamma: sqrt_gamma * sqrt_gamma,
        mu,
        l,
        kappa,
        eps,
    })
}
