use saddlescape::landscapes::{
    convex2, linear_net_loss, mb_potential, modified_mb, quadratic_landscape, rosenbrock_mod,
    sphere_point, Convex2Params, LinearNet, LinearNetSpec, RosenbrockModParams,
};
use saddlescape::{DVector, EnergyLandscape, Error, Result};

use crate::config::{InitSpec, LandscapeSpec};

/// A constructed landscape. The linear network is kept concrete for its
/// layerwise initializer.
pub enum Built {
    Net(LinearNet),
    Other(Box<dyn EnergyLandscape>),
}

impl Built {
    pub fn land(&self) -> &dyn EnergyLandscape {
        match self {
            Self::Net(n) => n,
            Self::Other(b) => b.as_ref(),
        }
    }
}

pub fn build(spec: &LandscapeSpec) -> Result<Built> {
    Ok(match spec {
        LandscapeSpec::Mb => Built::Other(Box::new(mb_potential())),
        LandscapeSpec::Mmb => Built::Other(Box::new(modified_mb())),
        LandscapeSpec::RosenbrockI { d } => {
            Built::Other(Box::new(rosenbrock_mod(RosenbrockModParams::case_i(*d))?))
        }
        LandscapeSpec::RosenbrockIi { d } => {
            Built::Other(Box::new(rosenbrock_mod(RosenbrockModParams::case_ii(*d))?))
        }
        LandscapeSpec::Convex2 { d, k } => {
            Built::Other(Box::new(convex2(Convex2Params { d: *d, k: *k })?))
        }
        LandscapeSpec::LinearNn {
            dims,
            samples,
            index_set,
            data_seed,
        } => Built::Net(linear_net_loss(LinearNetSpec::random(
            dims.clone(),
            *samples,
            index_set.clone(),
            *data_seed,
        ))?),
        LandscapeSpec::Quadratic { eigvals } => {
            Built::Other(Box::new(quadratic_landscape(eigvals.clone())?))
        }
    })
}

pub fn initial_point(built: &Built, init: &InitSpec, seed: u64) -> Result<DVector<f64>> {
    let land = built.land();
    let known = || {
        land.known_saddle()
            .ok_or_else(|| Error::MissingKnownSaddle(land.name().into()))
    };
    let x0 = match init {
        InitSpec::Explicit { x } => DVector::from_column_slice(x),
        InitSpec::KnownSaddlePlusSphere { rho } => sphere_point(&known()?.x_star, *rho, seed),
        InitSpec::KnownSaddlePlusLayerwiseGaussian { scale } => match built {
            Built::Net(net) => net.layerwise_gaussian_point(*scale, seed),
            Built::Other(_) => {
                return Err(Error::InvalidParameter(
                    "layerwise Gaussian initialization needs linear_nn".into(),
                ))
            }
        },
    };
    if x0.len() != land.dim() {
        return Err(Error::DimensionMismatch {
            expected: land.dim(),
            found: x0.len(),
        });
    }
    Ok(x0)
}
