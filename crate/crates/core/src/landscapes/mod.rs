//! Benchmark energy surfaces.

mod convex2;
mod linear_net;
mod muller_brown;
mod quadratic;
mod rosenbrock;

pub use convex2::{convex2, Convex2, Convex2Params};
pub use linear_net::{construct_nn_saddle, linear_net_loss, LinearNet, LinearNetSpec};
pub use muller_brown::{mb_potential, modified_mb, MbExtraTerm, MbParams, MullerBrown};
pub use quadratic::{quadratic_landscape, QuadraticLandscape};
pub use rosenbrock::{rosenbrock_mod, RosenbrockMod, RosenbrockModParams};

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// `center + rho * n / ||n||` with `n` a seeded standard normal vector.
pub fn sphere_point(center: &DVector<f64>, rho: f64, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = DVector::from_fn(center.len(), |_, _| StandardNormal.sample(&mut rng));
    let norm: f64 = n.norm();
    center + n * (rho / norm)
}
