//! Saddle-point search with high-index saddle dynamics (HiSD) and its
//! heavy-ball accelerated variant (A-HiSD).
//!
//! The crate is split into:
//!
//! - [`landscape`], [`frame`], [`params`], [`trace`]: shared domain types, the
//!   reflection operator and finite-difference oracles.
//! - [`eigen`]: Hessian-vector operators (analytic or dimer) and the
//!   eigensolvers used to track the unstable subspace.
//! - [`dynamics`]: the outer HiSD / A-HiSD / BB iterations, parameter
//!   selection and empirical rate estimation.
//! - [`landscapes`]: benchmark energy surfaces.
//! - [`stability`]: Jacobian assembly and spectral stability check for the
//!   continuous A-HiSD system.

pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod frame;
pub mod landscape;
pub mod landscapes;
pub mod params;
pub mod stability;
pub mod trace;

pub use error::{Error, Result};
pub use frame::{reflect, SpectralFrame};
pub use landscape::{finite_diff_gradient, finite_diff_hessian, EnergyLandscape, SaddleTarget};
pub use params::{EigSolverKind, FrameInit, SolverParams, StepKind, StopMetric};
pub use trace::{IterationTrace, TraceRecord};

pub use nalgebra::{DMatrix, DVector};
