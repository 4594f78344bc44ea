//! Poincaré–Lindstedt series for the periodic orbits born at a Hopf
//! bifurcation of a single-delay DDE `x'(t) = g(λ, x(t), x(t − λ))`, where
//! the delay λ is the bifurcation parameter.
//!
//! The pipeline is: locate the Hopf point ([`find_hopf`]), build the kernel
//! bases ([`null_bases`]), expand the rescaled orbit order by order
//! ([`expand`]), then pick the amplitude for a given delay and rebuild the
//! orbit in physical time ([`solve_epsilon`], [`reconstruct`]). The
//! [`ddeint`] module provides the numerical reference used for validation.

pub mod bifurcation;
pub mod ddeint;
pub mod error;
pub mod expansion;
mod linalg;
pub mod model;
pub mod reconstruct;
pub mod series;
pub mod trigpoly;

pub use bifurcation::{find_hopf, null_bases, HopfPoint, LinearBases};
pub use error::{Error, ErrorKind, Result};
pub use expansion::{expand, expand_with, ExpansionOptions, ExpansionResult, Z0Scale};
pub use model::{
    equilibrium, equilibrium_series, linearization, sir_r0, BuiltinModel, DdeSystem, ModelConfig, Ndde, NddeParams,
    Sir, SirParams, Wright,
};
pub use ddeint::{integrate, validate, validate_grid, Trajectory, ValidationReport};
pub use reconstruct::{bifurcation_diagram, reconstruct, residual, solve_epsilon, DiagramPoint, ReconstructedOrbit};
pub use series::{EpsSeries, ScalarSeries, TrigSeries};
pub use trigpoly::TrigPoly;
