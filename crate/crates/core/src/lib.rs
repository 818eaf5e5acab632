//! Discretization, evaluation, bounding and minimization of the Willmore
//! functional for graph surfaces `{(x, u(x)) : x ∈ Ω}` over planar domains.
//!
//! The crate is organised bottom-up:
//!
//! * [`grid`]: structured Cartesian and polar lattices, derivative stencils, quadrature.
//! * [`graphgeom`]: pointwise geometry of a graph (Q, H, K, |A|²).
//! * [`boundary`]: boundary curves, traces, geodesic and normal curvature.
//! * [`energy`]: Willmore, Gauss and Canham-Helfrich energies plus a-priori bounds.
//! * [`corpus`]: singular example fields and their smooth approximations.
//! * [`relax`]: auxiliary fields and lower-semicontinuity diagnostics.
//! * [`minimize`]: preconditioned descent for the discrete energy.
//! * [`cli`]: configuration files, experiment drivers and reports.

pub mod analytic;
pub mod boundary;
pub mod cli;
pub mod corpus;
pub mod energy;
mod error;
pub mod graphgeom;
pub mod grid;
pub mod minimize;
pub mod relax;

pub use error::{Error, Result};
