//! Finite-volume solvers for the local and nonlocal Burgers equations.
//!
//! The nonlocal equation transports the density with a speed given by a
//! convolution `rho * eta_eps` instead of the pointwise value; as the kernel
//! radius `eps` goes to zero the equation formally becomes the classical
//! Burgers equation. The crate provides Lax-Friedrichs-type and Godunov-type
//! schemes for both equations, the kernel families and quadrature weights
//! used to discretize the convolution, closed-form reference solutions, and
//! an experiment harness that runs mesh/epsilon sweeps and writes CSV tables.

pub mod error;
pub mod exact;
pub mod experiments;
pub mod kernels;
pub mod mesh;
pub mod metrics;
pub mod quad;
pub mod schemes;

pub use error::SolverError;
