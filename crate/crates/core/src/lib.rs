//! Stability analysis of `N` identical fermions interacting with a distinct
//! particle through zero-range forces.
//!
//! The crate computes the stability constants `Λ(m, N)` and `Γ(m, N)` and the
//! critical mass, evaluates the charge quadratic forms partial wave by partial
//! wave (direct quadrature, a Laplace-type series, and diagonalisation in log
//! momentum), and builds the trial charges whose energy is unbounded below
//! when the mass ratio is small.

pub mod breakdown;
pub mod error;
pub mod nbody_forms;
pub mod numerics;
pub mod partial_wave;
pub mod stability;
pub mod trials;

pub use breakdown::FormBreakdown;
pub use error::{Error, Result};
pub use numerics::{LogGrid, MCEstimate, QuadratureConfig, RadialFunction};
pub use stability::SystemParams;
