//! Quadrature, special functions, root finding, the ♯-transform and Monte Carlo.

mod montecarlo;
mod quadrature;
mod radial;
mod roots;
mod special;

pub use montecarlo::{mc_integrate, standard_normal, MCEstimate, Proposal, MC_BATCHES};
pub use quadrature::{gauss_rule, integrate_adaptive, integrate_with_breaks, GaussRule, QuadratureConfig};
pub use radial::{
    mellin_sharp, mellin_sharp_with, LogGrid, RadialFunction, SharpSampler, WeightedProfile, SHARP_TOL,
};
pub use roots::find_root;
pub use special::{legendre_p, legendre_q};

pub(crate) use special::legendre_p_unchecked;

/// Complementary error function.
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Error function.
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}
