//! Deterministic numerical kernels shared by the rest of the crate.

mod projection;
mod quadrature;
mod rng;
mod special;

pub use projection::laguerre_projection;
pub use quadrature::{gauss_legendre, integrate_1d, Estimate, GaussLegendre, QuadratureRule};
pub use rng::RngSeed;
pub use special::{
    bessel_i, bessel_i_scaled, laguerre, laguerre_fill, ln_bessel_i_scaled_seq, ln_factorial,
    poisson_pmf, MAX_BESSEL_ORDER, MAX_LAGUERRE_ORDER,
};
