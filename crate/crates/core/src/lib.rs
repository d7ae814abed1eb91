//! Balanced homodyne detection of quantum light when both the signal and the
//! local oscillator cross a fluctuating-loss (turbulent) channel.
//!
//! The crate is `no_std` (it needs `alloc`). All floating-point kernels go
//! through [`libm`], so results do not depend on the platform's math library.
//!
//! Module map:
//! - [`numerics`]: quadrature, Bessel/Laguerre functions, seeded random streams.
//! - [`pdtc`]: probability laws of the channel transmittance `T`, chiefly
//!   beam wandering (log-negative Weibull).
//! - [`states`]: input states through their P functions and normally ordered
//!   characteristic functions.
//! - [`counts`]: photocount-difference statistics (Skellam form, Gaussian
//!   strong-oscillator form, Monte Carlo sampler).
//! - [`monitor`]: shot-noise-limited monitoring of `T` with a third detector.
//! - [`channel`]: fixed-reference and monitored state maps and the observables
//!   reconstructed from them.
//! - [`covariance`]: normally ordered covariance relations and the
//!   uncertainty-product scan.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod channel;
pub mod counts;
pub mod covariance;
mod error;
pub mod monitor;
pub mod numerics;
pub mod pdtc;
pub mod states;

pub use error::{Error, Result};
pub use num_complex::Complex64;
