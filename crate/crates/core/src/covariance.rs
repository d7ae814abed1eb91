//! Gaussian states described by quadrature means and normally ordered
//! covariances, and their transformation by the two detection schemes.
//!
//! Quadratures are `x(phi) = (a e^{-i phi} + a^dag e^{i phi}) / sqrt 2`, so the
//! vacuum variance is `1/2`, and `x1 = x(0)`, `x2 = x(pi/2)`.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::pdtc::{Moment, TransmittanceModel};
use crate::Complex64;

/// Mean quadratures and normally ordered covariance `<:dx_i dx_j:>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceState {
    mean: [f64; 2],
    ncov: [[f64; 2]; 2],
}

impl CovarianceState {
    /// Builds a state; `ncov` must be finite and symmetric. Physicality is
    /// not required (see [`Self::is_physical`]).
    pub fn new(mean: [f64; 2], ncov: [[f64; 2]; 2]) -> Result<Self> {
        if !mean.iter().chain(ncov.iter().flatten()).all(|v| v.is_finite()) {
            return Err(invalid("covariance", "entries must be finite"));
        }
        let off = ncov[0][1];
        if (off - ncov[1][0]).abs() > 1e-12 * off.abs().max(1.0) {
            return Err(invalid("covariance", "normally ordered covariance must be symmetric"));
        }
        Ok(Self {
            mean,
            ncov: [[ncov[0][0], off], [off, ncov[1][1]]],
        })
    }

    pub fn vacuum() -> Self {
        Self {
            mean: [0.0; 2],
            ncov: [[0.0; 2]; 2],
        }
    }

    pub fn coherent(gamma: Complex64) -> Self {
        let s = core::f64::consts::SQRT_2;
        Self {
            mean: [s * gamma.re, s * gamma.im],
            ncov: [[0.0; 2]; 2],
        }
    }

    pub fn thermal(nbar: f64) -> Result<Self> {
        if !(nbar >= 0.0 && nbar.is_finite()) {
            return Err(invalid("nbar", "must be finite and >= 0"));
        }
        Ok(Self {
            mean: [0.0; 2],
            ncov: [[nbar, 0.0], [0.0, nbar]],
        })
    }

    /// Squeezed vacuum with `db` decibels of squeezing along the quadrature
    /// `x(phi)`; negative `db` anti-squeezes it.
    pub fn squeezed_vacuum(db: f64, phi: f64) -> Result<Self> {
        if !db.is_finite() || !phi.is_finite() {
            return Err(invalid("squeezing", "must be finite"));
        }
        let g = libm::pow(10.0, db / 10.0);
        let squeezed = 0.5 * (1.0 / g - 1.0);
        let anti = 0.5 * (g - 1.0);
        let (s, c) = libm::sincos(phi);
        let xx = c * c * squeezed + s * s * anti;
        let yy = s * s * squeezed + c * c * anti;
        let xy = c * s * (squeezed - anti);
        Ok(Self {
            mean: [0.0; 2],
            ncov: [[xx, xy], [xy, yy]],
        })
    }

    pub fn mean(&self) -> [f64; 2] {
        self.mean
    }

    pub fn ncov(&self) -> [[f64; 2]; 2] {
        self.ncov
    }

    /// Full covariance `ncov + I/2`.
    pub fn full_covariance(&self) -> [[f64; 2]; 2] {
        let v = self.ncov;
        [[v[0][0] + 0.5, v[0][1]], [v[1][0], v[1][1] + 0.5]]
    }

    /// Whether `ncov + I/2` is a valid single-mode covariance
    /// (positive definite with determinant at least `1/4`).
    pub fn is_physical(&self) -> bool {
        let v = self.full_covariance();
        let det = v[0][0] * v[1][1] - v[0][1] * v[1][0];
        v[0][0] > 0.0 && det >= 0.25 - 1e-12
    }

    /// Mean and variance of `x(phi)`.
    pub fn quadrature_moments(&self, phi: f64) -> (f64, f64) {
        let (s, c) = libm::sincos(phi);
        let v = self.full_covariance();
        let mean = c * self.mean[0] + s * self.mean[1];
        let var = c * c * v[0][0] + 2.0 * c * s * v[0][1] + s * s * v[1][1];
        (mean, var)
    }
}

/// Transmittance moments entering the covariance maps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelMoments {
    pub m1: f64,
    pub m2: f64,
    pub m4: f64,
    /// `E[T^-2]`, infinite for untruncated beam wandering with `lambda > 2`.
    pub m_inv2: Moment,
}

impl ChannelMoments {
    pub fn from_pdtc(pdtc: &TransmittanceModel) -> Result<Self> {
        Ok(Self {
            m1: pdtc.moment(1.0)?.finite(1.0)?,
            m2: pdtc.moment(2.0)?.finite(2.0)?,
            m4: pdtc.moment(4.0)?.finite(4.0)?,
            m_inv2: pdtc.moment(-2.0)?,
        })
    }

    pub fn var_t(&self) -> f64 {
        (self.m2 - self.m1 * self.m1).max(0.0)
    }

    /// Mean of `T_eff = T^2 / t_ref`.
    pub fn eff_mean(&self, t_ref: f64) -> f64 {
        self.m2 / t_ref
    }

    /// Second moment of `T_eff`.
    pub fn eff_second(&self, t_ref: f64) -> f64 {
        self.m4 / (t_ref * t_ref)
    }

    pub fn eff_var(&self, t_ref: f64) -> f64 {
        ((self.m4 - self.m2 * self.m2) / (t_ref * t_ref)).max(0.0)
    }
}

fn affine(state: &CovarianceState, mean_scale: f64, cov_scale: f64, mean_coeff: f64, added: f64) -> CovarianceState {
    let m = state.mean;
    let v = state.ncov;
    let entry = |i: usize, j: usize| cov_scale * v[i][j] + mean_coeff * m[i] * m[j] + if i == j { added } else { 0.0 };
    CovarianceState {
        mean: [mean_scale * m[0], mean_scale * m[1]],
        ncov: [[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]],
    }
}

fn check_link(eta: f64, noise: f64, r: f64) -> Result<()> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(invalid("efficiency", "must lie in (0,1]"));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(invalid("noise_counts", "must be finite and >= 0"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(invalid("lo_amplitude", "must be finite and > 0"));
    }
    Ok(())
}

/// Output of the monitored scheme. `moments` must describe the postselected
/// transmittance law; with noise counts present, `E[T^-2]` has to be finite,
/// which a truncation at `T_min` guarantees.
pub fn noisy_cov_monitored(
    state: &CovarianceState,
    moments: &ChannelMoments,
    eta: f64,
    noise: f64,
    bs_reflectance: f64,
    r: f64,
) -> Result<CovarianceState> {
    check_link(eta, noise, r)?;
    if !(bs_reflectance > 0.0 && bs_reflectance <= 1.0) {
        return Err(invalid("bs_reflectance", "must lie in (0,1]"));
    }
    let added = if noise == 0.0 {
        0.0
    } else {
        match moments.m_inv2 {
            Moment::Finite(v) => noise * v / (eta * r * r * bs_reflectance * bs_reflectance),
            Moment::Divergent => return Err(Error::DivergentMoment { p: -2.0 }),
        }
    };
    Ok(affine(
        state,
        libm::sqrt(eta) * moments.m1,
        eta * moments.m2,
        eta * moments.var_t(),
        added,
    ))
}

/// Output of the fixed-reference scheme in the published closed form, whose
/// isotropic term is `(E[T_eff] - 1)/2 + N/(eta r^2 T_ref^2)`.
pub fn noisy_cov_fixed_reference(
    state: &CovarianceState,
    moments: &ChannelMoments,
    eta: f64,
    noise: f64,
    r: f64,
    t_ref: f64,
) -> Result<CovarianceState> {
    check_link(eta, noise, r)?;
    check_t_ref(t_ref)?;
    let added = 0.5 * (moments.eff_mean(t_ref) - 1.0) + noise / (eta * r * r * t_ref * t_ref);
    Ok(fixed_reference_map(state, moments, eta, t_ref, added))
}

/// Fixed-reference output as implied by the per-transmittance quadrature
/// kernel, whose isotropic term is `(E[T^2]/T_ref^2 - 1)/2 + N/(eta r^2 T_ref^2)`.
/// Agrees with [`noisy_cov_fixed_reference`] at `T_ref = 1`.
pub fn noisy_cov_fixed_reference_from_kernel(
    state: &CovarianceState,
    moments: &ChannelMoments,
    eta: f64,
    noise: f64,
    r: f64,
    t_ref: f64,
) -> Result<CovarianceState> {
    check_link(eta, noise, r)?;
    check_t_ref(t_ref)?;
    let tr2 = t_ref * t_ref;
    let added = 0.5 * (moments.m2 / tr2 - 1.0) + noise / (eta * r * r * tr2);
    Ok(fixed_reference_map(state, moments, eta, t_ref, added))
}

fn check_t_ref(t_ref: f64) -> Result<()> {
    if !(t_ref > 0.0 && t_ref <= 1.0) {
        return Err(invalid("T_ref", "must lie in (0,1]"));
    }
    Ok(())
}

fn fixed_reference_map(state: &CovarianceState, moments: &ChannelMoments, eta: f64, t_ref: f64, added: f64) -> CovarianceState {
    affine(
        state,
        libm::sqrt(eta) * moments.eff_mean(t_ref),
        eta * moments.eff_second(t_ref),
        eta * moments.eff_var(t_ref),
        added,
    )
}

/// Product of the two full quadrature variances.
pub fn uncertainty_product(state: &CovarianceState) -> f64 {
    let v = state.full_covariance();
    v[0][0] * v[1][1]
}

/// Whether the variance product is below the Heisenberg bound `1/4`.
pub fn violates_uncertainty(state: &CovarianceState) -> bool {
    uncertainty_product(state) < 0.25 - 1e-12
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub t_ref: f64,
    pub product: f64,
    pub violated: bool,
}

/// Fixed-reference variance product for each reference transmittance.
pub fn uncertainty_scan(
    state: &CovarianceState,
    moments: &ChannelMoments,
    eta: f64,
    noise: f64,
    r: f64,
    t_ref_grid: &[f64],
) -> Result<Vec<ScanRow>> {
    t_ref_grid
        .iter()
        .map(|&t_ref| {
            let out = noisy_cov_fixed_reference(state, moments, eta, noise, r, t_ref)?;
            let product = uncertainty_product(&out);
            Ok(ScanRow {
                t_ref,
                product,
                violated: violates_uncertainty(&out),
            })
        })
        .collect()
}
