//! Input states: P functions, normally ordered characteristic functions
//! `Phi(beta) = <exp(beta a^dag) exp(-beta* a)>`, photon-number laws and
//! quadrature laws.

use alloc::vec::Vec;
use core::f64::consts::{PI, SQRT_2};

use crate::covariance::CovarianceState;
use crate::error::{invalid, Error, Result};
use crate::numerics::{laguerre_projection, QuadratureRule};
use crate::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StateModel {
    Coherent(Complex64),
    /// Thermal state with mean photon number `nbar >= 0` (vacuum at 0).
    Thermal(f64),
    /// Thermal state with one photon added; `nbar > 0` is the thermal mean.
    Spats(f64),
    DisplacedSpats { nbar: f64, gamma: Complex64 },
    Gaussian(CovarianceState),
}

impl StateModel {
    pub fn vacuum() -> Self {
        Self::Thermal(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let finite_c = |z: &Complex64| z.re.is_finite() && z.im.is_finite();
        match self {
            Self::Coherent(g) if !finite_c(g) => Err(invalid("gamma", "must be finite")),
            Self::Thermal(n) if !(*n >= 0.0 && n.is_finite()) => Err(invalid("nbar", "must be finite and >= 0")),
            Self::Spats(n) | Self::DisplacedSpats { nbar: n, .. } if !(*n > 0.0 && n.is_finite()) => {
                Err(invalid("nbar", "must be finite and > 0"))
            }
            Self::DisplacedSpats { gamma, .. } if !finite_c(gamma) => Err(invalid("gamma", "must be finite")),
            _ => Ok(()),
        }
    }

    /// Coherent displacement of the state (mean of `a`).
    pub fn displacement(&self) -> Complex64 {
        match self {
            Self::Coherent(g) | Self::DisplacedSpats { gamma: g, .. } => *g,
            Self::Gaussian(cs) => {
                let m = cs.mean();
                Complex64::new(m[0], m[1]) / SQRT_2
            }
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// Whether the photon-number law and characteristic function are
    /// invariant under phase rotations.
    pub fn is_phase_insensitive(&self) -> bool {
        match self {
            Self::Thermal(_) | Self::Spats(_) => true,
            Self::Coherent(g) | Self::DisplacedSpats { gamma: g, .. } => g.norm_sqr() == 0.0,
            Self::Gaussian(cs) => {
                let v = cs.ncov();
                cs.mean() == [0.0; 2] && v[0][1] == 0.0 && v[0][0] == v[1][1]
            }
        }
    }

    /// Mean photon number `<a^dag a>`.
    pub fn mean_photon_number(&self) -> f64 {
        match self {
            Self::Coherent(g) => g.norm_sqr(),
            Self::Thermal(n) => *n,
            Self::Spats(n) => 2.0 * n + 1.0,
            Self::DisplacedSpats { nbar, gamma } => 2.0 * nbar + 1.0 + gamma.norm_sqr(),
            Self::Gaussian(cs) => {
                let v = cs.ncov();
                let m = cs.mean();
                0.5 * (v[0][0] + v[1][1] + m[0] * m[0] + m[1] * m[1])
            }
        }
    }

    /// Glauber–Sudarshan P function at `alpha`. States whose P function is a
    /// distribution rather than a function yield [`Error::SingularP`].
    pub fn p_function(&self, alpha: Complex64) -> Result<f64> {
        match *self {
            Self::Coherent(_) => Err(Error::SingularP),
            Self::Thermal(n) => {
                if n == 0.0 {
                    Err(Error::SingularP)
                } else {
                    Ok(libm::exp(-alpha.norm_sqr() / n) / (PI * n))
                }
            }
            Self::Spats(nbar) => Ok(spats_p(nbar, alpha.norm_sqr())),
            Self::DisplacedSpats { nbar, gamma } => Ok(spats_p(nbar, (alpha - gamma).norm_sqr())),
            Self::Gaussian(cs) => {
                let v = cs.ncov();
                let det = v[0][0] * v[1][1] - v[0][1] * v[1][0];
                if !(v[0][0] > 0.0 && det > 0.0) {
                    return Err(Error::SingularP);
                }
                let m = cs.mean();
                let d = [SQRT_2 * alpha.re - m[0], SQRT_2 * alpha.im - m[1]];
                let q = (v[1][1] * d[0] * d[0] - 2.0 * v[0][1] * d[0] * d[1] + v[0][0] * d[1] * d[1]) / det;
                Ok(2.0 * libm::exp(-0.5 * q) / (2.0 * PI * libm::sqrt(det)))
            }
        }
    }

    /// Normally ordered characteristic function at `beta`.
    pub fn charfn_n(&self, beta: Complex64) -> Complex64 {
        let b2 = beta.norm_sqr();
        match *self {
            Self::Coherent(g) => coherent_phase(beta, g),
            Self::Thermal(n) => Complex64::new(libm::exp(-n * b2), 0.0),
            Self::Spats(n) => Complex64::new(spats_radial(n, b2), 0.0),
            Self::DisplacedSpats { nbar, gamma } => coherent_phase(beta, gamma) * spats_radial(nbar, b2),
            Self::Gaussian(cs) => {
                let t = [SQRT_2 * beta.im, -SQRT_2 * beta.re];
                let m = cs.mean();
                let v = cs.ncov();
                let quad = t[0] * t[0] * v[0][0] + 2.0 * t[0] * t[1] * v[0][1] + t[1] * t[1] * v[1][1];
                let lin = t[0] * m[0] + t[1] * m[1];
                Complex64::from_polar(libm::exp(-0.5 * quad), lin)
            }
        }
    }

    /// Average of the characteristic function over the phase of `beta`, as a
    /// function of `b = |beta|`.
    pub fn charfn_radial(&self, b: f64) -> Result<f64> {
        let b2 = b * b;
        match *self {
            Self::Coherent(g) => Ok(libm::j0(2.0 * b * g.norm())),
            Self::Thermal(n) => Ok(libm::exp(-n * b2)),
            Self::Spats(n) => Ok(spats_radial(n, b2)),
            Self::DisplacedSpats { nbar, gamma } => Ok(spats_radial(nbar, b2) * libm::j0(2.0 * b * gamma.norm())),
            Self::Gaussian(_) => {
                if self.is_phase_insensitive() {
                    Ok(self.charfn_n(Complex64::new(b, 0.0)).re)
                } else {
                    Err(Error::UnsupportedState("phase-averaged characteristic function of a general Gaussian state"))
                }
            }
        }
    }

    /// Rate `d` with `|Phi(beta)| <= poly(|beta|) exp(-d |beta|^2)`.
    pub(crate) fn charfn_decay(&self) -> f64 {
        match *self {
            Self::Coherent(_) => 0.0,
            Self::Thermal(n) | Self::Spats(n) | Self::DisplacedSpats { nbar: n, .. } => n,
            Self::Gaussian(cs) => {
                let v = cs.ncov();
                let tr = v[0][0] + v[1][1];
                let det = v[0][0] * v[1][1] - v[0][1] * v[1][0];
                0.5 * tr - libm::sqrt((0.25 * tr * tr - det).max(0.0))
            }
        }
    }

    /// Photon-number probabilities `p_0..=p_n_max`.
    pub fn fock_distribution(&self, n_max: usize) -> Result<Vec<f64>> {
        self.validate()?;
        let ns = 0..=n_max;
        match *self {
            Self::Coherent(g) => {
                let m = g.norm_sqr();
                Ok(ns.map(|n| crate::numerics::poisson_pmf(m, n as u64)).collect())
            }
            Self::Thermal(nbar) => Ok(ns.map(|n| thermal_fock(nbar, n)).collect()),
            Self::Spats(nbar) => Ok(ns.map(|n| spats_fock(nbar, n)).collect()),
            Self::DisplacedSpats { gamma, .. } if gamma.norm_sqr() == 0.0 => {
                Self::Spats(self.charfn_decay()).fock_distribution(n_max)
            }
            Self::DisplacedSpats { .. } => {
                laguerre_projection(|b| self.charfn_radial(b).unwrap_or(f64::NAN), n_max, 1.0 + self.charfn_decay(), &QuadratureRule::default())
            }
            Self::Gaussian(_) => {
                let decay = 1.0 + self.charfn_decay();
                if !self.is_phase_insensitive() || decay <= 0.0 {
                    return Err(Error::UnsupportedState("photon-number law of a phase-sensitive Gaussian state"));
                }
                let radial = |b: f64| self.charfn_n(Complex64::new(b, 0.0)).re;
                laguerre_projection(radial, n_max, decay, &QuadratureRule::default())
            }
        }
    }

    /// Probability density of the quadrature `x(phi)`.
    pub fn quadrature_pdf(&self, x: f64, phi: f64) -> Result<f64> {
        smoothed_quadrature_pdf(self, x, phi, 1.0, 0.5)
    }
}

/// Density of `x(phi)` for the state whose characteristic function is
/// `exp(-4 c |beta|^2) Phi(k beta)`: the input quadrature law scaled by `k`
/// and broadened by Gaussian noise of variance `4c`.
/// Density of `k x_in + noise` where the noise variance `base` includes the
/// vacuum half.
pub(crate) fn smoothed_quadrature_pdf(state: &StateModel, x: f64, phi: f64, k: f64, base: f64) -> Result<f64> {
    let k2 = k * k;
    let (mean, var, curvature) = match *state {
        StateModel::Coherent(g) => (SQRT_2 * k * (g * Complex64::from_polar(1.0, -phi)).re, base, 0.0),
        StateModel::Thermal(n) => (0.0, base + n * k2, 0.0),
        StateModel::Spats(n) => (0.0, base + n * k2, 0.5 * (1.0 + n) * k2),
        StateModel::DisplacedSpats { nbar, gamma } => (
            SQRT_2 * k * (gamma * Complex64::from_polar(1.0, -phi)).re,
            base + nbar * k2,
            0.5 * (1.0 + nbar) * k2,
        ),
        StateModel::Gaussian(cs) => {
            let (m, v) = cs.quadrature_moments(phi);
            (k * m, base + k2 * (v - 0.5), 0.0)
        }
    };
    if !(var > 0.0) {
        return Err(Error::NonRegular { t: k });
    }
    let y = x - mean;
    let g = libm::exp(-0.5 * y * y / var) / libm::sqrt(2.0 * PI * var);
    Ok(g * (1.0 + curvature * (y * y / (var * var) - 1.0 / var)))
}

fn coherent_phase(beta: Complex64, gamma: Complex64) -> Complex64 {
    let z = beta * gamma.conj() - beta.conj() * gamma;
    Complex64::from_polar(1.0, z.im)
}

fn spats_radial(nbar: f64, b2: f64) -> f64 {
    (1.0 - (1.0 + nbar) * b2) * libm::exp(-nbar * b2)
}

fn spats_p(nbar: f64, r2: f64) -> f64 {
    ((1.0 + nbar) * r2 - nbar) * libm::exp(-r2 / nbar) / (PI * nbar * nbar * nbar)
}

fn thermal_fock(nbar: f64, n: usize) -> f64 {
    if nbar == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    libm::exp(n as f64 * libm::log(nbar / (1.0 + nbar)) - libm::log1p(nbar))
}

fn spats_fock(nbar: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    libm::exp(libm::log(nf) + (nf - 1.0) * libm::log(nbar) - (nf + 1.0) * libm::log1p(nbar))
}

/// Rectangular lattice in the complex plane, row-major in the imaginary part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexGrid {
    re_range: (f64, f64),
    im_range: (f64, f64),
    n_re: usize,
    n_im: usize,
}

impl ComplexGrid {
    /// A range with equal endpoints takes exactly one node; otherwise at
    /// least two are required.
    pub fn new(re_range: (f64, f64), im_range: (f64, f64), n_re: usize, n_im: usize) -> Result<Self> {
        for (name, (lo, hi), n) in [("re_range", re_range, n_re), ("im_range", im_range, n_im)] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(invalid(name, "must be a finite interval"));
            }
            let ok = if lo == hi { n == 1 } else { n >= 2 };
            if !ok {
                return Err(invalid(name, "needs >= 2 nodes, or exactly 1 for a single point"));
            }
        }
        Ok(Self {
            re_range,
            im_range,
            n_re,
            n_im,
        })
    }

    pub fn len(&self) -> usize {
        self.n_re * self.n_im
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn axis(range: (f64, f64), n: usize, i: usize) -> f64 {
        if n == 1 {
            range.0
        } else {
            range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64
        }
    }

    pub fn points(&self) -> impl Iterator<Item = Complex64> + '_ {
        (0..self.n_im).flat_map(move |j| {
            let im = Self::axis(self.im_range, self.n_im, j);
            (0..self.n_re).map(move |i| Complex64::new(Self::axis(self.re_range, self.n_re, i), im))
        })
    }
}
