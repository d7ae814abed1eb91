//! Laws of the channel transmittance `T`.
//!
//! The beam-wandering law is handled through the deflection distance `u` of
//! the beam centre from the aperture centre: `u` is Rayleigh distributed and
//! `T(u)` is a smooth decreasing map, so every integral over `T` is taken as a
//! Rayleigh-weighted integral over `u`. Lengths are in units of the aperture
//! radius unless stated otherwise.

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::numerics::{bessel_i_scaled, integrate_1d, GaussLegendre, QuadratureRule};

/// Shape parameters of the log-negative Weibull law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullParams {
    /// Maximal transmittance, reached for a centred beam.
    pub t0: f64,
    /// Shape parameter `lambda`.
    pub shape: f64,
    /// Scale length `R`, in the unit of the aperture radius.
    pub scale: f64,
}

/// Maximal transmittance, shape and scale of the beam-wandering law for an
/// aperture of radius `a` and a beam-spot radius `w`.
pub fn weibull_params(a: f64, w: f64) -> Result<WeibullParams> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(invalid("aperture_radius", "must be finite and > 0"));
    }
    if !(w > 0.0 && w.is_finite()) {
        return Err(invalid("beam_spot_radius", "must be finite and > 0"));
    }
    let ratio = w / a;
    let x = 4.0 / (ratio * ratio);
    if !(x.is_finite() && x > 4e-4) {
        return Err(Error::DegenerateGeometry { ratio });
    }
    let t0_sq = -libm::expm1(-0.5 * x);
    let i0 = bessel_i_scaled(0, x).map_err(|_| Error::DegenerateGeometry { ratio })?;
    let i1 = bessel_i_scaled(1, x).map_err(|_| Error::DegenerateGeometry { ratio })?;
    let d = 1.0 - i0;
    let log_term = libm::log(2.0 * t0_sq / d);
    let shape = 2.0 * x * i1 / d / log_term;
    let scale = a * libm::pow(log_term, -1.0 / shape);
    let t0 = libm::sqrt(t0_sq);
    if !(log_term > 0.0 && shape.is_finite() && shape > 0.0 && scale.is_finite() && scale > 0.0 && t0 <= 1.0) {
        return Err(Error::DegenerateGeometry { ratio });
    }
    Ok(WeibullParams { t0, shape, scale })
}

/// Beam-wandering transmittance law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamWanderingModel {
    aperture_radius: f64,
    spot_radius: f64,
    sigma: f64,
    params: WeibullParams,
}

impl BeamWanderingModel {
    pub fn new(aperture_radius: f64, spot_radius: f64, deflection_sigma: f64) -> Result<Self> {
        if !(deflection_sigma > 0.0 && deflection_sigma.is_finite()) {
            return Err(invalid("deflection_sigma", "must be finite and > 0"));
        }
        let params = weibull_params(aperture_radius, spot_radius)?;
        Ok(Self {
            aperture_radius,
            spot_radius,
            sigma: deflection_sigma,
            params,
        })
    }

    pub fn aperture_radius(&self) -> f64 {
        self.aperture_radius
    }

    pub fn spot_radius(&self) -> f64 {
        self.spot_radius
    }

    pub fn deflection_sigma(&self) -> f64 {
        self.sigma
    }

    pub fn params(&self) -> WeibullParams {
        self.params
    }

    pub fn t0(&self) -> f64 {
        self.params.t0
    }

    /// `T(u) = T0 exp(-(u/R)^lambda / 2)`.
    pub fn transmittance_of_deflection(&self, u: f64) -> f64 {
        let p = &self.params;
        p.t0 * libm::exp(-0.5 * libm::pow(u.max(0.0) / p.scale, p.shape))
    }

    /// Inverse of [`Self::transmittance_of_deflection`]: `0` at or above
    /// `T0`, `+inf` at `T = 0`.
    pub fn deflection_of_transmittance(&self, t: f64) -> f64 {
        let p = &self.params;
        if t >= p.t0 {
            return 0.0;
        }
        if t <= 0.0 {
            return f64::INFINITY;
        }
        p.scale * libm::pow(2.0 * (libm::log(p.t0) - libm::log(t)), 1.0 / p.shape)
    }

    pub fn density(&self, t: f64) -> f64 {
        let p = &self.params;
        if !(t > 0.0 && t <= p.t0) {
            return 0.0;
        }
        let two_ell = 2.0 * libm::log(p.t0 / t);
        let r2 = p.scale * p.scale;
        let s2 = self.sigma * self.sigma;
        let pow = libm::pow(two_ell, 2.0 / p.shape);
        2.0 * r2 / (s2 * p.shape * t) * (pow / two_ell) * libm::exp(-r2 * pow / (2.0 * s2))
    }

    /// `P(T <= t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        if t >= self.params.t0 {
            return 1.0;
        }
        let s = self.deflection_of_transmittance(t) / self.sigma;
        libm::exp(-0.5 * s * s)
    }

    /// Whether `E[T^p]` is infinite.
    pub fn moment_diverges(&self, p: f64) -> bool {
        if p >= 0.0 {
            return false;
        }
        let lambda = self.params.shape;
        lambda > 2.0 || (lambda == 2.0 && -p * self.sigma * self.sigma >= self.params.scale * self.params.scale)
    }

    // E[T^p ; u/sigma < s_max] by integration over s = u/sigma.
    fn partial_moment(&self, p: f64, s_max: f64, rule: &QuadratureRule) -> Result<f64> {
        let wp = self.params;
        let ratio = self.sigma / wp.scale;
        let t0p = libm::pow(wp.t0, p);
        let f = |s: f64| {
            let e = -0.5 * s * s - 0.5 * p * libm::pow(ratio * s, wp.shape);
            t0p * s * libm::exp(e)
        };
        if p < 0.0 {
            if s_max.is_infinite() {
                return Ok(integrate_1d(f, 0.0, f64::INFINITY, rule)?.value);
            }
            return Ok(integrate_1d(f, 0.0, s_max, rule)?.value);
        }
        let hi = s_max.min(40.0);
        let mut cuts: Vec<f64> = Vec::new();
        if p > 0.0 {
            let sc = libm::pow(2.0 / p, 1.0 / wp.shape) / ratio;
            cuts.extend([0.25 * sc, sc, 4.0 * sc]);
        }
        cuts.extend([1.0, 4.0]);
        cuts.retain(|c| *c > 0.0 && *c < hi);
        cuts.sort_by(f64::total_cmp);
        let mut total = 0.0;
        let mut lo = 0.0;
        for c in cuts.into_iter().chain(core::iter::once(hi)) {
            if c > lo {
                total += integrate_1d(f, lo, c, rule)?.value;
                lo = c;
            }
        }
        Ok(total)
    }

    fn node_breaks(&self, s_hi: f64, extra: Option<f64>) -> Vec<f64> {
        const LEVELS: [f64; 11] = [0.99, 0.9, 0.7, 0.5, 0.3, 0.1, 1e-2, 1e-3, 1e-4, 1e-6, 1e-9];
        let mut cuts: Vec<f64> = LEVELS
            .iter()
            .map(|q| self.deflection_of_transmittance(self.params.t0 * q) / self.sigma)
            .chain([0.5, 1.0, 2.0, 4.0])
            .chain(extra.map(|t| self.deflection_of_transmittance(t) / self.sigma))
            .filter(|s| *s > 0.0 && *s < s_hi)
            .collect();
        cuts.push(0.0);
        cuts.push(s_hi);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * s_hi);
        cuts
    }

    fn nodes_below(&self, s_hi: f64, order: usize, extra: Option<f64>) -> Vec<TNode> {
        let gl = GaussLegendre::new(order);
        let cuts = self.node_breaks(s_hi, extra);
        let mut nodes = Vec::with_capacity(order * cuts.len());
        for pair in cuts.windows(2) {
            for (s, w) in gl.mapped(pair[0], pair[1]) {
                let weight = w * s * libm::exp(-0.5 * s * s);
                let t = self.transmittance_of_deflection(s * self.sigma);
                if weight > 0.0 {
                    nodes.push(TNode { t, weight });
                }
            }
        }
        normalize(&mut nodes);
        nodes
    }
}

/// A discrete law given by `(T, weight)` atoms; weights are normalised on
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedModel {
    atoms: Vec<TNode>,
}

impl TabulatedModel {
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut nodes = Vec::new();
        for (t, weight) in atoms {
            if !(0.0..=1.0).contains(&t) {
                return Err(invalid("T", "tabulated transmittances must lie in [0,1]"));
            }
            if !(weight >= 0.0 && weight.is_finite()) {
                return Err(invalid("weight", "must be finite and >= 0"));
            }
            if weight > 0.0 {
                nodes.push(TNode { t, weight });
            }
        }
        if nodes.is_empty() {
            return Err(invalid("weight", "at least one weight must be positive"));
        }
        nodes.sort_by(|a, b| a.t.total_cmp(&b.t));
        normalize(&mut nodes);
        Ok(Self { atoms: nodes })
    }

    pub fn atoms(&self) -> &[TNode] {
        &self.atoms
    }
}

/// A law conditioned on `T >= t_min`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedModel {
    inner: Box<TransmittanceModel>,
    t_min: f64,
    acceptance: f64,
}

impl TruncatedModel {
    pub fn inner(&self) -> &TransmittanceModel {
        &self.inner
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    /// Probability that the untruncated law yields `T >= t_min`.
    pub fn acceptance(&self) -> f64 {
        self.acceptance
    }
}

/// One node of a discretised transmittance law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TNode {
    pub t: f64,
    pub weight: f64,
}

fn normalize(nodes: &mut [TNode]) {
    let total: f64 = nodes.iter().map(|n| n.weight).sum();
    if total > 0.0 {
        nodes.iter_mut().for_each(|n| n.weight /= total);
    }
}

/// `E[T^p]`, or a marker that it is infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Moment {
    Finite(f64),
    Divergent,
}

impl Moment {
    pub fn finite(self, p: f64) -> Result<f64> {
        match self {
            Moment::Finite(v) => Ok(v),
            Moment::Divergent => Err(Error::DivergentMoment { p }),
        }
    }
}

/// Gauss–Legendre points per panel used by [`TransmittanceModel::nodes`].
pub const DEFAULT_NODE_ORDER: usize = 16;

/// Acceptance below which a truncation is rejected.
pub const MIN_ACCEPTANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum TransmittanceModel {
    BeamWandering(BeamWanderingModel),
    Deterministic(f64),
    Truncated(TruncatedModel),
    Tabulated(TabulatedModel),
}

impl TransmittanceModel {
    pub fn beam_wandering(aperture_radius: f64, spot_radius: f64, deflection_sigma: f64) -> Result<Self> {
        BeamWanderingModel::new(aperture_radius, spot_radius, deflection_sigma).map(Self::BeamWandering)
    }

    pub fn deterministic(t: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t) {
            return Err(invalid("T", "must lie in [0,1]"));
        }
        Ok(Self::Deterministic(t))
    }

    /// Conditions `inner` on `T >= t_min`. Nested truncations collapse to
    /// the strictest threshold.
    pub fn truncated(inner: TransmittanceModel, t_min: f64) -> Result<Self> {
        if !(t_min > 0.0 && t_min < 1.0) {
            return Err(invalid("T_min", "must lie in (0,1)"));
        }
        let (base, t_min) = match inner {
            Self::Truncated(tr) => (*tr.inner, t_min.max(tr.t_min)),
            other => (other, t_min),
        };
        let acceptance = 1.0 - base.cdf_left(t_min);
        if acceptance <= 0.0 {
            return Err(Error::EmptySupport { t_min });
        }
        if acceptance < MIN_ACCEPTANCE {
            return Err(Error::PathologicalTruncation { acceptance });
        }
        Ok(Self::Truncated(TruncatedModel {
            inner: Box::new(base),
            t_min,
            acceptance,
        }))
    }

    pub fn is_atomic(&self) -> bool {
        match self {
            Self::BeamWandering(_) => false,
            Self::Deterministic(_) | Self::Tabulated(_) => true,
            Self::Truncated(tr) => tr.inner.is_atomic(),
        }
    }

    /// Smallest interval containing the support.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::BeamWandering(bw) => (0.0, bw.t0()),
            Self::Deterministic(t) => (*t, *t),
            Self::Tabulated(tab) => (tab.atoms[0].t, tab.atoms[tab.atoms.len() - 1].t),
            Self::Truncated(tr) => {
                let (_, hi) = tr.inner.support();
                (tr.t_min, hi)
            }
        }
    }

    /// Probability density of `T`; zero outside the support. Discrete laws
    /// have no density and yield [`Error::AtomicLaw`].
    pub fn density(&self, t: f64) -> Result<f64> {
        match self {
            Self::BeamWandering(bw) => Ok(bw.density(t)),
            Self::Deterministic(_) | Self::Tabulated(_) => Err(Error::AtomicLaw),
            Self::Truncated(tr) => {
                let d = tr.inner.density(t)?;
                Ok(if t >= tr.t_min { d / tr.acceptance } else { 0.0 })
            }
        }
    }

    /// `P(T <= t)`.
    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            Self::BeamWandering(bw) => bw.cdf(t),
            Self::Deterministic(x) => (t >= *x) as u8 as f64,
            Self::Tabulated(tab) => tab.atoms.iter().filter(|n| n.t <= t).map(|n| n.weight).sum(),
            Self::Truncated(tr) => {
                if t < tr.t_min {
                    0.0
                } else {
                    ((tr.inner.cdf(t) - tr.inner.cdf_left(tr.t_min)) / tr.acceptance).clamp(0.0, 1.0)
                }
            }
        }
    }

    // P(T < t)
    fn cdf_left(&self, t: f64) -> f64 {
        match self {
            Self::BeamWandering(bw) => bw.cdf(t),
            Self::Deterministic(x) => (t > *x) as u8 as f64,
            Self::Tabulated(tab) => tab.atoms.iter().filter(|n| n.t < t).map(|n| n.weight).sum(),
            Self::Truncated(tr) => {
                if t <= tr.t_min {
                    0.0
                } else {
                    ((tr.inner.cdf_left(t) - tr.inner.cdf_left(tr.t_min)) / tr.acceptance).clamp(0.0, 1.0)
                }
            }
        }
    }

    /// `E[T^p]` with default tolerances.
    pub fn moment(&self, p: f64) -> Result<Moment> {
        self.moment_with(p, &QuadratureRule::default())
    }

    pub fn moment_with(&self, p: f64, rule: &QuadratureRule) -> Result<Moment> {
        if !p.is_finite() {
            return Err(invalid("p", "must be finite"));
        }
        if p == 0.0 {
            return Ok(Moment::Finite(1.0));
        }
        let atoms = |nodes: &mut dyn Iterator<Item = TNode>| {
            let mut sum = 0.0;
            for n in nodes {
                if n.t == 0.0 && p < 0.0 {
                    return Moment::Divergent;
                }
                sum += n.weight * libm::pow(n.t, p);
            }
            Moment::Finite(sum)
        };
        match self {
            Self::BeamWandering(bw) => {
                if bw.moment_diverges(p) {
                    return Ok(Moment::Divergent);
                }
                Ok(Moment::Finite(bw.partial_moment(p, f64::INFINITY, rule)?))
            }
            Self::Deterministic(t) => Ok(atoms(&mut core::iter::once(TNode { t: *t, weight: 1.0 }))),
            Self::Tabulated(tab) => Ok(atoms(&mut tab.atoms.iter().copied())),
            Self::Truncated(tr) => match tr.inner.as_ref() {
                Self::BeamWandering(bw) => {
                    let s_max = bw.deflection_of_transmittance(tr.t_min) / bw.sigma;
                    Ok(Moment::Finite(bw.partial_moment(p, s_max, rule)? / tr.acceptance))
                }
                Self::Deterministic(t) => Ok(atoms(&mut core::iter::once(TNode { t: *t, weight: 1.0 }))),
                Self::Tabulated(tab) => {
                    let kept = tab.atoms.iter().filter(|n| n.t >= tr.t_min);
                    let m = atoms(&mut kept.copied());
                    Ok(match m {
                        Moment::Finite(v) => Moment::Finite(v / tr.acceptance),
                        d => d,
                    })
                }
                Self::Truncated(_) => unreachable!("nested truncations are collapsed on construction"),
            },
        }
    }

    /// Mean loss `-10 log10 E[T^2]` in decibels.
    pub fn mean_loss_db(&self) -> Result<f64> {
        let m2 = self.moment(2.0)?.finite(2.0)?;
        if m2 <= 0.0 {
            return Err(Error::ZeroTransmittance);
        }
        Ok(-10.0 * libm::log10(m2))
    }

    /// Draws one transmittance.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::BeamWandering(bw) => {
                let v: f64 = rng.random();
                let s = libm::sqrt(-2.0 * libm::log1p(-v));
                bw.transmittance_of_deflection(s * bw.sigma)
            }
            Self::Deterministic(t) => *t,
            Self::Tabulated(tab) => pick(&tab.atoms, 1.0, rng),
            Self::Truncated(tr) => match tr.inner.as_ref() {
                Self::BeamWandering(bw) => {
                    let v: f64 = rng.random();
                    let u_max = bw.deflection_of_transmittance(tr.t_min) / bw.sigma;
                    let keep = -libm::expm1(-0.5 * u_max * u_max);
                    let s = libm::sqrt(-2.0 * libm::log1p(-v * keep));
                    bw.transmittance_of_deflection(s * bw.sigma)
                }
                Self::Tabulated(tab) => {
                    let kept: Vec<TNode> = tab.atoms.iter().filter(|n| n.t >= tr.t_min).copied().collect();
                    pick(&kept, tr.acceptance, rng)
                }
                other => other.sample(rng),
            },
        }
    }

    /// Discretisation of the law as weighted nodes summing to one, used for
    /// every average over `T`. Continuous laws use `order`-point
    /// Gauss–Legendre panels in the deflection variable.
    pub fn nodes(&self, order: usize) -> Vec<TNode> {
        self.nodes_split(order, None)
    }

    /// As [`Self::nodes`], with an extra panel boundary at transmittance
    /// `split` so that a later cut there is resolved sharply.
    pub fn nodes_split(&self, order: usize, split: Option<f64>) -> Vec<TNode> {
        const S_HI: f64 = 9.0;
        match self {
            Self::BeamWandering(bw) => bw.nodes_below(S_HI, order, split),
            Self::Deterministic(t) => alloc::vec![TNode { t: *t, weight: 1.0 }],
            Self::Tabulated(tab) => tab.atoms.clone(),
            Self::Truncated(tr) => match tr.inner.as_ref() {
                Self::BeamWandering(bw) => {
                    let s_max = bw.deflection_of_transmittance(tr.t_min) / bw.sigma;
                    bw.nodes_below(s_max.min(S_HI), order, split)
                }
                other => {
                    let mut kept: Vec<TNode> = other.nodes(order).into_iter().filter(|n| n.t >= tr.t_min).collect();
                    normalize(&mut kept);
                    kept
                }
            },
        }
    }
}

fn pick<R: Rng + ?Sized>(atoms: &[TNode], total: f64, rng: &mut R) -> f64 {
    let target = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for n in atoms {
        acc += n.weight;
        if target < acc {
            return n.t;
        }
    }
    atoms[atoms.len() - 1].t
}

/// Turbulent propagation path used to estimate the deflection spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TurbulenceLink {
    /// Refractive-index structure constant, m^(-2/3).
    pub structure_constant: f64,
    /// Propagation distance, m.
    pub distance: f64,
    /// Beam-spot radius at the source, m.
    pub source_spot_radius: f64,
}

/// Deflection spread in metres: `sigma^2 = 1.919 Cn2 z^3 (2 W0)^(-1/3)`.
pub fn sigma_from_link(link: &TurbulenceLink) -> Result<f64> {
    let TurbulenceLink {
        structure_constant,
        distance,
        source_spot_radius,
    } = *link;
    for (name, v) in [
        ("structure_constant", structure_constant),
        ("distance", distance),
        ("source_spot_radius", source_spot_radius),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(name, "must be finite and > 0"));
        }
    }
    let var = 1.919 * structure_constant * distance * distance * distance * libm::cbrt(1.0 / (2.0 * source_spot_radius));
    Ok(libm::sqrt(var))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngSeed;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn weibull_golden_values() {
        let p = weibull_params(1.0, 0.9).unwrap();
        assert!(close(p.t0, 0.956_735_078_993_903_1, 1e-13));
        assert!(close(p.shape, 2.467_930_063_482_633, 1e-11));
        assert!(close(p.scale, 1.089_700_074_991_107, 1e-11));
        let p = weibull_params(1.0, 0.95).unwrap();
        assert!(close(p.t0, 0.943_908_276_241_104_6, 1e-13));
        assert!(close(p.shape, 2.382_482_727_640_417, 1e-11));
        assert!(close(p.scale, 1.100_733_816_515_789, 1e-11));
    }

    #[test]
    fn narrow_beam_saturates() {
        let p = weibull_params(1.0, 1e-3).unwrap();
        assert!((p.t0 - 1.0).abs() < 1e-12);
        assert!(p.scale.is_finite() && p.shape.is_finite());
        assert!(weibull_params(1.0, 1e3).is_err());
        assert!(weibull_params(0.0, 1.0).is_err());
    }

    #[test]
    fn subnormal_transmittance_has_finite_deflection() {
        let bw = BeamWanderingModel::new(1.0, 0.95, 40.0).unwrap();
        let u = bw.deflection_of_transmittance(5e-324);
        assert!(u.is_finite() && u > bw.deflection_of_transmittance(f64::MIN_POSITIVE));
        assert!(bw.cdf(5e-324) > 0.8);
    }

    #[test]
    fn deflection_map_round_trip() {
        let bw = BeamWanderingModel::new(1.0, 0.9, 1.0).unwrap();
        let p = bw.params();
        assert_eq!(bw.transmittance_of_deflection(0.0), p.t0);
        assert!(close(bw.transmittance_of_deflection(p.scale), p.t0 * libm::exp(-0.5), 1e-14));
        for u in [1e-3, 0.2, 0.9, 1.5, 3.0] {
            let t = bw.transmittance_of_deflection(u);
            assert!((bw.deflection_of_transmittance(t) - u).abs() < 1e-10);
        }
    }

    #[test]
    fn density_vanishes_outside_support() {
        let m = TransmittanceModel::beam_wandering(1.0, 0.9, 1.0).unwrap();
        let (_, t0) = m.support();
        assert_eq!(m.density(t0 + 0.01).unwrap(), 0.0);
        assert_eq!(m.density(0.0).unwrap(), 0.0);
        assert!(matches!(TransmittanceModel::Deterministic(0.7).density(0.7), Err(Error::AtomicLaw)));
    }

    #[test]
    fn density_is_normalized() {
        let m = TransmittanceModel::beam_wandering(1.0, 0.9, 1.0).unwrap();
        let (_, t0) = m.support();
        let rule = QuadratureRule::default();
        let total = integrate_1d(|t| m.density(t).unwrap(), 0.0, t0, &rule).unwrap().value;
        assert!((total - 1.0).abs() < 1e-8, "{total}");
    }

    #[test]
    fn second_moment_by_two_routes() {
        let m = TransmittanceModel::beam_wandering(1.0, 0.9, 1.0).unwrap();
        let (_, t0) = m.support();
        let via_u = m.moment(2.0).unwrap().finite(2.0).unwrap();
        let rule = QuadratureRule::new(1e-12, 1e-10, 2000).unwrap();
        let via_t = integrate_1d(|t| t * t * m.density(t).unwrap(), 0.0, t0, &rule).unwrap().value;
        assert!((via_u - via_t).abs() < 1e-8);
    }

    #[test]
    fn moment_golden_values() {
        let m = TransmittanceModel::beam_wandering(1.0, 0.9, 1.0).unwrap();
        let m2 = m.moment(2.0).unwrap().finite(2.0).unwrap();
        assert!(close(libm::sqrt(m2), 0.586_255_154_787_376_7, 1e-9));
        assert!(close(m.moment(1.0).unwrap().finite(1.0).unwrap(), 0.502_557_86, 1e-7));
        assert!(close(m.moment(4.0).unwrap().finite(4.0).unwrap(), 0.208_871_35, 1e-7));
        let m = TransmittanceModel::beam_wandering(1.0, 0.9, 0.5).unwrap();
        let m2 = m.moment(2.0).unwrap().finite(2.0).unwrap();
        assert!(close(libm::sqrt(m2), 0.821_555_466_561_501_8, 1e-9));
        let m = TransmittanceModel::beam_wandering(1.0, 0.95, 40.0).unwrap();
        let m2 = m.moment(2.0).unwrap().finite(2.0).unwrap();
        assert!((m2 / 3.178_346_954_461_703e-4 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn negative_moment_divergence() {
        let m = TransmittanceModel::beam_wandering(1.0, 0.9, 1.0).unwrap();
        assert_eq!(m.moment(-2.0).unwrap(), Moment::Divergent);
        let tr = TransmittanceModel::truncated(m, 0.05).unwrap();
        let v = tr.moment(-2.0).unwrap().finite(-2.0).unwrap();
        assert!(v.is_finite() && v > 1.0);
        assert_eq!(TransmittanceModel::Deterministic(0.0).moment(-1.0).unwrap(), Moment::Divergent);
    }

    #[test]
    fn atomic_moments_and_losses() {
        let d = TransmittanceModel::deterministic(0.7).unwrap();
        assert!(close(d.moment(3.0).unwrap().finite(3.0).unwrap(), 0.343, 1e-15));
        assert!(close(TransmittanceModel::Deterministic(1.0).mean_loss_db().unwrap(), 0.0, 1e-15));
        assert!(close(TransmittanceModel::Deterministic(0.1).mean_loss_db().unwrap(), 20.0, 1e-12));
        assert!(TransmittanceModel::Deterministic(0.0).mean_loss_db().is_err());
    }

    #[test]
    fn truncation_renormalizes() {
        let m = TransmittanceModel::beam_wandering(1.0, 0.9, 1.0).unwrap();
        let tr = TransmittanceModel::truncated(m.clone(), 0.3).unwrap();
        let (lo, hi) = tr.support();
        let total = integrate_1d(|t| tr.density(t).unwrap(), lo, hi, &QuadratureRule::default())
            .unwrap()
            .value;
        assert!((total - 1.0).abs() < 1e-8);
        assert!(close(tr.moment(0.0).unwrap().finite(0.0).unwrap(), 1.0, 0.0));
        let t0 = hi;
        assert!(matches!(TransmittanceModel::truncated(m, t0), Err(Error::EmptySupport { .. })));
    }

    #[test]
    fn nested_truncation_collapses() {
        let m = TransmittanceModel::beam_wandering(1.0, 0.9, 1.0).unwrap();
        let a = TransmittanceModel::truncated(TransmittanceModel::truncated(m.clone(), 0.1).unwrap(), 0.2).unwrap();
        let b = TransmittanceModel::truncated(m, 0.2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nodes_reproduce_moments() {
        for sigma in [1e-4, 0.5, 1.0, 10.0, 40.0] {
            let m = TransmittanceModel::beam_wandering(1.0, 0.9, sigma).unwrap();
            let nodes = m.nodes(DEFAULT_NODE_ORDER);
            let sum: f64 = nodes.iter().map(|n| n.weight).sum();
            assert!((sum - 1.0).abs() < 1e-12);
            for p in [1.0, 2.0, 4.0] {
                let exact = m.moment(p).unwrap().finite(p).unwrap();
                let q: f64 = nodes.iter().map(|n| n.weight * libm::pow(n.t, p)).sum();
                assert!((q - exact).abs() < 1e-8 * exact.max(1e-3), "sigma {sigma}, p {p}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn atomic_limit_of_small_deflection() {
        let m = TransmittanceModel::beam_wandering(1.0, 0.9, 1e-4).unwrap();
        let t0 = m.support().1;
        for p in [1.0, 2.0, 4.0] {
            let v = m.moment(p).unwrap().finite(p).unwrap();
            assert!((v - libm::pow(t0, p)).abs() < 1e-4);
        }
    }

    #[test]
    fn tabulated_law() {
        let tab = TransmittanceModel::Tabulated(TabulatedModel::new([(0.2, 1.0), (0.8, 3.0)]).unwrap());
        assert!(close(tab.moment(1.0).unwrap().finite(1.0).unwrap(), 0.65, 1e-15));
        assert!(close(tab.cdf(0.5), 0.25, 1e-15));
        let tr = TransmittanceModel::truncated(tab, 0.5).unwrap();
        assert!(close(tr.moment(1.0).unwrap().finite(1.0).unwrap(), 0.8, 1e-15));
        let mut rng = RngSeed(3).stream(0);
        assert!((0..100).all(|_| tr.sample(&mut rng) == 0.8));
        assert!(TabulatedModel::new([(1.2, 1.0)]).is_err());
    }

    #[test]
    fn deterministic_sampling() {
        let d = TransmittanceModel::Deterministic(0.7);
        let mut rng = RngSeed(1).stream(0);
        assert!((0..10).all(|_| d.sample(&mut rng) == 0.7));
    }

    #[test]
    fn link_sigma_scaling() {
        let link = TurbulenceLink {
            structure_constant: 1e-15,
            distance: 1600.0,
            source_spot_radius: 0.02,
        };
        let s1 = sigma_from_link(&link).unwrap();
        let expected = libm::sqrt(1.919 * 1e-15 * libm::pow(1600.0, 3.0) * libm::pow(0.04, -1.0 / 3.0));
        assert!(close(s1, expected, 1e-14));
        assert!(close(s1, 0.004_794_104_129_274_466, 1e-12));
        let s2 = sigma_from_link(&TurbulenceLink { distance: 3200.0, ..link }).unwrap();
        assert!(close(s2 / s1, libm::pow(2.0, 1.5), 1e-14));
        let tiny = sigma_from_link(&TurbulenceLink { structure_constant: 1e-40, ..link }).unwrap();
        assert!(tiny < 1e-14);
    }
}
