//! Input-output maps of the two detection schemes.
//!
//! At a fixed true transmittance `T` (and, when monitored with shot noise, a
//! fixed estimate `T_meas`) each scheme acts on the normally ordered
//! characteristic function as a Gaussian channel
//! `Phi_out(beta) = exp(-4 c |beta|^2) Phi_in(k beta)`. The reconstructed state
//! is the mixture of these channels over the transmittance law; every
//! observable here is computed from one shared discretisation of that
//! mixture.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::counts::{DetectorPair, LocalOscillator};
use crate::covariance::CovarianceState;
use crate::error::{invalid, Error, Result};
use crate::monitor::{conditional_pdtc_nodes, MonitorConfig};
use crate::numerics::{laguerre_projection, QuadratureRule, MAX_LAGUERRE_ORDER};
use crate::pdtc::{TransmittanceModel, DEFAULT_NODE_ORDER};
use crate::states::{smoothed_quadrature_pdf, StateModel};
use crate::Complex64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scheme {
    /// Counts are rescaled with a fixed reference transmittance.
    FixedReference { t_ref: f64 },
    /// The true transmittance of every event is known exactly.
    MonitoredIdeal(MonitorConfig),
    /// The transmittance is estimated from shot-noise-limited monitor counts.
    MonitoredShotNoise(MonitorConfig),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub det: DetectorPair,
    pub lo: LocalOscillator,
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        self.det.validate()?;
        self.lo.validate()?;
        match &self.scheme {
            Scheme::FixedReference { t_ref } => {
                if !(*t_ref > 0.0 && *t_ref <= 1.0) {
                    return Err(invalid("T_ref", "must lie in (0,1]"));
                }
            }
            Scheme::MonitoredIdeal(mon) | Scheme::MonitoredShotNoise(mon) => {
                mon.validate()?;
                if mon.lo_amplitude != self.lo.amplitude {
                    return Err(invalid("lo_amplitude", "monitor and homodyne share one oscillator"));
                }
            }
        }
        Ok(())
    }

    fn monitor(&self) -> Option<&MonitorConfig> {
        match &self.scheme {
            Scheme::FixedReference { .. } => None,
            Scheme::MonitoredIdeal(m) | Scheme::MonitoredShotNoise(m) => Some(m),
        }
    }
}

/// `Phi_out(beta) = exp(-4 c |beta|^2) Phi_in(k beta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalGaussianChannel {
    pub amplitude_scale: f64,
    pub laplace_coeff: f64,
}

// Channel for true transmittance t when the counts are rescaled with
// reference t_ref and the homodyne oscillator has effective amplitude r.
fn added_variance(t: f64, t_ref: f64, det: &DetectorPair, r: f64) -> f64 {
    let tr2 = t_ref * t_ref;
    t * t / (2.0 * tr2) + det.noise_counts / (r * r * tr2 * det.efficiency)
}

fn node(t: f64, t_used: f64, weight: f64, det: &DetectorPair, r: f64) -> ChannelNode {
    ChannelNode {
        t,
        t_used,
        weight,
        channel: rescaled_channel(t, t_used, det, r),
        added_variance: added_variance(t, t_used, det, r),
    }
}

fn rescaled_channel(t: f64, t_ref: f64, det: &DetectorPair, r: f64) -> ConditionalGaussianChannel {
    let eta = det.efficiency;
    let tr2 = t_ref * t_ref;
    ConditionalGaussianChannel {
        amplitude_scale: libm::sqrt(eta) * t * t / t_ref,
        laplace_coeff: (t * t - tr2) / (8.0 * tr2) + det.noise_counts / (4.0 * r * r * tr2 * eta),
    }
}

/// Per-event channel at true transmittance `t > 0`. Shot-noise monitoring
/// has no single channel per `t`; see [`conditional_channel_measured`].
pub fn conditional_channel(scheme: &SchemeConfig, t: f64) -> Result<ConditionalGaussianChannel> {
    if t == 0.0 {
        return Err(Error::ZeroTransmittance);
    }
    if !(t > 0.0 && t <= 1.0) {
        return Err(invalid("T", "must lie in (0,1]"));
    }
    let r = scheme.lo.amplitude;
    match &scheme.scheme {
        Scheme::FixedReference { t_ref } => Ok(rescaled_channel(t, *t_ref, &scheme.det, r)),
        Scheme::MonitoredIdeal(mon) => Ok(rescaled_channel(t, t, &scheme.det, mon.bs_reflectance * r)),
        Scheme::MonitoredShotNoise(_) => Err(Error::UnsupportedState(
            "shot-noise monitoring needs the estimated transmittance as well",
        )),
    }
}

/// Per-event channel of a monitored scheme at true transmittance `t` and
/// accepted estimate `t_meas`.
pub fn conditional_channel_measured(scheme: &SchemeConfig, t: f64, t_meas: f64) -> Result<ConditionalGaussianChannel> {
    let Some(mon) = scheme.monitor() else {
        return Err(invalid("scheme", "only monitored schemes use an estimated transmittance"));
    };
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid("T", "must lie in [0,1]"));
    }
    if !(t_meas > 0.0 && t_meas.is_finite()) {
        return Err(invalid("T_meas", "must be finite and > 0"));
    }
    Ok(rescaled_channel(t, t_meas, &scheme.det, mon.bs_reflectance * scheme.lo.amplitude))
}

/// Effective transmittance `T^2 / T_ref` and effective noise
/// `(T^2 - T_ref^2) / (8 T_ref^2)` of fixed-reference rescaling.
pub fn effective_params(t: f64, t_ref: f64) -> Result<(f64, f64)> {
    if !(t_ref > 0.0 && t_ref.is_finite()) {
        return Err(invalid("T_ref", "must be > 0"));
    }
    let tr2 = t_ref * t_ref;
    Ok((t * t / t_ref, (t * t - tr2) / (8.0 * tr2)))
}

/// One component of the output mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelNode {
    pub t: f64,
    /// Transmittance used for rescaling: `T_ref`, `T`, or the estimate.
    pub t_used: f64,
    pub weight: f64,
    pub channel: ConditionalGaussianChannel,
    /// Variance `1/2 + 4c` added to the scaled quadrature, evaluated without
    /// the cancellation of the two terms at small `T`.
    pub added_variance: f64,
}

/// Kept monitor outcomes per transmittance node are merged into at most this
/// many groups.
pub const MONITOR_BLOCKS: usize = 128;

/// An input state seen through a scheme and a fading channel.
#[derive(Debug, Clone)]
pub struct NoisyStateView {
    state: StateModel,
    scheme: SchemeConfig,
    pdtc: TransmittanceModel,
    nodes: Vec<ChannelNode>,
    acceptance: f64,
}

impl NoisyStateView {
    pub fn new(state: StateModel, scheme: SchemeConfig, pdtc: TransmittanceModel) -> Result<Self> {
        Self::with_node_order(state, scheme, pdtc, DEFAULT_NODE_ORDER)
    }

    /// As [`Self::new`] with `order` Gauss–Legendre points per panel of the
    /// transmittance discretisation.
    pub fn with_node_order(state: StateModel, scheme: SchemeConfig, pdtc: TransmittanceModel, order: usize) -> Result<Self> {
        state.validate()?;
        scheme.validate()?;
        if order == 0 {
            return Err(invalid("node_order", "must be >= 1"));
        }
        let r = scheme.lo.amplitude;
        let mut nodes = Vec::new();
        let acceptance;
        match &scheme.scheme {
            Scheme::FixedReference { t_ref } => {
                for n in pdtc.nodes(order) {
                    nodes.push(node(n.t, *t_ref, n.weight, &scheme.det, r));
                }
                acceptance = 1.0;
            }
            Scheme::MonitoredIdeal(mon) => {
                let truncated = TransmittanceModel::truncated(pdtc.clone(), mon.t_min)?;
                let r_eff = mon.bs_reflectance * r;
                for n in truncated.nodes(order) {
                    nodes.push(node(n.t, n.t, n.weight, &scheme.det, r_eff));
                }
                acceptance = match &truncated {
                    TransmittanceModel::Truncated(tr) => tr.acceptance(),
                    _ => 1.0,
                };
            }
            Scheme::MonitoredShotNoise(mon) => {
                let r_eff = mon.bs_reflectance * r;
                let mut kept = 0.0;
                for n in pdtc.nodes_split(order, Some(mon.t_min)) {
                    let atoms = conditional_pdtc_nodes(mon, n.t, None)?;
                    for a in atoms.compressed(MONITOR_BLOCKS) {
                        let weight = n.weight * a.weight;
                        kept += weight;
                        nodes.push(node(n.t, a.t_meas, weight, &scheme.det, r_eff));
                    }
                }
                if kept <= 0.0 {
                    return Err(Error::EmptySupport { t_min: mon.t_min });
                }
                if kept < crate::pdtc::MIN_ACCEPTANCE {
                    return Err(Error::PathologicalTruncation { acceptance: kept });
                }
                nodes.iter_mut().for_each(|n| n.weight /= kept);
                acceptance = kept;
            }
        }
        Ok(Self {
            state,
            scheme,
            pdtc,
            nodes,
            acceptance,
        })
    }

    pub fn state(&self) -> &StateModel {
        &self.state
    }

    pub fn scheme(&self) -> &SchemeConfig {
        &self.scheme
    }

    pub fn pdtc(&self) -> &TransmittanceModel {
        &self.pdtc
    }

    pub fn nodes(&self) -> &[ChannelNode] {
        &self.nodes
    }

    /// Probability that an event survives postselection (1 without it).
    pub fn acceptance(&self) -> f64 {
        self.acceptance
    }

    pub fn noisy_charfn(&self, beta: Complex64) -> Complex64 {
        let b2 = beta.norm_sqr();
        let mut total = Complex64::new(0.0, 0.0);
        let mut weight = 0.0;
        for n in &self.nodes {
            let ch = n.channel;
            total += self.state.charfn_n(beta * ch.amplitude_scale) * (n.weight * libm::exp(-4.0 * ch.laplace_coeff * b2));
            weight += n.weight;
        }
        // Same summation order as the weights, so `beta = 0` gives exactly 1.
        total / weight
    }

    /// Mean photon number of the reconstructed state.
    pub fn mean_photon_number(&self) -> f64 {
        let n_in = self.state.mean_photon_number();
        self.nodes
            .iter()
            .map(|n| {
                let ch = n.channel;
                n.weight * (ch.amplitude_scale * ch.amplitude_scale * n_in + 4.0 * ch.laplace_coeff)
            })
            .sum()
    }

    /// Pointwise P function of the reconstructed state. Fails with
    /// [`Error::NonRegular`] when some mixture component sharpens the input
    /// beyond its own width, and with [`Error::SingularP`] when a component
    /// has no pointwise P function.
    pub fn noisy_p_function(&self, alpha: Complex64) -> Result<f64> {
        let mut total = 0.0;
        for n in &self.nodes {
            if n.weight == 0.0 {
                continue;
            }
            total += n.weight * node_p_function(&self.state, n.channel, n.t, alpha)?;
        }
        Ok(total)
    }

    /// Diagonal Fock elements `p_0..=p_n_max`, projected from the
    /// characteristic function. Entries may be negative for non-physical
    /// reconstructions.
    pub fn noisy_fock_distribution(&self, n_max: usize) -> Result<Vec<f64>> {
        self.noisy_fock_distribution_with(n_max, &QuadratureRule::default())
    }

    pub fn noisy_fock_distribution_with(&self, n_max: usize, rule: &QuadratureRule) -> Result<Vec<f64>> {
        if n_max > MAX_LAGUERRE_ORDER {
            return Err(Error::OrderOutOfRange {
                order: n_max,
                max: MAX_LAGUERRE_ORDER,
            });
        }
        self.state.charfn_radial(0.0)?;
        let d_in = self.state.charfn_decay();
        let decay = self
            .nodes
            .iter()
            .map(|n| {
                let ch = n.channel;
                1.0 + 4.0 * ch.laplace_coeff + ch.amplitude_scale * ch.amplitude_scale * d_in
            })
            .fold(f64::INFINITY, f64::min);
        if !(decay > 0.0) {
            return Err(Error::NonRegular { t: 0.0 });
        }
        let radial = |b: f64| {
            let b2 = b * b;
            self.nodes
                .iter()
                .map(|n| {
                    let ch = n.channel;
                    let phi = self.state.charfn_radial(ch.amplitude_scale * b).unwrap_or(f64::NAN);
                    n.weight * libm::exp(-4.0 * ch.laplace_coeff * b2) * phi
                })
                .sum::<f64>()
        };
        laguerre_projection(radial, n_max, decay, rule)
    }

    /// Density of the reconstructed quadrature `x(phi)`.
    pub fn noisy_quadrature_pdf(&self, x: f64, phi: f64) -> Result<f64> {
        let mut total = 0.0;
        for n in &self.nodes {
            if n.weight == 0.0 {
                continue;
            }
            let p = smoothed_quadrature_pdf(&self.state, x, phi, n.channel.amplitude_scale, n.added_variance)
                .map_err(|_| Error::NonRegular { t: n.t })?;
            total += n.weight * p;
        }
        Ok(total)
    }
}

fn node_p_function(state: &StateModel, ch: ConditionalGaussianChannel, t: f64, alpha: Complex64) -> Result<f64> {
    let k = ch.amplitude_scale;
    let c = ch.laplace_coeff;
    let (gamma, nbar, curvature) = match *state {
        StateModel::Coherent(g) => (g, 0.0, 0.0),
        StateModel::Thermal(n) => (Complex64::new(0.0, 0.0), n, 0.0),
        StateModel::Spats(n) => (Complex64::new(0.0, 0.0), n, 1.0 + n),
        StateModel::DisplacedSpats { nbar, gamma } => (gamma, nbar, 1.0 + nbar),
        StateModel::Gaussian(cs) => {
            let m = cs.mean();
            let v = cs.ncov();
            let k2 = k * k;
            let out = CovarianceState::new(
                [k * m[0], k * m[1]],
                [[k2 * v[0][0] + 4.0 * c, k2 * v[0][1]], [k2 * v[1][0], k2 * v[1][1] + 4.0 * c]],
            )?;
            return StateModel::Gaussian(out).p_function(alpha).map_err(|_| Error::NonRegular { t });
        }
    };
    let width = nbar * k * k + 4.0 * c;
    if width == 0.0 && curvature == 0.0 {
        return Err(Error::SingularP);
    }
    if !(width > 0.0) {
        return Err(Error::NonRegular { t });
    }
    let rho2 = (alpha - gamma * k).norm_sqr();
    let a = curvature * k * k;
    let poly = 1.0 - a / width + a * rho2 / (width * width);
    Ok(poly * libm::exp(-rho2 / width) / (PI * width))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate_1d;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn monitor(r: f64) -> MonitorConfig {
        let s = libm::sqrt(0.5);
        MonitorConfig {
            eta3: 0.9,
            noise3: 0.0,
            bs_transmittance: s,
            bs_reflectance: s,
            lo_amplitude: r,
            t_min: 0.05,
        }
    }

    fn fixed(t_ref: f64, eta: f64, noise: f64) -> SchemeConfig {
        SchemeConfig {
            scheme: Scheme::FixedReference { t_ref },
            det: DetectorPair::new(eta, noise).unwrap(),
            lo: LocalOscillator::new(20.0, 0.0).unwrap(),
        }
    }

    fn ideal(eta: f64, noise: f64, r: f64) -> SchemeConfig {
        SchemeConfig {
            scheme: Scheme::MonitoredIdeal(monitor(r)),
            det: DetectorPair::new(eta, noise).unwrap(),
            lo: LocalOscillator::new(r, 0.0).unwrap(),
        }
    }

    #[test]
    fn fixed_reference_parameters() {
        let s = fixed(0.4, 0.5, 0.0);
        let ch = conditional_channel(&s, 0.4).unwrap();
        assert!((ch.amplitude_scale - libm::sqrt(0.5) * 0.4).abs() < 1e-15);
        assert_eq!(ch.laplace_coeff, 0.0);
        assert!(conditional_channel(&s, 0.2).unwrap().laplace_coeff < 0.0);
        assert!(matches!(conditional_channel(&s, 0.0), Err(Error::ZeroTransmittance)));
        let (t_eff, n_eff) = effective_params(0.5, 0.25).unwrap();
        assert_eq!((t_eff, n_eff), (1.0, 0.375));
        assert_eq!(effective_params(1.0, 0.5).unwrap().0, 2.0);
        assert_eq!(effective_params(0.0, 0.3).unwrap().1, -0.125);
    }

    #[test]
    fn fixed_reference_at_true_transmittance_is_monitored() {
        // Equal once the monitored oscillator is scaled by |R2|.
        let noise = 0.3;
        let m = ideal(0.7, noise, 20.0);
        let r2 = monitor(20.0).bs_reflectance;
        for t in [0.1, 0.5, 0.93] {
            let a = conditional_channel(&m, t).unwrap();
            let mut f = fixed(t, 0.7, noise);
            f.lo.amplitude = 20.0 * r2;
            let b = conditional_channel(&f, t).unwrap();
            assert!((a.amplitude_scale - b.amplitude_scale).abs() < 1e-15);
            assert!((a.laplace_coeff - b.laplace_coeff).abs() < 1e-15);
        }
    }

    #[test]
    fn lo_amplitudes_must_match() {
        let mut s = ideal(0.5, 0.0, 20.0);
        s.lo.amplitude = 21.0;
        assert!(s.validate().is_err());
        assert!(fixed(0.0, 0.5, 0.0).validate().is_err());
    }

    #[test]
    fn identity_configuration() {
        let s = ideal(1.0, 0.0, 20.0);
        let st = StateModel::Spats(1.11);
        let v = NoisyStateView::new(st, s, TransmittanceModel::Deterministic(1.0)).unwrap();
        for beta in [c(0.3, 0.2), c(-1.0, 0.5)] {
            assert!((v.noisy_charfn(beta) - st.charfn_n(beta)).norm() < 1e-15);
        }
        let p = v.noisy_fock_distribution(40).unwrap();
        let exact = st.fock_distribution(40).unwrap();
        for (a, b) in p.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn vacuum_stays_vacuum() {
        let pdtc = TransmittanceModel::beam_wandering(1.0, 0.9, 1.0).unwrap();
        let v = NoisyStateView::new(StateModel::vacuum(), ideal(0.5, 0.0, 20.0), pdtc).unwrap();
        assert!((v.noisy_charfn(c(0.7, -1.1)) - c(1.0, 0.0)).norm() < 1e-12);
        let p = v.noisy_fock_distribution(10).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-10);
        assert!(p[1..].iter().all(|x| x.abs() < 1e-10));
    }

    #[test]
    fn single_node_p_function_is_rescaled_input() {
        let eta = 0.5;
        let t = 0.8;
        let st = StateModel::DisplacedSpats { nbar: 1.11, gamma: c(1.0, 0.3) };
        let v = NoisyStateView::new(st, ideal(eta, 0.0, 20.0), TransmittanceModel::Deterministic(t)).unwrap();
        let s = t * libm::sqrt(eta);
        for alpha in [c(0.0, 0.0), c(0.5, 0.1), c(-0.4, 1.2)] {
            let expected = st.p_function(alpha / s).unwrap() / (eta * t * t);
            assert!((v.noisy_p_function(alpha).unwrap() - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn noisy_p_matches_numeric_convolution() {
        // c > 0: Gaussian smoothing of the scaled P function.
        let st = StateModel::Spats(0.8);
        let ch = ConditionalGaussianChannel {
            amplitude_scale: 0.7,
            laplace_coeff: 0.05,
        };
        let k = ch.amplitude_scale;
        let w = 4.0 * ch.laplace_coeff;
        let rule = QuadratureRule::new(1e-13, 1e-11, 2000).unwrap();
        let alpha = c(0.3, 0.0);
        let lim = 8.0;
        let conv = integrate_1d(
            |y| {
                integrate_1d(
                    |x| {
                        let z = c(x, y);
                        let scaled = st.p_function(z / k).unwrap() / (k * k);
                        scaled * libm::exp(-(alpha - z).norm_sqr() / w) / (PI * w)
                    },
                    -lim,
                    lim,
                    &rule,
                )
                .unwrap()
                .value
            },
            -lim,
            lim,
            &rule,
        )
        .unwrap()
        .value;
        let closed = node_p_function(&st, ch, 1.0, alpha).unwrap();
        assert!((closed - conv).abs() < 1e-9, "{closed} vs {conv}");
    }

    #[test]
    fn sharpening_p_matches_fourier_route() {
        // c < 0 within the regular range: invert the characteristic function.
        let st = StateModel::Spats(1.5);
        let ch = ConditionalGaussianChannel {
            amplitude_scale: 0.9,
            laplace_coeff: -0.1,
        };
        let k = ch.amplitude_scale;
        let alpha_r = 0.4;
        let rule = QuadratureRule::new(1e-13, 1e-11, 2000).unwrap();
        // P(alpha) = (1/pi^2) int Phi(beta) exp(beta* alpha - beta alpha*) d^2 beta; Phi is radial,
        // so this reduces to (2/pi) int b Phi(b) J0(2 b |alpha|) db.
        let fourier = integrate_1d(
            |b| {
                let phi = libm::exp(-4.0 * ch.laplace_coeff * b * b) * st.charfn_radial(k * b).unwrap();
                2.0 / PI * b * phi * libm::j0(2.0 * b * alpha_r)
            },
            0.0,
            20.0,
            &rule,
        )
        .unwrap()
        .value;
        let closed = node_p_function(&st, ch, 1.0, c(alpha_r, 0.0)).unwrap();
        assert!((closed - fourier).abs() < 1e-9, "{closed} vs {fourier}");
        let bad = ConditionalGaussianChannel {
            amplitude_scale: 0.1,
            laplace_coeff: -0.12,
        };
        assert!(matches!(node_p_function(&st, bad, 0.1, c(0.0, 0.0)), Err(Error::NonRegular { .. })));
    }

    #[test]
    fn quadrature_pdf_cases() {
        let rule = QuadratureRule::default();
        let v = NoisyStateView::new(StateModel::vacuum(), fixed(0.6, 1.0, 0.0), TransmittanceModel::Deterministic(0.6)).unwrap();
        let p0 = v.noisy_quadrature_pdf(0.0, 0.0).unwrap();
        assert!((p0 - 1.0 / libm::sqrt(PI)).abs() < 1e-14);
        let (t, t_ref, eta) = (0.7, 0.5, 0.6);
        let g = c(1.1, -0.4);
        let v = NoisyStateView::new(StateModel::Coherent(g), fixed(t_ref, eta, 0.2), TransmittanceModel::Deterministic(t)).unwrap();
        let total = integrate_1d(|x| v.noisy_quadrature_pdf(x, 0.3).unwrap(), f64::NEG_INFINITY, f64::INFINITY, &rule)
            .unwrap()
            .value;
        assert!((total - 1.0).abs() < 1e-8);
        let mean = integrate_1d(|x| x * v.noisy_quadrature_pdf(x, 0.3).unwrap(), f64::NEG_INFINITY, f64::INFINITY, &rule)
            .unwrap()
            .value;
        let expected = libm::sqrt(2.0 * eta) * t * t / t_ref * (g * Complex64::from_polar(1.0, -0.3)).re;
        assert!((mean - expected).abs() < 1e-8);
    }

    #[test]
    fn shot_noise_nodes_are_normalized() {
        let pdtc = TransmittanceModel::beam_wandering(1.0, 0.9, 1.0).unwrap();
        let s = SchemeConfig {
            scheme: Scheme::MonitoredShotNoise(monitor(50.0)),
            det: DetectorPair::new(0.5, 0.0).unwrap(),
            lo: LocalOscillator::new(50.0, 0.0).unwrap(),
        };
        let v = NoisyStateView::new(StateModel::Spats(1.11), s, pdtc).unwrap();
        let w: f64 = v.nodes().iter().map(|n| n.weight).sum();
        assert!((w - 1.0).abs() < 1e-12);
        assert!(v.acceptance() > 0.9 && v.acceptance() < 1.0);
        assert!((v.noisy_charfn(c(0.0, 0.0)).re - 1.0).abs() < 1e-12);
    }
}
