//! Photocount-difference statistics of balanced homodyne detection through a
//! fading channel.
//!
//! For a coherent amplitude `alpha` and a fixed transmittance `T` the two
//! detectors count independent Poisson numbers with means
//! `mu_{1,2} = (eta T^2 (r^2 + |alpha|^2 +- 2 r Re[alpha e^{-i phi}]) + 2 N) / 2`,
//! so the difference follows a Skellam law. Other inputs are mixtures of that
//! law over the P function and over `T`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{invalid, Error, Result};
use crate::numerics::{ln_bessel_i_scaled_seq, poisson_pmf, GaussLegendre, RngSeed};
use crate::pdtc::{TNode, TransmittanceModel, DEFAULT_NODE_ORDER};
use crate::states::StateModel;
use crate::Complex64;

/// Efficiency and mean noise counts shared by the two homodyne detectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorPair {
    pub efficiency: f64,
    /// Mean noise counts per detector.
    pub noise_counts: f64,
}

impl DetectorPair {
    pub fn new(efficiency: f64, noise_counts: f64) -> Result<Self> {
        let d = Self { efficiency, noise_counts };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(invalid("efficiency", "must lie in (0,1]"));
        }
        if !(self.noise_counts >= 0.0 && self.noise_counts.is_finite()) {
            return Err(invalid("noise_counts", "must be finite and >= 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalOscillator {
    pub amplitude: f64,
    pub phase: f64,
}

impl LocalOscillator {
    pub fn new(amplitude: f64, phase: f64) -> Result<Self> {
        let lo = Self { amplitude, phase };
        lo.validate()?;
        Ok(lo)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(invalid("lo_amplitude", "must be finite and > 0"));
        }
        if !self.phase.is_finite() {
            return Err(invalid("lo_phase", "must be finite"));
        }
        Ok(())
    }
}

/// Probabilities of `dn` over a contiguous integer range, together with the
/// probability mass left outside it.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDiffDistribution {
    min: i64,
    probabilities: Vec<f64>,
    deficit: f64,
}

impl CountDiffDistribution {
    pub fn new(min: i64, probabilities: Vec<f64>) -> Self {
        let total: f64 = probabilities.iter().sum();
        Self {
            min,
            probabilities,
            deficit: (1.0 - total).max(0.0),
        }
    }

    /// Inclusive `(min, max)` of the tabulated range.
    pub fn support(&self) -> (i64, i64) {
        (self.min, self.min + self.probabilities.len() as i64 - 1)
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    /// Mass outside the tabulated range.
    pub fn deficit(&self) -> f64 {
        self.deficit
    }

    pub fn probability(&self, dn: i64) -> f64 {
        let i = dn - self.min;
        if i < 0 {
            return 0.0;
        }
        self.probabilities.get(i as usize).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probabilities.iter().enumerate().map(move |(i, p)| (self.min + i as i64, *p))
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(k, p)| k as f64 * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.iter().map(|(k, p)| (k as f64 - m) * (k as f64 - m) * p).sum()
    }

    /// Half the l1 distance over the union of both ranges.
    pub fn total_variation(&self, other: &CountDiffDistribution) -> f64 {
        let (a0, a1) = self.support();
        let (b0, b1) = other.support();
        let sum: f64 = (a0.min(b0)..=a1.max(b1))
            .map(|k| (self.probability(k) - other.probability(k)).abs())
            .sum();
        0.5 * sum
    }

    /// Largest pointwise difference over the union of both ranges.
    pub fn sup_distance(&self, other: &CountDiffDistribution) -> f64 {
        let (a0, a1) = self.support();
        let (b0, b1) = other.support();
        (a0.min(b0)..=a1.max(b1))
            .map(|k| (self.probability(k) - other.probability(k)).abs())
            .fold(0.0, f64::max)
    }
}

fn detector_means(alpha: Complex64, t: f64, lo: &LocalOscillator, det: &DetectorPair) -> (f64, f64) {
    let r = lo.amplitude;
    let t2 = t * t;
    let proj = (alpha * Complex64::from_polar(1.0, -lo.phase)).re;
    let common = r * r + alpha.norm_sqr();
    let cross = 2.0 * r * proj;
    let mu = |theta: f64| 0.5 * (det.efficiency * t2 * theta.max(0.0) + 2.0 * det.noise_counts);
    (mu(common + cross), mu(common - cross))
}

// Skellam probabilities for dn in lo..=hi.
fn skellam_range(mu1: f64, mu2: f64, lo: i64, hi: i64) -> Result<Vec<f64>> {
    let len = (hi - lo + 1) as usize;
    let mut out = vec![0.0; len];
    if mu1 == 0.0 || mu2 == 0.0 {
        for (i, p) in out.iter_mut().enumerate() {
            let k = lo + i as i64;
            *p = match (mu1 == 0.0, mu2 == 0.0) {
                (true, true) => (k == 0) as u8 as f64,
                (false, true) if k >= 0 => poisson_pmf(mu1, k as u64),
                (true, false) if k <= 0 => poisson_pmf(mu2, (-k) as u64),
                _ => 0.0,
            };
        }
        return Ok(out);
    }
    let order_max = lo.unsigned_abs().max(hi.unsigned_abs()) as usize;
    let z = 2.0 * libm::sqrt(mu1 * mu2);
    let ln_i = ln_bessel_i_scaled_seq(order_max, z)?;
    let half_log_ratio = 0.5 * libm::log(mu1 / mu2);
    let d = libm::sqrt(mu1) - libm::sqrt(mu2);
    for (i, p) in out.iter_mut().enumerate() {
        let k = lo + i as i64;
        *p = libm::exp(k as f64 * half_log_ratio - d * d + ln_i[k.unsigned_abs() as usize]);
    }
    Ok(out)
}

/// `p(dn | alpha, T)` for a coherent amplitude at fixed transmittance.
pub fn skellam_pmf_coherent(alpha: Complex64, t: f64, lo: &LocalOscillator, det: &DetectorPair, dn: i64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid("T", "must lie in [0,1]"));
    }
    let (mu1, mu2) = detector_means(alpha, t, lo, det);
    Ok(skellam_range(mu1, mu2, dn, dn)?[0])
}

/// Symmetric range `[-K, K]` with `K = m + 10 sqrt(m)` for the largest total
/// detector mean `m` the inputs can produce.
pub fn auto_range(max_alpha: f64, t_max: f64, lo: &LocalOscillator, det: &DetectorPair) -> (i64, i64) {
    let r = lo.amplitude;
    let total = det.efficiency * t_max * t_max * (r * r + max_alpha * max_alpha) + 2.0 * det.noise_counts;
    let k = libm::ceil(total + 10.0 * libm::sqrt(total) + 1.0) as i64;
    (-k, k)
}

// Coherent amplitudes and weights representing the P function.
fn p_nodes(state: &StateModel) -> Result<(Vec<(Complex64, f64)>, f64)> {
    let (gamma, nbar, spats) = match *state {
        StateModel::Coherent(g) => return Ok((vec![(g, 1.0)], g.norm())),
        StateModel::Thermal(n) if n == 0.0 => return Ok((vec![(Complex64::new(0.0, 0.0), 1.0)], 0.0)),
        StateModel::Thermal(n) => (Complex64::new(0.0, 0.0), n, false),
        StateModel::Spats(n) => (Complex64::new(0.0, 0.0), n, true),
        StateModel::DisplacedSpats { nbar, gamma } => (gamma, nbar, true),
        StateModel::Gaussian(cs) => {
            let v = cs.ncov();
            let g = state.displacement();
            if v == [[0.0; 2]; 2] {
                return p_nodes(&StateModel::Coherent(g));
            }
            if v[0][1] == 0.0 && v[0][0] == v[1][1] && v[0][0] > 0.0 && g.norm_sqr() == 0.0 {
                return p_nodes(&StateModel::Thermal(v[0][0]));
            }
            return Err(Error::UnsupportedState("photocount statistics of a Gaussian state with singular or anisotropic P function"));
        }
    };
    state.validate()?;
    let rho_max = libm::sqrt(45.0 * nbar) + 1.0;
    let gl = GaussLegendre::new(16);
    let panels = 3;
    let angles = 64;
    let mut nodes = Vec::with_capacity(16 * panels * angles);
    let h = rho_max / panels as f64;
    for p in 0..panels {
        for (rho, w) in gl.mapped(p as f64 * h, (p + 1) as f64 * h) {
            let r2 = rho * rho;
            let density = if spats {
                ((1.0 + nbar) * r2 - nbar) * libm::exp(-r2 / nbar) / (PI * nbar * nbar * nbar)
            } else {
                libm::exp(-r2 / nbar) / (PI * nbar)
            };
            let weight = density * rho * w * 2.0 * PI / angles as f64;
            for j in 0..angles {
                let theta = 2.0 * PI * (j as f64 + 0.5) / angles as f64;
                nodes.push((gamma + Complex64::from_polar(rho, theta), weight));
            }
        }
    }
    Ok((nodes, gamma.norm() + rho_max))
}

/// Photocount-difference law of `state` sent through the fading channel
/// `pdtc`, over `dn_range` or an automatic certified range.
pub fn count_diff_distribution(
    state: &StateModel,
    pdtc: &TransmittanceModel,
    lo: &LocalOscillator,
    det: &DetectorPair,
    dn_range: Option<(i64, i64)>,
) -> Result<CountDiffDistribution> {
    lo.validate()?;
    det.validate()?;
    let (alphas, max_alpha) = p_nodes(state)?;
    let t_nodes = pdtc.nodes(DEFAULT_NODE_ORDER);
    let (kmin, kmax) = match dn_range {
        Some((a, b)) if a <= b => (a, b),
        Some(_) => return Err(invalid("dn_range", "need min <= max")),
        None => auto_range(max_alpha, pdtc.support().1, lo, det),
    };
    let mut acc = vec![0.0; (kmax - kmin + 1) as usize];
    for TNode { t, weight } in t_nodes {
        for &(alpha, w_alpha) in &alphas {
            let (mu1, mu2) = detector_means(alpha, t, lo, det);
            let probs = skellam_range(mu1, mu2, kmin, kmax)?;
            let w = weight * w_alpha;
            for (a, p) in acc.iter_mut().zip(&probs) {
                *a += w * p;
            }
        }
    }
    Ok(CountDiffDistribution::new(kmin, acc))
}

/// Gaussian strong-oscillator approximation of `p(dn | alpha, T)`: mean
/// `2 eta T^2 r Re[alpha e^{-i phi}]`, variance `eta T^2 r^2 + 2 N`.
pub fn gaussian_approx_pmf(alpha: Complex64, t: f64, lo: &LocalOscillator, det: &DetectorPair, dn: i64) -> Result<f64> {
    let eta_t2 = det.efficiency * t * t;
    let mean = 2.0 * eta_t2 * lo.amplitude * (alpha * Complex64::from_polar(1.0, -lo.phase)).re;
    let var = eta_t2 * lo.amplitude * lo.amplitude + 2.0 * det.noise_counts;
    if !(var > 0.0) {
        return Err(invalid("T", "Gaussian approximation needs a positive variance"));
    }
    let y = dn as f64 - mean;
    Ok(libm::exp(-0.5 * y * y / var) / libm::sqrt(2.0 * PI * var))
}

/// [`gaussian_approx_pmf`] averaged over the fading law, over `dn_range`.
pub fn gaussian_approx_distribution(
    alpha: Complex64,
    pdtc: &TransmittanceModel,
    lo: &LocalOscillator,
    det: &DetectorPair,
    dn_range: (i64, i64),
) -> Result<CountDiffDistribution> {
    let (kmin, kmax) = dn_range;
    if kmin > kmax {
        return Err(invalid("dn_range", "need min <= max"));
    }
    let mut acc = vec![0.0; (kmax - kmin + 1) as usize];
    for TNode { t, weight } in pdtc.nodes(DEFAULT_NODE_ORDER) {
        for (i, a) in acc.iter_mut().enumerate() {
            *a += weight * gaussian_approx_pmf(alpha, t, lo, det, kmin + i as i64)?;
        }
    }
    Ok(CountDiffDistribution::new(kmin, acc))
}

fn poisson_draw<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> i64 {
    if mean <= 0.0 {
        return 0;
    }
    match Poisson::new(mean) {
        Ok(d) => d.sample(rng) as i64,
        Err(_) => 0,
    }
}

/// One photocount difference for a coherent input: draws `T`, then the two
/// detector counts.
pub fn sample_count_diff<R: Rng + ?Sized>(
    gamma: Complex64,
    pdtc: &TransmittanceModel,
    lo: &LocalOscillator,
    det: &DetectorPair,
    rng: &mut R,
) -> i64 {
    let t = pdtc.sample(rng);
    let (mu1, mu2) = detector_means(gamma, t, lo, det);
    poisson_draw(mu1, rng) - poisson_draw(mu2, rng)
}

/// Histogram of sampled photocount differences.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CountHistogram {
    counts: BTreeMap<i64, u64>,
    total: u64,
}

impl CountHistogram {
    pub fn record(&mut self, dn: i64) {
        *self.counts.entry(dn).or_insert(0) += 1;
        self.total += 1;
    }

    pub fn merge(&mut self, other: &CountHistogram) {
        for (k, v) in &other.counts {
            *self.counts.entry(*k).or_insert(0) += v;
        }
        self.total += other.total;
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn to_distribution(&self) -> CountDiffDistribution {
        let (Some((&lo, _)), Some((&hi, _))) = (self.counts.first_key_value(), self.counts.last_key_value()) else {
            return CountDiffDistribution::new(0, Vec::new());
        };
        let n = self.total as f64;
        let probs = (lo..=hi).map(|k| self.counts.get(&k).copied().unwrap_or(0) as f64 / n).collect();
        CountDiffDistribution::new(lo, probs)
    }
}

/// `samples` draws of [`sample_count_diff`] from stream `stream` of `seed`.
pub fn monte_carlo_counts(
    gamma: Complex64,
    pdtc: &TransmittanceModel,
    lo: &LocalOscillator,
    det: &DetectorPair,
    samples: u64,
    seed: RngSeed,
    stream: u64,
) -> CountHistogram {
    let mut rng = seed.stream(stream);
    let mut hist = CountHistogram::default();
    for _ in 0..samples {
        hist.record(sample_count_diff(gamma, pdtc, lo, det, &mut rng));
    }
    hist
}
