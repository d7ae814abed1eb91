//! Transmittance monitoring with an auxiliary detector.
//!
//! A fraction `|T2|^2` of the transmitted oscillator reaches a monitor
//! detector whose counts `n3` are Poisson with mean
//! `eta3 r^2 |T2|^2 T^2 + N3`. The estimate
//! `T_meas^2 = (n3 - N3) / (eta3 r^2 |T2|^2)` is unbiased for `T^2`; events
//! whose estimate falls below the threshold `T_min^2` (or is not positive)
//! are discarded.

use alloc::vec::Vec;

use crate::counts::DetectorPair;
use crate::error::{invalid, Result};
use crate::numerics::poisson_pmf;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorConfig {
    /// Monitor detector efficiency.
    pub eta3: f64,
    /// Mean noise counts of the monitor detector.
    pub noise3: f64,
    /// Amplitude transmittance `|T2|` of the splitter feeding the monitor.
    pub bs_transmittance: f64,
    /// Amplitude reflectance `|R2|` of the same splitter.
    pub bs_reflectance: f64,
    pub lo_amplitude: f64,
    /// Postselection threshold on the estimated transmittance.
    pub t_min: f64,
}

impl MonitorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.eta3 > 0.0 && self.eta3 <= 1.0) {
            return Err(invalid("eta3", "must lie in (0,1]"));
        }
        if !(self.noise3 >= 0.0 && self.noise3.is_finite()) {
            return Err(invalid("noise3", "must be finite and >= 0"));
        }
        for (name, v) in [("bs_transmittance", self.bs_transmittance), ("bs_reflectance", self.bs_reflectance)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(invalid(name, "must lie in (0,1)"));
            }
        }
        let sum = self.bs_transmittance * self.bs_transmittance + self.bs_reflectance * self.bs_reflectance;
        if (sum - 1.0).abs() > 1e-12 {
            return Err(invalid("bs_transmittance", "lossless splitter requires |T2|^2 + |R2|^2 = 1"));
        }
        if !(self.lo_amplitude > 0.0 && self.lo_amplitude.is_finite()) {
            return Err(invalid("lo_amplitude", "must be finite and > 0"));
        }
        if !(self.t_min > 0.0 && self.t_min < 1.0) {
            return Err(invalid("T_min", "must lie in (0,1)"));
        }
        Ok(())
    }

    /// Mean monitor counts per unit `T^2`.
    fn gain(&self) -> f64 {
        self.eta3 * self.lo_amplitude * self.lo_amplitude * self.bs_transmittance * self.bs_transmittance
    }

    /// A copy with a different oscillator amplitude.
    pub fn with_lo_amplitude(&self, lo_amplitude: f64) -> Self {
        Self { lo_amplitude, ..*self }
    }
}

/// Unconstrained estimate `T_meas^2` from `n3` counts; may be negative.
pub fn t_meas_squared(cfg: &MonitorConfig, n3: u64) -> f64 {
    (n3 as f64 - cfg.noise3) / cfg.gain()
}

/// Estimated transmittance, or `None` when the event is discarded.
pub fn t_meas_from_counts(cfg: &MonitorConfig, n3: u64) -> Option<f64> {
    let t2 = t_meas_squared(cfg, n3);
    (t2 > 0.0 && t2 >= cfg.t_min * cfg.t_min).then(|| libm::sqrt(t2))
}

pub fn conditional_count_mean(cfg: &MonitorConfig, t: f64) -> f64 {
    cfg.gain() * t * t + cfg.noise3
}

/// Probability of `n3` monitor counts at transmittance `t`.
pub fn conditional_count_pmf(cfg: &MonitorConfig, t: f64, n3: u64) -> f64 {
    poisson_pmf(conditional_count_mean(cfg, t), n3)
}

/// Conditional mean and variance of `T_meas^2` given `T = t`.
pub fn conditional_moments(cfg: &MonitorConfig, t: f64) -> (f64, f64) {
    let g = cfg.gain();
    (t * t, t * t / g + cfg.noise3 / (g * g))
}

/// Relative error of `T_meas^2` as an estimate of `T^2`.
pub fn relative_error(cfg: &MonitorConfig, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid("T", "must be > 0"));
    }
    let (mean, var) = conditional_moments(cfg, t);
    Ok(libm::sqrt(var) / mean)
}

/// Oscillator amplitude at which [`relative_error`] equals `eps`.
pub fn required_lo_amplitude(cfg: &MonitorConfig, t: f64, eps: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(invalid("T", "must be > 0"));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(invalid("epsilon", "must be finite and > 0"));
    }
    let base = 1.0 / (t * cfg.bs_transmittance * libm::sqrt(cfg.eta3) * eps);
    Ok(base * libm::sqrt(0.5 + libm::sqrt(0.25 + eps * eps * cfg.noise3)))
}

/// Default factor by which the oscillator should exceed
/// [`lo_amplitude_for_negligible_noise`].
pub const DEFAULT_NOISE_MARGIN: f64 = 10.0;

/// Oscillator amplitude at which homodyne noise counts become comparable to
/// the signal for the weakest accepted transmittance.
pub fn lo_amplitude_for_negligible_noise(cfg: &MonitorConfig, det: &DetectorPair) -> f64 {
    let r2 = cfg.bs_reflectance * cfg.bs_reflectance;
    libm::sqrt(det.noise_counts / (r2 * cfg.t_min * cfg.t_min * det.efficiency))
}

pub fn noise_negligible(cfg: &MonitorConfig, det: &DetectorPair, margin: f64) -> bool {
    cfg.lo_amplitude >= margin * lo_amplitude_for_negligible_noise(cfg, det)
}

/// One possible monitor outcome at fixed `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorAtom {
    pub t_meas: f64,
    pub weight: f64,
}

/// Law of the monitor estimate at fixed `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorAtoms {
    /// Accepted outcomes with their (unnormalised) probabilities.
    pub kept: Vec<MonitorAtom>,
    /// Probability of a discarded outcome.
    pub discarded: f64,
    /// Probability outside the enumerated count range.
    pub tail_deficit: f64,
    /// Sum of `p(n3) T_meas^2(n3)` over every enumerated outcome, kept or not.
    pub mean_t_meas_sq: f64,
    /// Same for `T_meas^4`.
    pub mean_t_meas_4: f64,
}

impl MonitorAtoms {
    pub fn acceptance(&self) -> f64 {
        self.kept.iter().map(|a| a.weight).sum()
    }

    /// Merges consecutive kept atoms into at most `max_blocks` groups, each
    /// carrying its total weight and its weighted mean of `T_meas^2`.
    pub fn compressed(&self, max_blocks: usize) -> Vec<MonitorAtom> {
        let n = self.kept.len();
        if n <= max_blocks || max_blocks == 0 {
            return self.kept.clone();
        }
        let per = n.div_ceil(max_blocks);
        self.kept
            .chunks(per)
            .filter_map(|chunk| {
                let w: f64 = chunk.iter().map(|a| a.weight).sum();
                if w <= 0.0 {
                    return None;
                }
                let m2: f64 = chunk.iter().map(|a| a.weight * a.t_meas * a.t_meas).sum::<f64>() / w;
                Some(MonitorAtom {
                    t_meas: libm::sqrt(m2),
                    weight: w,
                })
            })
            .collect()
    }
}

/// Counts enumerated per side of the Poisson mean, in units of its standard
/// deviation (plus a fixed margin).
const TAIL_SIGMAS: f64 = 12.0;

/// Enumerates monitor outcomes at transmittance `t` up to `n3_max` counts,
/// or over `mean +- 12 (sqrt(mean) + 1)` when `n3_max` is `None`.
pub fn conditional_pdtc_nodes(cfg: &MonitorConfig, t: f64, n3_max: Option<u64>) -> Result<MonitorAtoms> {
    if !(0.0..=1.0).contains(&t) {
        return Err(invalid("T", "must lie in [0,1]"));
    }
    let mean = conditional_count_mean(cfg, t);
    let spread = TAIL_SIGMAS * (libm::sqrt(mean) + 1.0);
    let lo = (mean - spread).max(0.0).floor() as u64;
    let hi = match n3_max {
        Some(h) => h,
        None => libm::ceil(mean + spread) as u64,
    };
    let mut kept = Vec::new();
    let (mut discarded, mut total, mut m2, mut m4) = (0.0, 0.0, 0.0, 0.0);
    for n3 in lo.min(hi)..=hi {
        let p = poisson_pmf(mean, n3);
        let tm2 = t_meas_squared(cfg, n3);
        total += p;
        m2 += p * tm2;
        m4 += p * tm2 * tm2;
        match t_meas_from_counts(cfg, n3) {
            Some(t_meas) if p > 0.0 => kept.push(MonitorAtom { t_meas, weight: p }),
            Some(_) => {}
            None => discarded += p,
        }
    }
    Ok(MonitorAtoms {
        kept,
        discarded,
        tail_deficit: (1.0 - total).max(0.0),
        mean_t_meas_sq: m2,
        mean_t_meas_4: m4,
    })
}
