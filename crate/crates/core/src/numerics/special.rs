use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Largest order accepted by [`bessel_i`] and [`bessel_i_scaled`].
pub const MAX_BESSEL_ORDER: usize = 1000;
/// Largest order accepted by [`laguerre`].
pub const MAX_LAGUERRE_ORDER: usize = 1000;

const LN_MAX: f64 = 709.782_712_893_384;

fn check_argument(x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(invalid("x", "must be finite and >= 0"))
    }
}

fn check_order(order: usize, max: usize) -> Result<()> {
    if order > max {
        Err(Error::OrderOutOfRange { order, max })
    } else {
        Ok(())
    }
}

fn i0_scaled(x: f64) -> f64 {
    if x <= 20.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while term > 1e-17 * sum {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        sum * libm::exp(-x)
    } else {
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            let m = 2.0 * k - 1.0;
            term *= m * m / (8.0 * k * x);
            if term < 1e-17 {
                break;
            }
            sum += term;
            k += 1.0;
        }
        sum / libm::sqrt(2.0 * PI * x)
    }
}

// I_{n+1}(x) / I_n(x) from its continued fraction (modified Lentz).
fn ratio_up(n: usize, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = TINY;
    let mut c = f;
    let mut d = 0.0;
    for j in 1..2_000_000usize {
        let b = 2.0 * (n + j) as f64 / x;
        d += b;
        if d == 0.0 {
            d = TINY;
        }
        c = b + 1.0 / c;
        if c == 0.0 {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    f
}

/// `ln(e^{-x} I_k(x))` for `k = 0..=n_max`, by backward recurrence normalised
/// to `I_0`. Any order is accepted; `x = 0` yields `-inf` for `k > 0`.
pub fn ln_bessel_i_scaled_seq(n_max: usize, x: f64) -> Result<Vec<f64>> {
    check_argument(x)?;
    let mut out = vec![f64::NEG_INFINITY; n_max + 1];
    if x == 0.0 {
        out[0] = 0.0;
        return Ok(out);
    }
    if x < 1e-50 {
        let ln_half = libm::log(0.5 * x);
        for (k, v) in out.iter_mut().enumerate() {
            *v = k as f64 * ln_half - ln_factorial(k as u64) - x;
        }
        return Ok(out);
    }
    let mut f_hi = ratio_up(n_max, x);
    let mut f = 1.0;
    let mut log_scale = 0.0;
    out[n_max] = 0.0;
    for k in (1..=n_max).rev() {
        let f_lo = (2.0 * k as f64 / x) * f + f_hi;
        f_hi = f;
        f = f_lo;
        if f > 1e200 {
            f *= 1e-200;
            f_hi *= 1e-200;
            log_scale += 200.0 * core::f64::consts::LN_10;
        }
        out[k - 1] = libm::log(f) + log_scale;
    }
    let shift = libm::log(i0_scaled(x)) - out[0];
    for v in out.iter_mut() {
        *v += shift;
    }
    Ok(out)
}

/// Exponentially scaled modified Bessel function `e^{-x} I_n(x)`.
pub fn bessel_i_scaled(n: usize, x: f64) -> Result<f64> {
    check_order(n, MAX_BESSEL_ORDER)?;
    check_argument(x)?;
    if n == 0 {
        return Ok(i0_scaled(x));
    }
    Ok(libm::exp(ln_bessel_i_scaled_seq(n, x)?[n]))
}

/// Modified Bessel function of the first kind `I_n(x)`, `n <= 1000`.
///
/// Fails with [`Error::BesselOverflow`] once the value exceeds the `f64` range
/// (around `x = 713` for `n = 0`); use [`bessel_i_scaled`] there.
pub fn bessel_i(n: usize, x: f64) -> Result<f64> {
    check_order(n, MAX_BESSEL_ORDER)?;
    check_argument(x)?;
    let ln_scaled = if n == 0 {
        libm::log(i0_scaled(x))
    } else {
        ln_bessel_i_scaled_seq(n, x)?[n]
    };
    if ln_scaled + x >= LN_MAX {
        return Err(Error::BesselOverflow { order: n, x });
    }
    Ok(libm::exp(ln_scaled + x))
}

/// Fills `out[k] = scale * L_k(x)` by the three-term recurrence.
pub(crate) fn laguerre_fill_scaled(x: f64, scale: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = scale;
    if out.len() > 1 {
        out[1] = scale * (1.0 - x);
    }
    for n in 1..out.len() - 1 {
        let nf = n as f64;
        out[n + 1] = ((2.0 * nf + 1.0 - x) * out[n] - nf * out[n - 1]) / (nf + 1.0);
    }
}

/// Fills `out[k] = L_k(x)` for `k < out.len()`.
pub fn laguerre_fill(x: f64, out: &mut [f64]) {
    laguerre_fill_scaled(x, 1.0, out);
}

/// Laguerre polynomial `L_n(x)` for `x >= 0`, `n <= 1000`.
pub fn laguerre(n: usize, x: f64) -> Result<f64> {
    check_order(n, MAX_LAGUERRE_ORDER)?;
    check_argument(x)?;
    let mut buf = vec![0.0; n + 1];
    laguerre_fill(x, &mut buf);
    let v = buf[n];
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid("x", "L_n(x) exceeds the f64 range"))
    }
}

pub fn ln_factorial(k: u64) -> f64 {
    libm::lgamma(k as f64 + 1.0)
}

/// Poisson probability of `k` events at the given mean.
pub fn poisson_pmf(mean: f64, k: u64) -> f64 {
    if mean <= 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    libm::exp(k as f64 * libm::log(mean) - mean - ln_factorial(k))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn series_i(n: usize, x: f64) -> f64 {
        let mut term = libm::pow(0.5 * x, n as f64) / libm::exp(ln_factorial(n as u64));
        let mut sum = term;
        for k in 1..200 {
            term *= 0.25 * x * x / (k as f64 * (k + n) as f64);
            sum += term;
        }
        sum
    }

    #[test]
    fn bessel_matches_power_series() {
        assert!(rel(bessel_i(0, 1.0).unwrap(), 1.266_065_877_752_008_3) < 1e-14);
        for n in [0usize, 1, 2, 5, 12] {
            for x in [0.1, 1.0, 4.5, 10.0, 19.9, 20.1, 30.0] {
                let v = bessel_i(n, x).unwrap();
                assert!(rel(v, series_i(n, x)) < 1e-12, "n={n} x={x}: {v}");
            }
        }
    }

    #[test]
    fn bessel_frozen_values() {
        assert!(rel(bessel_i(3, 0.5).unwrap(), 0.002_645_111_968_990_285_9) < 1e-13);
        assert!(rel(bessel_i_scaled(50, 200.0).unwrap(), 5.541_017_621_774_841e-5) < 1e-12);
        assert!(rel(bessel_i_scaled(1000, 5000.0).unwrap(), 2.889_259_263_342_314e-46) < 1e-11);
        assert!(rel(bessel_i(7, 1e-3).unwrap(), 1.550_099_254_789_807_4e-27) < 1e-13);
        assert!(rel(bessel_i(0, 700.0).unwrap(), 1.529_593_347_671_873_7e302) < 1e-12);
    }

    #[test]
    fn bessel_range_errors() {
        assert!(matches!(bessel_i(0, 800.0), Err(Error::BesselOverflow { .. })));
        assert!(matches!(bessel_i(1001, 1.0), Err(Error::OrderOutOfRange { .. })));
        assert!(bessel_i(1, -1.0).is_err());
        assert_eq!(bessel_i(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_i(4, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn bessel_recurrence_identity() {
        // I_{n-1} - I_{n+1} = (2n/x) I_n
        let x = 37.0;
        let seq = ln_bessel_i_scaled_seq(40, x).unwrap();
        for n in 1..40 {
            let lhs = libm::exp(seq[n - 1]) - libm::exp(seq[n + 1]);
            let rhs = 2.0 * n as f64 / x * libm::exp(seq[n]);
            assert!(rel(lhs, rhs) < 1e-12);
        }
    }

    #[test]
    fn laguerre_explicit_forms() {
        for x in [0.0, 0.3, 1.0, 2.7, 9.0] {
            let l2 = (x * x - 4.0 * x + 2.0) / 2.0;
            let l3 = (-x * x * x + 9.0 * x * x - 18.0 * x + 6.0) / 6.0;
            assert!((laguerre(0, x).unwrap() - 1.0).abs() < 1e-14);
            assert!((laguerre(1, x).unwrap() - (1.0 - x)).abs() < 1e-14);
            assert!((laguerre(2, x).unwrap() - l2).abs() < 1e-12);
            assert!((laguerre(3, x).unwrap() - l3).abs() < 1e-12);
        }
        assert!((laguerre(5, 1.0).unwrap() + 7.0 / 15.0).abs() < 1e-14);
        assert!(rel(laguerre(100, 300.0).unwrap(), 4.574_215_115_322_967_6e63) < 1e-10);
        assert!(laguerre(1001, 1.0).is_err());
    }

    #[test]
    fn poisson_sums_to_one() {
        let s: f64 = (0..200).map(|k| poisson_pmf(17.5, k)).sum();
        assert!((s - 1.0).abs() < 1e-13);
        assert_eq!(poisson_pmf(0.0, 0), 1.0);
        assert_eq!(poisson_pmf(0.0, 3), 0.0);
    }
}
