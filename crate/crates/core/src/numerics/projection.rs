use alloc::vec;
use alloc::vec::Vec;

use super::quadrature::{GaussLegendre, QuadratureRule};
use super::special::laguerre_fill_scaled;
use crate::error::{invalid, Error, Result};

fn accumulate<G: FnMut(f64) -> f64>(
    g: &mut G,
    upper: f64,
    width: f64,
    gl: &GaussLegendre,
    out: &mut [f64],
    lag: &mut [f64],
) -> Result<()> {
    out.iter_mut().for_each(|v| *v = 0.0);
    let panels = libm::ceil(upper / width) as usize;
    let h = upper / panels as f64;
    for p in 0..panels {
        for (b, w) in gl.mapped(p as f64 * h, (p + 1) as f64 * h) {
            let gb = g(b);
            if !gb.is_finite() {
                return Err(Error::NonFiniteIntegrand { x: b });
            }
            let x = b * b;
            let scale = 2.0 * b * w * gb * libm::exp(-x);
            if scale == 0.0 {
                continue;
            }
            laguerre_fill_scaled(x, scale, lag);
            for (o, l) in out.iter_mut().zip(lag.iter()) {
                *o += l;
            }
        }
    }
    Ok(())
}

/// Projects a rotation-invariant normally ordered characteristic function
/// `g(|beta|)` onto the Fock diagonal: `p_n = 2 ∫ b g(b) e^{-b^2} L_n(b^2) db`.
///
/// `decay` bounds the Gaussian decay of `g(b) e^{-b^2}`, i.e. the integrand
/// falls like `e^{-decay b^2}` up to polynomial factors; it must be positive.
/// The sum is done with 16-point Gauss–Legendre panels sized to the
/// oscillation of `L_n`, and repeated on halved panels as an error check.
pub fn laguerre_projection<G: FnMut(f64) -> f64>(
    mut g: G,
    n_max: usize,
    decay: f64,
    rule: &QuadratureRule,
) -> Result<Vec<f64>> {
    if !(decay > 0.0 && decay.is_finite()) {
        return Err(invalid("decay", "must be finite and > 0"));
    }
    let nf = n_max as f64;
    // Smallest cut-off where the polynomially weighted Gaussian tail is negligible.
    let ln_poly = |b: f64| (2.0 * nf + 6.0) * libm::log(b.max(1.0)) - libm::lgamma(nf + 1.0);
    let mut upper = libm::sqrt(4.0 * nf + 10.0).max(4.0);
    while -decay * upper * upper + ln_poly(upper) > -50.0 {
        upper += 0.5;
    }
    let width = (1.5 / libm::sqrt(nf + 1.0)).min(0.5);
    let gl = GaussLegendre::new(16);
    let mut lag = vec![0.0; n_max + 1];
    let mut coarse = vec![0.0; n_max + 1];
    let mut fine = vec![0.0; n_max + 1];
    accumulate(&mut g, upper, width, &gl, &mut coarse, &mut lag)?;
    accumulate(&mut g, upper, 0.5 * width, &gl, &mut fine, &mut lag)?;
    let mut worst = 0.0f64;
    let mut worst_at = 0;
    for (n, (c, f)) in coarse.iter().zip(&fine).enumerate() {
        let excess = (c - f).abs() / rule.tolerance_for(*f);
        if excess > worst {
            worst = excess;
            worst_at = n;
        }
    }
    if worst > 1.0 {
        return Err(Error::Quadrature {
            estimate: fine[worst_at],
            abs_err: (coarse[worst_at] - fine[worst_at]).abs(),
            subdivisions: libm::ceil(2.0 * upper / width) as usize,
        });
    }
    Ok(fine)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_projects_to_ground_state() {
        let p = laguerre_projection(|_| 1.0, 30, 1.0, &QuadratureRule::default()).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert!(p[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn thermal_projects_to_geometric_law() {
        let nbar: f64 = 2.3;
        let p = laguerre_projection(
            |b| libm::exp(-nbar * b * b),
            80,
            1.0 + nbar,
            &QuadratureRule::default(),
        )
        .unwrap();
        for (n, v) in p.iter().enumerate() {
            let exact = libm::pow(nbar, n as f64) / libm::pow(1.0 + nbar, n as f64 + 1.0);
            assert!((v - exact).abs() < 1e-11, "n = {n}: {v} vs {exact}");
        }
    }

    #[test]
    fn rejects_non_positive_decay() {
        assert!(laguerre_projection(|_| 1.0, 3, 0.0, &QuadratureRule::default()).is_err());
    }
}
