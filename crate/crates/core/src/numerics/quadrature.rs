use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{invalid, Error, Result};

/// Tolerances and work limit for adaptive integration.
///
/// An integral is accepted when its error bound is at most
/// `max(absolute_tolerance, relative_tolerance * |value|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureRule {
    pub absolute_tolerance: f64,
    pub relative_tolerance: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self {
            absolute_tolerance: 1e-10,
            relative_tolerance: 1e-8,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureRule {
    pub fn new(absolute_tolerance: f64, relative_tolerance: f64, max_subdivisions: usize) -> Result<Self> {
        if !(absolute_tolerance > 0.0 && absolute_tolerance.is_finite()) {
            return Err(invalid("absolute_tolerance", "must be finite and > 0"));
        }
        if !(relative_tolerance > 0.0 && relative_tolerance.is_finite()) {
            return Err(invalid("relative_tolerance", "must be finite and > 0"));
        }
        if max_subdivisions == 0 {
            return Err(invalid("max_subdivisions", "must be >= 1"));
        }
        Ok(Self {
            absolute_tolerance,
            relative_tolerance,
            max_subdivisions,
        })
    }

    pub fn tolerance_for(&self, value: f64) -> f64 {
        self.absolute_tolerance.max(self.relative_tolerance * value.abs())
    }
}

/// An integral value together with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_err: f64,
}

impl core::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            abs_err: self.abs_err + rhs.abs_err,
        }
    }
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

#[derive(Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

fn eval<F: FnMut(f64) -> f64>(f: &mut F, x: f64) -> Result<f64> {
    let y = f(x);
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::NonFiniteIntegrand { x })
    }
}

fn gk21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = eval(f, center)?;
    let mut gauss = 0.0;
    let mut kronrod = fc * WGK[10];
    let mut res_abs = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = eval(f, center - dx)?;
        let f2 = eval(f, center + dx)?;
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        gauss += WG[j] * (f1 + f2);
        kronrod += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = eval(f, center - dx)?;
        let f2 = eval(f, center + dx)?;
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        kronrod += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }
    let mean = 0.5 * kronrod;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let abs_half = half.abs();
    let value = kronrod * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        let r = 200.0 * err / res_asc;
        err = res_asc * (r * libm::sqrt(r)).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment { a, b, value, err })
}

fn adaptive<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, rule: &QuadratureRule) -> Result<Estimate> {
    let mut segments: Vec<Segment> = Vec::with_capacity(64);
    segments.push(gk21(f, a, b)?);
    loop {
        let value: f64 = segments.iter().map(|s| s.value).sum();
        let abs_err: f64 = segments.iter().map(|s| s.err).sum();
        if abs_err <= rule.tolerance_for(value) {
            return Ok(Estimate { value, abs_err });
        }
        let fail = Error::Quadrature {
            estimate: value,
            abs_err,
            subdivisions: segments.len(),
        };
        if segments.len() >= rule.max_subdivisions {
            return Err(fail);
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if !(s.a < mid && mid < s.b) {
            return Err(fail);
        }
        segments.push(gk21(f, s.a, mid)?);
        segments.push(gk21(f, mid, s.b)?);
    }
}

/// Adaptive Gauss–Kronrod (10/21) integration of `f` over `[a, b]`.
///
/// Either limit may be infinite; semi-infinite ranges use `x = a + t/(1-t)`
/// and the full line uses `x = t/(1-t^2)`. Endpoints are never evaluated, so
/// integrable endpoint singularities are allowed. When the error bound cannot
/// be brought under tolerance within `max_subdivisions`, the best estimate is
/// returned inside [`Error::Quadrature`].
pub fn integrate_1d<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rule: &QuadratureRule) -> Result<Estimate> {
    if a.is_nan() || b.is_nan() || a > b {
        return Err(invalid("integration limits", "need a <= b"));
    }
    if a == b {
        return Ok(Estimate { value: 0.0, abs_err: 0.0 });
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive(&mut f, a, b, rule),
        (true, false) => {
            let mut g = |t: f64| {
                let s = 1.0 - t;
                f(a + t / s) / (s * s)
            };
            adaptive(&mut g, 0.0, 1.0, rule)
        }
        (false, true) => {
            let mut g = |t: f64| f(b - (1.0 - t) / t) / (t * t);
            adaptive(&mut g, 0.0, 1.0, rule)
        }
        (false, false) => {
            let mut g = |t: f64| {
                let s = 1.0 - t * t;
                f(t / s) * (1.0 + t * t) / (s * s)
            };
            adaptive(&mut g, -1.0, 1.0, rule)
        }
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = libm::cos(PI * (i as f64 + 0.75) / (nf + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            dp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z_prev = z;
            z = z_prev - p1 / dp;
            if (z - z_prev).abs() <= 4.0 * f64::EPSILON {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// A cached Gauss–Legendre rule that can be mapped onto any finite interval.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(order: usize) -> Self {
        let (nodes, weights) = gauss_legendre(order);
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// `(x, w)` pairs of the rule mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (c + h * x, h * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_on_unit_interval() {
        let e = integrate_1d(|_| 1.0, 0.0, 1.0, &QuadratureRule::default()).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rayleigh_normalization_on_half_line() {
        let e = integrate_1d(|u| u * libm::exp(-u * u / 2.0), 0.0, f64::INFINITY, &QuadratureRule::default())
            .unwrap();
        assert!((e.value - 1.0).abs() < 1e-10, "{e:?}");
    }

    #[test]
    fn gaussian_over_full_line() {
        let e = integrate_1d(
            |x| libm::exp(-x * x) / libm::sqrt(PI),
            f64::NEG_INFINITY,
            f64::INFINITY,
            &QuadratureRule::default(),
        )
        .unwrap();
        assert!((e.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn polynomials_up_to_degree_31_are_exact() {
        for deg in 0..=31 {
            let e = integrate_1d(|x| libm::pow(x, deg as f64), 0.0, 1.0, &QuadratureRule::default()).unwrap();
            let exact = 1.0 / (deg as f64 + 1.0);
            assert!((e.value - exact).abs() < 1e-12, "degree {deg}: {}", e.value);
        }
    }

    #[test]
    fn endpoint_singularity_is_integrable() {
        let e = integrate_1d(|x| 1.0 / libm::sqrt(x), 0.0, 1.0, &QuadratureRule::default()).unwrap();
        assert!((e.value - 2.0).abs() < 1e-8, "{e:?}");
    }

    #[test]
    fn non_convergence_carries_best_estimate() {
        let rule = QuadratureRule::new(1e-14, 1e-14, 3).unwrap();
        let r = integrate_1d(|x| libm::sin(50.0 * x) * libm::exp(x), 0.0, 10.0, &rule);
        match r {
            Err(Error::Quadrature { estimate, abs_err, subdivisions }) => {
                assert!(estimate.is_finite() && abs_err > 0.0);
                assert_eq!(subdivisions, 3);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let r = integrate_1d(|x| if x > 0.5 { f64::NAN } else { x }, 0.0, 1.0, &QuadratureRule::default());
        assert!(matches!(r, Err(Error::NonFiniteIntegrand { .. })));
    }

    #[test]
    fn rejects_reversed_limits() {
        assert!(integrate_1d(|x| x, 1.0, 0.0, &QuadratureRule::default()).is_err());
        assert!(QuadratureRule::new(0.0, 1e-8, 10).is_err());
    }

    #[test]
    fn gauss_legendre_weights_and_exactness() {
        for n in [1usize, 2, 5, 16, 33, 96] {
            let (x, w) = gauss_legendre(n);
            let sum: f64 = w.iter().sum();
            assert!((sum - 2.0).abs() < 1e-13, "n = {n}");
            assert!(x.windows(2).all(|p| p[0] < p[1]));
            let deg = 2 * n - 1;
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * libm::pow(*x, deg as f64 - 1.0)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((q - exact).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn mapped_rule_integrates_on_interval() {
        let gl = GaussLegendre::new(8);
        let v = gl.integrate(|x| x * x * x, 1.0, 3.0);
        assert!((v - 20.0).abs() < 1e-12);
    }
}
