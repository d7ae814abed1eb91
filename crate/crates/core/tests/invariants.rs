use proptest::prelude::*;
use turbhd_core::channel::{conditional_channel, NoisyStateView, Scheme, SchemeConfig};
use turbhd_core::counts::{
    auto_range, gaussian_approx_pmf, skellam_pmf_coherent, CountDiffDistribution, DetectorPair, LocalOscillator,
};
use turbhd_core::covariance::{
    noisy_cov_fixed_reference, noisy_cov_fixed_reference_from_kernel, noisy_cov_monitored, uncertainty_product, ChannelMoments, CovarianceState,
};
use turbhd_core::monitor::MonitorConfig;
use turbhd_core::numerics::bessel_i;
use turbhd_core::pdtc::TransmittanceModel;
use turbhd_core::states::StateModel;
use turbhd_core::Complex64;

fn monitor(r: f64, t_min: f64) -> MonitorConfig {
    MonitorConfig {
        eta3: 0.9,
        noise3: 0.0,
        bs_transmittance: 0.5f64.sqrt(),
        bs_reflectance: 0.5f64.sqrt(),
        lo_amplitude: r,
        t_min,
    }
}

fn scheme_config(kind: u8, eta: f64, noise: f64, t_ref: f64) -> SchemeConfig {
    let r = 15.0;
    SchemeConfig {
        scheme: match kind {
            0 => Scheme::FixedReference { t_ref },
            1 => Scheme::MonitoredIdeal(monitor(r, 0.05)),
            _ => Scheme::MonitoredShotNoise(monitor(r, 0.05)),
        },
        det: DetectorPair { efficiency: eta, noise_counts: noise },
        lo: LocalOscillator { amplitude: r, phase: 0.0 },
    }
}

fn state_strategy() -> impl Strategy<Value = StateModel> {
    let c = (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| Complex64::new(a, b));
    prop_oneof![
        c.clone().prop_map(StateModel::Coherent),
        (0.0..3.0f64).prop_map(StateModel::Thermal),
        (0.01..3.0f64).prop_map(StateModel::Spats),
        ((0.01..3.0f64), c).prop_map(|(nbar, gamma)| StateModel::DisplacedSpats { nbar, gamma }),
        (0.0..10.0f64, 0.0..3.2f64)
            .prop_map(|(db, phi)| StateModel::Gaussian(CovarianceState::squeezed_vacuum(db, phi).unwrap())),
    ]
}

/// Random physical covariance: a rotated squeezed thermal state with a mean.
fn physical_cov() -> impl Strategy<Value = CovarianceState> {
    (0.0..2.0f64, 0.0..12.0f64, 0.0..3.2f64, -3.0..3.0f64, -3.0..3.0f64).prop_map(|(nbar, db, phi, m1, m2)| {
        let sq = CovarianceState::squeezed_vacuum(db, phi).unwrap().full_covariance();
        let scale = 1.0 + 2.0 * nbar;
        let ncov = [
            [scale * sq[0][0] - 0.5, scale * sq[0][1]],
            [scale * sq[1][0], scale * sq[1][1] - 0.5],
        ];
        CovarianceState::new([m1, m2], ncov).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bessel_recurrence(n in 1usize..60, x in 0.05..80.0f64) {
        let lo = bessel_i(n - 1, x).unwrap();
        let mid = bessel_i(n, x).unwrap();
        let hi = bessel_i(n + 1, x).unwrap();
        let rhs = 2.0 * n as f64 / x * mid;
        prop_assert!(((lo - hi) - rhs).abs() <= 1e-10 * lo.abs().max(rhs.abs()));
    }

    #[test]
    fn state_charfn_is_hermitian(state in state_strategy(), re in -3.0..3.0f64, im in -3.0..3.0f64) {
        let b = Complex64::new(re, im);
        let d = state.charfn_n(-b) - state.charfn_n(b).conj();
        prop_assert!(d.norm() <= 1e-12 * (1.0 + state.charfn_n(b).norm()));
        prop_assert!((state.charfn_n(Complex64::new(0.0, 0.0)) - 1.0).norm() <= 1e-15);
    }

    #[test]
    fn moments_decrease_with_order(w in 0.5..2.0f64, sigma in 0.05..5.0f64) {
        let m = TransmittanceModel::beam_wandering(1.0, w, sigma).unwrap();
        let ps = [0.5, 1.0, 2.0, 3.0, 4.0];
        let v: Vec<f64> = ps.iter().map(|&p| m.moment(p).unwrap().finite(p).unwrap()).collect();
        prop_assert!(v.windows(2).all(|w| w[1] < w[0]), "{v:?}");
        let cm = ChannelMoments::from_pdtc(&m).unwrap();
        prop_assert!(cm.m4 >= cm.m2 * cm.m2);
    }

    #[test]
    fn noisy_charfn_traces_and_hermiticity(
        state in state_strategy(),
        kind in 0u8..3,
        eta in 0.2..1.0f64,
        noise in 0.0..1.0f64,
        sigma in 0.2..3.0f64,
        re in -2.0..2.0f64,
        im in -2.0..2.0f64,
    ) {
        let pdtc = TransmittanceModel::beam_wandering(1.0, 0.9, sigma).unwrap();
        let t_ref = pdtc.moment(2.0).unwrap().finite(2.0).unwrap().sqrt();
        let view = NoisyStateView::new(state, scheme_config(kind, eta, noise, t_ref), pdtc).unwrap();
        prop_assert_eq!(view.noisy_charfn(Complex64::new(0.0, 0.0)), Complex64::new(1.0, 0.0));
        let b = Complex64::new(re, im);
        let d = view.noisy_charfn(-b) - view.noisy_charfn(b).conj();
        prop_assert!(d.norm() <= 1e-12);
    }

    #[test]
    fn monitored_fock_law_is_a_distribution(nbar in 0.05..2.5f64, sigma in 0.2..12.0f64, eta in 0.2..1.0f64) {
        let pdtc = TransmittanceModel::beam_wandering(1.0, 0.9, sigma).unwrap();
        let view = NoisyStateView::new(StateModel::Spats(nbar), scheme_config(1, eta, 0.0, 1.0), pdtc).unwrap();
        let p = view.noisy_fock_distribution(60).unwrap();
        prop_assert!(p.iter().all(|&x| x >= -1e-8), "{p:?}");
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn energy_balance(nbar in 0.0..2.5f64, sigma in 0.2..12.0f64, eta in 0.2..1.0f64) {
        let pdtc = TransmittanceModel::beam_wandering(1.0, 0.9, sigma).unwrap();
        let kept = TransmittanceModel::truncated(pdtc.clone(), 0.05).unwrap();
        let m2 = kept.moment(2.0).unwrap().finite(2.0).unwrap();
        for state in [StateModel::Thermal(nbar), StateModel::Spats(nbar.max(0.01))] {
            let expected = eta * m2 * state.mean_photon_number();
            let view = NoisyStateView::new(state, scheme_config(1, eta, 0.0, 1.0), pdtc.clone()).unwrap();
            prop_assert!((view.mean_photon_number() - expected).abs() <= 1e-6 * expected.max(1e-3));
        }
    }

    #[test]
    fn fixed_reference_at_true_transmittance_is_monitored(t in 0.05..1.0f64, eta in 0.1..1.0f64, noise in 0.0..2.0f64) {
        let fixed = conditional_channel(&scheme_config(0, eta, noise, t), t).unwrap();
        let mut ideal = scheme_config(1, eta, noise, t);
        // The monitored scheme sees only the reflected share of the oscillator.
        ideal.lo.amplitude /= 0.5f64.sqrt();
        if let Scheme::MonitoredIdeal(m) = &mut ideal.scheme {
            m.lo_amplitude = ideal.lo.amplitude;
        }
        let mon = conditional_channel(&ideal, t).unwrap();
        prop_assert!((fixed.amplitude_scale - mon.amplitude_scale).abs() <= 1e-15);
        prop_assert!((fixed.laplace_coeff - mon.laplace_coeff).abs() <= 1e-12 * mon.laplace_coeff.abs().max(1e-12));
    }

    #[test]
    fn phase_flip_mirrors_counts(re in -2.0..2.0f64, im in -2.0..2.0f64, phi in 0.0..6.3f64, r in 1.0..15.0f64, noise in 0.0..1.0f64) {
        let alpha = Complex64::new(re, im);
        let det = DetectorPair { efficiency: 0.7, noise_counts: noise };
        let lo = LocalOscillator { amplitude: r, phase: phi };
        let flipped = LocalOscillator { amplitude: r, phase: phi + std::f64::consts::PI };
        for dn in -25..=25 {
            let a = skellam_pmf_coherent(alpha, 0.8, &lo, &det, dn).unwrap();
            let b = skellam_pmf_coherent(alpha, 0.8, &flipped, &det, -dn).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn skellam_normalizes_on_auto_range(re in -3.0..3.0f64, im in -3.0..3.0f64, r in 0.5..30.0f64, t in 0.1..1.0f64, noise in 0.0..3.0f64) {
        let alpha = Complex64::new(re, im);
        let det = DetectorPair { efficiency: 0.8, noise_counts: noise };
        let lo = LocalOscillator { amplitude: r, phase: 0.4 };
        let (a, b) = auto_range(alpha.norm(), t, &lo, &det);
        let total: f64 = (a..=b).map(|k| skellam_pmf_coherent(alpha, t, &lo, &det, k).unwrap()).sum();
        prop_assert!((1.0 - total).abs() < 1e-10);
    }

    #[test]
    fn gaussian_approximation_improves_with_oscillator(re in -1.5..1.5f64, im in -1.5..1.5f64) {
        let alpha = Complex64::new(re, im);
        let det = DetectorPair { efficiency: 1.0, noise_counts: 0.0 };
        let mut last = f64::INFINITY;
        for r in [5.0, 10.0, 20.0, 50.0] {
            let lo = LocalOscillator { amplitude: r, phase: 0.0 };
            let (a, b) = auto_range(alpha.norm(), 1.0, &lo, &det);
            let exact: Vec<f64> = (a..=b).map(|k| skellam_pmf_coherent(alpha, 1.0, &lo, &det, k).unwrap()).collect();
            let approx: Vec<f64> = (a..=b).map(|k| gaussian_approx_pmf(alpha, 1.0, &lo, &det, k).unwrap()).collect();
            let d = CountDiffDistribution::new(a, exact).sup_distance(&CountDiffDistribution::new(a, approx));
            prop_assert!(d < last, "r={r}: {d} after {last}");
            last = d;
        }
    }

    #[test]
    fn monitored_map_preserves_physicality(input in physical_cov(), sigma in 0.2..40.0f64, eta in 0.05..1.0f64) {
        let pdtc = TransmittanceModel::beam_wandering(1.0, 0.95, sigma).unwrap();
        let m = ChannelMoments::from_pdtc(&pdtc).unwrap();
        let out = noisy_cov_monitored(&input, &m, eta, 0.0, 0.5f64.sqrt(), 10.0).unwrap();
        prop_assert!(out.is_physical(), "{out:?}");
        prop_assert!(uncertainty_product(&out) >= 0.25 - 1e-12);
    }

    #[test]
    fn schemes_agree_without_fading(input in physical_cov(), t in 0.05..1.0f64, eta in 0.05..1.0f64) {
        let m = ChannelMoments::from_pdtc(&TransmittanceModel::deterministic(t).unwrap()).unwrap();
        prop_assert!((m.m2 - t * t).abs() <= 1e-12 && (m.m4 - t.powi(4)).abs() <= 1e-12);
        let a = noisy_cov_monitored(&input, &m, eta, 0.0, 0.5f64.sqrt(), 10.0).unwrap();
        let b = noisy_cov_fixed_reference(&input, &m, eta, 0.0, 10.0, t).unwrap();
        let k = noisy_cov_fixed_reference_from_kernel(&input, &m, eta, 0.0, 10.0, t).unwrap();
        for (x, y) in a.mean().iter().zip(b.mean().iter()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        for (x, y) in a.ncov().iter().flatten().zip(k.ncov().iter().flatten()) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
        // The published closed form carries an extra (T - 1)/2 on the diagonal.
        prop_assert!((b.ncov()[0][0] - a.ncov()[0][0] - 0.5 * (t - 1.0)).abs() <= 1e-12 * (1.0 + a.ncov()[0][0].abs()));
    }

    #[test]
    fn isotropic_product_is_rotation_invariant(nbar in 0.0..5.0f64, phi in 0.0..6.3f64) {
        let s = CovarianceState::thermal(nbar).unwrap();
        let (_, v1) = s.quadrature_moments(phi);
        let (_, v2) = s.quadrature_moments(phi + std::f64::consts::FRAC_PI_2);
        prop_assert!((v1 * v2 - uncertainty_product(&s)).abs() <= 1e-12 * (1.0 + v1 * v2));
    }
}
