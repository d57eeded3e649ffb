mod common;

use std::f64::consts::PI;

use proptest::prelude::*;

use hfbeat::beat_model::{polarization_from_g2, smear_of_phase, smear_of_phase_derivative, BeatModel};
use hfbeat::hyperfine::BeatTemplate;
use hfbeat::{
    beat_spectrum, g2, polarization_cs, polarization_general, simulate, smear_factor, DetectionGeometry, Error,
    HalfInt, HyperfineSystem, PulseModel,
};

fn cs(a: f64, b: f64) -> hfbeat::BeatSpectrum {
    beat_spectrum(&HyperfineSystem::cesium_p32(a, b))
}

#[test]
fn alignment_starts_at_one_and_polarization_at_one_seventh() {
    let s = cs(7.42, 0.14);
    let p = PulseModel::default();
    assert!((g2(&s, &p, 0.0) - 1.0).abs() < 1e-12);
    assert!((polarization_cs(&s, &p, 0.0) - 1.0 / 7.0).abs() < 1e-12);
}

#[test]
fn printed_expansion_at_ten_ns() {
    let s = cs(7.42, 0.14);
    let ours = g2(&s, &PulseModel::default(), 10.0);
    let printed = common::printed_g2(7.42, 0.14, 10.0);
    assert!((ours - printed).abs() < 1e-4, "{ours} vs {printed}");
}

#[test]
fn matches_the_exact_oracle_with_smearing() {
    let s = cs(7.42, 0.14);
    for &(dt, w) in &[(0.0, 0.0), (0.02, 2.4), (-0.7, 4.5), (0.3, 0.01)] {
        let p = PulseModel::new(w, dt).unwrap();
        for k in 0..120 {
            let t = k as f64;
            let want = common::exact_g2(7.42, 0.14, dt, w, t);
            assert!((g2(&s, &p, t) - want).abs() < 1e-13, "dt = {dt}, W = {w}, t = {t}");
        }
    }
}

#[test]
fn table_two_curve_changes_sign_between_rows_five_and_seven() {
    let s = cs(7.42, 0.14);
    let p = PulseModel::new(2.4, 0.02).unwrap();
    assert!(polarization_cs(&s, &p, 4.1) > 0.0);
    assert!(polarization_cs(&s, &p, 8.1) < 0.0);
}

#[test]
fn smear_limits() {
    assert!((smear_of_phase(PI) - 4.0 / (PI * PI)).abs() < 1e-12);
    assert_eq!(smear_of_phase(0.0), 1.0);
    for x in [1e-9, 5e-7, 9.99e-7, 1e-6, 1.0001e-6, 2e-6, 1e-5] {
        let direct = if x < 1e-4 { 1.0 - x * x / 12.0 } else { 2.0 * (1.0 - f64::cos(x)) / (x * x) };
        assert!((smear_of_phase(x) - direct).abs() < 1e-10, "x = {x}");
    }
    // first zero of the rectangular-pulse factor
    assert!(smear_of_phase(2.0 * PI).abs() < 1e-15);
    let nu = 37.2;
    let w = 0.5 / (1e-3 * nu);
    assert!((smear_factor(nu, w) - 4.0 / (PI * PI)).abs() < 1e-12);
}

#[test]
fn smear_derivative_matches_differences() {
    for x in [1e-4, 5e-3, 9.9e-3, 1.01e-2, 0.3, 1.0, 3.0, 7.0] {
        let h = 1e-6 * (1.0 + x);
        let num = (smear_of_phase(x + h) - smear_of_phase(x - h)) / (2.0 * h);
        assert!((smear_of_phase_derivative(x) - num).abs() < 1e-8, "x = {x}");
    }
}

#[test]
fn general_and_cs_polarization_forms_agree() {
    let geom = DetectionGeometry::default();
    let mut rng_state = 0x2545F4914F6CDD1Du64;
    for _ in 0..100 {
        rng_state ^= rng_state << 13;
        rng_state ^= rng_state >> 7;
        rng_state ^= rng_state << 17;
        let g = (rng_state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0;
        let general = polarization_general(&geom, geom.a0 * g).unwrap();
        assert!((general - polarization_from_g2(g)).abs() < 1e-14);
    }
}

#[test]
fn geometry_validation() {
    assert!(matches!(DetectionGeometry::new(2.0, 2.0), Err(Error::Domain(_))));
    assert!(DetectionGeometry::new(-0.25, -0.8).is_ok());
    assert!(PulseModel::new(-0.1, 0.0).is_err());
    assert!(PulseModel::new(1.0, f64::NAN).is_err());
}

#[test]
fn long_time_average_is_the_constant() {
    let s = cs(7.42, 0.14);
    let p = PulseModel::default();
    let n = 200_000;
    let t_end = 20_000.0;
    let mean = (0..n).map(|k| g2(&s, &p, t_end * k as f64 / n as f64)).sum::<f64>() / n as f64;
    assert!((mean - s.constant).abs() < 2e-3, "{mean} vs {}", s.constant);
}

#[test]
fn simulate_is_reproducible_and_noise_free_by_default() {
    let sys = HyperfineSystem::cesium_p32(7.42, 0.14);
    let p = PulseModel::new(2.4, 0.02).unwrap();
    let times: Vec<f64> = (0..50).map(|k| k as f64 * 2.0).collect();
    let a = simulate(&sys, &p, &times, Some(0.01), Some(9)).unwrap();
    let b = simulate(&sys, &p, &times, Some(0.01), Some(9)).unwrap();
    assert_eq!(a, b);
    let c = simulate(&sys, &p, &times, Some(0.01), Some(10)).unwrap();
    assert_ne!(a, c);

    let clean = simulate(&sys, &p, &times, None, None).unwrap();
    let s = beat_spectrum(&sys);
    for pt in &clean {
        assert!((pt.pl - polarization_cs(&s, &p, pt.t)).abs() < 1e-15);
        assert_eq!(pt.sigma, None);
    }
    assert!(simulate(&sys, &p, &[], None, None).is_err());
    assert!(simulate(&sys, &p, &times, Some(-1.0), None).is_err());
}

#[test]
fn model_gradient_matches_differences() {
    let model = BeatModel::new(BeatTemplate::new(HalfInt::from_twice(7), HalfInt::from_twice(3)), DetectionGeometry::default());
    let p = [7.3, 0.4, 0.2, 1.7];
    for t in [0.0, 3.3, 17.0, 80.0] {
        let mp = model.polarization_with_gradient(&p, t);
        assert!((mp.value - model.polarization(&p, t)).abs() < 1e-15);
        for k in 0..4 {
            let h = 1e-6;
            let (mut up, mut dn) = (p, p);
            up[k] += h;
            dn[k] -= h;
            let num = (model.polarization(&up, t) - model.polarization(&dn, t)) / (2.0 * h);
            assert!((mp.gradient[k] - num).abs() < 1e-7, "t = {t}, k = {k}");
        }
    }
}

proptest! {
    #[test]
    fn alignment_never_exceeds_one(a in 0.5f64..20.0, b in -2.0f64..2.0, w in 0.0f64..6.0, dt in -1.0f64..1.0, t in 0.0f64..500.0) {
        let s = cs(a, b);
        let p = PulseModel::new(w, dt).unwrap();
        let g = g2(&s, &p, t);
        prop_assert!(g <= 1.0 + 1e-12);
        prop_assert!(g >= -1.0 - 1e-12);
    }

    #[test]
    fn frequency_and_time_scale_together(a in 0.5f64..20.0, b in -2.0f64..2.0, w in 0.0f64..6.0, t in 0.0f64..200.0, k in 0.2f64..5.0) {
        let p = PulseModel::new(w, 0.0).unwrap();
        let ps = PulseModel::new(w / k, 0.0).unwrap();
        let base = g2(&cs(a, b), &p, t);
        let scaled = g2(&cs(k * a, k * b), &ps, t / k);
        prop_assert!((base - scaled).abs() < 1e-9);
    }

    #[test]
    fn polarization_increases_with_alignment(g1 in -1.0f64..1.0, g2v in -1.0f64..1.0) {
        prop_assume!(g1 < g2v);
        prop_assert!(polarization_from_g2(g1) < polarization_from_g2(g2v));
    }

    #[test]
    fn wider_pulses_never_increase_contrast(x in 0.0f64..6.2, dx in 0.0f64..0.1) {
        let y = (x + dx).min(2.0 * PI);
        prop_assert!(smear_of_phase(y) <= smear_of_phase(x) + 1e-15);
    }
}
