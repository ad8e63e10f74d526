use num_complex::Complex64;
use photonweak::weak::weak_value_from_probs;
use photonweak::{
    expectation_decomposition, expectation_s1, povm_elements, postselected_probs, run_device,
    weak_value_analytic, DeviceConfig, Error, MeterSetting, Polarization, PostselectState,
};
use proptest::prelude::*;

fn angle() -> impl Strategy<Value = f64> {
    0.0..360.0f64
}

fn strength() -> impl Strategy<Value = f64> {
    // K ∈ (0, 1]
    1e-6..=1.0f64
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn decomposition_recovers_expectation(theta in angle(), k in strength()) {
        let psi = Polarization::from_angle_deg(theta);
        let d = expectation_decomposition(&psi, &MeterSetting::from_strength(k).unwrap()).unwrap();
        prop_assert!((d.term_a + d.term_d - expectation_s1(&psi)).abs() < 1e-10);
        prop_assert!((d.prob_a + d.prob_d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_form_matches_probability_route(theta in angle(), k in strength()) {
        let psi = Polarization::from_angle_deg(theta);
        let meter = MeterSetting::from_strength(k).unwrap();
        for post in [PostselectState::A, PostselectState::D] {
            let Ok(p) = postselected_probs(&psi, &meter, &post) else { continue };
            if p.post < 1e-9 {
                continue;
            }
            let via = weak_value_from_probs(p.meter_h, p.meter_v, k).unwrap();
            let closed = weak_value_analytic(&psi, &meter, &post).unwrap();
            prop_assert!((via - closed).abs() < 1e-7 * (1.0 + closed.abs()), "{via} {closed}");
        }
    }

    #[test]
    fn weighted_weak_value_is_half_the_expectation(theta in angle(), k in strength()) {
        // a⟨S1⟩ P(A) = ⟨S1⟩/2 for every strength
        let psi = Polarization::from_angle_deg(theta);
        let meter = MeterSetting::from_strength(k).unwrap();
        if let Ok(p) = postselected_probs(&psi, &meter, &PostselectState::A) {
            let lhs = (p.meter_h - p.meter_v) / k * p.post;
            prop_assert!((lhs - expectation_s1(&psi) / 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn povm_is_complete_and_positive(k in -1.0..=1.0f64) {
        let e = povm_elements(&MeterSetting::from_strength(k).unwrap());
        let sum = e.pi_h + e.pi_v;
        prop_assert!((sum - nalgebra::Matrix2::identity()).norm() < 1e-12);
        for m in [e.pi_h, e.pi_v] {
            prop_assert!(m[(0, 0)].re >= -1e-15 && m[(1, 1)].re >= -1e-15);
        }
    }

    #[test]
    fn device_meter_statistics_follow_the_povm(
        re_a in -1.0..1.0f64, im_a in -1.0..1.0f64, re_b in -1.0..1.0f64, im_b in -1.0..1.0f64,
        gamma in 0.0..=1.0f64,
    ) {
        prop_assume!(re_a.abs() + im_a.abs() + re_b.abs() + im_b.abs() > 1e-3);
        let psi = Polarization::normalized(Complex64::new(re_a, im_a), Complex64::new(re_b, im_b)).unwrap();
        let meter = MeterSetting::new(gamma).unwrap();
        let out = run_device(&psi, &meter, &DeviceConfig::default()).unwrap();
        let p = out.probabilities();
        let (ph, pv) = povm_elements(&meter).probabilities(&psi);
        prop_assert!((p[0] + p[2] - ph).abs() < 1e-10);
        prop_assert!((p[1] + p[3] - pv).abs() < 1e-10);
    }
}

#[test]
fn thousand_random_states_satisfy_the_identity() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let psi = Polarization::normalized(
            Complex64::new(rng.random_range(-1.0..1.0), 0.0),
            Complex64::new(rng.random_range(-1.0..1.0), 0.0),
        )
        .unwrap();
        let k = 1.0 - rng.random::<f64>();
        let d = expectation_decomposition(&psi, &MeterSetting::from_strength(k).unwrap()).unwrap();
        worst = worst.max((d.total - expectation_s1(&psi)).abs());
    }
    assert!(worst < 1e-10, "{worst}");
}

#[test]
fn nominal_state_reference_values() {
    let psi = Polarization::from_angle_deg(42.0);
    let wv = |k: f64| {
        weak_value_analytic(&psi, &MeterSetting::from_strength(k).unwrap(), &PostselectState::A).unwrap()
    };
    let (c, s) = (42f64.to_radians().cos(), 42f64.to_radians().sin());
    assert!((wv(0.0) - (c + s) / (c - s)).abs() < 1e-12);
    assert!((wv(0.0) - 19.0811).abs() < 1e-4);
    assert!((wv(0.006) - 19.02).abs() < 5e-3);
    assert!((wv(0.125) - 7.87).abs() < 5e-3);
    assert!((wv(1.0) - 0.104528).abs() < 1e-6);
    assert!((wv(1.0) - expectation_s1(&psi)).abs() < 1e-15);
}

/// Strength below which the 42° weak value leaves the spectrum `[−1, 1]`.
#[test]
fn extra_spectral_threshold() {
    let psi = Polarization::from_angle_deg(42.0);
    let wv = |k: f64| {
        weak_value_analytic(&psi, &MeterSetting::from_strength(k).unwrap(), &PostselectState::A).unwrap()
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if wv(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let exact = (1.0 - 42f64.to_radians().tan().powi(2)).sqrt();
    assert!((lo - exact).abs() < 1e-12, "{lo}");
    assert!((lo - 0.435055).abs() < 1e-6);
    for i in 1..=100 {
        let k = lo * i as f64 / 101.0;
        assert!(wv(k) > 1.0);
    }
    assert!(wv(lo + 1e-4) < 1.0);
}

#[test]
fn degenerate_inputs() {
    assert_eq!(weak_value_from_probs(0.5, 0.5, 0.0), Err(Error::WeakValueUnbounded));
    assert!(matches!(
        weak_value_from_probs(0.7, 0.7, 0.5),
        Err(Error::MalformedDistribution(_))
    ));
    assert!(matches!(
        Polarization::real(1.0, 1.0),
        Err(Error::NotNormalized(_))
    ));
    // with no measurement, |D⟩ postselected on |A⟩ never succeeds
    let r = postselected_probs(&Polarization::d(), &MeterSetting::from_strength(0.0).unwrap(), &PostselectState::A);
    assert_eq!(r.unwrap_err(), Error::PostselectionImpossible);
}
