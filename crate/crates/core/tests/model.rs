use approx::assert_abs_diff_eq;
use polarwave::model::*;

fn p(k: f64, a: f64) -> ModelParams {
    ModelParams::sharp(k, a).unwrap()
}

#[test]
fn motility_law() {
    assert_eq!(motility(0.0, &p(1.0, 0.5)), 0.0);
    assert_eq!(motility(1.0, &p(1.0, 0.5)), 1.0);
    let smooth = ModelParams::new(1.0, 0.5, 0.01).unwrap();
    assert_abs_diff_eq!(motility(0.5, &smooth), 0.5, epsilon = 1e-15);
    // the derivative integrates to the unit jump
    let n = 20000;
    let h = 0.4 / n as f64;
    let integral: f64 = (0..n).map(|i| motility_derivative(0.3 + (i as f64 + 0.5) * h, &smooth) * h).sum();
    assert_abs_diff_eq!(integral, 1.0, epsilon = 1e-6);
}

#[test]
fn inverse_helpers() {
    assert_abs_diff_eq!(g_fn(0.5).unwrap(), 2.0, epsilon = 1e-15);
    // 1/2 + ln(1/2), written out independently
    assert_abs_diff_eq!(h_fn(2.0).unwrap(), -0.193_147_180_559_945_3, epsilon = 1e-15);
    assert!(g_fn(0.999).unwrap() < -5.0);
    assert_abs_diff_eq!(g_inv(2.0).unwrap(), 0.5, epsilon = 1e-12);
    for y in [0.01, 0.3, 0.7, 0.99] {
        assert_abs_diff_eq!(g_inv(g_fn(y).unwrap()).unwrap(), y, epsilon = 1e-10);
    }
    for y in [1.01, 1.5, 3.0, 50.0] {
        assert_abs_diff_eq!(h_inv(h_fn(y).unwrap()).unwrap(), y, epsilon = 1e-10 * y);
    }
    assert!(g_fn(1.5).is_err());
    assert!(h_fn(0.5).is_err());
}

#[test]
fn speeds_and_identities() {
    let q = p(1.0, 0.2);
    assert_eq!(wave_speed(WaveFamily::S1, &q), -2.0);
    assert_eq!(wave_speed(WaveFamily::S2, &q), 2.0);
    assert_abs_diff_eq!(wave_speed(WaveFamily::S3, &q), 1.5, epsilon = 1e-15);
    for k in [0.3, 1.0, 5.0] {
        for a in [0.1, 0.35, 0.8] {
            let q = p(k, a);
            let r = p(k, 1.0 - a);
            assert_eq!(wave_speed(WaveFamily::S2, &q), -wave_speed(WaveFamily::S1, &q));
            assert_abs_diff_eq!(wave_speed(WaveFamily::S3, &q), 1.0 - wave_speed(WaveFamily::S1, &r), epsilon = 1e-14);
            assert_abs_diff_eq!(wave_speed(WaveFamily::S4, &q), 1.0 - wave_speed(WaveFamily::S2, &r), epsilon = 1e-14);
        }
    }
}

#[test]
fn s1_profile_landmarks() {
    let w = WaveSolution::new(WaveFamily::S1, p(1.0, 0.2)).unwrap();
    assert_abs_diff_eq!(w.a_at(0.0), 0.2, epsilon = 1e-14);
    let far = w.state_at(60.0);
    assert_abs_diff_eq!(far.r, 2.0 / 3.0, epsilon = 1e-8);
    assert_abs_diff_eq!(far.a, 1.0, epsilon = 1e-8);
    let left = w.state_at(-30.0);
    assert_abs_diff_eq!(left.r, 1.0, epsilon = 1e-6);
    assert_abs_diff_eq!(left.a, 0.0, epsilon = 1e-6);
    assert_abs_diff_eq!(velocity_profile(&w, -60.0), 0.0, epsilon = 1e-10);
    assert_abs_diff_eq!(velocity_profile(&w, 60.0), 1.0, epsilon = 1e-8);
}

#[test]
fn flux_identity_everywhere() {
    for fam in [WaveFamily::S1, WaveFamily::S2] {
        for (k, a) in [(1.0, 0.2), (5.0, 0.5)] {
            let w = WaveSolution::new(fam, p(k, a)).unwrap();
            let s = w.speed();
            for row in w.sample(-20.0, 20.0, 0.05) {
                let [_, r, _, v] = row;
                assert_abs_diff_eq!(r * (v - s), -s, epsilon = 1e-10 * s.abs().max(1.0));
                assert!(r > 0.0);
            }
        }
    }
}

#[test]
fn fixed_points_of_the_wave_ode() {
    for (k, a) in [(1.0, 0.2), (2.0, 0.6), (5.0, 0.9)] {
        let q = p(k, a);
        let s = wave_speed(WaveFamily::S1, &q);
        for st in [TravellingWaveState::new(1.0, 0.0), TravellingWaveState::new(s / (s - 1.0), 1.0)] {
            let (dr, da) = travelling_wave_rhs(st, &q, s).unwrap();
            assert_abs_diff_eq!(dr, 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(da, 0.0, epsilon = 1e-14);
        }
    }
}

#[test]
fn profiles_solve_the_ode_to_second_order() {
    // halving the step must cut the central-difference residual fourfold
    let w = WaveSolution::new(WaveFamily::S1, p(1.0, 0.2)).unwrap();
    let res = |h: f64| {
        (-200..=200)
            .filter(|&i| i != 0)
            .map(|i| {
                let z = i as f64 * 0.05;
                let (dr, _) = w.derivative_at(z);
                ((w.r_at(z + h) - w.r_at(z - h)) / (2.0 * h) - dr).abs()
            })
            .fold(0.0, f64::max)
    };
    let (a, b) = (res(4e-3), res(2e-3));
    assert!((a / b - 4.0).abs() < 0.2, "{a} {b}");
}

#[test]
fn polarity_monotonicity() {
    let s1 = WaveSolution::new(WaveFamily::S1, p(1.0, 0.3)).unwrap();
    let s2 = WaveSolution::new(WaveFamily::S2, p(1.0, 0.3)).unwrap();
    let zs: Vec<f64> = (-400..=400).map(|i| i as f64 * 0.05).collect();
    assert!(zs.windows(2).all(|w| s1.a_at(w[1]) >= s1.a_at(w[0])));
    assert!(zs.windows(2).all(|w| s2.a_at(w[1]) <= s2.a_at(w[0])));
    assert_abs_diff_eq!(s2.a_at(0.0), 0.3, epsilon = 1e-12);
}

#[test]
fn t1_is_an_involution() {
    let s1 = WaveSolution::new(WaveFamily::S1, p(1.0, 0.2)).unwrap();
    let s2 = apply_t1(&s1).unwrap();
    assert_eq!(s2.speed(), 2.0);
    let back = apply_t1(&s2).unwrap();
    assert_eq!(back.family(), WaveFamily::S1);
    assert_eq!(back.speed(), s1.speed());
    for i in -300..=300 {
        let z = i as f64 * 0.05;
        assert_abs_diff_eq!(back.r_at(z), s1.r_at(z), epsilon = 1e-6);
        assert_abs_diff_eq!(back.a_at(z), s1.a_at(z), epsilon = 1e-6);
    }
    // R -> R / (2R - 1) fixes 1 and sends 2/3 to 2
    assert_abs_diff_eq!(s2.r_at(80.0), 1.0, epsilon = 1e-8);
    assert_abs_diff_eq!(s2.r_at(-80.0), 2.0, epsilon = 1e-8);
}

#[test]
fn t2_tilde_properties() {
    let s1 = WaveSolution::new(WaveFamily::S1, p(1.0, 0.2)).unwrap();
    let s3 = apply_t2_tilde(&s1);
    assert_abs_diff_eq!(s3.speed(), 3.0, epsilon = 1e-15);
    assert_abs_diff_eq!(s3.speed(), wave_speed(WaveFamily::S3, &p(1.0, 0.8)), epsilon = 1e-15);
    assert_abs_diff_eq!(s3.a_at(0.0), 0.8, epsilon = 1e-14);
    let again = apply_t2_tilde(&s3);
    assert_eq!(again.family(), WaveFamily::S1);
    assert_eq!(again.params(), s1.params());
    assert_eq!(again.speed(), s1.speed());
    for z in [-3.0, 0.4, 7.0] {
        assert_eq!(again.state_at(z), s1.state_at(z));
    }
}

#[test]
fn physicality() {
    assert!(validate_physical(WaveFamily::S2, &p(1.0, 0.2)).is_physical());
    let bad = validate_physical(WaveFamily::S2, &p(0.1, 0.8));
    assert!(!bad.is_physical());
    assert!(format!("{bad:?}").contains("impenetrability"));
    for k in [0.1, 1.0, 10.0] {
        for a in [0.05, 0.5, 0.95] {
            assert!(validate_physical(WaveFamily::S1, &p(k, a)).is_physical());
        }
    }
}
