use polarwave::evans::*;
use polarwave::model::{ModelParams, WaveFamily};
use polarwave::spectra::{asymptotic_matrix, Side};
use polarwave::Complex64 as C64;

fn p(k: f64, a: f64) -> ModelParams {
    ModelParams::sharp(k, a).unwrap()
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn problem(family: WaveFamily, k: f64, a: f64) -> EvansProblem {
    EvansProblem::new(family, p(k, a), EvansConfig::for_family(family)).unwrap()
}

#[test]
fn linearised_matrix_tends_to_the_asymptotic_matrices() {
    let l = c(0.4, 0.9);
    let q = p(1.0, 0.2);
    let minus = asymptotic_matrix(Side::Minus, WaveFamily::S1, l, -2.0, 1.0).unwrap();
    let plus = asymptotic_matrix(Side::Plus, WaveFamily::S1, l, -2.0, 1.0).unwrap();
    let far_left = linearized_matrix(-30.0, l, WaveFamily::S1, &q).unwrap();
    // the right tail decays like exp(z / (s - 1)), so go further out
    let far_right = linearized_matrix(90.0, l, WaveFamily::S1, &q).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert!((far_left[(i, j)] - minus[(i, j)]).norm() < 1e-8);
            assert!((far_right[(i, j)] - plus[(i, j)]).norm() < 1e-8);
        }
    }
    assert!((plus[(2, 1)] - c(1.0 / 3.0, 0.0)).norm() < 1e-15);
    for z in [0.5, 3.0, 10.0] {
        let m = linearized_matrix(z, l, WaveFamily::S1, &q).unwrap();
        assert_eq!((m[(0, 2)], m[(1, 2)]), (c(0.0, 0.0), c(0.0, 0.0)));
    }
}

#[test]
fn stable_boundary_vectors() {
    let q = p(1.0, 0.2);
    let (x0, y0) = boundary_vectors_stable(c(0.0, 0.0), WaveFamily::S1, &q).unwrap();
    // s = -2: first component -2 s^3 / ((s - 1)^2 kappa) = 16/9
    assert!((y0[0] - c(16.0 / 9.0, 0.0)).norm() < 1e-14);
    assert_eq!((y0[1], y0[2]), (c(0.0, 0.0), c(0.0, 0.0)));
    for l in [c(1.0, 0.0), c(-0.3, 2.0)] {
        let (x, y) = boundary_vectors_stable(l, WaveFamily::S1, &q).unwrap();
        assert_eq!(x, x0);
        assert_eq!(y[2], c(0.0, 0.0));
    }
}

#[test]
fn jump_only_acts_on_polarity_perturbations() {
    let q = p(1.0, 0.4);
    let v = [c(0.3, 1.0), c(-2.0, 0.5), c(0.0, 0.0)];
    for fam in [WaveFamily::S1, WaveFamily::S2] {
        assert_eq!(jump_apply(&v, fam, &q).unwrap(), v);
    }
    let e3 = [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
    let j1 = jump_apply(&e3, WaveFamily::S1, &q).unwrap();
    let j2 = jump_apply(&e3, WaveFamily::S2, &q).unwrap();
    assert_eq!(j1[2], e3[2]);
    // A' changes sign between the families
    assert!(j1[0].re * j2[0].re < 0.0);
}

#[test]
fn jump_matches_the_mollified_limit() {
    let q = p(1.0, 0.2);
    let e3 = [c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
    let errs: Vec<f64> = [1e-2, 1e-3]
        .iter()
        .map(|&m| {
            let (moll, sharp) = mollified_jump(c(0.5, 0.2), WaveFamily::S1, &q, e3, m, None).unwrap();
            (0..3).map(|i| (moll[i] - sharp[i]).norm()).fold(0.0, f64::max) / sharp.iter().map(|x| x.norm()).fold(0.0, f64::max)
        })
        .collect();
    assert!(errs[0] < 5e-2 && errs[1] < 5e-3, "{errs:?}");
    assert!(errs[0] / errs[1] > 5.0, "{errs:?}");
}

#[test]
fn shot_mode_at_the_origin() {
    let pr = problem(WaveFamily::S1, 1.0, 0.2);
    let (mu, v) = pr.shot_mode(c(0.0, 0.0));
    assert!((mu - c(2.0, 0.0)).norm() < 1e-14);
    // (1/s, 1, kappa / (s^2 + kappa))
    let want = [c(-0.5, 0.0), c(1.0, 0.0), c(0.2, 0.0)];
    assert!(vector_angle(&v, &want) < 1e-12);
}

#[test]
fn shot_mode_is_an_eigenvector_at_the_start() {
    for l in [c(0.0, 0.0), c(1.0, 0.0), c(0.2, 3.0)] {
        let pr = problem(WaveFamily::S1, 1.0, 0.5);
        let (mu, v) = pr.shot_mode(l);
        let a = linearized_matrix(pr.shooting_start(), l, WaveFamily::S1, &p(1.0, 0.5)).unwrap();
        let av = a.mul_vec(&v);
        let res: f64 = (0..3).map(|i| (av[i] - mu * v[i]).norm_sqr()).sum::<f64>().sqrt();
        let nv: f64 = v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        assert!(res / nv < 1e-6, "{res}");
    }
}

#[test]
fn shot_direction_is_insensitive_to_the_start() {
    let q = p(1.0, 0.2);
    let shoot = |z_start| {
        let cfg = EvansConfig { z_start, tail_tol: None, ..EvansConfig::default() };
        shoot_unstable(c(10.0, 0.0), WaveFamily::S1, &q, &cfg).unwrap().0
    };
    assert!(vector_angle(&shoot(-20.0), &shoot(-25.0)) < 1e-6);
}

#[test]
fn shot_solution_follows_the_unstable_mode_in_the_tail() {
    let pr = problem(WaveFamily::S1, 1.0, 0.2);
    let l = c(0.3, 0.5);
    let (_, v) = pr.shot_mode(l);
    let traj = shot_trajectory(&pr, l).unwrap();
    assert!(traj.len() > 2);
    for (z, y) in traj.iter().filter(|(z, _)| *z <= -15.0) {
        assert!(vector_angle(y, &v) < 1e-4, "z = {z}");
    }
}

#[test]
fn evans_function_values() {
    for (fam, k, a) in [(WaveFamily::S1, 1.0, 0.2), (WaveFamily::S1, 5.0, 0.7), (WaveFamily::S2, 1.0, 0.4)] {
        let pr = problem(fam, k, a);
        let d0 = pr.det(c(0.0, 0.0)).unwrap();
        let near = pr.det(c(0.1, 0.0)).unwrap();
        assert!(d0.ratio_abs(&near) < 1e-6, "{fam:?} {k} {a}");
        assert!(pr.det(c(1.0, 0.0)).unwrap().ratio_abs(&near) > 1e-3);
        let l = c(0.7, 1.3);
        let (d, dc) = (pr.det(l).unwrap(), pr.det(l.conj()).unwrap());
        assert!((d.mantissa().conj() - dc.mantissa()).norm() < 1e-8 * d.mantissa().norm());
        assert!((d.log_scale() - dc.log_scale()).abs() < 1e-9);
    }
}

#[test]
fn no_sign_change_on_the_positive_real_axis() {
    let pr = problem(WaveFamily::S1, 1.0, 0.5);
    let scan = real_axis_scan(&pr, 0.05, 5.0, 60).unwrap();
    let first = scan[0].1.mantissa().re.signum();
    for (x, d) in &scan {
        let m = d.mantissa();
        assert!(m.im.abs() < 1e-8 * m.norm(), "complex value at {x}");
        assert_eq!(m.re.signum(), first, "sign change near {x}");
    }
}

#[test]
fn image_of_c1_crosses_the_negative_axis_an_odd_number_of_times() {
    let q = p(1.0, 0.5);
    let c1 = Contour::C1 { d_l: -0.05, r: 0.1 };
    let scan = evans_scan(&c1, WaveFamily::S1, &q, &EvansConfig::default(), 400).unwrap();
    let crossings = scan
        .windows(2)
        .filter(|w| {
            let (a, b) = (w[0].1.mantissa(), w[1].1.mantissa());
            a.im.signum() != b.im.signum() && a.re + b.re < 0.0
        })
        .count();
    assert_eq!(crossings % 2, 1);
}

#[test]
fn s2_winding_on_c1() {
    let w = winding_number(&Contour::C1 { d_l: -0.05, r: 0.1 }, WaveFamily::S2, &p(1.0, 0.4), &EvansConfig::for_family(WaveFamily::S2)).unwrap();
    assert_eq!(w, 1);
}

#[test]
fn invalid_requests_are_refused() {
    let q = p(1.0, 0.2);
    assert!(matches!(EvansProblem::new(WaveFamily::S3, q, EvansConfig::default()), Err(EvansError::UnsupportedFamily(_))));
    assert!(EvansProblem::new(WaveFamily::S1, q, EvansConfig { z_start: 5.0, ..EvansConfig::default() }).is_err());
    let pr = problem(WaveFamily::S1, 1.0, 0.2);
    assert!(matches!(pr.det(c(-2.0, 0.0)), Err(EvansError::LeftOfBranchPoint { .. })));
    let c2 = Contour::C2 { r_i: 0.1, r_o: 5.0 };
    assert!(winding_number(&Contour::C1 { d_l: 0.1, r: 0.1 }, WaveFamily::S1, &q, &EvansConfig::default()).is_err());
    assert!(winding_number(&c2, WaveFamily::S1, &q, &EvansConfig::default()).is_ok());
    let on_origin = Contour::Polyline(vec![c(0.0, 0.0), c(1.0, -1.0), c(1.0, 1.0)]);
    assert!(matches!(
        winding_number(&on_origin, WaveFamily::S1, &q, &EvansConfig::default()),
        Err(EvansError::ContourThroughZero { .. })
    ));
}
