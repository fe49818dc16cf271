use polarwave::continuum::*;
use polarwave::model::{velocity_profile, ModelParams, WaveFamily, WaveSolution};

fn exact_s1(k: f64, a: f64, n: usize, t_end: f64) -> SimConfig {
    SimConfig::new(ModelParams::sharp(k, a).unwrap(), n, t_end, InitialCondition::ExactWave { family: WaveFamily::S1 }).unwrap()
}

fn one_step_drift(rho: f64, a: f64) -> f64 {
    let p = ModelParams::sharp(1.0, 0.2).unwrap();
    let st = FieldState::uniform(Grid::new(-10.0, 10.0, 200).unwrap(), rho, a);
    let edges = Edges::Pinned { left: (rho, a), right: (rho, a) };
    let dt = stable_dt(&st, &p, DEFAULT_CFL);
    let (next, outflow) = lax_friedrichs_step(&st, &p, dt, &edges).unwrap();
    assert_eq!(outflow, 0.0);
    next.rho.iter().map(|r| (r - rho).abs()).chain(next.a.iter().map(|x| (x - a).abs())).fold(0.0, f64::max)
}

#[test]
fn uniform_equilibria_are_fixed() {
    assert!(one_step_drift(1.0, 0.0) < 1e-15);
    assert!(one_step_drift(2.0 / 3.0, 1.0) < 1e-15);
}

#[test]
fn velocity_of_uniform_states() {
    let g = Grid::new(0.0, 1.0, 32).unwrap();
    let p = ModelParams::sharp(1.0, 0.5).unwrap();
    assert!(compute_velocity(&FieldState::uniform(g, 1.3, 0.2), &p).iter().all(|&v| v == 0.0));
    assert!(compute_velocity(&FieldState::uniform(g, 0.7, 0.9), &p).iter().all(|&v| v == 1.0));
}

#[test]
fn velocity_of_the_exact_profile_is_second_order() {
    // away from the kink at the front the central gradient is O(dx^2)
    let err = |n: usize| {
        let cfg = exact_s1(1.0, 0.2, n, 1.0);
        let st = initial_state(&cfg).unwrap();
        let w = WaveSolution::new(WaveFamily::S1, cfg.params).unwrap();
        let v = compute_velocity(&st, &cfg.params);
        (1..n - 1)
            .filter(|&i| cfg.grid.x(i).abs() > 1.0)
            .map(|i| (v[i] - velocity_profile(&w, cfg.grid.x(i))).abs())
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(400), err(800));
    assert!(coarse / fine > 3.5, "{coarse} {fine}");
}

#[test]
fn diffusion_limited_time_step_scales_with_dx_squared() {
    let p = ModelParams::sharp(50.0, 0.5).unwrap();
    let dt = |n| stable_dt(&FieldState::uniform(Grid::new(-1.0, 1.0, n).unwrap(), 1.0, 0.0), &p, 0.5);
    assert!((dt(100) / dt(200) - 4.0).abs() < 1e-9);
}

#[test]
fn oversized_steps_are_reported() {
    let cfg = exact_s1(1.0, 0.2, 200, 1.0);
    let st = initial_state(&cfg).unwrap();
    let edges = edges_for(&cfg).unwrap();
    let dt = 50.0 * stable_dt(&st, &cfg.params, 1.0);
    assert!(matches!(lax_friedrichs_step(&st, &cfg.params, dt, &edges), Err(ContinuumError::UnstableStep { .. })));
}

#[test]
fn invalid_configurations_are_rejected() {
    let mut cfg = exact_s1(1.0, 0.2, 200, 1.0);
    cfg.cfl = 1.5;
    assert!(simulate(&cfg).is_err());
    assert!(Grid::new(1.0, -1.0, 100).is_err());
    assert!(find_threshold_alpha(&ThresholdConfig::default(), &[100, 200]).is_err());
}

#[test]
fn mass_changes_only_through_the_boundaries() {
    let mut cfg = exact_s1(1.0, 0.2, 400, 8.0);
    let out = simulate(&cfg).unwrap();
    assert!(out.boundary_outflow.abs() > 1.0);
    assert!(out.mass_defect().abs() < 1e-8 * 8.0, "{}", out.mass_defect());

    cfg.bc = BoundaryCondition::Neumann;
    cfg.ic = InitialCondition::wave_step(WaveFamily::S1, &cfg.params).unwrap();
    let out = simulate(&cfg).unwrap();
    assert!(out.mass_defect().abs() < 1e-8 * 8.0, "{}", out.mass_defect());
}

#[test]
fn exact_wave_translates_and_converges_under_refinement() {
    let (k, a, t) = (1.0, 0.2, 6.0);
    let w = WaveSolution::new(WaveFamily::S1, ModelParams::sharp(k, a).unwrap()).unwrap();
    let mut speed_err = Vec::new();
    let mut l1 = Vec::new();
    for n in [250, 500, 1000] {
        let cfg = exact_s1(k, a, n, t);
        let out = simulate(&cfg).unwrap();
        speed_err.push((measure_wave_speed(&out.snapshots, a).unwrap() + 2.0).abs());
        let last = out.snapshots.last().unwrap();
        let dist: f64 = (0..n).map(|i| (last.rho[i] - w.r_at(cfg.grid.x(i) + 2.0 * t)).abs() * cfg.grid.dx).sum();
        l1.push(dist);
    }
    assert!(speed_err.windows(2).all(|e| e[1] < e[0]), "{speed_err:?}");
    // first-order scheme: halving dx roughly halves the error
    assert!(l1.windows(2).all(|e| e[0] / e[1] > 1.5), "{l1:?}");
}

#[test]
fn steep_wave_speed() {
    let cfg = exact_s1(5.0, 0.5, 1600, 6.0);
    let s = measure_wave_speed(&simulate(&cfg).unwrap().snapshots, 0.5).unwrap();
    let exact = -(5.0f64).sqrt();
    assert!((s - exact).abs() / exact.abs() < 0.02, "{s}");
}

#[test]
fn stationary_state_has_no_front() {
    let g = Grid::new(-5.0, 5.0, 50).unwrap();
    let snaps = vec![FieldState::uniform(g, 1.0, 0.0); 3];
    assert!(matches!(measure_wave_speed(&snaps, 0.5), Err(ContinuumError::NoFront(_))));
}

#[test]
fn step_runs_are_classified() {
    let tc = ThresholdConfig::default();
    assert_eq!(tc.run(0.2, 500).unwrap(), Outcome::Polarisation);
    assert_eq!(tc.run(0.5, 500).unwrap(), Outcome::Polarisation);
    assert_eq!(tc.run(0.9, 500).unwrap(), Outcome::Depolarisation);
    let short = ThresholdConfig { t_end: 2.0, ..tc };
    assert_eq!(short.run(0.5, 500).unwrap(), Outcome::Undecided);
}

#[test]
fn threshold_bracket_is_valid_on_the_finest_grid() {
    let tc = ThresholdConfig::default();
    let est = find_threshold_alpha(&tc, &[300, 400, 500]).unwrap();
    let finest = est.last().unwrap();
    assert!(finest.polarised_below < finest.alpha_bar && finest.alpha_bar < finest.depolarised_above);
    assert!(finest.depolarised_above - finest.polarised_below <= tc.tol);
    assert_eq!(tc.run(finest.alpha_bar - 0.05, 500).unwrap(), Outcome::Polarisation);
    assert_eq!(tc.run(finest.alpha_bar + 0.05, 500).unwrap(), Outcome::Depolarisation);
}
