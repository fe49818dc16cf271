use polarwave::continuum::{
    self, classify_outcome, compute_velocity, find_threshold_alpha, measure_wave_speed, simulate, BoundaryCondition, FieldState, Grid,
    InitialCondition, SimConfig, SimOutput, ThresholdConfig,
};
use polarwave::model::{wave_speed, ModelParams};
use polarwave::particles::{self, default_dt, departing_sheet, measure_front_speed, simulate_particles, Boundary, ChainConfig};
use serde::Serialize;

use crate::args::{BcKind, ChainEnds, IcKind, ParticleArgs, PdeArgs, ThresholdArgs};
use crate::error::CliError;
use crate::output::Run;
use crate::waves::params;

#[derive(Serialize)]
struct CellRow {
    t: f64,
    cell: usize,
    x: f64,
    a: f64,
}

pub fn simulate_particles_cmd(a: &ParticleArgs, mut run: Run) -> Result<(), CliError> {
    let p = ModelParams::new(a.kappa, a.alpha, a.m_eps)?;
    let chain = ChainConfig {
        boundary: match a.boundary {
            ChainEnds::Free => Boundary::Free,
            ChainEnds::Clamped => Boundary::Clamped,
        },
        spacing: a.spacing,
    };
    if !(a.spacing > 0.0) {
        return Err(CliError::Domain(format!("spacing must be positive, got {}", a.spacing)));
    }
    let polarised = a.polarised.unwrap_or(((1.0 / a.spacing).round() as usize).clamp(1, a.cells));
    let init = departing_sheet(a.cells, polarised, a.spacing)?;
    let dt = a.dt.unwrap_or_else(|| default_dt(&p, &chain));
    let out = simulate_particles(&init, &p, &chain, a.t_end, dt, a.snapshot_every)?;

    run.param("model", p);
    run.param("chain", chain);
    run.param("cells", a.cells);
    run.param("polarised", polarised);
    run.param("t_end", a.t_end);
    run.param("dt", dt);
    run.param("snapshot_every", a.snapshot_every);
    run.result("continuum_speed", wave_speed(polarwave::model::WaveFamily::S1, &p));
    match measure_front_speed(&out.snapshots, a.alpha) {
        Ok(s) => {
            println!("front speed {s:.6}");
            run.result("front_speed", s);
        }
        Err(particles::ParticleError::NoFront(m)) => {
            eprintln!("no front speed: {m}");
            run.result("front_speed", Option::<f64>::None);
        }
        Err(e) => return Err(e.into()),
    }
    if let Some((t, i)) = out.ordering_violation {
        eprintln!("warning: cells {i} and {} swapped order at t = {t}", i + 1);
        run.result("ordering_violation", (t, i));
    }
    let rows = out
        .snapshots
        .iter()
        .flat_map(|s| (0..s.len()).map(move |i| CellRow { t: s.t, cell: i, x: s.x[i], a: s.a[i] }));
    run.write_csv(&a.out, rows)?;
    run.finish_beside(&a.out)?;
    Ok(())
}

#[derive(Serialize)]
pub struct FieldRow {
    pub t: f64,
    pub x: f64,
    pub rho: f64,
    pub a: f64,
    pub v: f64,
}

pub fn field_rows<'a>(snapshots: &'a [FieldState], params: &'a ModelParams) -> impl Iterator<Item = FieldRow> + 'a {
    snapshots.iter().flat_map(move |s| {
        let v = compute_velocity(s, params);
        (0..s.grid.n).map(move |i| FieldRow {
            t: s.t,
            x: s.grid.x(i),
            rho: s.rho[i],
            a: s.a[i] + 0.0,
            v: v[i],
        })
    })
}

pub fn pde_config(a: &PdeArgs) -> Result<SimConfig, CliError> {
    let sharp = params(&a.wave)?;
    let grid = Grid::new(a.x_min, a.x_max, a.n)?;
    let ic = match a.ic {
        IcKind::Exact => InitialCondition::ExactWave { family: a.wave.family },
        IcKind::Step => InitialCondition::wave_step(a.wave.family, &sharp)?,
    };
    let m_eps = a.m_eps.unwrap_or_else(|| continuum::default_m_eps(&grid, a.wave.alpha));
    Ok(SimConfig {
        params: sharp.with_m_eps(m_eps)?,
        grid,
        cfl: a.cfl,
        t_end: a.t_end,
        bc: match a.bc {
            BcKind::Dirichlet => BoundaryCondition::DirichletAsymptotic,
            BcKind::Neumann => BoundaryCondition::Neumann,
        },
        ic,
        snapshot_every: a.snapshot_every.unwrap_or(a.t_end / 40.0),
    })
}

/// Speed, mass balance and, for step data, the outcome of a finished run.
pub fn summarise(run: &mut Run, cfg: &SimConfig, out: &SimOutput, prefix: &str) {
    let key = |k: &str| format!("{prefix}{k}");
    run.result(&key("steps"), out.steps);
    run.result(&key("mass_defect"), out.mass_defect());
    match measure_wave_speed(&out.snapshots, cfg.params.alpha) {
        Ok(s) => run.result(&key("measured_speed"), s),
        Err(e) => run.result(&key("measured_speed_error"), e.to_string()),
    }
    if let InitialCondition::Step { position, .. } = cfg.ic {
        run.result(&key("outcome"), classify_outcome(&out.snapshots, &cfg.params, position));
    }
}

pub fn simulate_pde_cmd(a: &PdeArgs, mut run: Run) -> Result<(), CliError> {
    let cfg = pde_config(a)?;
    let out = simulate(&cfg)?;
    run.param("config", cfg);
    run.result("exact_speed", wave_speed(a.wave.family, &cfg.params));
    summarise(&mut run, &cfg, &out, "");
    for k in ["measured_speed", "outcome", "mass_defect"] {
        if let Some(v) = run.manifest.results.get(k) {
            println!("{k}: {v}");
        }
    }
    run.write_csv(&a.out, field_rows(&out.snapshots, &cfg.params))?;
    run.finish_beside(&a.out)?;
    Ok(())
}

pub fn threshold_config(kappa: f64, t_end: f64, m_eps: Option<f64>) -> ThresholdConfig {
    ThresholdConfig {
        kappa,
        m_eps,
        t_end,
        ..ThresholdConfig::default()
    }
}

pub fn threshold_cmd(a: &ThresholdArgs, mut run: Run) -> Result<(), CliError> {
    let cfg = ThresholdConfig {
        alpha_lo: a.alpha_lo,
        alpha_hi: a.alpha_hi,
        tol: a.tol,
        ..threshold_config(a.kappa, a.t_end, a.m_eps)
    };
    let est = find_threshold_alpha(&cfg, &a.grids)?;
    for e in &est {
        println!("n = {:>6}  alpha_bar = {:.4}  [{:.4}, {:.4}]", e.n, e.alpha_bar, e.polarised_below, e.depolarised_above);
    }
    run.param("threshold", cfg);
    run.param("grids", &a.grids);
    run.result("estimates", &est);
    run.write_csv(&a.out, &est)?;
    run.finish_beside(&a.out)?;
    Ok(())
}
