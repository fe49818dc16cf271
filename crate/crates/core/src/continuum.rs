//! Finite-volume simulation of the continuum model
//!
//! ```text
//! rho_t + (rho v)_x = 0,   a_t + v a_x = -a + v,   v = M(a) - kappa rho_x / rho^3
//! ```
//!
//! The density flux is split as `rho v = rho M(a) + kappa (1/rho)_x`. The
//! first part gets a local Lax-Friedrichs (Rusanov) interface flux, the second
//! a centred difference, so the update is exactly conservative and mass only
//! changes through the two boundary interfaces, whose fluxes are accumulated.
//! Polarity is advanced in advective form with the same local Lax-Friedrichs
//! dissipation plus the explicit source.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit;
use crate::model::{motility, ModelError, ModelParams, WaveFamily, WaveSolution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuumError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("unstable step at t = {t}: cell {index} has rho = {rho}, a = {a}")]
    UnstableStep { t: f64, index: usize, rho: f64, a: f64 },
    #[error("front tracking failed: {0}")]
    NoFront(String),
    #[error("threshold search on n = {n}: {detail}")]
    Bracket { n: usize, detail: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub dx: f64,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self, ContinuumError> {
        if n < 16 || !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(ContinuumError::InvalidConfig(format!(
                "grid needs n >= 16 and x_min < x_max, got n = {n} on [{x_min}, {x_max}]"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n,
            dx: (x_max - x_min) / n as f64,
        })
    }

    /// Cell centre `i`.
    pub fn x(&self, i: usize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx
    }

    pub fn centres(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub grid: Grid,
    pub rho: Vec<f64>,
    pub a: Vec<f64>,
    pub t: f64,
}

impl FieldState {
    pub fn uniform(grid: Grid, rho: f64, a: f64) -> Self {
        Self {
            grid,
            rho: vec![rho; grid.n],
            a: vec![a; grid.n],
            t: 0.0,
        }
    }

    pub fn total_mass(&self) -> f64 {
        self.rho.iter().sum::<f64>() * self.grid.dx
    }
}

/// Boundary treatment requested in a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryCondition {
    /// Ghost cells pinned to the far-field states of the initial condition.
    #[default]
    DirichletAsymptotic,
    /// Zero-gradient ghost cells.
    Neumann,
}

/// Ghost-cell values actually used by the stepper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Edges {
    /// `(rho, a)` on the left and right.
    Pinned { left: (f64, f64), right: (f64, f64) },
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InitialCondition {
    /// Closed-form profile of the family with its front at `x = 0`.
    ExactWave { family: WaveFamily },
    /// `left` for `x < position`, `right` otherwise; states are `(rho, a)`.
    Step { position: f64, left: (f64, f64), right: (f64, f64) },
}

impl InitialCondition {
    /// Step at zero between the two far-field states of `family`.
    pub fn wave_step(family: WaveFamily, params: &ModelParams) -> Result<Self, ContinuumError> {
        let w = WaveSolution::new(family, *params)?;
        let (l, r) = w.asymptotic_states();
        Ok(Self::Step {
            position: 0.0,
            left: (l.r, l.a),
            right: (r.r, r.a),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: ModelParams,
    pub grid: Grid,
    pub cfl: f64,
    pub t_end: f64,
    pub bc: BoundaryCondition,
    pub ic: InitialCondition,
    pub snapshot_every: f64,
}

impl SimConfig {
    /// Defaults: domain `[-40, 40]`, `cfl = 0.8`, Dirichlet far-field
    /// boundaries and the motility width of [`default_m_eps`] unless `params`
    /// already carries one.
    pub fn new(params: ModelParams, n: usize, t_end: f64, ic: InitialCondition) -> Result<Self, ContinuumError> {
        let grid = Grid::new(-40.0, 40.0, n)?;
        let params = if params.m_eps == 0.0 { params.with_m_eps(default_m_eps(&grid, params.alpha))? } else { params };
        Ok(Self {
            params,
            grid,
            cfl: DEFAULT_CFL,
            t_end,
            bc: BoundaryCondition::DirichletAsymptotic,
            ic,
            snapshot_every: (t_end / 50.0).max(1e-3),
        })
    }

    pub fn validate(&self) -> Result<(), ContinuumError> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(ContinuumError::InvalidConfig(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) || !(self.snapshot_every > 0.0) {
            return Err(ContinuumError::InvalidConfig("need t_end >= 0 and snapshot_every > 0".into()));
        }
        if let InitialCondition::Step { left, right, .. } = self.ic {
            if !(left.0 > 0.0 && right.0 > 0.0) {
                return Err(ContinuumError::InvalidConfig("step densities must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Runs are normally diffusion limited by a wide margin, so the sum of the
/// advective and diffusive Courant numbers stays below one at this value.
pub const DEFAULT_CFL: f64 = 0.8;

/// Default motility width: the polarity change across two cells at a
/// typical front slope of 1/4, i.e. `dx / 2`, but at most
/// `min(alpha, 1 - alpha) / 20` so that `a = 0` and `a = 1` stay equilibria
/// up to `exp(-20)`. A sharp switch sampled by central averaging produces
/// grid-scale oscillations.
pub fn default_m_eps(grid: &Grid, alpha: f64) -> f64 {
    (0.5 * grid.dx).min(alpha.min(1.0 - alpha) / 20.0)
}

pub fn initial_state(config: &SimConfig) -> Result<FieldState, ContinuumError> {
    config.validate()?;
    let g = config.grid;
    let mut st = FieldState::uniform(g, 1.0, 0.0);
    match config.ic {
        InitialCondition::ExactWave { family } => {
            let w = WaveSolution::new(family, config.params.with_m_eps(0.0)?)?;
            for i in 0..g.n {
                let s = w.state_at(g.x(i));
                st.rho[i] = s.r;
                st.a[i] = s.a;
            }
        }
        InitialCondition::Step { position, left, right } => {
            for i in 0..g.n {
                let (r, a) = if g.x(i) < position { left } else { right };
                st.rho[i] = r;
                st.a[i] = a;
            }
        }
    }
    Ok(st)
}

pub fn edges_for(config: &SimConfig) -> Result<Edges, ContinuumError> {
    Ok(match config.bc {
        BoundaryCondition::Neumann => Edges::Neumann,
        BoundaryCondition::DirichletAsymptotic => match config.ic {
            InitialCondition::ExactWave { family } => {
                let (l, r) = WaveSolution::new(family, config.params.with_m_eps(0.0)?)?.asymptotic_states();
                Edges::Pinned {
                    left: (l.r, l.a),
                    right: (r.r, r.a),
                }
            }
            InitialCondition::Step { left, right, .. } => Edges::Pinned { left, right },
        },
    })
}

/// `v_i = M(a_i) - kappa rho_i^-3 (rho_x)_i` with central differences inside
/// and one-sided differences in the end cells.
pub fn compute_velocity(state: &FieldState, params: &ModelParams) -> Vec<f64> {
    let n = state.rho.len();
    let dx = state.grid.dx;
    let r = &state.rho;
    (0..n)
        .map(|i| {
            let grad = if i == 0 {
                (r[1] - r[0]) / dx
            } else if i == n - 1 {
                (r[n - 1] - r[n - 2]) / dx
            } else {
                (r[i + 1] - r[i - 1]) / (2.0 * dx)
            };
            motility(state.a[i], params) - params.kappa * grad / r[i].powi(3)
        })
        .collect()
}

/// `cfl * min(dx / max|v|, dx^2 min(rho)^2 / (2 kappa))`. The second bound is
/// the explicit limit for the diffusion `kappa (1/rho)_x` hidden in the flux.
pub fn stable_dt(state: &FieldState, params: &ModelParams, cfl: f64) -> f64 {
    let dx = state.grid.dx;
    let vmax = compute_velocity(state, params).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let rmin = state.rho.iter().copied().fold(f64::INFINITY, f64::min);
    let adv = if vmax > 0.0 { dx / vmax } else { f64::INFINITY };
    let diff = dx * dx * rmin * rmin / (2.0 * params.kappa);
    cfl * adv.min(diff)
}

/// State with one ghost cell on each side.
fn padded(state: &FieldState, edges: &Edges) -> (Vec<f64>, Vec<f64>) {
    let n = state.rho.len();
    let ((rl, al), (rr, ar)) = match *edges {
        Edges::Pinned { left, right } => (left, right),
        Edges::Neumann => ((state.rho[0], state.a[0]), (state.rho[n - 1], state.a[n - 1])),
    };
    let mut rho = Vec::with_capacity(n + 2);
    let mut a = Vec::with_capacity(n + 2);
    rho.push(rl);
    a.push(al);
    rho.extend_from_slice(&state.rho);
    a.extend_from_slice(&state.a);
    rho.push(rr);
    a.push(ar);
    (rho, a)
}

/// One explicit step. Returns the new state and the net mass that left
/// through the boundaries during the step.
pub fn lax_friedrichs_step(state: &FieldState, params: &ModelParams, dt: f64, edges: &Edges) -> Result<(FieldState, f64), ContinuumError> {
    let n = state.rho.len();
    let dx = state.grid.dx;
    let k = params.kappa;
    let (r, a) = padded(state, edges);
    let m: Vec<f64> = a.iter().map(|&x| motility(x, params)).collect();
    // velocities on the padded grid; ghosts are treated as uniform states
    let mut v = vec![0.0; n + 2];
    v[0] = m[0];
    v[n + 1] = m[n + 1];
    for j in 1..=n {
        v[j] = m[j] - k * (r[j + 1] - r[j - 1]) / (2.0 * dx) / r[j].powi(3);
    }
    // interface fluxes F_{j+1/2}, j = 0..=n on the padded grid
    let flux: Vec<f64> = (0..=n)
        .map(|j| {
            let c = v[j].abs().max(v[j + 1].abs());
            0.5 * (r[j] * m[j] + r[j + 1] * m[j + 1]) - 0.5 * c * (r[j + 1] - r[j]) + k * (1.0 / r[j + 1] - 1.0 / r[j]) / dx
        })
        .collect();
    let lam = dt / dx;
    let mut next = FieldState {
        grid: state.grid,
        rho: vec![0.0; n],
        a: vec![0.0; n],
        t: state.t + dt,
    };
    for i in 0..n {
        let j = i + 1;
        let rho = r[j] - lam * (flux[j] - flux[j - 1]);
        let adv = v[j] * (a[j + 1] - a[j - 1]) * 0.5 - 0.5 * v[j].abs() * (a[j + 1] - 2.0 * a[j] + a[j - 1]);
        let an = a[j] - lam * adv + dt * (v[j] - a[j]);
        if !(rho > 0.0 && rho.is_finite() && an.is_finite()) {
            return Err(ContinuumError::UnstableStep {
                t: next.t,
                index: i,
                rho,
                a: an,
            });
        }
        next.rho[i] = rho;
        next.a[i] = an;
    }
    Ok((next, dt * (flux[n] - flux[0])))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutput {
    pub snapshots: Vec<FieldState>,
    /// Net mass that left through the boundaries over the whole run.
    pub boundary_outflow: f64,
    pub steps: usize,
}

impl SimOutput {
    /// `mass(t) + outflow(0..t) - mass(0)` at the end of the run.
    pub fn mass_defect(&self) -> f64 {
        let first = self.snapshots.first().map(FieldState::total_mass).unwrap_or(0.0);
        let last = self.snapshots.last().map(FieldState::total_mass).unwrap_or(0.0);
        last + self.boundary_outflow - first
    }
}

/// Run from the configured initial condition to `t_end`, keeping the initial
/// state and a snapshot every `snapshot_every`.
pub fn simulate(config: &SimConfig) -> Result<SimOutput, ContinuumError> {
    simulate_until(config, |_| false)
}

/// As [`simulate`], but ends early after the first snapshot for which
/// `stop` holds.
pub fn simulate_until<F>(config: &SimConfig, stop: F) -> Result<SimOutput, ContinuumError>
where
    F: Fn(&FieldState) -> bool,
{
    let mut st = initial_state(config)?;
    let edges = edges_for(config)?;
    let mut out = SimOutput {
        snapshots: vec![st.clone()],
        boundary_outflow: 0.0,
        steps: 0,
    };
    let mut next_snap = config.snapshot_every.min(config.t_end);
    let eps = 1e-12 * config.t_end.max(1.0);
    while st.t < config.t_end - eps {
        let dt = stable_dt(&st, &config.params, config.cfl).min(next_snap - st.t);
        let (nx, outflow) = lax_friedrichs_step(&st, &config.params, dt, &edges)?;
        st = nx;
        out.boundary_outflow += outflow;
        out.steps += 1;
        if st.t >= next_snap - eps {
            st.t = next_snap;
            out.snapshots.push(st.clone());
            next_snap = (next_snap + config.snapshot_every).min(config.t_end);
            if stop(&st) {
                break;
            }
        }
    }
    Ok(out)
}

/// All crossings of `level` by `a`, in either direction.
fn crossings(state: &FieldState, level: f64) -> Vec<f64> {
    let x = state.grid.centres();
    let neg: Vec<f64> = state.a.iter().map(|v| -v).collect();
    let mut c = fit::upward_crossings(&x, &state.a, level);
    c.extend(fit::upward_crossings(&x, &neg, -level));
    c.sort_by(f64::total_cmp);
    c
}

/// Position of the single interior crossing of `a = alpha`.
pub fn front_position(state: &FieldState, alpha: f64) -> Result<f64, ContinuumError> {
    match crossings(state, alpha).as_slice() {
        [p] => Ok(*p),
        [] => Err(ContinuumError::NoFront(format!("a never crosses {alpha} at t = {}", state.t))),
        many => Err(ContinuumError::NoFront(format!("a crosses {alpha} {} times at t = {}", many.len(), state.t))),
    }
}

fn speed_over(snapshots: &[FieldState], alpha: f64, from_fraction: f64) -> Result<f64, ContinuumError> {
    let (t0, t1) = match (snapshots.first(), snapshots.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => return Err(ContinuumError::NoFront("no snapshots".into())),
    };
    let start = t0 + from_fraction * (t1 - t0);
    let pts = snapshots
        .iter()
        .filter(|s| s.t >= start)
        .map(|s| front_position(s, alpha).map(|p| (s.t, p)))
        .collect::<Result<Vec<_>, _>>()?;
    fit::slope(&pts).ok_or_else(|| ContinuumError::NoFront("fewer than two snapshots in the fitting window".into()))
}

/// Front speed: least-squares slope of the `a = alpha` crossing against time
/// over the second half of the run.
pub fn measure_wave_speed(snapshots: &[FieldState], alpha: f64) -> Result<f64, ContinuumError> {
    speed_over(snapshots, alpha, 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Polarisation,
    Depolarisation,
    Undecided,
}

/// Speeds below this magnitude count as a stalled front.
pub const SPEED_THRESHOLD: f64 = 0.05;

/// Polarity relaxes at unit rate, so earlier fronts are still transients.
pub const SETTLING_TIME: f64 = 4.0;

/// Late-time fate of a step run, judged over the last quarter of the run.
///
/// Polarisation: the front moves left and the cells it has swept, between the
/// front and the initial step, are on average above `alpha`. Depolarisation:
/// the front moves right and the swept cells are on average below `alpha`.
/// Cells behind a fast depolarisation front lose polarity only at unit rate,
/// so a stricter level would misjudge clear cases. Runs whose window opens
/// before `SETTLING_TIME` are undecided.
pub fn classify_outcome(snapshots: &[FieldState], params: &ModelParams, step_position: f64) -> Outcome {
    let span = match (snapshots.first(), snapshots.last()) {
        (Some(a), Some(b)) => b.t - a.t,
        _ => return Outcome::Undecided,
    };
    if 0.75 * span < SETTLING_TIME {
        return Outcome::Undecided;
    }
    let Ok(s) = speed_over(snapshots, params.alpha, 0.75) else {
        return Outcome::Undecided;
    };
    let last = snapshots.last().expect("speed_over saw snapshots");
    let Ok(front) = front_position(last, params.alpha) else {
        return Outcome::Undecided;
    };
    let swept_mean = |lo: f64, hi: f64| {
        let vals: Vec<f64> = (0..last.grid.n).filter(|&i| (lo..=hi).contains(&last.grid.x(i))).map(|i| last.a[i]).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    if s < -SPEED_THRESHOLD {
        if let Some(m) = swept_mean(front, step_position) {
            if m > params.alpha {
                return Outcome::Polarisation;
            }
        }
    } else if s > SPEED_THRESHOLD {
        if let Some(m) = swept_mean(step_position, front) {
            if m < params.alpha {
                return Outcome::Depolarisation;
            }
        }
    }
    Outcome::Undecided
}

/// Distance from the domain ends at which threshold runs stop.
pub const EDGE_MARGIN: f64 = 5.0;

/// Settings of the threshold-polarity experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub kappa: f64,
    /// Motility width; `None` uses [`default_m_eps`] on each grid.
    pub m_eps: Option<f64>,
    /// Bracket assumed to contain the threshold.
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub tol: f64,
    pub t_end: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub cfl: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            kappa: 1.0,
            m_eps: None,
            alpha_lo: 0.5,
            alpha_hi: 0.95,
            tol: 0.005,
            t_end: 16.0,
            x_min: -40.0,
            x_max: 40.0,
            cfl: DEFAULT_CFL,
        }
    }
}

impl ThresholdConfig {
    /// Step run at polarity threshold `alpha` on `n` cells, starting from the
    /// far-field states of S1.
    pub fn sim_config(&self, alpha: f64, n: usize) -> Result<SimConfig, ContinuumError> {
        let grid = Grid::new(self.x_min, self.x_max, n)?;
        let sharp = ModelParams::sharp(self.kappa, alpha)?;
        let params = sharp.with_m_eps(self.m_eps.unwrap_or_else(|| default_m_eps(&grid, alpha)))?;
        Ok(SimConfig {
            params,
            grid,
            cfl: self.cfl,
            t_end: self.t_end,
            bc: BoundaryCondition::DirichletAsymptotic,
            ic: InitialCondition::wave_step(WaveFamily::S1, &sharp)?,
            snapshot_every: self.t_end / 80.0,
        })
    }

    /// Classified step run. The run stops early once the front comes within
    /// `EDGE_MARGIN` of either end, so that fast fronts are still inside the
    /// domain throughout the classification window.
    pub fn run(&self, alpha: f64, n: usize) -> Result<Outcome, ContinuumError> {
        let cfg = self.sim_config(alpha, n)?;
        let near_edge = |s: &FieldState| {
            crossings(s, alpha)
                .iter()
                .any(|&p| p < self.x_min + EDGE_MARGIN || p > self.x_max - EDGE_MARGIN)
        };
        let out = simulate_until(&cfg, near_edge)?;
        Ok(classify_outcome(&out.snapshots, &cfg.params, 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub n: usize,
    /// Midpoint of the final bracket.
    pub alpha_bar: f64,
    /// Largest tested value classified as polarisation.
    pub polarised_below: f64,
    /// Smallest tested value classified as depolarisation.
    pub depolarised_above: f64,
}

/// Threshold polarity on every grid of the ladder by bisection. Grids are
/// processed in parallel; each bisection is sequential.
pub fn find_threshold_alpha(config: &ThresholdConfig, ladder: &[usize]) -> Result<Vec<ThresholdEstimate>, ContinuumError> {
    if ladder.len() < 3 {
        return Err(ContinuumError::InvalidConfig(format!("the grid ladder needs at least 3 resolutions, got {}", ladder.len())));
    }
    if !(config.alpha_lo < config.alpha_hi && config.tol > 0.0) {
        return Err(ContinuumError::InvalidConfig("need alpha_lo < alpha_hi and tol > 0".into()));
    }
    ladder.par_iter().map(|&n| bisect_threshold(config, n)).collect()
}

fn bisect_threshold(config: &ThresholdConfig, n: usize) -> Result<ThresholdEstimate, ContinuumError> {
    let (mut lo, mut hi) = (config.alpha_lo, config.alpha_hi);
    for (alpha, want) in [(lo, Outcome::Polarisation), (hi, Outcome::Depolarisation)] {
        let got = config.run(alpha, n)?;
        if got != want {
            return Err(ContinuumError::Bracket {
                n,
                detail: format!("alpha = {alpha} classified {got:?}, expected {want:?}"),
            });
        }
    }
    while hi - lo > config.tol {
        let mid = 0.5 * (lo + hi);
        // close to the threshold the transient is slow; give it more time
        let mut outcome = config.run(mid, n)?;
        let mut longer = *config;
        for _ in 0..2 {
            if outcome != Outcome::Undecided {
                break;
            }
            longer.t_end *= 2.0;
            outcome = longer.run(mid, n)?;
        }
        match outcome {
            Outcome::Polarisation => lo = mid,
            Outcome::Depolarisation => hi = mid,
            Outcome::Undecided => {
                return Err(ContinuumError::Bracket {
                    n,
                    detail: format!("alpha = {mid} undecided inside the bracket [{lo}, {hi}]"),
                })
            }
        }
    }
    Ok(ThresholdEstimate {
        n,
        alpha_bar: 0.5 * (lo + hi),
        polarised_below: lo,
        depolarised_above: hi,
    })
}
