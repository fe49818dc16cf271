//! The discrete chain: `N` cells with positions `x_i` and polarities `a_i`,
//! nearest neighbours joined by linear springs of stiffness `kappa`.
//!
//! With lattice spacing `h` the velocity is
//! `M(a_i) + kappa / h^2 (x_{i+1} - 2 x_i + x_{i-1})`; `h = 1` is the
//! original chain, and smaller `h` approaches the continuum model at the same
//! density, which is how the refinement studies use it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit;
use crate::model::{motility, ModelParams};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParticleError {
    #[error("a chain needs at least two cells, got {0}")]
    TooFewCells(usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("front tracking failed: {0}")]
    NoFront(String),
}

/// Treatment of the two end cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Boundary {
    /// One-sided spring of rest length `h`.
    #[default]
    Free,
    /// End positions held fixed.
    Clamped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub boundary: Boundary,
    /// Lattice spacing `h`; also the rest spacing, so density is `h / dx`.
    pub spacing: f64,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            boundary: Boundary::Free,
            spacing: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleState {
    pub x: Vec<f64>,
    pub a: Vec<f64>,
    pub t: f64,
}

impl ParticleState {
    pub fn new(x: Vec<f64>, a: Vec<f64>, t: f64) -> Result<Self, ParticleError> {
        if x.len() != a.len() {
            return Err(ParticleError::InvalidInput(format!("{} positions but {} polarities", x.len(), a.len())));
        }
        if x.len() < 2 {
            return Err(ParticleError::TooFewCells(x.len()));
        }
        Ok(Self { x, a, t })
    }

    /// Evenly spaced resting chain starting at `x0`.
    pub fn resting_chain(n: usize, x0: f64, spacing: f64) -> Result<Self, ParticleError> {
        let x = (0..n).map(|i| x0 + i as f64 * spacing).collect();
        Self::new(x, vec![0.0; n], 0.0)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Index of the first pair with `x_{i+1} <= x_i`.
    pub fn first_ordering_violation(&self) -> Option<usize> {
        self.x.windows(2).position(|w| w[1] <= w[0])
    }

    /// Local densities `h / (x_{i+1} - x_i)` at the bond midpoints.
    pub fn bond_densities(&self, spacing: f64) -> Vec<(f64, f64)> {
        self.x.windows(2).map(|w| (0.5 * (w[0] + w[1]), spacing / (w[1] - w[0]))).collect()
    }
}

fn rhs_into(x: &[f64], a: &[f64], params: &ModelParams, chain: &ChainConfig, dx: &mut [f64], da: &mut [f64]) {
    let n = x.len();
    let h = chain.spacing;
    let k = params.kappa / (h * h);
    for i in 0..n {
        let spring = if i == 0 {
            match chain.boundary {
                Boundary::Free => k * (x[1] - x[0] - h),
                Boundary::Clamped => f64::NAN,
            }
        } else if i == n - 1 {
            match chain.boundary {
                Boundary::Free => -k * (x[n - 1] - x[n - 2] - h),
                Boundary::Clamped => f64::NAN,
            }
        } else {
            k * (x[i + 1] - 2.0 * x[i] + x[i - 1])
        };
        // NaN marks a pinned end cell
        dx[i] = if spring.is_nan() { 0.0 } else { motility(a[i], params) + spring };
        da[i] = -a[i] + dx[i];
    }
}

/// Velocities and polarity rates of every cell.
pub fn particle_rhs(state: &ParticleState, params: &ModelParams, chain: &ChainConfig) -> Result<(Vec<f64>, Vec<f64>), ParticleError> {
    let n = state.len();
    if n < 2 || state.a.len() != n {
        return Err(ParticleError::TooFewCells(n.min(state.a.len())));
    }
    let mut dx = vec![0.0; n];
    let mut da = vec![0.0; n];
    rhs_into(&state.x, &state.a, params, chain, &mut dx, &mut da);
    Ok((dx, da))
}

/// Time step used when none is given: `1e-3 min(1, 1/kappa)`, capped by
/// `0.02 h^2 / kappa` on fine lattices (the explicit stability limit of the
/// spring term is about `0.7 h^2 / kappa`).
pub fn default_dt(params: &ModelParams, chain: &ChainConfig) -> f64 {
    (1e-3 * (1.0 / params.kappa).min(1.0)).min(0.02 * chain.spacing.powi(2) / params.kappa)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleRun {
    pub snapshots: Vec<ParticleState>,
    /// First time and bond index at which two cells swapped order.
    pub ordering_violation: Option<(f64, usize)>,
}

/// Fixed-step classical Runge-Kutta integration until `t_end`, recording the
/// initial state and then a snapshot every `snapshot_every` time units.
pub fn simulate_particles(
    initial: &ParticleState,
    params: &ModelParams,
    chain: &ChainConfig,
    t_end: f64,
    dt: f64,
    snapshot_every: f64,
) -> Result<ParticleRun, ParticleError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(ParticleError::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    if !(chain.spacing > 0.0) || !(t_end >= initial.t) || !(snapshot_every > 0.0) {
        return Err(ParticleError::InvalidInput("need spacing > 0, t_end >= t0 and snapshot_every > 0".into()));
    }
    let n = initial.len();
    if n < 2 || initial.a.len() != n {
        return Err(ParticleError::TooFewCells(n));
    }
    let mut x = initial.x.clone();
    let mut a = initial.a.clone();
    let mut t = initial.t;
    let mut k = [(); 4].map(|_| (vec![0.0; n], vec![0.0; n]));
    let (mut xt, mut at) = (vec![0.0; n], vec![0.0; n]);
    let mut run = ParticleRun {
        snapshots: vec![initial.clone()],
        ordering_violation: initial.first_ordering_violation().map(|i| (t, i)),
    };
    let steps = ((t_end - t) / dt).ceil() as usize;
    let h = (t_end - t) / steps.max(1) as f64;
    let mut next_snap = t + snapshot_every;

    for step in 1..=steps {
        for stage in 0..4 {
            let c = [0.0, 0.5, 0.5, 1.0][stage];
            if stage == 0 {
                xt.copy_from_slice(&x);
                at.copy_from_slice(&a);
            } else {
                let (px, pa) = &k[stage - 1];
                for i in 0..n {
                    xt[i] = x[i] + c * h * px[i];
                    at[i] = a[i] + c * h * pa[i];
                }
            }
            let (kx, ka) = &mut k[stage];
            rhs_into(&xt, &at, params, chain, kx, ka);
        }
        for i in 0..n {
            x[i] += h / 6.0 * (k[0].0[i] + 2.0 * k[1].0[i] + 2.0 * k[2].0[i] + k[3].0[i]);
            a[i] += h / 6.0 * (k[0].1[i] + 2.0 * k[1].1[i] + 2.0 * k[2].1[i] + k[3].1[i]);
        }
        t = initial.t + step as f64 * h;
        if !x.iter().chain(&a).all(|v| v.is_finite()) {
            return Err(ParticleError::NonFinite { t });
        }
        if run.ordering_violation.is_none() {
            if let Some(i) = x.windows(2).position(|w| w[1] <= w[0]) {
                run.ordering_violation = Some((t, i));
            }
        }
        if t >= next_snap - 1e-9 * h || step == steps {
            run.snapshots.push(ParticleState { x: x.clone(), a: a.clone(), t });
            while next_snap <= t + 1e-9 * h {
                next_snap += snapshot_every;
            }
        }
    }
    Ok(run)
}

/// Front position: the leftmost upward crossing of `alpha` by the cell
/// polarities, interpolated linearly between neighbouring cells.
pub fn front_position(state: &ParticleState, alpha: f64) -> Option<f64> {
    fit::upward_crossings(&state.x, &state.a, alpha).first().copied()
}

/// Front speed from a linear fit of the front position against time over
/// the second half of the run.
pub fn measure_front_speed(snapshots: &[ParticleState], alpha: f64) -> Result<f64, ParticleError> {
    let t_end = snapshots.last().map(|s| s.t).ok_or_else(|| ParticleError::NoFront("no snapshots".into()))?;
    let t_half = 0.5 * (snapshots[0].t + t_end);
    let mut pts = Vec::new();
    for s in snapshots.iter().filter(|s| s.t >= t_half) {
        let p = front_position(s, alpha).ok_or_else(|| ParticleError::NoFront(format!("no crossing of {alpha} at t = {}", s.t)))?;
        pts.push((s.t, p));
    }
    fit::slope(&pts).ok_or_else(|| ParticleError::NoFront("fewer than two snapshots in the second half".into()))
}

/// Resting chain of `n` cells on `[0, (n-1) h]` whose rightmost
/// `polarised` cells start with `a = 1`: the departing-sheet set-up that
/// launches a polarisation front.
pub fn departing_sheet(n: usize, polarised: usize, spacing: f64) -> Result<ParticleState, ParticleError> {
    let mut s = ParticleState::resting_chain(n, 0.0, spacing)?;
    if polarised > n {
        return Err(ParticleError::InvalidInput(format!("{polarised} polarised cells in a chain of {n}")));
    }
    for a in &mut s.a[n - polarised..] {
        *a = 1.0;
    }
    Ok(s)
}
