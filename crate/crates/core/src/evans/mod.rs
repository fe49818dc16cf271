//! Evans function of the linearisation about the polarisation waves S1 and
//! S2, and argument-principle zero counting.
//!
//! On one side of the front the profile is constant and the decaying
//! solutions are known in closed form; on the other side the solution that
//! decays towards the far end is shot numerically up to `z = 0`. At `z = 0`
//! the sharp motility switch contributes a Dirac mass which makes `drho` and
//! `dv` jump by an amount proportional to `da(0) / A'(0)`.
//!
//! The shooting integrates the shifted system `y' = (A(z) - mu) y`, where
//! `mu` is the spatial eigenvalue of the shot mode. This divides the Wronskian
//! by `exp(mu(lambda) |z_start|)`, an analytic function without zeros to the
//! right of the branch point, so zeros and winding numbers are unchanged
//! while the determinant stays of moderate size.

mod contour;
mod scaled;

pub use contour::{evans_scan, real_axis_scan, winding_number, winding_number_with, Contour, WindingReport};
pub use scaled::ScaledComplex;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{eigen_residual, norm, ComplexMat3, Vec3};
use crate::model::{motility_derivative, ModelError, ModelParams, WaveFamily, WaveSolution};
use crate::ode::{integrate, integrate_observed, OdeError, OdeOptions};
use crate::spectra::{asymptotic_matrix, Side};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvansError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("the Evans function is implemented for S1 and S2, not {0}")]
    UnsupportedFamily(WaveFamily),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("lambda = {lambda} is not to the right of the branch point {branch_point}")]
    LeftOfBranchPoint { lambda: C64, branch_point: f64 },
    #[error("integration failed for lambda = {lambda}: {source}")]
    Integration { lambda: C64, source: OdeError },
    #[error("Evans function (nearly) vanishes on the contour at lambda = {lambda}")]
    ContourThroughZero { lambda: C64 },
    #[error("phase of the Evans function not resolved: {0}")]
    Resolution(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvansConfig {
    /// Start of the shooting; negative for S1, positive for S2.
    pub z_start: f64,
    pub ode_rel_tol: f64,
    pub ode_abs_tol: f64,
    pub renorm_threshold: f64,
    pub contour_samples_init: usize,
    /// If set, the shooting start is moved further out until the profile is
    /// within this distance of its limit. Slowly decaying tails (large
    /// `kappa`) would otherwise seed the shot with an inexact eigenvector.
    pub tail_tol: Option<f64>,
    /// Maximal number of bisections of one contour segment.
    pub max_depth: usize,
}

impl Default for EvansConfig {
    fn default() -> Self {
        Self {
            z_start: -20.0,
            ode_rel_tol: 1e-10,
            ode_abs_tol: 1e-12,
            renorm_threshold: 1e6,
            contour_samples_init: 256,
            tail_tol: Some(1e-10),
            max_depth: 20,
        }
    }
}

impl EvansConfig {
    pub fn for_family(family: WaveFamily) -> Self {
        let z_start = if family == WaveFamily::S2 { 20.0 } else { -20.0 };
        Self {
            z_start,
            ..Self::default()
        }
    }

    fn ode_options(&self) -> OdeOptions {
        OdeOptions {
            rtol: self.ode_rel_tol,
            atol: self.ode_abs_tol,
            renorm_threshold: Some(self.renorm_threshold),
            ..OdeOptions::default()
        }
    }
}

/// Quintic Hermite table of `R` on the shooting side of the front. The
/// derivatives come from the profile equation `R' = s R^2 (1 - R)/kappa`,
/// so the table stays accurate next to steep fronts.
#[derive(Debug)]
struct ProfileCache {
    z0: f64,
    h: f64,
    r: Vec<f64>,
    dr: Vec<f64>,
    ddr: Vec<f64>,
}

const CACHE_STEP: f64 = 1e-3;

impl ProfileCache {
    fn build(wave: &WaveSolution, a: f64, b: f64) -> Self {
        let n = ((b - a) / CACHE_STEP).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        let q = wave.speed() / wave.params().kappa;
        let mut cache = Self {
            z0: a,
            h,
            r: Vec::with_capacity(n + 1),
            dr: Vec::with_capacity(n + 1),
            ddr: Vec::with_capacity(n + 1),
        };
        for i in 0..=n {
            // the node at the front is evaluated on the shooting side
            let z = if i == n { b } else { a + i as f64 * h };
            let z = if z == 0.0 && a < 0.0 { -0.0 } else { z };
            let r = wave.r_at(z);
            let f = q * r * r * (1.0 - r);
            cache.r.push(r);
            cache.dr.push(f);
            cache.ddr.push(q * (2.0 * r - 3.0 * r * r) * f);
        }
        cache
    }

    fn r(&self, z: f64) -> f64 {
        let n = self.r.len() - 1;
        let x = ((z - self.z0) / self.h).clamp(0.0, n as f64);
        let i = (x.floor() as usize).min(n - 1);
        let t = x - i as f64;
        let (t2, t3) = (t * t, t * t * t);
        let (t4, t5) = (t3 * t, t3 * t2);
        let h = self.h;
        let h2 = h * h;
        (1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5) * self.r[i]
            + (t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5) * h * self.dr[i]
            + (0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5) * h2 * self.ddr[i]
            + (10.0 * t3 - 15.0 * t4 + 6.0 * t5) * self.r[i + 1]
            + (-4.0 * t3 + 7.0 * t4 - 3.0 * t5) * h * self.dr[i + 1]
            + (0.5 * t3 - t4 + 0.5 * t5) * h2 * self.ddr[i + 1]
    }
}

/// Linearised matrix from the profile values `R`, `R'`, `A'` and `M'(A)`.
fn matrix_from(r: f64, dr: f64, da: f64, mprime: f64, s: f64, kappa: f64, lambda: C64) -> ComplexMat3 {
    let c = |x: f64| C64::new(x, 0.0);
    let r3 = r * r * r;
    ComplexMat3::new([
        [c(3.0 * dr / r), c(-r3 / kappa), c(mprime * r3 / kappa)],
        [(c(2.0 * dr * s) - lambda * (r * r)) / r3, c(-dr / r - r * s / kappa), c(mprime * r * s / kappa)],
        [c(0.0), c((da - 1.0) * r / s), (lambda + 1.0) * (r / s)],
    ])
}

fn supported(family: WaveFamily) -> Result<(), EvansError> {
    match family {
        WaveFamily::S1 | WaveFamily::S2 => Ok(()),
        other => Err(EvansError::UnsupportedFamily(other)),
    }
}

/// The linearised matrix at `z`. The Dirac part of `M'(A)` is excluded; it
/// enters through [`jump_apply`].
pub fn linearized_matrix(z: f64, lambda: C64, family: WaveFamily, params: &ModelParams) -> Result<ComplexMat3, EvansError> {
    supported(family)?;
    let wave = WaveSolution::new(family, *params)?;
    let r = wave.r_at(z);
    let (dr, da) = wave.derivative_at(z);
    Ok(matrix_from(r, dr, da, 0.0, wave.speed(), params.kappa, lambda))
}

/// Data of the wave that the Evans function needs, together with the profile
/// cache of the shooting side. Build once and evaluate at many `lambda`.
#[derive(Debug)]
pub struct EvansProblem {
    family: WaveFamily,
    params: ModelParams,
    config: EvansConfig,
    s: f64,
    r0: f64,
    /// `A'(0)`, continuous across the front.
    da0: f64,
    z_far: f64,
    cache: ProfileCache,
}

impl EvansProblem {
    pub fn new(family: WaveFamily, params: ModelParams, config: EvansConfig) -> Result<Self, EvansError> {
        supported(family)?;
        let wave = WaveSolution::new(family, params)?;
        let s = wave.speed();
        let sign = if family == WaveFamily::S1 { -1.0 } else { 1.0 };
        if !(config.z_start * sign > 0.0) || !config.z_start.is_finite() {
            return Err(EvansError::InvalidConfig(format!(
                "z_start = {} must be {} for {family}",
                config.z_start,
                if sign < 0.0 { "negative" } else { "positive" }
            )));
        }
        if !(config.renorm_threshold > 1.0) || !(config.ode_rel_tol > 0.0) || !(config.ode_abs_tol > 0.0) {
            return Err(EvansError::InvalidConfig("tolerances must be positive and renorm_threshold > 1".into()));
        }
        let mut z_far = config.z_start;
        if let Some(tol) = config.tail_tol {
            while (wave.r_at(z_far) - 1.0).abs() > tol && z_far.abs() < 400.0 {
                z_far += 5.0 * sign;
            }
        }
        let cache = if sign < 0.0 {
            ProfileCache::build(&wave, z_far, 0.0)
        } else {
            ProfileCache::build(&wave, 0.0, z_far)
        };
        let r0 = s / (s - 1.0);
        let da0 = (params.alpha - 1.0) / (s - 1.0);
        Ok(Self {
            family,
            params,
            config,
            s,
            r0,
            da0,
            z_far,
            cache,
        })
    }

    pub fn family(&self) -> WaveFamily {
        self.family
    }

    pub fn speed(&self) -> f64 {
        self.s
    }

    /// Actual start of the shooting after any tail extension.
    pub fn shooting_start(&self) -> f64 {
        self.z_far
    }

    pub fn branch_point(&self) -> f64 {
        -self.s * self.s / (4.0 * self.params.kappa)
    }

    fn check_lambda(&self, lambda: C64) -> Result<(), EvansError> {
        if !(lambda.re > self.branch_point()) || !lambda.im.is_finite() {
            return Err(EvansError::LeftOfBranchPoint {
                lambda,
                branch_point: self.branch_point(),
            });
        }
        Ok(())
    }

    /// Spatial eigenvalue and eigenvector of the far-end asymptotic matrix for
    /// the mode that is shot: the unstable mode at `-inf` for S1, the stable
    /// one at `+inf` for S2. The eigenvector is written without cancellation;
    /// if it fails the eigen-residual check the dense solver is used instead.
    pub fn shot_mode(&self, lambda: C64) -> (C64, Vec3) {
        let (s, k) = (self.s, self.params.kappa);
        let sq = (C64::new(s * s, 0.0) + lambda * (4.0 * k)).sqrt();
        let one = C64::new(1.0, 0.0);
        let (mu, x) = match self.family {
            WaveFamily::S1 => ((sq - s) / (2.0 * k), -2.0 / (sq - s)),
            _ => ((-sq - s) / (2.0 * k), 2.0 / (sq + s)),
        };
        let a = 2.0 * k / (C64::new(s * s, 0.0) + (lambda + 1.0) * (2.0 * k) + sq * s.abs());
        let v = [x, one, a];
        let side = if self.family == WaveFamily::S1 { Side::Minus } else { Side::Plus };
        let m = asymptotic_matrix(side, self.family, lambda, s, k).expect("family checked");
        if eigen_residual(&m, mu, &v) <= 1e-8 * (1.0 + m.max_abs()) && v.iter().all(|c| c.is_finite()) {
            return (mu, v);
        }
        let ev = m.eigenvalues();
        let mu_d = *ev
            .iter()
            .min_by(|p, q| (*p - mu).norm().total_cmp(&(*q - mu).norm()))
            .expect("three eigenvalues");
        (mu_d, m.eigenvector(mu_d))
    }

    /// Integrate the shot mode from the far end to `z_end` (between the far
    /// end and 0). Returns the state and its log-scale.
    pub fn shoot_to(&self, lambda: C64, z_end: f64) -> Result<(Vec3, f64), EvansError> {
        self.check_lambda(lambda)?;
        let (mu, v) = self.shot_mode(lambda);
        let (s, k) = (self.s, self.params.kappa);
        let alpha = self.params.alpha;
        let rhs = |z: f64, y: &Vec3| {
            let r = self.cache.r(z);
            let dr = s * r * r * (1.0 - r) / k;
            let da = s * s * alpha * (1.0 - r) / k;
            let a = matrix_from(r, dr, da, 0.0, s, k, lambda).shifted(mu);
            a.mul_vec(y)
        };
        let out = integrate(rhs, self.z_far, z_end, v, &self.config.ode_options())
            .map_err(|source| EvansError::Integration { lambda, source })?;
        Ok((out.y, out.log_scale))
    }

    /// Shot solution at the front (`z = 0` approached from the shooting side).
    pub fn shoot_unstable(&self, lambda: C64) -> Result<(Vec3, f64), EvansError> {
        self.shoot_to(lambda, 0.0)
    }

    /// Jump across `z = 0` from the closed-form side to the shooting side.
    pub fn jump_apply(&self, v: &Vec3) -> Vec3 {
        let k = self.params.kappa;
        let f = v[2] / (self.da0 * k);
        [v[0] - f * self.r0.powi(3), v[1] - f * (self.r0 * self.s), v[2]]
    }

    /// Closed-form decaying solutions `(X, Y)` of the constant side, evaluated
    /// at the front on the shooting side (jump included).
    pub fn boundary_vectors(&self, lambda: C64) -> (Vec3, Vec3) {
        let (s, k) = (self.s, self.params.kappa);
        let sq = (C64::new(s * s, 0.0) + lambda * (4.0 * k)).sqrt();
        let zero = C64::new(0.0, 0.0);
        let x = self.jump_apply(&[zero, zero, C64::new(1.0, 0.0)]);
        let pref = s * s / ((s - 1.0).powi(2) * k);
        let first = match self.family {
            WaveFamily::S1 => (sq - s) * pref,
            _ => -(sq + s) * pref,
        };
        (x, [first, lambda * 2.0, zero])
    }

    pub fn det(&self, lambda: C64) -> Result<ScaledComplex, EvansError> {
        let (y, log_scale) = self.shoot_unstable(lambda)?;
        let (x, w) = self.boundary_vectors(lambda);
        let d = ComplexMat3::from_columns(&y, &x, &w).det();
        Ok(ScaledComplex::new(d, log_scale))
    }
}

pub fn boundary_vectors_stable(lambda: C64, family: WaveFamily, params: &ModelParams) -> Result<(Vec3, Vec3), EvansError> {
    let p = EvansProblem::new(family, *params, EvansConfig::for_family(family))?;
    Ok(p.boundary_vectors(lambda))
}

/// Map the limit of a solution on the closed-form side of `z = 0` to the
/// limit on the shooting side:
/// `v - da(0)/A'(0) * (1/kappa) (R(0)^3, R(0) s, 0)`. For S1 (increasing `A`)
/// this maps right to left; for S2 (decreasing `A`) left to right.
pub fn jump_apply(v: &Vec3, family: WaveFamily, params: &ModelParams) -> Result<Vec3, EvansError> {
    let p = EvansProblem::new(family, *params, EvansConfig::for_family(family))?;
    Ok(p.jump_apply(v))
}

pub fn shoot_unstable(lambda: C64, family: WaveFamily, params: &ModelParams, config: &EvansConfig) -> Result<(Vec3, f64), EvansError> {
    EvansProblem::new(family, *params, *config)?.shoot_unstable(lambda)
}

pub fn evans_det(lambda: C64, family: WaveFamily, params: &ModelParams, config: &EvansConfig) -> Result<ScaledComplex, EvansError> {
    EvansProblem::new(family, *params, *config)?.det(lambda)
}

/// Brute-force check of the jump condition. The vector `v` is prescribed at
/// `z = ±half_width` on the closed-form side and carried across the front in
/// two ways: with the smooth motility of width `m_eps` (its derivative enters
/// the third column of the linearised matrix) and with the sharp law plus
/// [`jump_apply`]. Returns `(mollified, sharp)` at the far side.
///
/// With `half_width = None` the window is 40 layer widths `m_eps / |A'(0)|`,
/// wide enough for the logistic tails to be negligible and narrow enough that
/// propagation inside the window does not amplify the crossing error.
pub fn mollified_jump(
    lambda: C64,
    family: WaveFamily,
    params: &ModelParams,
    v: Vec3,
    m_eps: f64,
    half_width: Option<f64>,
) -> Result<(Vec3, Vec3), EvansError> {
    supported(family)?;
    if !(m_eps > 0.0 && m_eps.is_finite()) || half_width.is_some_and(|w| !(w > 0.0)) {
        return Err(EvansError::InvalidConfig(format!("need m_eps > 0 and a positive window, got {m_eps}, {half_width:?}")));
    }
    let wave = WaveSolution::new(family, *params)?;
    let smooth = params.with_m_eps(m_eps)?;
    let problem = EvansProblem::new(family, *params, EvansConfig::for_family(family))?;
    let (s, k) = (wave.speed(), params.kappa);
    let layer = m_eps / problem.da0.abs();
    let half_width = half_width.unwrap_or(40.0 * layer);
    // closed-form side: z > 0 for S1, z < 0 for S2
    let z_closed = if family == WaveFamily::S1 { half_width } else { -half_width };
    let sharp_rhs = |z: f64, y: &Vec3| {
        let r = wave.r_at(z);
        let (dr, da) = wave.derivative_at(z);
        matrix_from(r, dr, da, 0.0, s, k, lambda).mul_vec(y)
    };
    let smooth_rhs = |z: f64, y: &Vec3| {
        let st = wave.state_at(z);
        let (dr, da) = wave.derivative_at(z);
        let mp = motility_derivative(st.a, &smooth);
        matrix_from(st.r, dr, da, mp, s, k, lambda).mul_vec(y)
    };
    let tight = OdeOptions {
        rtol: 1e-11,
        atol: 1e-13,
        renorm_threshold: None,
        ..OdeOptions::default()
    };
    let err = |source| EvansError::Integration { lambda, source };
    let half = integrate(sharp_rhs, z_closed, 0.0, v, &tight).map_err(err)?;
    let crossed = problem.jump_apply(&half.y);
    let sharp = integrate(sharp_rhs, 0.0, -z_closed, crossed, &tight).map_err(err)?;
    // the smooth kernel lives on a z-scale of m_eps / |A'(0)|; steps are
    // capped only inside a band of a few dozen layer widths
    let band = (40.0 * layer).min(half_width);
    let fine = OdeOptions {
        h_max: 0.2 * layer,
        ..tight
    };
    let sgn = z_closed.signum();
    let outer = integrate(smooth_rhs, z_closed, sgn * band, v, &tight).map_err(err)?;
    let inner = integrate(smooth_rhs, sgn * band, -sgn * band, outer.y, &fine).map_err(err)?;
    let moll = integrate(smooth_rhs, -sgn * band, -z_closed, inner.y, &tight).map_err(err)?;
    Ok((moll.y, sharp.y))
}

/// Sine of the angle between two complex vectors.
pub fn vector_angle(u: &Vec3, v: &Vec3) -> f64 {
    let ip: C64 = u.iter().zip(v).map(|(a, b)| a.conj() * b).sum();
    let c = ip.norm() / (norm(u) * norm(v));
    (1.0 - (c * c).min(1.0)).sqrt()
}

/// The shot solution observed after every accepted step, for diagnostics.
pub fn shot_trajectory(problem: &EvansProblem, lambda: C64) -> Result<Vec<(f64, Vec3)>, EvansError> {
    problem.check_lambda(lambda)?;
    let (mu, v) = problem.shot_mode(lambda);
    let (s, k, alpha) = (problem.s, problem.params.kappa, problem.params.alpha);
    let rhs = |z: f64, y: &Vec3| {
        let r = problem.cache.r(z);
        let dr = s * r * r * (1.0 - r) / k;
        let da = s * s * alpha * (1.0 - r) / k;
        matrix_from(r, dr, da, 0.0, s, k, lambda).shifted(mu).mul_vec(y)
    };
    let mut traj = vec![(problem.z_far, v)];
    integrate_observed(rhs, problem.z_far, 0.0, v, &problem.config.ode_options(), |z, y, _| traj.push((z, *y)))
        .map_err(|source| EvansError::Integration { lambda, source })?;
    Ok(traj)
}
