//! Adaptive Dormand-Prince 5(4) integration of complex 3-vector systems.
//!
//! The integrator runs in either direction of `z`. Optionally the state is
//! renormalised by its (positive real) norm whenever it leaves
//! `[1/threshold, threshold]`; the logarithm of the accumulated factor is
//! returned separately so that exponentially growing modes never overflow.

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::linalg::{norm, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at z = {z} (h = {h:e})")]
    StepSizeUnderflow { z: f64, h: f64 },
    #[error("step budget exhausted at z = {z}")]
    TooManySteps { z: f64 },
    #[error("non-finite state at z = {z}")]
    NonFinite { z: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Largest allowed step magnitude.
    pub h_max: f64,
    pub max_steps: usize,
    pub renorm_threshold: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 200_000,
            renorm_threshold: Some(1e6),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOutcome {
    /// Final state; the true solution is `y * exp(log_scale)`.
    pub y: Vec3,
    pub log_scale: f64,
    pub accepted: usize,
    pub rejected: usize,
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Difference between the 5th and embedded 4th order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

fn axpy(y: &Vec3, h: f64, ks: &[Vec3], coef: &[f64]) -> Vec3 {
    let mut out = *y;
    for (k, &a) in ks.iter().zip(coef) {
        if a != 0.0 {
            for i in 0..3 {
                out[i] += k[i] * (h * a);
            }
        }
    }
    out
}

/// Integrate `y' = f(z, y)` from `z0` to `z1`.
pub fn integrate<F>(f: F, z0: f64, z1: f64, y0: Vec3, opts: &OdeOptions) -> Result<OdeOutcome, OdeError>
where
    F: FnMut(f64, &Vec3) -> Vec3,
{
    integrate_observed(f, z0, z1, y0, opts, |_, _, _| {})
}

/// As [`integrate`], calling `observe(z, y, log_scale)` after every accepted
/// step.
pub fn integrate_observed<F, O>(
    mut f: F,
    z0: f64,
    z1: f64,
    y0: Vec3,
    opts: &OdeOptions,
    mut observe: O,
) -> Result<OdeOutcome, OdeError>
where
    F: FnMut(f64, &Vec3) -> Vec3,
    O: FnMut(f64, &Vec3, f64),
{
    let span = z1 - z0;
    let dir = span.signum();
    let mut out = OdeOutcome {
        y: y0,
        log_scale: 0.0,
        accepted: 0,
        rejected: 0,
    };
    if span == 0.0 {
        return Ok(out);
    }
    let mut z = z0;
    let mut y = y0;
    let mut k0 = f(z, &y);
    let mut h = {
        // classic starting guess from the first derivative
        let d0 = norm(&y).max(opts.atol);
        let d1 = norm(&k0).max(1e-12);
        (0.01 * d0 / d1).min(span.abs()).min(opts.h_max)
    };
    let h_min = 1e-14 * (z0.abs().max(z1.abs()).max(1.0));

    loop {
        if out.accepted + out.rejected >= opts.max_steps {
            return Err(OdeError::TooManySteps { z });
        }
        let remaining = (z1 - z).abs();
        let last = h >= remaining;
        let hs = dir * if last { remaining } else { h };

        let mut ks = [k0; 7];
        for s in 1..7 {
            let ys = axpy(&y, hs, &ks[..s], &A[s][..s]);
            ks[s] = f(z + C[s] * hs, &ys);
        }
        let y_new = axpy(&y, hs, &ks[..6], &A[6][..6]);

        let mut err2 = 0.0;
        for i in 0..3 {
            let mut e = C64::new(0.0, 0.0);
            for (s, k) in ks.iter().enumerate() {
                e += k[i] * E[s];
            }
            e *= hs;
            let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
            err2 += (e.re / sc).powi(2) + (e.im / sc).powi(2);
        }
        let err = (err2 / 6.0).sqrt();
        if !err.is_finite() {
            if h <= h_min {
                return Err(OdeError::NonFinite { z });
            }
            h *= 0.1;
            out.rejected += 1;
            continue;
        }

        if err <= 1.0 {
            z = if last { z1 } else { z + hs };
            y = y_new;
            k0 = ks[6];
            out.accepted += 1;
            if let Some(t) = opts.renorm_threshold {
                let n = norm(&y);
                if n > t || n < 1.0 / t {
                    if !(n > 0.0 && n.is_finite()) {
                        return Err(OdeError::NonFinite { z });
                    }
                    for v in y.iter_mut() {
                        *v /= n;
                    }
                    for v in k0.iter_mut() {
                        *v /= n;
                    }
                    out.log_scale += n.ln();
                }
            }
            observe(z, &y, out.log_scale);
            if last {
                out.y = y;
                return Ok(out);
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * fac).min(opts.h_max);
        } else {
            out.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < h_min {
                return Err(OdeError::StepSizeUnderflow { z, h });
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn exponential_in_both_directions() {
        let mu = [c(1.0, 2.0), c(-0.5, 0.0), c(0.0, -3.0)];
        let rhs = |_: f64, y: &Vec3| [mu[0] * y[0], mu[1] * y[1], mu[2] * y[2]];
        let y0 = [c(1.0, 0.0); 3];
        let opts = OdeOptions {
            renorm_threshold: None,
            ..Default::default()
        };
        for (z0, z1) in [(0.0, 2.0), (2.0, -1.0)] {
            let out = integrate(rhs, z0, z1, y0, &opts).unwrap();
            for i in 0..3 {
                let exact = (mu[i] * (z1 - z0)).exp();
                assert!((out.y[i] - exact).norm() < 1e-8 * exact.norm().max(1.0), "{i}");
            }
        }
    }

    #[test]
    fn renormalisation_tracks_log_scale() {
        let rhs = |_: f64, y: &Vec3| [y[0] * 3.0, y[1] * 3.0, y[2] * 3.0];
        let y0 = [c(1.0, 0.0), c(0.0, 1.0), c(0.0, 0.0)];
        let out = integrate(rhs, 0.0, 100.0, y0, &OdeOptions::default()).unwrap();
        let ln_true = 300.0 + 2f64.sqrt().ln();
        assert!((out.log_scale + norm(&out.y).ln() - ln_true).abs() < 1e-7);
        // direction is preserved
        assert!((out.y[0] / out.y[1] - c(0.0, -1.0)).norm() < 1e-9);
    }

    #[test]
    fn discontinuous_coefficient_with_step_cap() {
        // y' = k(z) y with k jumping at 0.5; capped steps resolve the jump
        let rhs = |z: f64, y: &Vec3| {
            let k = if z < 0.5 { 1.0 } else { -1.0 };
            [y[0] * k, y[1] * k, y[2] * k]
        };
        let opts = OdeOptions {
            h_max: 0.05,
            ..Default::default()
        };
        let out = integrate(rhs, 0.0, 1.0, [c(1.0, 0.0); 3], &opts).unwrap();
        assert!((out.y[0].re - 1.0).abs() < 1e-6);
    }
}
