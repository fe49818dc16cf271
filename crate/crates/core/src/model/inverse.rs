//! The profile functions `g` and `h` and their monotone inverses.
//!
//! Both inverses are solved by bisection in a logarithmic variable in which
//! the equation is well conditioned over the whole real line:
//!
//! * `g(y) = 1/y + ln(1/y - 1)`. With `y = 1/(1 + e^u)` this reads
//!   `1 + e^u + u = c`, increasing in `u`.
//! * `h(y) = 1/y + ln(1 - 1/y)`. With `1/y = 1 - e^u`, `u < 0`, this reads
//!   `1 + u - e^u = c`, increasing in `u`; `h` maps `(1, inf)` onto
//!   `(-inf, 0)` and is increasing there.

use super::ModelError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseOptions {
    /// Residual tolerance `|f(y) - c|`, relative to `max(1, |c|)`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for InverseOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 200,
        }
    }
}

pub fn g_fn(y: f64) -> Result<f64, ModelError> {
    if !(y > 0.0 && y < 1.0) {
        return Err(ModelError::Domain {
            function: "g",
            value: y,
        });
    }
    Ok(1.0 / y + (1.0 / y - 1.0).ln())
}

pub fn h_fn(y: f64) -> Result<f64, ModelError> {
    if !(y > 1.0) || !y.is_finite() {
        return Err(ModelError::Domain {
            function: "h",
            value: y,
        });
    }
    Ok(1.0 / y + (-1.0 / y).ln_1p())
}

pub fn g_inv(c: f64) -> Result<f64, ModelError> {
    g_inv_with(c, InverseOptions::default())
}

pub fn h_inv(c: f64) -> Result<f64, ModelError> {
    h_inv_with(c, InverseOptions::default())
}

/// Unique `y` in `(0, 1)` with `g(y) = c`.
pub fn g_inv_with(c: f64, opts: InverseOptions) -> Result<f64, ModelError> {
    if !c.is_finite() {
        return Err(ModelError::Domain {
            function: "g^-1",
            value: c,
        });
    }
    let f = |u: f64| 1.0 + u.exp() + u;
    // f(c - 2) <= c iff c <= 2 and f(c) > c; for larger c the root sits
    // near ln(c).
    let (lo, hi) = if c < 2.0 {
        (c - 2.0, c)
    } else {
        (c.ln() - 1.0, c.ln())
    };
    let u = bisect(f, c, lo, hi, opts)?;
    Ok(1.0 / (1.0 + u.exp()))
}

/// Unique `y > 1` with `h(y) = c`; requires `c < 0`.
pub fn h_inv_with(c: f64, opts: InverseOptions) -> Result<f64, ModelError> {
    if !(c < 0.0) || !c.is_finite() {
        return Err(ModelError::Domain {
            function: "h^-1",
            value: c,
        });
    }
    let f = |u: f64| -expm1_minus_x(u);
    // f(c - 2) < c, and f(u) >= -u^2/2 for u <= 0 gives f(-sqrt(-c)) > c.
    let (lo, hi) = (c - 2.0, -(-c).sqrt());
    let u = bisect(f, c, lo, hi, opts)?;
    Ok(-1.0 / u.exp_m1())
}

/// `e^u - 1 - u` without cancellation for small `u`.
fn expm1_minus_x(u: f64) -> f64 {
    if u.abs() < 0.1 {
        // Taylor series; the 13th term is below 1e-22.
        let mut term = u * u / 2.0;
        let mut sum = term;
        for k in 3..14 {
            term *= u / k as f64;
            sum += term;
        }
        sum
    } else {
        u.exp_m1() - u
    }
}

fn bisect(
    f: impl Fn(f64) -> f64,
    c: f64,
    mut lo: f64,
    mut hi: f64,
    opts: InverseOptions,
) -> Result<f64, ModelError> {
    debug_assert!(f(lo) <= c && f(hi) >= c);
    let tol = opts.tol * c.abs().max(1.0);
    for _ in 0..opts.max_iter {
        let mid = 0.5 * (lo + hi);
        let r = f(mid) - c;
        if r == 0.0 || mid == lo || mid == hi {
            break;
        }
        if r < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    if (f(mid) - c).abs() <= tol {
        Ok(mid)
    } else {
        Err(ModelError::NoConvergence(c))
    }
}
