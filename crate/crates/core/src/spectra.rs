//! Essential and absolute spectrum of the linearisation about the
//! polarisation waves.
//!
//! All formulas use the speed convention of S1 (`s < 0`) unless stated
//! otherwise. The spatial eigenvalues at `+inf` are the ones at `-inf`
//! multiplied by `c = s/(s - 1) > 0`, so both ends share the same Fredholm
//! borders and the same absolute spectrum. The square root
//! `sqrt(s^2 + 4 kappa lambda)` is always the principal branch.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::ComplexMat3;
use crate::model::WaveFamily;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectraError {
    #[error("spatial eigenvalue {mu} lies on the imaginary axis: lambda = {lambda} is on a Fredholm border")]
    OnBorder { lambda: C64, mu: C64 },
    #[error("{0}")]
    InvalidInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Minus,
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CurveLabel {
    LineBorder,
    ParabolaBorder,
    AbsRealSegment,
    AbsBranchPlus,
    AbsBranchMinus,
}

impl CurveLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveLabel::LineBorder => "line-border",
            CurveLabel::ParabolaBorder => "parabola-border",
            CurveLabel::AbsRealSegment => "abs-real-segment",
            CurveLabel::AbsBranchPlus => "abs-branch-plus",
            CurveLabel::AbsBranchMinus => "abs-branch-minus",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumCurve {
    pub label: CurveLabel,
    pub points: Vec<C64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbsSpectrum {
    pub segment: SpectrumCurve,
    pub branch_plus: SpectrumCurve,
    pub branch_minus: SpectrumCurve,
}

impl AbsSpectrum {
    pub fn curves(&self) -> [&SpectrumCurve; 3] {
        [&self.segment, &self.branch_plus, &self.branch_minus]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Weights {
    pub eta_minus: f64,
    pub eta_plus: f64,
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn root(s: f64, kappa: f64, lambda: C64) -> C64 {
    (c(s * s) + lambda * (4.0 * kappa)).sqrt()
}

fn check_speed(s: f64) -> Result<(), SpectraError> {
    if s == 0.0 || s == 1.0 || !s.is_finite() {
        return Err(SpectraError::InvalidInput(format!("speed must differ from 0 and 1, got {s}")));
    }
    Ok(())
}

/// Limit of the linearised matrix at one end of the wave. For S2 (speed
/// `s > 1`) the profile ends are swapped relative to S1, so the matrix at
/// `-inf` has the form of the S1 matrix at `+inf` and vice versa.
pub fn asymptotic_matrix(side: Side, family: WaveFamily, lambda: C64, s: f64, kappa: f64) -> Result<ComplexMat3, SpectraError> {
    check_speed(s)?;
    let side = match family {
        WaveFamily::S1 => side,
        WaveFamily::S2 => match side {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
        },
        other => {
            return Err(SpectraError::InvalidInput(format!(
                "asymptotic matrices are provided for S1 and S2, not {other}"
            )))
        }
    };
    let z = c(0.0);
    let m = match side {
        Side::Minus => [
            [z, c(-1.0 / kappa), z],
            [-lambda, c(-s / kappa), z],
            [z, c(-1.0 / s), (lambda + 1.0) / s],
        ],
        Side::Plus => [
            [z, c(-s.powi(3) / (kappa * (s - 1.0).powi(3))), z],
            [lambda * (1.0 / s - 1.0), c(s * s / (kappa * (1.0 - s))), z],
            [z, c(1.0 / (1.0 - s)), (lambda + 1.0) / (s - 1.0)],
        ],
    };
    Ok(ComplexMat3::new(m))
}

/// Closed-form spatial eigenvalues `(mu1, mu2, mu3)` of the S1-convention
/// asymptotic matrix on `side`.
pub fn spatial_eigenvalues(side: Side, lambda: C64, s: f64, kappa: f64) -> [C64; 3] {
    let sq = root(s, kappa, lambda);
    let minus = [
        (lambda + 1.0) / s,
        (sq - s) / (2.0 * kappa),
        (-sq - s) / (2.0 * kappa),
    ];
    match side {
        Side::Minus => minus,
        Side::Plus => {
            let k = s / (s - 1.0);
            minus.map(|m| m * k)
        }
    }
}

/// Number of spatial eigenvalues with positive real part.
pub fn morse_index(side: Side, lambda: C64, s: f64, kappa: f64) -> Result<usize, SpectraError> {
    let mus = spatial_eigenvalues(side, lambda, s, kappa);
    let scale = 1.0 + mus.iter().map(|m| m.norm()).fold(0.0, f64::max);
    if let Some(mu) = mus.iter().find(|m| m.re.abs() <= 1e-10 * scale) {
        return Err(SpectraError::OnBorder { lambda, mu: *mu });
    }
    Ok(mus.iter().filter(|m| m.re > 0.0).count())
}

fn linspace(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = if n > 1 { (b - a) / (n - 1) as f64 } else { 0.0 };
    (0..n).map(move |i| if i + 1 == n { b } else { a + step * i as f64 })
}

/// Line `-1 + i mu s` and parabola `-kappa mu^2 + i mu s`, sampled for `mu`
/// in `mu_range`.
pub fn fredholm_borders(s: f64, kappa: f64, mu_range: (f64, f64), samples: usize) -> Result<[SpectrumCurve; 2], SpectraError> {
    if samples < 2 {
        return Err(SpectraError::InvalidInput("need at least two samples".into()));
    }
    let mus: Vec<f64> = linspace(mu_range.0, mu_range.1, samples).collect();
    Ok([
        SpectrumCurve {
            label: CurveLabel::LineBorder,
            points: mus.iter().map(|&m| C64::new(-1.0, m * s)).collect(),
        },
        SpectrumCurve {
            label: CurveLabel::ParabolaBorder,
            points: mus.iter().map(|&m| C64::new(-kappa * m * m, m * s)).collect(),
        },
    ])
}

/// Left end of the real segment, where the complex branches attach.
pub fn abs_branch_point(s: f64, kappa: f64) -> f64 {
    -(s * s + 2.0 * kappa) / (2.0 * kappa)
}

/// Rightmost point of the absolute spectrum, the branch point of the square
/// root.
pub fn abs_rightmost(s: f64, kappa: f64) -> f64 {
    -s * s / (4.0 * kappa)
}

/// Imaginary part of the upper complex branch at real part `l1`.
pub fn abs_branch_height(s: f64, kappa: f64, l1: f64) -> f64 {
    let u = 1.0 + l1;
    (s * s + 2.0 * kappa * u) * (s * s + kappa * u * u).sqrt() / (s * s * kappa.sqrt())
}

/// Closed-form absolute spectrum: the real segment plus the two complex
/// branches for real parts in `[l1_min, branch point)`.
pub fn absolute_spectrum_closed(s: f64, kappa: f64, l1_min: f64, samples: usize) -> Result<AbsSpectrum, SpectraError> {
    if samples < 2 {
        return Err(SpectraError::InvalidInput("need at least two samples".into()));
    }
    if !(s < 0.0) {
        return Err(SpectraError::InvalidInput(format!("closed form uses s < 0, got {s}")));
    }
    let (lo, hi) = (abs_branch_point(s, kappa), abs_rightmost(s, kappa));
    let segment = linspace(lo, hi, samples).map(c).collect();
    let l1_min = l1_min.min(lo);
    let upper: Vec<C64> = linspace(lo, l1_min, samples)
        .map(|l1| C64::new(l1, abs_branch_height(s, kappa, l1).abs()))
        .collect();
    let lower = upper.iter().map(|z| z.conj()).collect();
    Ok(AbsSpectrum {
        segment: SpectrumCurve {
            label: CurveLabel::AbsRealSegment,
            points: segment,
        },
        branch_plus: SpectrumCurve {
            label: CurveLabel::AbsBranchPlus,
            points: upper,
        },
        branch_minus: SpectrumCurve {
            label: CurveLabel::AbsBranchMinus,
            points: lower,
        },
    })
}

/// Rectangle of the complex plane scanned by the numeric oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub n_re: usize,
    pub n_im: usize,
}

/// Spatial eigenvalues computed by the dense solver, sorted by decreasing real
/// part (ties by decreasing imaginary part).
fn sorted_dense(side: Side, lambda: C64, s: f64, kappa: f64) -> [C64; 3] {
    let a = asymptotic_matrix(side, WaveFamily::S1, lambda, s, kappa).expect("speed checked by caller");
    let mut ev = a.eigenvalues();
    ev.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
    ev
}

/// Number of unstable spatial eigenvalues far to the right.
fn i_infinity(side: Side, s: f64, kappa: f64) -> usize {
    sorted_dense(side, c(100.0), s, kappa).iter().filter(|m| m.re > 0.0).count()
}

/// Absolute spectrum by brute force: along every row and column of the search
/// grid look for sign changes of
/// `(Re mu_i - Re mu_{i+1}) * sign(Im mu_i - Im mu_{i+1})`, where `i` is the
/// Morse index at `lambda = 100`, and refine each by bisection. A sign change
/// is accepted as a point of the absolute spectrum only if the real parts
/// actually agree to `tol` there, which discards the jumps caused by
/// relabelling. Both ends are scanned; the result is sorted.
pub fn absolute_spectrum_numeric(s: f64, kappa: f64, search: SearchBox, tol: f64) -> Result<Vec<C64>, SpectraError> {
    check_speed(s)?;
    if search.n_re < 2 || search.n_im < 2 || !(tol > 0.0) {
        return Err(SpectraError::InvalidInput("search grid needs >= 2 points per axis and tol > 0".into()));
    }
    let mut points = Vec::new();
    for side in [Side::Minus, Side::Plus] {
        let idx = i_infinity(side, s, kappa);
        if idx == 0 || idx >= 3 {
            continue;
        }
        let gap = |l: C64| {
            let ev = sorted_dense(side, l, s, kappa);
            let (a, b) = (ev[idx - 1], ev[idx]);
            (a.re - b.re, a.im - b.im)
        };
        let signed = |l: C64| {
            let (d, e) = gap(l);
            if e >= 0.0 {
                d
            } else {
                -d
            }
        };
        let res: Vec<f64> = linspace(search.re.0, search.re.1, search.n_re).collect();
        let ims: Vec<f64> = linspace(search.im.0, search.im.1, search.n_im).collect();
        let mut lines: Vec<(C64, C64, usize)> = Vec::new();
        for &y in &ims {
            lines.push((C64::new(res[0], y), C64::new(res[res.len() - 1], y), res.len()));
        }
        for &x in &res {
            lines.push((C64::new(x, ims[0]), C64::new(x, ims[ims.len() - 1]), ims.len()));
        }
        let found: Vec<Vec<C64>> = lines
            .par_iter()
            .map(|&(a, b, n)| {
                let mut out = Vec::new();
                let at = |i: usize| a + (b - a) * (i as f64 / (n - 1) as f64);
                let mut prev = signed(at(0));
                for i in 1..n {
                    let cur = signed(at(i));
                    if prev == 0.0 || prev.signum() != cur.signum() {
                        let (mut lo, mut hi) = (at(i - 1), at(i));
                        let mut flo = prev;
                        for _ in 0..60 {
                            let mid = (lo + hi) * 0.5;
                            let fm = signed(mid);
                            if fm == 0.0 {
                                lo = mid;
                                hi = mid;
                                break;
                            }
                            if fm.signum() == flo.signum() {
                                lo = mid;
                                flo = fm;
                            } else {
                                hi = mid;
                            }
                            if (hi - lo).norm() < 1e-13 {
                                break;
                            }
                        }
                        let mid = (lo + hi) * 0.5;
                        if gap(mid).0.abs() < tol {
                            out.push(mid);
                        }
                    }
                    prev = cur;
                }
                out
            })
            .collect();
        points.extend(found.into_iter().flatten());
    }
    points.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    Ok(points)
}

/// Distance from `lambda` to the closed-form absolute spectrum (segment and
/// both branches, branches extending to `-inf`).
pub fn distance_to_abs_closed(s: f64, kappa: f64, lambda: C64) -> f64 {
    let (lo, hi) = (abs_branch_point(s, kappa), abs_rightmost(s, kappa));
    let x = lambda.re.clamp(lo, hi);
    let mut best = (lambda - c(x)).norm();
    // the branches: minimise over a bracket around lambda.re by golden section
    let y = lambda.im.abs();
    let d2 = |t: f64| {
        let h = abs_branch_height(s, kappa, t).abs();
        (t - lambda.re).powi(2) + (h - y).powi(2)
    };
    let (mut a, mut b) = ((lambda.re - 1.0 - y).min(lo), lo);
    // coarse scan then local refinement
    let n = 400;
    let mut t_best = b;
    let mut f_best = d2(b);
    for i in 0..=n {
        let t = a + (b - a) * i as f64 / n as f64;
        let f = d2(t);
        if f < f_best {
            f_best = f;
            t_best = t;
        }
    }
    let w = (b - a) / n as f64;
    a = (t_best - w).max(a);
    b = (t_best + w).min(lo);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let t1 = b - g * (b - a);
        let t2 = a + g * (b - a);
        if d2(t1) < d2(t2) {
            b = t2;
        } else {
            a = t1;
        }
    }
    best = best.min(d2(0.5 * (a + b)).sqrt()).min(f_best.sqrt());
    best
}

/// Ideal exponential weights for the S1 convention, `s < 0`.
pub fn ideal_weights(s: f64, kappa: f64) -> Result<Weights, SpectraError> {
    if !(s < 0.0) || !(kappa > 0.0) {
        return Err(SpectraError::InvalidInput(format!("ideal weights need s < 0 and kappa > 0, got s = {s}, kappa = {kappa}")));
    }
    Ok(Weights {
        eta_minus: -s / (2.0 * kappa),
        eta_plus: s * s / (2.0 * kappa * (1.0 - s)),
    })
}

/// Open intervals of weights that move both borders into the open left half
/// plane: `(0, -s/kappa)` at `-inf` and `(0, s^2/(kappa (1 - s)))` at `+inf`.
/// At the right endpoints the shifted parabola touches the imaginary axis
/// again.
pub fn admissible_weight_intervals(s: f64, kappa: f64) -> ((f64, f64), (f64, f64)) {
    ((0.0, -s / kappa), (0.0, s * s / (kappa * (1.0 - s))))
}

/// Largest real part of the Fredholm borders in the weighted spaces. On
/// each side the borders are the `lambda` for which a spatial eigenvalue
/// equals `i mu + eta`; at `+inf` the eigenvalues are rescaled by `s/(s-1)`
/// first.
pub fn weighted_border_max_real(s: f64, kappa: f64, weights: Weights, mu_range: (f64, f64), samples: usize) -> f64 {
    let k = s / (s - 1.0);
    let mut best = f64::NEG_INFINITY;
    for (eta, scale) in [(weights.eta_minus, 1.0), (weights.eta_plus, k)] {
        for mu in linspace(mu_range.0, mu_range.1, samples.max(2)).chain(std::iter::once(0.0)) {
            // minus-side spatial eigenvalue nu with scale * nu = i mu + eta
            let nu = C64::new(eta, mu) / scale;
            let line = nu * s - 1.0;
            let parabola = nu * nu * kappa + nu * s;
            best = best.max(line.re).max(parabola.re);
        }
    }
    best
}
