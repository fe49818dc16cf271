use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::{EvansConfig, EvansError, EvansProblem, ScaledComplex};
use crate::model::{ModelParams, WaveFamily};

/// Closed, counterclockwise contours in the spectral plane.
#[derive(Debug, Clone, PartialEq)]
pub enum Contour {
    /// Semicircle of radius `r` to the right of the origin closed by the
    /// vertical segment `Re lambda = d_l < 0`; encloses the origin.
    C1 { d_l: f64, r: f64 },
    /// Half annulus `r_i <= |lambda| <= r_o` in the right half plane; excludes
    /// the origin.
    C2 { r_i: f64, r_o: f64 },
    /// Closed polygon through the given vertices.
    Polyline(Vec<C64>),
}

enum Piece {
    Arc { radius: f64, from: f64, to: f64 },
    Line { a: C64, b: C64 },
}

impl Piece {
    fn length(&self) -> f64 {
        match self {
            Piece::Arc { radius, from, to } => radius * (to - from).abs(),
            Piece::Line { a, b } => (b - a).norm(),
        }
    }

    fn at(&self, u: f64) -> C64 {
        match self {
            Piece::Arc { radius, from, to } => C64::from_polar(*radius, from + (to - from) * u),
            Piece::Line { a, b } => a + (b - a) * u,
        }
    }
}

impl Contour {
    pub fn validate(&self) -> Result<(), EvansError> {
        let bad = |m: String| Err(EvansError::InvalidConfig(m));
        match self {
            Contour::C1 { d_l, r } if !(*d_l < 0.0 && *r > 0.0) => bad(format!("C1 needs d_l < 0 < r, got d_l = {d_l}, r = {r}")),
            Contour::C2 { r_i, r_o } if !(*r_i > 0.0 && r_o > r_i) => bad(format!("C2 needs 0 < r_i < r_o, got {r_i}, {r_o}")),
            Contour::Polyline(p) if p.len() < 3 => bad("a polyline contour needs at least three vertices".into()),
            _ => Ok(()),
        }
    }

    fn pieces(&self) -> Vec<Piece> {
        let i = C64::new(0.0, 1.0);
        match self {
            Contour::C1 { d_l, r } => vec![
                Piece::Arc { radius: *r, from: -FRAC_PI_2, to: FRAC_PI_2 },
                Piece::Line { a: i * *r, b: *d_l + i * *r },
                Piece::Line { a: *d_l + i * *r, b: *d_l - i * *r },
                Piece::Line { a: *d_l - i * *r, b: -i * *r },
            ],
            Contour::C2 { r_i, r_o } => vec![
                Piece::Arc { radius: *r_o, from: -FRAC_PI_2, to: FRAC_PI_2 },
                Piece::Line { a: i * *r_o, b: i * *r_i },
                Piece::Arc { radius: *r_i, from: FRAC_PI_2, to: -FRAC_PI_2 },
                Piece::Line { a: -i * *r_i, b: -i * *r_o },
            ],
            Contour::Polyline(p) => (0..p.len()).map(|k| Piece::Line { a: p[k], b: p[(k + 1) % p.len()] }).collect(),
        }
    }

    /// Point at arc-length fraction `t` in `[0, 1]`.
    pub fn point(&self, t: f64) -> C64 {
        let pieces = self.pieces();
        let total: f64 = pieces.iter().map(Piece::length).sum();
        let mut target = t.clamp(0.0, 1.0) * total;
        for p in &pieces {
            let l = p.length();
            if target <= l && l > 0.0 {
                return p.at(target / l);
            }
            target -= l;
        }
        pieces[0].at(0.0)
    }

    /// Smallest real part on the contour.
    pub fn min_re(&self) -> f64 {
        match self {
            Contour::C1 { d_l, .. } => *d_l,
            Contour::C2 { .. } => 0.0,
            Contour::Polyline(p) => p.iter().map(|z| z.re).fold(f64::INFINITY, f64::min),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindingReport {
    pub winding: i64,
    /// Total phase change divided by `2 pi`.
    pub raw: f64,
    /// Number of Evans function evaluations after refinement.
    pub samples: usize,
    /// Smallest `|D|` on the contour relative to the median.
    pub min_relative_abs: f64,
}

const NEAR_ZERO: f64 = 1e-8;

fn phase_step(a: &ScaledComplex, b: &ScaledComplex) -> f64 {
    (b.mantissa() / a.mantissa()).arg()
}

fn check_zero(contour: &Contour, pts: &[(f64, ScaledComplex, usize)]) -> Result<f64, EvansError> {
    let mut logs: Vec<f64> = pts.iter().map(|p| p.1.ln_abs()).collect();
    logs.sort_by(f64::total_cmp);
    let median = logs[logs.len() / 2];
    let (t, d, _) = pts
        .iter()
        .min_by(|a, b| a.1.ln_abs().total_cmp(&b.1.ln_abs()))
        .expect("non-empty samples");
    let rel = (d.ln_abs() - median).exp();
    if d.is_zero() || rel < NEAR_ZERO {
        return Err(EvansError::ContourThroughZero { lambda: contour.point(*t) });
    }
    Ok(rel)
}

/// Winding number of `D` along `contour` with an already built problem.
///
/// The contour is sampled uniformly in arc length, then every segment whose
/// phase increment is at least `pi/2` is bisected, one round at a time, until
/// all increments are smaller or a segment has been halved `max_depth` times.
/// The refinement depends only on sampled values, so results do not depend on
/// thread scheduling.
pub fn winding_number_with(problem: &EvansProblem, contour: &Contour) -> Result<WindingReport, EvansError> {
    contour.validate()?;
    let bp = problem.branch_point();
    if !(contour.min_re() > bp) {
        return Err(EvansError::InvalidConfig(format!(
            "contour reaches Re lambda = {} which is not right of the branch point {bp}",
            contour.min_re()
        )));
    }
    let cfg = &problem.config;
    let n0 = cfg.contour_samples_init.max(8);
    let eval = |t: f64| problem.det(contour.point(t));
    let init: Result<Vec<_>, _> = (0..n0)
        .into_par_iter()
        .map(|k| {
            let t = k as f64 / n0 as f64;
            eval(t).map(|d| (t, d, 0usize))
        })
        .collect();
    let mut pts = init?;
    check_zero(contour, &pts)?;

    loop {
        let n = pts.len();
        let mut split = Vec::new();
        for k in 0..n {
            let (next_t, next_d) = if k + 1 < n { (pts[k + 1].0, pts[k + 1].1) } else { (1.0, pts[0].1) };
            if phase_step(&pts[k].1, &next_d).abs() >= FRAC_PI_2 {
                if pts[k].2 >= cfg.max_depth {
                    return Err(EvansError::Resolution(format!(
                        "segment at lambda = {} still turns by more than pi/2 after {} bisections",
                        contour.point(pts[k].0),
                        cfg.max_depth
                    )));
                }
                split.push((k, 0.5 * (pts[k].0 + next_t)));
            }
        }
        if split.is_empty() {
            break;
        }
        let mids: Result<Vec<_>, _> = split.par_iter().map(|&(_, t)| eval(t)).collect();
        let mids = mids?;
        let mut merged = Vec::with_capacity(n + split.len());
        let mut it = split.iter().zip(mids).peekable();
        for (k, p) in pts.into_iter().enumerate() {
            match it.peek() {
                Some(((j, t), _)) if *j == k => {
                    let depth = p.2 + 1;
                    let t = *t;
                    merged.push((p.0, p.1, depth));
                    let (_, d) = it.next().expect("peeked");
                    merged.push((t, d, depth));
                }
                _ => merged.push(p),
            }
        }
        pts = merged;
    }
    let rel = check_zero(contour, &pts)?;

    let n = pts.len();
    let total: f64 = (0..n).map(|k| phase_step(&pts[k].1, &pts[(k + 1) % n].1)).sum();
    let raw = total / TAU;
    let winding = raw.round();
    if (raw - winding).abs() > 0.05 {
        return Err(EvansError::Resolution(format!("phase sum {raw} is not close to an integer")));
    }
    Ok(WindingReport {
        winding: winding as i64,
        raw,
        samples: n,
        min_relative_abs: rel,
    })
}

pub fn winding_number(contour: &Contour, family: WaveFamily, params: &ModelParams, config: &EvansConfig) -> Result<i64, EvansError> {
    let problem = EvansProblem::new(family, *params, *config)?;
    Ok(winding_number_with(&problem, contour)?.winding)
}

/// Uniform samples `(lambda, D(lambda))` along a contour, first point
/// repeated at the end so the image closes.
pub fn evans_scan(
    contour: &Contour,
    family: WaveFamily,
    params: &ModelParams,
    config: &EvansConfig,
    samples: usize,
) -> Result<Vec<(C64, ScaledComplex)>, EvansError> {
    contour.validate()?;
    let problem = EvansProblem::new(family, *params, *config)?;
    let n = samples.max(2);
    (0..=n)
        .into_par_iter()
        .map(|k| {
            let l = contour.point(k as f64 / n as f64);
            problem.det(l).map(|d| (l, d))
        })
        .collect()
}

/// Samples along the real segment `[a, b]`, used for sign checks of `D` on
/// the real axis.
pub fn real_axis_scan(problem: &EvansProblem, a: f64, b: f64, samples: usize) -> Result<Vec<(f64, ScaledComplex)>, EvansError> {
    let n = samples.max(2);
    (0..n)
        .into_par_iter()
        .map(|k| {
            let x = a + (b - a) * k as f64 / (n - 1) as f64;
            problem.det(C64::new(x, 0.0)).map(|d| (x, d))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    #[test]
    fn contour_geometry() {
        let c1 = Contour::C1 { d_l: -0.05, r: 0.1 };
        assert!((c1.point(0.0) - C64::new(0.0, -0.1)).norm() < 1e-15);
        let total = PI * 0.1 + 0.05 + 0.2 + 0.05;
        let mid_arc = c1.point(PI * 0.05 / total);
        assert!((mid_arc - C64::new(0.1, 0.0)).norm() < 1e-12);
        assert!((c1.point(1.0) - C64::new(0.0, -0.1)).norm() < 1e-12);
        let c2 = Contour::C2 { r_i: 0.1, r_o: 5.0 };
        assert!((c2.point(0.25 * PI * 5.0 / (PI * 5.1 + 9.8)) - C64::from_polar(5.0, -PI / 4.0)).norm() < 1e-12);
        assert!(Contour::C2 { r_i: 1.0, r_o: 0.5 }.validate().is_err());
    }

    #[test]
    fn winding_of_a_known_function() {
        // sanity of the phase bookkeeping: lambda itself winds once on C1
        let c1 = Contour::C1 { d_l: -0.05, r: 0.1 };
        let n = 64;
        let vals: Vec<ScaledComplex> = (0..n).map(|k| ScaledComplex::from_complex(c1.point(k as f64 / n as f64))).collect();
        let total: f64 = (0..n).map(|k| phase_step(&vals[k], &vals[(k + 1) % n])).sum();
        assert!((total / TAU - 1.0).abs() < 1e-12);
    }
}
