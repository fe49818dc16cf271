use polarwave::evans::{evans_scan, real_axis_scan, winding_number_with, Contour, EvansConfig, EvansProblem, ScaledComplex};
use polarwave::model::{wave_speed, ModelParams, WaveFamily};
use polarwave::spectra::{
    absolute_spectrum_closed, absolute_spectrum_numeric, fredholm_borders, ideal_weights, weighted_border_max_real, SearchBox, SpectrumCurve,
};
use polarwave::Complex64;
use serde::Serialize;

use crate::args::{ContourKind, EvansArgs, SpectrumArgs, SpectrumKind};
use crate::error::CliError;
use crate::output::Run;
use crate::waves::params;

#[derive(Serialize)]
pub struct CurveRow {
    pub label: String,
    pub re: f64,
    pub im: f64,
}

pub fn curve_rows(curves: &[&SpectrumCurve]) -> Vec<CurveRow> {
    curves
        .iter()
        .flat_map(|c| {
            c.points.iter().map(|p| CurveRow {
                label: c.label.as_str().to_string(),
                re: p.re,
                im: p.im,
            })
        })
        .collect()
}

pub fn numeric_rows(s: f64, kappa: f64, l1_min: f64) -> Result<Vec<CurveRow>, CliError> {
    let right = -s * s / (4.0 * kappa) + 0.5;
    let search = SearchBox {
        re: (l1_min, right),
        im: (-4.0, 4.0),
        n_re: 161,
        n_im: 81,
    };
    Ok(absolute_spectrum_numeric(s, kappa, search, 1e-10)?
        .into_iter()
        .map(|p| CurveRow {
            label: "abs-numeric".into(),
            re: p.re,
            im: p.im,
        })
        .collect())
}

pub fn spectrum_cmd(a: &SpectrumArgs, mut run: Run) -> Result<(), CliError> {
    let s = match a.s {
        Some(s) => s,
        None => wave_speed(WaveFamily::S1, &ModelParams::sharp(a.kappa, a.alpha)?),
    };
    if !(a.kappa > 0.0) {
        return Err(CliError::Domain(format!("kappa must be positive, got {}", a.kappa)));
    }
    run.param("kind", format!("{:?}", a.kind).to_lowercase());
    run.param("s", s);
    run.param("kappa", a.kappa);
    let rows = match a.kind {
        SpectrumKind::Essential => {
            let [line, parabola] = fredholm_borders(s, a.kappa, (a.mu_min, a.mu_max), a.samples)?;
            run.param("mu_range", (a.mu_min, a.mu_max));
            curve_rows(&[&line, &parabola])
        }
        SpectrumKind::Absolute => {
            let abs = absolute_spectrum_closed(s, a.kappa, a.l1_min, a.samples)?;
            let mut rows = curve_rows(&abs.curves());
            run.param("l1_min", a.l1_min);
            run.result("rightmost", -s * s / (4.0 * a.kappa));
            if a.numeric {
                let num = numeric_rows(s, a.kappa, a.l1_min)?;
                let right = num.iter().map(|r| r.re).fold(f64::NEG_INFINITY, f64::max);
                run.result("numeric_points", num.len());
                run.result("numeric_rightmost", right);
                rows.extend(num);
            }
            rows
        }
        SpectrumKind::Weights => {
            let w = ideal_weights(s, a.kappa)?;
            let max_re = weighted_border_max_real(s, a.kappa, w, (a.mu_min, a.mu_max), a.samples);
            println!("eta_minus = {}, eta_plus = {}, weighted border max Re = {max_re}", w.eta_minus, w.eta_plus);
            run.result("weights", w);
            run.result("weighted_border_max_real", max_re);
            vec![
                CurveRow { label: "eta-minus".into(), re: w.eta_minus, im: 0.0 },
                CurveRow { label: "eta-plus".into(), re: w.eta_plus, im: 0.0 },
                CurveRow { label: "weighted-border-max-real".into(), re: max_re, im: 0.0 },
            ]
        }
    };
    run.write_csv(&a.out, rows)?;
    run.finish_beside(&a.out)?;
    Ok(())
}

#[derive(Serialize)]
pub struct EvansRow {
    pub re_lambda: f64,
    pub im_lambda: f64,
    #[serde(rename = "re_D")]
    pub re_d: f64,
    #[serde(rename = "im_D")]
    pub im_d: f64,
    #[serde(rename = "logscale_D")]
    pub logscale_d: f64,
}

impl EvansRow {
    pub fn new(l: Complex64, d: &ScaledComplex) -> Self {
        Self {
            re_lambda: l.re,
            im_lambda: l.im,
            re_d: d.mantissa().re,
            im_d: d.mantissa().im,
            logscale_d: d.log_scale(),
        }
    }
}

pub fn evans_config(a: &EvansArgs) -> EvansConfig {
    let base = EvansConfig::for_family(a.wave.family);
    EvansConfig {
        z_start: a.z_start.unwrap_or(base.z_start),
        ode_rel_tol: a.rtol,
        ode_abs_tol: a.atol,
        renorm_threshold: a.renorm,
        contour_samples_init: a.samples.unwrap_or(base.contour_samples_init),
        ..base
    }
}

fn contour(a: &EvansArgs) -> Result<Contour, CliError> {
    match a.contour {
        ContourKind::C1 => Ok(Contour::C1 { d_l: a.dl, r: a.r }),
        ContourKind::C2 => Ok(Contour::C2 { r_i: a.ri, r_o: a.ro }),
        ContourKind::Real => Err(CliError::Usage("a real segment is not a closed contour; use c1 or c2".into())),
    }
}

fn record(run: &mut Run, a: &EvansArgs, cfg: &EvansConfig) {
    run.param("family", a.wave.family);
    run.param("kappa", a.wave.kappa);
    run.param("alpha", a.wave.alpha);
    run.param("contour", format!("{:?}", a.contour).to_lowercase());
    match a.contour {
        ContourKind::C1 => run.param("c1", (a.dl, a.r)),
        ContourKind::C2 => run.param("c2", (a.ri, a.ro)),
        ContourKind::Real => run.param("segment", (a.from, a.to)),
    }
    run.param("evans", cfg);
}

pub fn winding_cmd(a: &EvansArgs, out: Option<&std::path::Path>, mut run: Run) -> Result<(), CliError> {
    let cfg = evans_config(a);
    let c = contour(a)?;
    let problem = EvansProblem::new(a.wave.family, params(&a.wave)?, cfg)?;
    let report = winding_number_with(&problem, &c)?;
    println!("{}", report.winding);
    if let Some(out) = out {
        record(&mut run, a, &cfg);
        run.result("winding", report.winding);
        run.result("raw", report.raw);
        run.result("samples", report.samples);
        run.result("min_relative_abs", report.min_relative_abs);
        run.write_json(out, &run.manifest.results.clone())?;
        run.finish_beside(out)?;
    }
    Ok(())
}

pub fn scan_cmd(a: &EvansArgs, out: &std::path::Path, mut run: Run) -> Result<(), CliError> {
    let cfg = evans_config(a);
    let p = params(&a.wave)?;
    let samples = a.samples.unwrap_or(400);
    let rows: Vec<EvansRow> = match a.contour {
        ContourKind::Real => {
            if !(a.to > a.from) {
                return Err(CliError::Usage(format!("need --to > --from, got [{}, {}]", a.from, a.to)));
            }
            let problem = EvansProblem::new(a.wave.family, p, cfg)?;
            real_axis_scan(&problem, a.from, a.to, samples)?
                .iter()
                .map(|(x, d)| EvansRow::new(Complex64::new(*x, 0.0), d))
                .collect()
        }
        _ => evans_scan(&contour(a)?, a.wave.family, &p, &cfg, samples)?
            .iter()
            .map(|(l, d)| EvansRow::new(*l, d))
            .collect(),
    };
    record(&mut run, a, &cfg);
    run.param("samples", samples);
    run.write_csv(out, rows)?;
    run.finish_beside(out)?;
    Ok(())
}
