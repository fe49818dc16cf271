use std::path::PathBuf;

use polarwave::continuum::{find_threshold_alpha, simulate, InitialCondition, SimConfig};
use polarwave::evans::{winding_number_with, Contour, EvansConfig, EvansProblem};
use polarwave::model::{validate_physical, wave_speed, ModelParams, Physicality, WaveFamily};
use polarwave::spectra::{absolute_spectrum_closed, fredholm_borders};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::{Figure, ReproduceArgs};
use crate::error::CliError;
use crate::output::Run;
use crate::sims::{summarise, threshold_config};
use crate::spectral::{curve_rows, numeric_rows};

#[derive(Serialize)]
struct CaseFieldRow {
    alpha: f64,
    kappa: f64,
    t: f64,
    x: f64,
    rho: f64,
    a: f64,
    v: f64,
}

#[derive(Serialize)]
struct ImageRow {
    family: String,
    kappa: f64,
    alpha: f64,
    contour: String,
    re_lambda: f64,
    im_lambda: f64,
    #[serde(rename = "re_D")]
    re_d: f64,
    #[serde(rename = "im_D")]
    im_d: f64,
    #[serde(rename = "logscale_D")]
    logscale_d: f64,
}

fn name(f: Figure) -> &'static str {
    match f {
        Figure::Fig4 => "fig4",
        Figure::Fig5 => "fig5",
        Figure::Fig6 => "fig6",
        Figure::Fig7 => "fig7",
        Figure::Fig8 => "fig8",
        Figure::Fig10 => "fig10",
        Figure::Fig11 => "fig11",
        Figure::Fig12 => "fig12",
        Figure::Fig13 => "fig13",
        Figure::FigB1 => "figB1",
        Figure::FigB2 => "figB2",
    }
}

pub fn reproduce(a: &ReproduceArgs, mut run: Run) -> Result<(), CliError> {
    let fig = name(a.figure);
    let dir = a.out.clone().unwrap_or_else(|| PathBuf::from("figures").join(fig));
    run.param("figure", fig);
    let summary = match a.figure {
        Figure::Fig4 => fig4(a.n, &dir, &mut run)?,
        Figure::Fig5 => fig5(a.n, &dir, &mut run)?,
        Figure::Fig6 => fig6(&a.grids, &dir, &mut run)?,
        Figure::Fig7 => {
            let [line, parabola] = fredholm_borders(-2.0, 1.0, (-3.0, 3.0), 301)?;
            run.write_csv(&dir.join("borders.csv"), curve_rows(&[&line, &parabola]))?;
            json!({ "s": -2.0, "kappa": 1.0, "line_at_mu_0": [-1.0, 0.0], "parabola_vertex": [0.0, 0.0] })
        }
        Figure::Fig8 => {
            let abs = absolute_spectrum_closed(-2.0, 1.0, -10.0, 401)?;
            let mut rows = curve_rows(&abs.curves());
            let num = numeric_rows(-2.0, 1.0, -10.0)?;
            let right = num.iter().map(|r| r.re).fold(f64::NEG_INFINITY, f64::max);
            let n_num = num.len();
            rows.extend(num);
            run.write_csv(&dir.join("absolute_spectrum.csv"), rows)?;
            json!({ "s": -2.0, "kappa": 1.0, "segment": [-3.0, -1.0], "numeric_points": n_num, "numeric_rightmost": right })
        }
        Figure::Fig10 => images(WaveFamily::S1, 1.0, &[0.2, 0.4, 0.5, 0.7], true, &dir, &mut run)?,
        Figure::Fig11 => images(WaveFamily::S1, 1.0, &[0.2, 0.4, 0.5, 0.7], false, &dir, &mut run)?,
        Figure::Fig12 => images(WaveFamily::S1, 5.0, &[0.2, 0.4, 0.5, 0.7], true, &dir, &mut run)?,
        Figure::Fig13 => images(WaveFamily::S1, 5.0, &[0.2, 0.4, 0.5, 0.7], false, &dir, &mut run)?,
        Figure::FigB1 => images(WaveFamily::S2, 1.0, &[0.2, 0.4, 0.5, 0.6], true, &dir, &mut run)?,
        Figure::FigB2 => images(WaveFamily::S2, 1.0, &[0.2, 0.4, 0.5, 0.6], false, &dir, &mut run)?,
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    run.result("summary", &summary);
    run.write_json(&dir.join("summary.json"), &summary)?;
    run.finish(&dir.join("manifest.json"))?;
    Ok(())
}

/// Exact S1 data for small and large `alpha` at two stiffnesses.
fn fig4(n: usize, dir: &std::path::Path, run: &mut Run) -> Result<Value, CliError> {
    let cases = [(0.2, 1.0), (0.2, 5.0), (0.8, 1.0), (0.8, 5.0)];
    run.param("cases_alpha_kappa", cases);
    run.param("n", n);
    let outs = cases
        .par_iter()
        .map(|&(alpha, kappa)| {
            let mut cfg = SimConfig::new(ModelParams::sharp(kappa, alpha)?, n, 10.0, InitialCondition::ExactWave { family: WaveFamily::S1 })?;
            cfg.snapshot_every = 0.25;
            let out = simulate(&cfg)?;
            Ok((cfg, out))
        })
        .collect::<Result<Vec<_>, polarwave::continuum::ContinuumError>>()?;
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for (cfg, out) in &outs {
        let mut sub = Run::new("", &[], None);
        summarise(&mut sub, cfg, out, "");
        let (alpha, kappa) = (cfg.params.alpha, cfg.params.kappa);
        table.push(json!({
            "alpha": alpha,
            "kappa": kappa,
            "exact_speed": wave_speed(WaveFamily::S1, &cfg.params),
            "results": sub.manifest.results,
        }));
        let v = crate::sims::field_rows(&out.snapshots, &cfg.params).filter(|r| (r.t / 2.5 - (r.t / 2.5).round()).abs() < 1e-9);
        rows.extend(v.map(|r| CaseFieldRow { alpha, kappa, t: r.t, x: r.x, rho: r.rho, a: r.a, v: r.v }));
    }
    run.write_csv(&dir.join("waves.csv"), rows)?;
    Ok(json!({ "runs": table }))
}

/// Step data below and above the threshold polarity.
fn fig5(n: usize, dir: &std::path::Path, run: &mut Run) -> Result<Value, CliError> {
    let tc = threshold_config(1.0, 16.0, None);
    run.param("threshold", tc);
    run.param("n", n);
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for alpha in [0.5, 0.9] {
        let mut cfg = tc.sim_config(alpha, n)?;
        cfg.snapshot_every = 1.0;
        let out = simulate(&cfg)?;
        let outcome = tc.run(alpha, n)?;
        table.push(json!({ "alpha": alpha, "outcome": outcome }));
        let kappa = cfg.params.kappa;
        rows.extend(
            crate::sims::field_rows(&out.snapshots, &cfg.params).map(|r| CaseFieldRow { alpha, kappa, t: r.t, x: r.x, rho: r.rho, a: r.a, v: r.v }),
        );
    }
    run.write_csv(&dir.join("steps.csv"), rows)?;
    Ok(json!({ "runs": table }))
}

fn fig6(grids: &[usize], dir: &std::path::Path, run: &mut Run) -> Result<Value, CliError> {
    let tc = threshold_config(1.0, 16.0, None);
    run.param("threshold", tc);
    run.param("grids", grids);
    let est = find_threshold_alpha(&tc, grids)?;
    run.write_csv(&dir.join("threshold.csv"), &est)?;
    Ok(json!({ "estimates": est }))
}

/// Images of C1 (`encloses = true`) or C2 under the Evans function, with
/// their winding numbers. Unphysical or singular parameter sets are listed
/// as skipped.
fn images(family: WaveFamily, kappa: f64, alphas: &[f64], encloses: bool, dir: &std::path::Path, run: &mut Run) -> Result<Value, CliError> {
    let (contour, label) = if encloses {
        (Contour::C1 { d_l: -0.05, r: 0.1 }, "c1")
    } else {
        (Contour::C2 { r_i: 0.1, r_o: 5.0 }, "c2")
    };
    let cfg = EvansConfig::for_family(family);
    run.param("family", family);
    run.param("kappa", kappa);
    run.param("alphas", alphas);
    run.param("contour", format!("{contour:?}"));
    run.param("evans", cfg);
    let mut rows = Vec::new();
    let mut table = Vec::new();
    for &alpha in alphas {
        let p = ModelParams::sharp(kappa, alpha)?;
        let s = wave_speed(family, &p);
        if let Physicality::Unphysical(reason) = validate_physical(family, &p) {
            table.push(json!({ "alpha": alpha, "speed": s, "skipped": reason }));
            continue;
        }
        let problem = EvansProblem::new(family, p, cfg)?;
        let report = winding_number_with(&problem, &contour)?;
        let n = 400;
        let samples = (0..=n)
            .into_par_iter()
            .map(|k| {
                let l = contour.point(k as f64 / n as f64);
                problem.det(l).map(|d| (l, d))
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.extend(samples.iter().map(|(l, d)| ImageRow {
            family: family.to_string(),
            kappa,
            alpha,
            contour: label.into(),
            re_lambda: l.re,
            im_lambda: l.im,
            re_d: d.mantissa().re,
            im_d: d.mantissa().im,
            logscale_d: d.log_scale(),
        }));
        table.push(json!({ "alpha": alpha, "speed": s, "winding": report.winding, "raw": report.raw, "samples": report.samples }));
    }
    run.write_csv(&dir.join(format!("evans_{label}.csv")), rows)?;
    Ok(json!({ "family": family, "kappa": kappa, "contour": label, "cases": table }))
}
