use polarwave::model::{apply_t1, apply_t2_tilde, validate_physical, ModelParams, Physicality, WaveSolution};
use serde::Serialize;

use crate::args::{MapKind, ProfileArgs, TransformArgs, ValidateArgs, WaveArgs};
use crate::error::CliError;
use crate::output::{Range, Run};

#[derive(Serialize)]
struct ProfileRow {
    z: f64,
    #[serde(rename = "R")]
    r: f64,
    #[serde(rename = "A")]
    a: f64,
    #[serde(rename = "V")]
    v: f64,
}

pub fn params(w: &WaveArgs) -> Result<ModelParams, CliError> {
    Ok(ModelParams::sharp(w.kappa, w.alpha)?)
}

fn record_wave(run: &mut Run, w: &WaveArgs) {
    run.param("family", w.family);
    run.param("kappa", w.kappa);
    run.param("alpha", w.alpha);
}

fn rows(wave: &WaveSolution, z: Range) -> Vec<ProfileRow> {
    wave.sample(z.start, z.end, z.step)
        .into_iter()
        .map(|[z, r, a, v]| ProfileRow { z: z + 0.0, r, a: a + 0.0, v: v + 0.0 })
        .collect()
}

pub fn profile(a: &ProfileArgs, mut run: Run) -> Result<(), CliError> {
    let p = params(&a.wave)?;
    if let Physicality::Unphysical(reason) = validate_physical(a.wave.family, &p) {
        if !a.allow_unphysical {
            return Err(CliError::Domain(format!("{reason} (pass --allow-unphysical to sample it anyway)")));
        }
        run.result("unphysical", reason);
    }
    let wave = WaveSolution::new(a.wave.family, p)?;
    record_wave(&mut run, &a.wave);
    run.param("z", a.z);
    run.result("speed", wave.speed());
    run.write_csv(&a.out, rows(&wave, a.z))?;
    run.finish_beside(&a.out)?;
    Ok(())
}

pub fn transform(a: &TransformArgs, mut run: Run) -> Result<(), CliError> {
    let wave = WaveSolution::new(a.wave.family, params(&a.wave)?)?;
    let image = match a.map {
        MapKind::T1 => apply_t1(&wave)?,
        MapKind::T2 => apply_t2_tilde(&wave),
    };
    record_wave(&mut run, &a.wave);
    run.param("map", format!("{:?}", a.map));
    run.param("z", a.z);
    run.result("image_family", image.family());
    run.result("image_alpha", image.params().alpha);
    run.result("image_speed", image.speed());
    println!(
        "{} -> {} at kappa = {}, alpha = {}, speed {}",
        wave.family(),
        image.family(),
        image.params().kappa,
        image.params().alpha,
        image.speed()
    );
    run.write_csv(&a.out, rows(&image, a.z))?;
    run.finish_beside(&a.out)?;
    Ok(())
}

#[derive(Serialize)]
struct Verdict {
    family: String,
    kappa: f64,
    alpha: f64,
    speed: f64,
    physical: bool,
    reason: Option<String>,
}

pub fn validate(a: &ValidateArgs, mut run: Run) -> Result<(), CliError> {
    let p = params(&a.wave)?;
    let speed = polarwave::model::wave_speed(a.wave.family, &p);
    let verdict = validate_physical(a.wave.family, &p);
    let v = Verdict {
        family: a.wave.family.to_string(),
        kappa: p.kappa,
        alpha: p.alpha,
        speed,
        physical: verdict.is_physical(),
        reason: match &verdict {
            Physicality::Unphysical(r) => Some(r.clone()),
            Physicality::Physical => None,
        },
    };
    if let Some(out) = &a.out {
        record_wave(&mut run, &a.wave);
        run.write_json(out, &v)?;
        run.finish_beside(out)?;
    }
    match verdict {
        Physicality::Physical => {
            println!("{} at kappa = {}, alpha = {}: physical (speed {speed})", v.family, p.kappa, p.alpha);
            Ok(())
        }
        Physicality::Unphysical(reason) => Err(CliError::Domain(format!("{} at kappa = {}, alpha = {}: {reason}", v.family, p.kappa, p.alpha))),
    }
}
