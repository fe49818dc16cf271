//! The maps between wave families.
//!
//! `T1` keeps the polarity, replaces the density by `R/(2R - 1)` (so that
//! `1/R + 1/R' = 2`), flips the speed and reparametrises the profile by
//! `zbar(z) = int_0^z (1 - 2 R)`. `T2~` reflects the profile, `z -> -z`, and
//! maps `A -> 1 - A`, `s -> 1 - s`, `alpha -> 1 - alpha`.

use super::wave::{TravellingWaveState, WaveSolution};
use super::ModelError;

/// Discretisation of the `T1` coordinate map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct T1Options {
    /// Half-width of the tabulated window in the source coordinate.
    pub z_max: f64,
    /// Cell size of the table; each cell is integrated with 4-point
    /// Gauss-Legendre quadrature.
    pub cell: f64,
}

impl Default for T1Options {
    fn default() -> Self {
        Self {
            z_max: 40.0,
            cell: 0.01,
        }
    }
}

pub fn apply_t2_tilde(solution: &WaveSolution) -> WaveSolution {
    match solution.reflection_source() {
        Some(inner) => inner.clone(),
        None => WaveSolution::reflected(solution.clone()),
    }
}

pub fn apply_t1(solution: &WaveSolution) -> Result<WaveSolution, ModelError> {
    apply_t1_with(solution, T1Options::default())
}

pub fn apply_t1_with(solution: &WaveSolution, opts: T1Options) -> Result<WaveSolution, ModelError> {
    if !solution.family().has_unit_rest_density() {
        // S3/S4 carry the reflected flux; conjugate with the reflection.
        let mirrored = apply_t2_tilde(solution);
        let mapped = apply_t1_with(&mirrored, opts)?;
        return Ok(apply_t2_tilde(&mapped));
    }
    let table = RemappedProfile::build(solution.clone(), opts)?;
    Ok(WaveSolution::remapped(
        solution.family().t1_image(),
        *solution.params(),
        -solution.speed(),
        -solution.flux(),
        table,
    ))
}

const GL_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_8,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_8,
];

/// Tabulated inverse of the `T1` coordinate map around a source wave.
#[derive(Debug)]
pub(crate) struct RemappedProfile {
    source: WaveSolution,
    z0: f64,
    h: f64,
    /// `zbar` at the nodes `z0 + k h`, monotone in `k`.
    zbar: Vec<f64>,
    /// Sign of `1 - 2R`, constant on the table.
    orientation: f64,
}

impl RemappedProfile {
    fn build(source: WaveSolution, opts: T1Options) -> Result<Self, ModelError> {
        if !(opts.z_max > 0.0 && opts.cell > 0.0 && opts.cell <= opts.z_max) {
            return Err(ModelError::InvalidParams(format!("bad T1 options {opts:?}")));
        }
        let half = (opts.z_max / opts.cell).round().max(1.0) as usize;
        let h = opts.z_max / half as f64;
        let n = 2 * half + 1;
        let z0 = -opts.z_max;
        let slope = |z: f64| 1.0 - 2.0 * source.r_at(z);

        let orientation = slope(z0).signum();
        for k in 0..n {
            let z = z0 + k as f64 * h;
            let d = slope(z);
            if !(d * orientation > 1e-12) {
                return Err(ModelError::NonMonotoneMap(format!(
                    "1 - 2R changes sign near z = {z:.4} (R = {:.6}); the density crosses 1/2",
                    source.r_at(z)
                )));
            }
        }

        let cell_integral = |a: f64, b: f64| {
            let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
            GL_NODES
                .iter()
                .zip(GL_WEIGHTS)
                .map(|(x, w)| w * slope(m + r * x))
                .sum::<f64>()
                * r
        };
        let mut zbar = vec![0.0; n];
        for k in (half + 1)..n {
            let a = z0 + (k - 1) as f64 * h;
            zbar[k] = zbar[k - 1] + cell_integral(a, a + h);
        }
        for k in (0..half).rev() {
            let a = z0 + k as f64 * h;
            zbar[k] = zbar[k + 1] - cell_integral(a, a + h);
        }

        Ok(Self {
            source,
            z0,
            h,
            zbar,
            orientation,
        })
    }

    /// Source coordinate `z` with `zbar(z) = target`.
    fn preimage(&self, target: f64) -> f64 {
        let n = self.zbar.len();
        let node = |k: usize| self.z0 + k as f64 * self.h;
        // position along the table in increasing-zbar order
        let key = |v: f64| v * self.orientation;
        let t = key(target);
        let first = key(self.zbar[0]);
        let last = key(self.zbar[n - 1]);
        let slope = |z: f64| 1.0 - 2.0 * self.source.r_at(z);
        if t <= first {
            return node(0) + (target - self.zbar[0]) / slope(node(0));
        }
        if t >= last {
            return node(n - 1) + (target - self.zbar[n - 1]) / slope(node(n - 1));
        }
        let k = self.zbar.partition_point(|&v| key(v) <= t).clamp(1, n - 1) - 1;
        let (za, zb) = (node(k), node(k + 1));
        let (fa, fb) = (self.zbar[k], self.zbar[k + 1]);
        let mut z = za + (target - fa) / (fb - fa) * self.h;
        for _ in 0..12 {
            let (m, r) = (0.5 * (za + z), 0.5 * (z - za));
            let integral: f64 = GL_NODES
                .iter()
                .zip(GL_WEIGHTS)
                .map(|(x, w)| w * slope(m + r * x))
                .sum::<f64>()
                * r;
            let f = fa + integral - target;
            let step = f / slope(z);
            z = (z - step).clamp(za, zb);
            if step.abs() <= 1e-15 * (1.0 + z.abs()) {
                break;
            }
        }
        z
    }

    pub(crate) fn state_at(&self, zbar: f64) -> TravellingWaveState {
        let st = self.source.state_at(self.preimage(zbar));
        TravellingWaveState::new(st.r / (2.0 * st.r - 1.0), st.a)
    }

    pub(crate) fn motile_at(&self, zbar: f64) -> bool {
        if zbar == 0.0 {
            return false;
        }
        self.source.motile_at(self.preimage(zbar))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{wave_speed, ModelParams, WaveFamily};

    fn p(k: f64, a: f64) -> ModelParams {
        ModelParams::sharp(k, a).unwrap()
    }

    #[test]
    fn t1_maps_s1_to_s2() {
        let q = p(1.0, 0.2);
        let s1 = WaveSolution::new(WaveFamily::S1, q).unwrap();
        let s2 = WaveSolution::new(WaveFamily::S2, q).unwrap();
        let m = apply_t1(&s1).unwrap();
        assert_eq!(m.family(), WaveFamily::S2);
        assert_eq!(m.speed(), wave_speed(WaveFamily::S2, &q));
        assert_eq!(m.speed(), 2.0);
        for i in -100..=100 {
            let z = i as f64 * 0.17;
            let (a, b) = (m.state_at(z), s2.state_at(z));
            assert!((a.r - b.r).abs() < 1e-8, "z={z}: {} vs {}", a.r, b.r);
            assert!((a.a - b.a).abs() < 1e-8, "z={z}: {} vs {}", a.a, b.a);
        }
        // far tail where R = 1 is a fixed point of the density map
        assert!((m.r_at(80.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn t1_refuses_density_below_half() {
        // s1 = -0.65, R(+inf) = 0.39 < 1/2
        let s1 = WaveSolution::new(WaveFamily::S1, p(1.0, 0.7)).unwrap();
        assert!(matches!(apply_t1(&s1), Err(ModelError::NonMonotoneMap(_))));
    }

    #[test]
    fn t2_tilde_is_an_involution() {
        let q = p(1.0, 0.2);
        let s1 = WaveSolution::new(WaveFamily::S1, q).unwrap();
        let r = apply_t2_tilde(&s1);
        assert_eq!(r.family(), WaveFamily::S3);
        assert_eq!(r.speed(), 3.0);
        assert!((r.params().alpha - 0.8).abs() < 1e-15);
        assert!((r.a_at(0.0) - 0.8).abs() < 1e-15);
        let back = apply_t2_tilde(&r);
        assert!(back.is_closed_form());
        assert_eq!(back.speed(), s1.speed());
        assert_eq!(back.params(), s1.params());
        for i in -20..=20 {
            let z = i as f64 * 0.5;
            assert_eq!(back.state_at(z), s1.state_at(z));
        }
    }

    #[test]
    fn t1_on_depolarisation_waves() {
        // S3 -> S4 needs s4 < 0: kappa = 1, alpha = 0.7 gives s4 = -0.53
        let q = p(1.0, 0.7);
        let s3 = WaveSolution::new(WaveFamily::S3, q).unwrap();
        let s4 = WaveSolution::new(WaveFamily::S4, q).unwrap();
        let m = apply_t1(&s3).unwrap();
        assert_eq!(m.family(), WaveFamily::S4);
        assert!((m.speed() - s4.speed()).abs() < 1e-14);
        for i in -40..=40 {
            let z = i as f64 * 0.25;
            assert!((m.r_at(z) - s4.r_at(z)).abs() < 1e-8, "z={z}");
            assert!((m.a_at(z) - s4.a_at(z)).abs() < 1e-8, "z={z}");
        }
    }
}
