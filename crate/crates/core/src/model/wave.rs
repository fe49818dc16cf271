use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::inverse::{g_fn, g_inv, h_fn, h_inv};
use super::transform::RemappedProfile;
use super::{motility, validate_physical, ModelError, ModelParams, Physicality, WaveFamily};

/// A point `(R, A)` of the travelling-wave phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TravellingWaveState {
    pub r: f64,
    pub a: f64,
}

impl TravellingWaveState {
    pub fn new(r: f64, a: f64) -> Self {
        Self { r, a }
    }
}

/// Closed-form wave speed of each family.
pub fn wave_speed(family: WaveFamily, params: &ModelParams) -> f64 {
    let k = params.kappa;
    let a = params.alpha;
    match family {
        WaveFamily::S1 => -(k * (1.0 / a - 1.0)).sqrt(),
        WaveFamily::S2 => (k * (1.0 / a - 1.0)).sqrt(),
        WaveFamily::S3 => 1.0 + (k * (1.0 / (1.0 - a) - 1.0)).sqrt(),
        WaveFamily::S4 => 1.0 - (k * (1.0 / (1.0 - a) - 1.0)).sqrt(),
    }
}

/// Right-hand side of the travelling-wave ODE for waves that approach the
/// rest state `(R, A) = (1, 0)`, i.e. with mass flux `R (V - s) = -s`.
pub fn travelling_wave_rhs(
    state: TravellingWaveState,
    params: &ModelParams,
    s: f64,
) -> Result<(f64, f64), ModelError> {
    if s == 0.0 {
        return Err(ModelError::SingularSpeed);
    }
    travelling_wave_rhs_with_flux(state, params, s, -s)
}

/// Travelling-wave ODE for a general mass flux `J = R (V - s)`.
///
/// `R' = R^2/kappa ((M(A) - s) R - J)` and `A' = 1 + (s - A) R / J`. With
/// `J = -s` this is the classical form; the depolarisation waves S3/S4 carry
/// `J = 1 - s`.
pub fn travelling_wave_rhs_with_flux(
    state: TravellingWaveState,
    params: &ModelParams,
    s: f64,
    flux: f64,
) -> Result<(f64, f64), ModelError> {
    if flux == 0.0 {
        return Err(ModelError::SingularSpeed);
    }
    let m = motility(state.a, params);
    Ok(rhs_with_motility(state, params.kappa, s, flux, m))
}

fn rhs_with_motility(st: TravellingWaveState, kappa: f64, s: f64, flux: f64, m: f64) -> (f64, f64) {
    let TravellingWaveState { r, a } = st;
    let dr = r * r / kappa * ((m - s) * r - flux);
    let da = 1.0 + (s - a) * r / flux;
    (dr, da)
}

/// Closed-form profile `(R(z), A(z))` of a family.
pub fn profile(
    family: WaveFamily,
    params: &ModelParams,
    z: f64,
) -> Result<TravellingWaveState, ModelError> {
    Ok(WaveSolution::new(family, *params)?.state_at(z))
}

/// `V(z) = s + J / R(z)`; for S1/S2 this is `s (1 - 1/R)`.
pub fn velocity_profile(solution: &WaveSolution, z: f64) -> f64 {
    solution.v_at(z)
}

#[derive(Debug, Clone)]
struct ClosedForm {
    family: WaveFamily,
    s: f64,
    kappa: f64,
    alpha: f64,
    /// `M = g(.)` or `N = h(.)` of the respective family.
    c0: f64,
    /// Density on the constant half-line.
    r_const: f64,
}

impl ClosedForm {
    fn new(family: WaveFamily, params: &ModelParams) -> Result<Self, ModelError> {
        let s = wave_speed(family, params);
        let (c0, r_const) = match family {
            WaveFamily::S1 => {
                let r = s / (s - 1.0);
                (g_fn(r)?, r)
            }
            WaveFamily::S2 => {
                let r = s / (s - 1.0);
                (h_fn(r)?, r)
            }
            WaveFamily::S3 => {
                let r = (s - 1.0) / s;
                (g_fn(r)?, r)
            }
            WaveFamily::S4 => {
                let r = (s - 1.0) / s;
                (h_fn(r)?, r)
            }
        };
        Ok(Self {
            family,
            s,
            kappa: params.kappa,
            alpha: params.alpha,
            c0,
            r_const,
        })
    }

    fn state(&self, z: f64) -> TravellingWaveState {
        let (s, k, al) = (self.s, self.kappa, self.alpha);
        let inv = |res: Result<f64, ModelError>| res.expect("profile inversion at finite z");
        match self.family {
            WaveFamily::S1 => {
                if z < 0.0 {
                    let r = inv(g_inv(self.c0 - z * s / k));
                    TravellingWaveState::new(r, s * al * (1.0 - 1.0 / r))
                } else {
                    TravellingWaveState::new(self.r_const, 1.0 + (al - 1.0) * (z / (s - 1.0)).exp())
                }
            }
            WaveFamily::S2 => {
                if z >= 0.0 {
                    let r = inv(h_inv(self.c0 - z * s / k));
                    TravellingWaveState::new(r, s * al * (1.0 - 1.0 / r))
                } else {
                    TravellingWaveState::new(self.r_const, 1.0 + (al - 1.0) * (z / (s - 1.0)).exp())
                }
            }
            WaveFamily::S3 => {
                if z >= 0.0 {
                    let r = inv(g_inv(self.c0 + (1.0 - s) * z / k));
                    let a = 1.0 + (1.0 - s) * (1.0 - al) * (1.0 / r - 1.0);
                    TravellingWaveState::new(r, a)
                } else {
                    TravellingWaveState::new(self.r_const, al * (z / s).exp())
                }
            }
            WaveFamily::S4 => {
                if z < 0.0 {
                    let r = inv(h_inv(self.c0 + (1.0 - s) * z / k));
                    let a = 1.0 + (1.0 - s) * (1.0 - al) * (1.0 / r - 1.0);
                    TravellingWaveState::new(r, a)
                } else {
                    TravellingWaveState::new(self.r_const, al * (z / s).exp())
                }
            }
        }
    }

    fn motile(&self, z: f64) -> bool {
        match self.family {
            WaveFamily::S1 | WaveFamily::S3 => z > 0.0,
            WaveFamily::S2 | WaveFamily::S4 => z < 0.0,
        }
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Closed(ClosedForm),
    /// `R(z) = R_inner(-z)`, `A(z) = 1 - A_inner(-z)`.
    Reflected(Arc<WaveSolution>),
    Remapped(Arc<RemappedProfile>),
}

/// A travelling wave: family tag, parameters, speed and profile evaluators.
///
/// Profiles are evaluated on demand from closed forms, or through the
/// transformations that relate the families. Values are immutable and cheap
/// to clone.
#[derive(Debug, Clone)]
pub struct WaveSolution {
    family: WaveFamily,
    params: ModelParams,
    speed: f64,
    flux: f64,
    repr: Repr,
}

impl WaveSolution {
    /// Closed-form wave of the given family. Fails for the unphysical S2/S4
    /// regimes, whose density would be negative.
    pub fn new(family: WaveFamily, params: ModelParams) -> Result<Self, ModelError> {
        if let Physicality::Unphysical(reason) = validate_physical(family, &params) {
            return Err(ModelError::Unphysical {
                family,
                kappa: params.kappa,
                alpha: params.alpha,
                reason,
            });
        }
        let closed = ClosedForm::new(family, &params)?;
        let speed = closed.s;
        let flux = if family.has_unit_rest_density() {
            -speed
        } else {
            1.0 - speed
        };
        Ok(Self {
            family,
            params,
            speed,
            flux,
            repr: Repr::Closed(closed),
        })
    }

    pub(super) fn reflected(inner: WaveSolution) -> Self {
        let params = ModelParams {
            alpha: 1.0 - inner.params.alpha,
            ..inner.params
        };
        Self {
            family: inner.family.t2_image(),
            params,
            speed: 1.0 - inner.speed,
            flux: -inner.flux,
            repr: Repr::Reflected(Arc::new(inner)),
        }
    }

    pub(super) fn remapped(
        family: WaveFamily,
        params: ModelParams,
        speed: f64,
        flux: f64,
        table: RemappedProfile,
    ) -> Self {
        Self {
            family,
            params,
            speed,
            flux,
            repr: Repr::Remapped(Arc::new(table)),
        }
    }

    /// The wave this one is a reflection of, if it was built by `apply_t2_tilde`.
    pub(super) fn reflection_source(&self) -> Option<&WaveSolution> {
        match &self.repr {
            Repr::Reflected(inner) => Some(inner),
            _ => None,
        }
    }

    pub fn family(&self) -> WaveFamily {
        self.family
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    /// Mass flux `R (V - s)` through the moving frame.
    pub fn flux(&self) -> f64 {
        self.flux
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.repr, Repr::Closed(_))
    }

    /// Profile at `z`. Panics if `z` is not finite.
    pub fn state_at(&self, z: f64) -> TravellingWaveState {
        assert!(z.is_finite(), "profile evaluated at non-finite z = {z}");
        match &self.repr {
            Repr::Closed(c) => c.state(z),
            Repr::Reflected(inner) => {
                let st = inner.state_at(-z);
                TravellingWaveState::new(st.r, 1.0 - st.a)
            }
            Repr::Remapped(t) => t.state_at(z),
        }
    }

    pub fn r_at(&self, z: f64) -> f64 {
        self.state_at(z).r
    }

    pub fn a_at(&self, z: f64) -> f64 {
        self.state_at(z).a
    }

    pub fn v_at(&self, z: f64) -> f64 {
        self.speed + self.flux / self.r_at(z)
    }

    /// Whether the cells at `z` sit on the motile side of the threshold.
    /// At the threshold itself the step law gives `M(alpha) = 0`.
    pub fn motile_at(&self, z: f64) -> bool {
        match &self.repr {
            Repr::Closed(c) => c.motile(z),
            Repr::Reflected(inner) => {
                // M(1 - A) with threshold 1 - alpha switches on where A < alpha,
                // which is the non-motile side of the inner wave.
                let zi = -z;
                if zi == 0.0 {
                    false
                } else {
                    !inner.motile_at(zi)
                }
            }
            Repr::Remapped(t) => t.motile_at(z),
        }
    }

    /// `(R'(z), A'(z))` from the travelling-wave ODE evaluated on the profile,
    /// with the sharp motility law on the side of the threshold that `z`
    /// lies on.
    pub fn derivative_at(&self, z: f64) -> (f64, f64) {
        let st = self.state_at(z);
        let m = if self.motile_at(z) { 1.0 } else { 0.0 };
        rhs_with_motility(st, self.params.kappa, self.speed, self.flux, m)
    }

    /// Limits `(z -> -inf, z -> +inf)` of the profile.
    pub fn asymptotic_states(&self) -> (TravellingWaveState, TravellingWaveState) {
        let s = self.speed;
        let moving = |r| TravellingWaveState::new(r, 1.0);
        let rest = |r| TravellingWaveState::new(r, 0.0);
        match self.family {
            WaveFamily::S1 => (rest(1.0), moving(s / (s - 1.0))),
            WaveFamily::S2 => (moving(s / (s - 1.0)), rest(1.0)),
            WaveFamily::S3 => (rest((s - 1.0) / s), moving(1.0)),
            WaveFamily::S4 => (moving(1.0), rest((s - 1.0) / s)),
        }
    }

    /// Sampled `(z, R, A, V)` rows on `[z0, z1]` with step `dz`.
    pub fn sample(&self, z0: f64, z1: f64, dz: f64) -> Vec<[f64; 4]> {
        assert!(dz > 0.0 && z1 >= z0);
        let n = ((z1 - z0) / dz + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| {
                let z = z0 + i as f64 * dz;
                let st = self.state_at(z);
                [z, st.r, st.a, self.speed + self.flux / st.r]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(k: f64, a: f64) -> ModelParams {
        ModelParams::sharp(k, a).unwrap()
    }

    #[test]
    fn speeds() {
        let q = p(1.0, 0.2);
        assert!((wave_speed(WaveFamily::S1, &q) + 2.0).abs() < 1e-15);
        assert!((wave_speed(WaveFamily::S2, &q) - 2.0).abs() < 1e-15);
        assert!((wave_speed(WaveFamily::S3, &q) - 1.5).abs() < 1e-15);
        assert!((wave_speed(WaveFamily::S4, &q) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn speed_identities_are_exact() {
        for &k in &[0.1, 1.0, 5.0, 17.0] {
            for &a in &[0.05, 0.2, 0.5, 0.7, 0.93] {
                let q = p(k, a);
                let qb = p(k, 1.0 - a);
                let s1 = wave_speed(WaveFamily::S1, &q);
                assert_eq!(wave_speed(WaveFamily::S2, &q), -s1);
                assert_eq!(
                    wave_speed(WaveFamily::S3, &q),
                    1.0 - wave_speed(WaveFamily::S1, &qb)
                );
                assert_eq!(
                    wave_speed(WaveFamily::S4, &q),
                    1.0 - wave_speed(WaveFamily::S2, &qb)
                );
            }
        }
    }

    #[test]
    fn s1_landmarks() {
        let w = WaveSolution::new(WaveFamily::S1, p(1.0, 0.2)).unwrap();
        assert!((w.a_at(0.0) - 0.2).abs() < 1e-15);
        let far = w.state_at(60.0);
        assert!((far.r - 2.0 / 3.0).abs() < 1e-15);
        assert!((far.a - 1.0).abs() < 1e-8);
        let left = w.state_at(-30.0);
        assert!((left.r - 1.0).abs() < 1e-6 && left.a.abs() < 1e-6);
        assert!((w.v_at(-60.0)).abs() < 1e-12);
        assert!((w.v_at(60.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rhs_fixed_points() {
        for &(k, a) in &[(1.0, 0.2), (5.0, 0.5), (0.3, 0.9)] {
            let q = p(k, a);
            let s = wave_speed(WaveFamily::S1, &q);
            let (dr, da) = travelling_wave_rhs(TravellingWaveState::new(1.0, 0.0), &q, s).unwrap();
            assert_eq!((dr, da), (0.0, 0.0));
            let st = TravellingWaveState::new(s / (s - 1.0), 1.0);
            let (dr, da) = travelling_wave_rhs(st, &q, s).unwrap();
            assert!(dr.abs() < 1e-14 && da.abs() < 1e-14);
        }
        assert!(matches!(
            travelling_wave_rhs(TravellingWaveState::new(1.0, 0.0), &p(1.0, 0.2), 0.0),
            Err(ModelError::SingularSpeed)
        ));
    }

    #[test]
    fn flux_identity_and_positivity() {
        for fam in WaveFamily::ALL {
            for &(k, a) in &[(1.0, 0.2), (1.0, 0.7), (5.0, 0.5)] {
                let Ok(w) = WaveSolution::new(fam, p(k, a)) else { continue };
                for i in -200..=200 {
                    let z = i as f64 * 0.1;
                    let r = w.r_at(z);
                    assert!(r > 0.0);
                    let flux = r * (w.v_at(z) - w.speed());
                    assert!((flux - w.flux()).abs() < 1e-10, "{fam} z={z}");
                }
            }
        }
    }

    #[test]
    fn polarity_monotone() {
        let q = p(1.0, 0.4);
        let w1 = WaveSolution::new(WaveFamily::S1, q).unwrap();
        let w2 = WaveSolution::new(WaveFamily::S2, q).unwrap();
        let zs: Vec<f64> = (-300..=300).map(|i| i as f64 * 0.05).collect();
        for z in zs.windows(2) {
            assert!(w1.a_at(z[1]) >= w1.a_at(z[0]));
            assert!(w2.a_at(z[1]) <= w2.a_at(z[0]));
        }
        assert!((w2.a_at(0.0) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn unphysical_profiles_are_refused() {
        let err = WaveSolution::new(WaveFamily::S2, p(0.1, 0.8)).unwrap_err();
        assert!(err.to_string().contains("impenetrability"));
        assert!(profile(WaveFamily::S4, &p(1.0, 0.2), 0.0).is_err());
    }

    #[test]
    fn asymptotes_match_profiles() {
        for fam in WaveFamily::ALL {
            let Ok(w) = WaveSolution::new(fam, p(2.0, 0.6)) else { continue };
            let (l, r) = w.asymptotic_states();
            let sl = w.state_at(-200.0);
            let sr = w.state_at(200.0);
            assert!((sl.r - l.r).abs() < 1e-9 && (sl.a - l.a).abs() < 1e-9, "{fam}");
            assert!((sr.r - r.r).abs() < 1e-9 && (sr.a - r.a).abs() < 1e-9, "{fam}");
        }
    }
}
