//! Model parameters, the motility law and the closed-form travelling waves.

mod inverse;
mod transform;
mod wave;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use inverse::{g_fn, g_inv, g_inv_with, h_fn, h_inv, h_inv_with, InverseOptions};
pub use transform::{apply_t1, apply_t1_with, apply_t2_tilde, T1Options};
pub use wave::{
    profile, travelling_wave_rhs, travelling_wave_rhs_with_flux, velocity_profile, wave_speed,
    TravellingWaveState, WaveSolution,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("argument {value} outside the domain of {function}")]
    Domain { function: &'static str, value: f64 },
    #[error("{family} is unphysical for kappa={kappa}, alpha={alpha}: {reason}")]
    Unphysical {
        family: WaveFamily,
        kappa: f64,
        alpha: f64,
        reason: String,
    },
    #[error("travelling-wave equation is singular for speed s = 0")]
    SingularSpeed,
    #[error("coordinate map of T1 is not monotone: {0}")]
    NonMonotoneMap(String),
    #[error("inversion did not converge for c = {0}")]
    NoConvergence(f64),
}

/// Physical parameters of the model plus the smoothing width of the motility
/// switch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Contractility (spring stiffness), `kappa > 0`.
    pub kappa: f64,
    /// Threshold polarity, `0 < alpha < 1`.
    pub alpha: f64,
    /// Logistic width of the motility switch; zero selects the exact step.
    pub m_eps: f64,
}

impl ModelParams {
    pub fn new(kappa: f64, alpha: f64, m_eps: f64) -> Result<Self, ModelError> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(ModelError::InvalidParams(format!(
                "kappa must be positive, got {kappa}"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(ModelError::InvalidParams(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        if !(m_eps >= 0.0) || !m_eps.is_finite() {
            return Err(ModelError::InvalidParams(format!(
                "m_eps must be non-negative, got {m_eps}"
            )));
        }
        Ok(Self { kappa, alpha, m_eps })
    }

    /// Parameters with the exact step motility.
    pub fn sharp(kappa: f64, alpha: f64) -> Result<Self, ModelError> {
        Self::new(kappa, alpha, 0.0)
    }

    pub fn with_m_eps(self, m_eps: f64) -> Result<Self, ModelError> {
        Self::new(self.kappa, self.alpha, m_eps)
    }

    pub fn with_alpha(self, alpha: f64) -> Result<Self, ModelError> {
        Self::new(self.kappa, alpha, self.m_eps)
    }
}

/// Active migration speed as a function of polarity.
pub fn motility(a: f64, params: &ModelParams) -> f64 {
    if params.m_eps == 0.0 {
        if a > params.alpha {
            1.0
        } else {
            0.0
        }
    } else {
        let x = (a - params.alpha) / params.m_eps;
        // Beyond |x| = 40 the logistic is within 5e-18 of its limit.
        if x > 40.0 {
            1.0
        } else if x < -40.0 {
            0.0
        } else if x >= 0.0 {
            1.0 / (1.0 + (-x).exp())
        } else {
            let e = x.exp();
            e / (1.0 + e)
        }
    }
}

/// Derivative of the smoothed motility. Zero for the step law, whose
/// derivative is a Dirac mass handled separately by the Evans module.
pub fn motility_derivative(a: f64, params: &ModelParams) -> f64 {
    if params.m_eps == 0.0 {
        return 0.0;
    }
    // symmetric form avoids the cancellation in m (1 - m)
    let e = (-((a - params.alpha) / params.m_eps).abs()).exp();
    e / ((1.0 + e) * (1.0 + e) * params.m_eps)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WaveFamily {
    /// Polarisation wave triggered by a departing cell sheet.
    S1,
    /// Polarisation wave caused by a colliding cell sheet.
    S2,
    /// Depolarisation wave due to a departing cell sheet.
    S3,
    /// Depolarisation wave caused by a colliding cell sheet.
    S4,
}

impl WaveFamily {
    pub const ALL: [WaveFamily; 4] = [WaveFamily::S1, WaveFamily::S2, WaveFamily::S3, WaveFamily::S4];

    /// Image under the profile map T1 (departing <-> colliding).
    pub fn t1_image(self) -> Self {
        match self {
            WaveFamily::S1 => WaveFamily::S2,
            WaveFamily::S2 => WaveFamily::S1,
            WaveFamily::S3 => WaveFamily::S4,
            WaveFamily::S4 => WaveFamily::S3,
        }
    }

    /// Image under the reflection map T2 (polarisation <-> depolarisation).
    pub fn t2_image(self) -> Self {
        match self {
            WaveFamily::S1 => WaveFamily::S3,
            WaveFamily::S2 => WaveFamily::S4,
            WaveFamily::S3 => WaveFamily::S1,
            WaveFamily::S4 => WaveFamily::S2,
        }
    }

    /// Families whose travelling-wave reduction carries the mass flux
    /// `R (V - s) = -s` (rest state of unit density at one end).
    pub fn has_unit_rest_density(self) -> bool {
        matches!(self, WaveFamily::S1 | WaveFamily::S2)
    }
}

impl fmt::Display for WaveFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            WaveFamily::S1 => "S1",
            WaveFamily::S2 => "S2",
            WaveFamily::S3 => "S3",
            WaveFamily::S4 => "S4",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for WaveFamily {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "S1" | "1" => Ok(WaveFamily::S1),
            "S2" | "2" => Ok(WaveFamily::S2),
            "S3" | "3" => Ok(WaveFamily::S3),
            "S4" | "4" => Ok(WaveFamily::S4),
            _ => Err(ModelError::InvalidParams(format!("unknown wave family '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Physicality {
    Physical,
    Unphysical(String),
}

impl Physicality {
    pub fn is_physical(&self) -> bool {
        matches!(self, Physicality::Physical)
    }
}

/// S2 needs `s2 > 1` and S4 needs `s4 < 0`; otherwise the wave would require
/// cells to pass through each other.
pub fn validate_physical(family: WaveFamily, params: &ModelParams) -> Physicality {
    let s = wave_speed(family, params);
    match family {
        WaveFamily::S1 | WaveFamily::S3 => Physicality::Physical,
        WaveFamily::S2 if s > 1.0 => Physicality::Physical,
        WaveFamily::S2 => Physicality::Unphysical(format!(
            "wave speed s2 = {s:.6} <= 1 violates the impenetrability of single cells"
        )),
        WaveFamily::S4 if s < 0.0 => Physicality::Physical,
        WaveFamily::S4 => Physicality::Unphysical(format!(
            "wave speed s4 = {s:.6} >= 0 violates the impenetrability of single cells"
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn motility_step_and_logistic() {
        let p = ModelParams::sharp(1.0, 0.5).unwrap();
        assert_eq!(motility(0.0, &p), 0.0);
        assert_eq!(motility(1.0, &p), 1.0);
        assert_eq!(motility(0.5, &p), 0.0);
        let q = p.with_m_eps(0.01).unwrap();
        assert!((motility(0.5, &q) - 0.5).abs() < 1e-15);
        assert!(motility(-100.0, &q) >= 0.0);
        assert!((motility(100.0, &q) - 1.0).abs() < 1e-15);
        assert!((motility_derivative(0.5, &q) - 25.0).abs() < 1e-12);
    }

    #[test]
    fn params_are_validated() {
        assert!(ModelParams::new(0.0, 0.5, 0.0).is_err());
        assert!(ModelParams::new(1.0, 1.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(1.0, 0.5, -1e-3).is_err());
        assert!(ModelParams::new(f64::NAN, 0.5, 0.0).is_err());
    }

    #[test]
    fn physicality_regimes() {
        let p = ModelParams::sharp(1.0, 0.2).unwrap();
        assert!(validate_physical(WaveFamily::S2, &p).is_physical());
        assert!(validate_physical(WaveFamily::S1, &p).is_physical());
        assert!(validate_physical(WaveFamily::S3, &p).is_physical());
        let q = ModelParams::sharp(0.1, 0.8).unwrap();
        match validate_physical(WaveFamily::S2, &q) {
            Physicality::Unphysical(msg) => assert!(msg.contains("impenetrability")),
            Physicality::Physical => panic!("s2 = 0.158 must be unphysical"),
        }
        // s4 = 1 - 0.5 = 0.5 >= 0
        assert!(!validate_physical(WaveFamily::S4, &p).is_physical());
        let r = ModelParams::sharp(1.0, 0.7).unwrap();
        assert!(validate_physical(WaveFamily::S4, &r).is_physical());
    }

    #[test]
    fn family_maps_are_involutions() {
        for f in WaveFamily::ALL {
            assert_eq!(f.t1_image().t1_image(), f);
            assert_eq!(f.t2_image().t2_image(), f);
            assert_eq!(f.to_string().parse::<WaveFamily>().unwrap(), f);
        }
    }
}
