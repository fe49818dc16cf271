use num_complex::Complex64 as C64;

/// `mantissa * exp(log_scale)` with `0.5 <= |mantissa| <= 2` or a zero
/// mantissa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledComplex {
    mantissa: C64,
    log_scale: f64,
}

impl ScaledComplex {
    pub fn zero() -> Self {
        Self {
            mantissa: C64::new(0.0, 0.0),
            log_scale: 0.0,
        }
    }

    /// Normalised representation of `value * exp(log_scale)`.
    pub fn new(value: C64, log_scale: f64) -> Self {
        let n = value.norm();
        if n == 0.0 || !n.is_finite() {
            return Self {
                mantissa: if n == 0.0 { C64::new(0.0, 0.0) } else { value },
                log_scale: if n == 0.0 { 0.0 } else { log_scale },
            };
        }
        let e = n.log2().round();
        Self {
            mantissa: value / e.exp2(),
            log_scale: log_scale + e * std::f64::consts::LN_2,
        }
    }

    pub fn from_complex(value: C64) -> Self {
        Self::new(value, 0.0)
    }

    pub fn mantissa(&self) -> C64 {
        self.mantissa
    }

    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.norm() == 0.0
    }

    /// `ln |value|`; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        self.mantissa.norm().ln() + self.log_scale
    }

    pub fn arg(&self) -> f64 {
        self.mantissa.arg()
    }

    /// Plain complex value; may overflow to infinity or underflow to zero.
    pub fn to_complex(&self) -> C64 {
        self.mantissa * self.log_scale.exp()
    }

    pub fn conj(&self) -> Self {
        Self {
            mantissa: self.mantissa.conj(),
            log_scale: self.log_scale,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::new(self.mantissa * other.mantissa, self.log_scale + other.log_scale)
    }

    /// `|self / other|`, computed without overflow.
    pub fn ratio_abs(&self, other: &Self) -> f64 {
        (self.ln_abs() - other.ln_abs()).exp()
    }
}
