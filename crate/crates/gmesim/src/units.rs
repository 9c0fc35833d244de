//! Unit system: natural units `c = ħ = 1` with a configurable length scale.
//!
//! One internal length unit corresponds to `length_scale_m` meters. With
//! `c = ħ = 1` every other dimension follows:
//!
//! * time `t_int = t_SI · c / l₀` (one internal unit of time is the light
//!   crossing time of `l₀`),
//! * mass `m_int = m_SI · c · l₀ / ħ` (mass is an inverse length),
//! * Newton's constant is a squared length, `G_int = (l_P / l₀)²` with the
//!   Planck length `l_P = √(G ħ / c³)`.
//!
//! For the default BMV scale `l₀ = 10⁻⁶ m`, a window of 1 s is `≈ 3·10¹⁴`
//! internal units and `G_int ≈ 2.6·10⁻⁵⁸`; f64 holds these comfortably.

use serde::{Deserialize, Serialize};

use crate::error::{GmeError, GmeResult};

/// CODATA values for the SI side of the conversions.
pub const C_SI: f64 = 299_792_458.0; // m / s
pub const HBAR_SI: f64 = 1.054_571_817e-34; // J s
pub const G_NEWTON_SI: f64 = 6.674_30e-11; // m^3 / (kg s^2)

/// Conversion context between SI and internal units.
///
/// `c` and `ħ` are pinned to 1 internally; they are stored only so reports
/// can echo the convention. `g_newton` is the internal (dimensionless in
/// units of `l₀²`) gravitational constant actually used by the models.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct UnitsSystem {
    /// Meters per internal length unit.
    pub length_scale_m: f64,
    /// Internal Newton constant, `(l_P / l₀)²` when derived from SI.
    pub g_newton: f64,
    /// Speed of light in internal units; always 1.
    pub c: f64,
    /// Reduced Planck constant in internal units; always 1.
    pub hbar: f64,
}

impl UnitsSystem {
    /// Internal units with the physical (SI) Newton constant expressed at the
    /// given length scale.
    pub fn si(length_scale_m: f64) -> GmeResult<Self> {
        let mut u = UnitsSystem::with_g(length_scale_m, 0.0)?;
        let planck_len = (G_NEWTON_SI * HBAR_SI / C_SI.powi(3)).sqrt();
        u.g_newton = (planck_len / length_scale_m).powi(2);
        Ok(u)
    }

    /// Internal units with an explicitly chosen internal Newton constant
    /// (useful for scaling studies where `G` is swept artificially).
    pub fn with_g(length_scale_m: f64, g_newton: f64) -> GmeResult<Self> {
        if !(length_scale_m.is_finite() && length_scale_m > 0.0) {
            return Err(GmeError::Validation(format!(
                "length scale must be a positive finite number of meters, got {length_scale_m}"
            )));
        }
        if !(g_newton.is_finite() && g_newton >= 0.0) {
            return Err(GmeError::Validation(format!(
                "internal Newton constant must be finite and non-negative, got {g_newton}"
            )));
        }
        Ok(UnitsSystem { length_scale_m, g_newton, c: 1.0, hbar: 1.0 })
    }

    pub fn length_to_internal(&self, meters: f64) -> f64 {
        meters / self.length_scale_m
    }

    pub fn length_to_si(&self, internal: f64) -> f64 {
        internal * self.length_scale_m
    }

    pub fn time_to_internal(&self, seconds: f64) -> f64 {
        seconds * C_SI / self.length_scale_m
    }

    pub fn time_to_si(&self, internal: f64) -> f64 {
        internal * self.length_scale_m / C_SI
    }

    pub fn mass_to_internal(&self, kg: f64) -> f64 {
        kg * C_SI * self.length_scale_m / HBAR_SI
    }

    pub fn mass_to_si(&self, internal: f64) -> f64 {
        internal * HBAR_SI / (C_SI * self.length_scale_m)
    }
}
