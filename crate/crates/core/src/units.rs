//! Physical constants and the boundary conversions.
//!
//! Internally everything runs with ħ = k_B = 1 and the angular frequency
//! 10⁹ rad/s as the base unit, so a temperature is stored as k_B·T/(ħ·10⁹ s⁻¹)
//! and a charge current as a rate of elementary charges per nanosecond.
//! Laboratory units (GHz, mK, pA, aW, µV) only appear at the edges.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::fmt;

/// Elementary charge (C), exact SI value.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Planck constant (J s), exact SI value.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant (J s).
pub const HBAR: f64 = PLANCK / TAU;
/// Boltzmann constant (J/K), exact SI value.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Internal angular-frequency unit (rad/s).
pub const RATE_UNIT: f64 = 1.0e9;

const MK_TO_INTERNAL: f64 = 1.0e-3 * BOLTZMANN / (HBAR * RATE_UNIT);
const CURRENT_TO_PA: f64 = ELEMENTARY_CHARGE * RATE_UNIT * 1.0e12;
const POWER_TO_AW: f64 = HBAR * RATE_UNIT * RATE_UNIT * 1.0e18;

macro_rules! scalar_newtype {
    ($name:ident) => {
        #[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
        pub struct $name(f64);

        impl $name {
            pub const ZERO: Self = Self(0.0);

            /// Wraps a value already expressed in internal units.
            pub const fn from_internal(v: f64) -> Self {
                Self(v)
            }

            pub const fn value(self) -> f64 {
                self.0
            }

            pub fn abs(self) -> Self {
                Self(self.0.abs())
            }
        }

        impl std::ops::Add for $name {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                Self(self.0 + rhs.0)
            }
        }

        impl std::ops::Sub for $name {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                Self(self.0 - rhs.0)
            }
        }

        impl std::ops::Neg for $name {
            type Output = Self;
            fn neg(self) -> Self {
                Self(-self.0)
            }
        }

        impl std::ops::Mul<f64> for $name {
            type Output = Self;
            fn mul(self, rhs: f64) -> Self {
                Self(self.0 * rhs)
            }
        }

        impl std::ops::Div for $name {
            type Output = f64;
            fn div(self, rhs: Self) -> f64 {
                self.0 / rhs.0
            }
        }
    };
}

scalar_newtype!(Frequency);
scalar_newtype!(Temperature);
scalar_newtype!(Current);
scalar_newtype!(Power);

impl Frequency {
    /// From an ordinary frequency f (GHz); stores ω = 2πf.
    pub fn from_ghz(f: f64) -> Self {
        Self(TAU * f)
    }

    pub fn ghz(self) -> f64 {
        self.0 / TAU
    }

    /// Angular frequency in rad/s.
    pub fn rad_per_s(self) -> f64 {
        self.0 * RATE_UNIT
    }
}

impl Temperature {
    pub fn from_mk(t: f64) -> Self {
        Self(t * MK_TO_INTERNAL)
    }

    pub fn mk(self) -> f64 {
        self.0 / MK_TO_INTERNAL
    }
}

impl Current {
    pub fn from_pa(i: f64) -> Self {
        Self(i / CURRENT_TO_PA)
    }

    pub fn pa(self) -> f64 {
        self.0 * CURRENT_TO_PA
    }
}

impl Power {
    pub fn from_aw(p: f64) -> Self {
        Self(p / POWER_TO_AW)
    }

    pub fn aw(self) -> f64 {
        self.0 * POWER_TO_AW
    }
}

/// Conversion factor from internal current-per-temperature to pA/mK.
pub fn slope_to_pa_per_mk(slope: f64) -> f64 {
    slope * CURRENT_TO_PA * MK_TO_INTERNAL
}

/// Conversion factor from internal (current)² to pA².
pub fn variance_to_pa2(var: f64) -> f64 {
    var * CURRENT_TO_PA * CURRENT_TO_PA
}

impl fmt::Display for Temperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mK", self.mk())
    }
}

impl fmt::Display for Current {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} pA", self.pa())
    }
}
