//! Machine parameters, bath states and the equilibrium quantities shared by
//! both engines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{Frequency, Temperature, ELEMENTARY_CHARGE, HBAR};

/// Circuit parameters of the two-oscillator Josephson engine.
///
/// All frequencies are angular frequencies in internal units; use
/// [`Frequency::from_ghz`] to enter ordinary frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MachineParams {
    pub omega_c: Frequency,
    pub omega_h: Frequency,
    pub kappa_c: Frequency,
    pub kappa_h: Frequency,
    /// Josephson energy, expressed as an angular frequency.
    pub ej: Frequency,
    pub lambda_c: f64,
    pub lambda_h: f64,
}

impl MachineParams {
    /// The realistic operating point: Ω_h/2π = 8.5 GHz, Ω_c/2π = 1 GHz,
    /// κ/2π = 0.06 GHz on both modes, E_J/2π = 0.2 GHz, λ = 0.3.
    pub fn operating_point() -> Self {
        Self {
            omega_c: Frequency::from_ghz(1.0),
            omega_h: Frequency::from_ghz(8.5),
            kappa_c: Frequency::from_ghz(0.06),
            kappa_h: Frequency::from_ghz(0.06),
            ej: Frequency::from_ghz(0.2),
            lambda_c: 0.3,
            lambda_h: 0.3,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega_c", self.omega_c.value()),
            ("omega_h", self.omega_h.value()),
            ("kappa_c", self.kappa_c.value()),
            ("kappa_h", self.kappa_h.value()),
            ("lambda_c", self.lambda_c),
            ("lambda_h", self.lambda_h),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.ej.value().is_finite() && self.ej.value() >= 0.0) {
            return Err(Error::Domain(format!(
                "ej must be non-negative, got {}",
                self.ej.value()
            )));
        }
        Ok(())
    }

    /// Same machine with the roles of the two modes exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            omega_c: self.omega_h,
            omega_h: self.omega_c,
            kappa_c: self.kappa_h,
            kappa_h: self.kappa_c,
            ej: self.ej,
            lambda_c: self.lambda_h,
            lambda_h: self.lambda_c,
        }
    }

    /// Critical current I_c = 2e·E_J/ħ, in amperes.
    pub fn critical_current_amps(&self) -> f64 {
        2.0 * ELEMENTARY_CHARGE * self.ej.rad_per_s()
    }

    /// Bias voltage fixed by the resonance condition.
    pub fn bias_voltage(&self) -> Result<f64> {
        resonance_voltage(self)
    }
}

/// Bath temperatures together with the occupations they induce on the two
/// modes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathState {
    pub t_c: Temperature,
    pub t_h: Temperature,
    pub n_c: f64,
    pub n_h: f64,
}

impl BathState {
    pub fn new(params: &MachineParams, t_c: Temperature, t_h: Temperature) -> Result<Self> {
        if t_c.value() < 0.0 || t_h.value() < 0.0 {
            return Err(Error::Domain("bath temperatures must be non-negative".into()));
        }
        Ok(Self {
            t_c,
            t_h,
            n_c: thermal_occupation(params.omega_c, t_c)?,
            n_h: thermal_occupation(params.omega_h, t_h)?,
        })
    }

    /// Baths at the Carnot point for the given cold temperature.
    pub fn at_carnot(params: &MachineParams, t_c: Temperature) -> Result<Self> {
        Self::new(params, t_c, carnot_hot_temperature(t_c, params))
    }

    pub fn swapped(&self) -> Self {
        Self {
            t_c: self.t_h,
            t_h: self.t_c,
            n_c: self.n_h,
            n_h: self.n_c,
        }
    }
}

/// Standard deviations of the two laboratory readings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementNoise {
    pub delta_i_pa: f64,
    pub delta_th_mk: f64,
}

impl MeasurementNoise {
    pub fn operating_point() -> Self {
        Self {
            delta_i_pa: 0.3,
            delta_th_mk: 10.0,
        }
    }

    pub fn none() -> Self {
        Self {
            delta_i_pa: 0.0,
            delta_th_mk: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta_i_pa >= 0.0 && self.delta_th_mk >= 0.0) {
            return Err(Error::Domain("measurement noise must be non-negative".into()));
        }
        Ok(())
    }
}

/// Bose-Einstein occupation 1/(exp(ħω/k_BT) − 1).
pub fn thermal_occupation(omega: Frequency, t: Temperature) -> Result<f64> {
    if !(omega.value() > 0.0) {
        return Err(Error::Domain(format!(
            "mode frequency must be positive, got {}",
            omega.value()
        )));
    }
    if t.value() < 0.0 {
        return Err(Error::Domain(format!("negative temperature {}", t.value())));
    }
    if t.value() == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (omega.value() / t.value()).exp_m1())
}

/// Hot temperature at which the Otto and Carnot efficiencies coincide.
pub fn carnot_hot_temperature(t_c: Temperature, params: &MachineParams) -> Temperature {
    t_c * (params.omega_h / params.omega_c)
}

/// V = ħ(Ω_h − Ω_c)/2e in volts.
pub fn resonance_voltage(params: &MachineParams) -> Result<f64> {
    let dw = params.omega_h - params.omega_c;
    if dw.value() < 0.0 {
        return Err(Error::Domain(
            "omega_h below omega_c: no resonant bias for the engine".into(),
        ));
    }
    Ok(HBAR * dw.rad_per_s() / (2.0 * ELEMENTARY_CHARGE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn occupation_at_one_ghz_fifteen_mk() {
        // x = h·1 GHz / (k_B·15 mK) = 1 / (20.8366·0.015)
        let x: f64 = 1.0 / (20.836_619_12 * 0.015);
        let oracle = 1.0 / (x.exp() - 1.0);
        let n = thermal_occupation(Frequency::from_ghz(1.0), Temperature::from_mk(15.0)).unwrap();
        assert!((n - oracle).abs() < 1e-9);
        assert!((n - 0.04251).abs() < 1e-5);
    }

    #[test]
    fn zero_temperature_is_empty() {
        let n = thermal_occupation(Frequency::from_ghz(3.0), Temperature::ZERO).unwrap();
        assert_eq!(n, 0.0);
    }

    #[test]
    fn nonpositive_frequency_rejected() {
        assert!(thermal_occupation(Frequency::ZERO, Temperature::from_mk(1.0)).is_err());
        assert!(thermal_occupation(Frequency::from_ghz(-1.0), Temperature::from_mk(1.0)).is_err());
    }

    #[test]
    fn carnot_point_equalizes_occupations() {
        let n_c = thermal_occupation(Frequency::from_ghz(1.0), Temperature::from_mk(15.0)).unwrap();
        let n_h =
            thermal_occupation(Frequency::from_ghz(8.5), Temperature::from_mk(127.5)).unwrap();
        assert!(((n_c - n_h) / n_c).abs() < 1e-12);
    }

    #[test]
    fn carnot_hot_temperature_examples() {
        let p = MachineParams::operating_point();
        let th = carnot_hot_temperature(Temperature::from_mk(15.0), &p);
        assert!((th.mk() - 127.5).abs() < 1e-9);
        assert!((carnot_hot_temperature(Temperature::from_mk(30.0), &p).mk() - 255.0).abs() < 1e-9);
        let mut q = p;
        q.omega_h = q.omega_c;
        let t = Temperature::from_mk(42.0);
        assert_eq!(carnot_hot_temperature(t, &q), t);
    }

    #[test]
    fn resonance_voltage_operating_point() {
        let v = resonance_voltage(&MachineParams::operating_point()).unwrap();
        let oracle = PLANCK_HZ * 7.5e9 / (2.0 * ELEMENTARY_CHARGE);
        assert!((v - oracle).abs() < 1e-15);
        assert!((v * 1e6 - 15.51).abs() < 0.01);
    }

    const PLANCK_HZ: f64 = 6.626_070_15e-34;

    #[test]
    fn resonance_voltage_degenerate_and_linear() {
        let mut p = MachineParams::operating_point();
        p.omega_h = p.omega_c;
        assert_eq!(resonance_voltage(&p).unwrap(), 0.0);
        let base = MachineParams::operating_point();
        let v1 = resonance_voltage(&base).unwrap();
        let mut doubled = base;
        doubled.omega_h = base.omega_c + (base.omega_h - base.omega_c) * 2.0;
        let v2 = resonance_voltage(&doubled).unwrap();
        assert!((v2 / v1 - 2.0).abs() < 1e-12);
        let mut inverted = base;
        inverted.omega_h = Frequency::from_ghz(0.5);
        assert!(resonance_voltage(&inverted).is_err());
    }

    #[test]
    fn critical_current_si() {
        // 2e·E_J/ħ with E_J/2π = 0.2 GHz is about 402.6 pA.
        let ic = MachineParams::operating_point().critical_current_amps();
        assert!((ic * 1e12 - 402.6).abs() < 0.1);
    }

    proptest! {
        #[test]
        fn occupation_monotone(f in 0.1f64..20.0, t in 10.0f64..500.0, df in 1e-3f64..1.0, dt in 1e-2f64..10.0) {
            let n = |f: f64, t: f64| thermal_occupation(Frequency::from_ghz(f), Temperature::from_mk(t)).unwrap();
            prop_assert!(n(f, t + dt) > n(f, t));
            prop_assert!(n(f + df, t) < n(f, t));
        }

        #[test]
        fn carnot_feedback_equal_occupations(tc in 5.0f64..300.0) {
            let p = MachineParams::operating_point();
            let b = BathState::at_carnot(&p, Temperature::from_mk(tc)).unwrap();
            prop_assert!(((b.n_c - b.n_h) / b.n_c).abs() < 1e-12);
        }
    }
}
