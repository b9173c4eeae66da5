//! Flat `key = value` configuration files.
//!
//! Blank lines and `#` comments are ignored. Keys missing from a file keep
//! their default value; unknown keys are rejected.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{MachineParams, MeasurementNoise};
use crate::units::{Frequency, Temperature};

/// The bundled default file.
pub const DEFAULT_CONFIG: &str = include_str!("../data/operating_point.conf");

pub const KEYS: [&str; 11] = [
    "omega_c_ghz",
    "omega_h_ghz",
    "kappa_c_ghz",
    "kappa_h_ghz",
    "ej_ghz",
    "lambda_c",
    "lambda_h",
    "delta_i_pa",
    "delta_th_mk",
    "tc_mk",
    "g_fit_ratio",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub machine: MachineParams,
    pub noise: MeasurementNoise,
    pub tc: Temperature,
    /// Effective bilinear coupling as a fraction of E_J.
    pub g_fit_ratio: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            machine: MachineParams::operating_point(),
            noise: MeasurementNoise::operating_point(),
            tc: Temperature::from_mk(15.0),
            g_fit_ratio: 0.125,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|_| {
                Error::Config(format!("line {}: `{}` is not a number", lineno + 1, value.trim()))
            })?;
            cfg.set(key, value)
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn set(&mut self, key: &str, v: f64) -> std::result::Result<(), String> {
        let m = &mut self.machine;
        match key {
            "omega_c_ghz" => m.omega_c = Frequency::from_ghz(v),
            "omega_h_ghz" => m.omega_h = Frequency::from_ghz(v),
            "kappa_c_ghz" => m.kappa_c = Frequency::from_ghz(v),
            "kappa_h_ghz" => m.kappa_h = Frequency::from_ghz(v),
            "ej_ghz" => m.ej = Frequency::from_ghz(v),
            "lambda_c" => m.lambda_c = v,
            "lambda_h" => m.lambda_h = v,
            "delta_i_pa" => self.noise.delta_i_pa = v,
            "delta_th_mk" => self.noise.delta_th_mk = v,
            "tc_mk" => self.tc = Temperature::from_mk(v),
            "g_fit_ratio" => self.g_fit_ratio = v,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.machine.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.noise.validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(self.tc.value() > 0.0) {
            return Err(Error::Config("tc_mk must be positive".into()));
        }
        if !(self.g_fit_ratio > 0.0) {
            return Err(Error::Config("g_fit_ratio must be positive".into()));
        }
        Ok(())
    }

    /// Effective coupling g of the bilinear model.
    pub fn g(&self) -> Frequency {
        self.machine.ej * self.g_fit_ratio
    }

    /// Renders the configuration back into the file format.
    pub fn to_kv(&self) -> String {
        let m = &self.machine;
        let values = [
            m.omega_c.ghz(),
            m.omega_h.ghz(),
            m.kappa_c.ghz(),
            m.kappa_h.ghz(),
            m.ej.ghz(),
            m.lambda_c,
            m.lambda_h,
            self.noise.delta_i_pa,
            self.noise.delta_th_mk,
            self.tc.mk(),
            self.g_fit_ratio,
        ];
        let mut out = String::new();
        for (k, v) in KEYS.iter().zip(values) {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_file_is_operating_point() {
        let cfg = Config::parse(DEFAULT_CONFIG).unwrap();
        let d = Config::default();
        assert!((cfg.machine.omega_h.ghz() - 8.5).abs() < 1e-12);
        assert!((cfg.machine.kappa_c / d.machine.kappa_c - 1.0).abs() < 1e-12);
        assert!((cfg.g().ghz() - 0.025).abs() < 1e-12);
        assert!((cfg.tc.mk() - 15.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_key_is_an_error() {
        let err = Config::parse("omega_c_ghz = 1\nfoo = 2\n").unwrap_err();
        assert!(matches!(err, Error::Config(ref s) if s.contains("foo")));
    }

    #[test]
    fn malformed_lines() {
        assert!(Config::parse("omega_c_ghz 1").is_err());
        assert!(Config::parse("omega_c_ghz = abc").is_err());
        assert!(Config::parse("kappa_c_ghz = -1").is_err());
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let cfg = Config::parse("# only the noise\ndelta_i_pa = 0.1 # pA\n").unwrap();
        assert_eq!(cfg.noise.delta_i_pa, 0.1);
        assert_eq!(cfg.machine, MachineParams::operating_point());
    }

    #[test]
    fn kv_round_trip() {
        let cfg = Config::parse("ej_ghz = 0.3\ntc_mk = 22.5\n").unwrap();
        let again = Config::parse(&cfg.to_kv()).unwrap();
        assert!((again.machine.ej / cfg.machine.ej - 1.0).abs() < 1e-12);
        assert!((again.tc.mk() - 22.5).abs() < 1e-9);
    }
}
