//! Simulation toolkit for a quantum thermal machine used as a low-temperature
//! thermometer: steady states of a two-oscillator Josephson engine, the
//! Carnot-point thermometry protocol, and Fisher-information bounds.

pub mod config;
pub mod error;
pub mod exec;
pub mod fock;
pub mod gaussian;
pub mod metrology;
pub mod params;
pub mod protocol;
pub mod units;

pub use config::Config;
pub use error::{Error, Result};
pub use params::{BathState, MachineParams, MeasurementNoise};
pub use units::{Current, Frequency, Power, Temperature};
