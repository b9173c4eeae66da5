//! Fisher-information bounds on the cold temperature and the error of a
//! current measurement.

mod finite;
mod qfi;
mod symplectic;

pub use finite::{central_difference, richardson, Richardson};
pub use qfi::{
    baths_for, carnot_qfi_prefactor, covariance_derivative, cramer_rao, default_step,
    dtc_qfi_closed, error_propagation, qfi_carnot_closed, qfi_fock_sld, qfi_gaussian,
    qfi_sld_oracle, qfi_symplectic_numeric, QfiMethod, QfiResult,
};
pub use symplectic::{omega, symplectic_spectrum, williamson, SymplecticDecomposition, PURITY_MARGIN};

use crate::error::Result;
use crate::gaussian::{current_variance, di_dtc, GaussianParams};
use crate::units::Temperature;

/// Single-shot (ΔT_c) from a current measurement at the Carnot point.
pub fn dtc_current(gp: &GaussianParams, t_c: Temperature) -> Result<Temperature> {
    let t_h = Temperature::from_internal(t_c.value() * gp.omega_h.value() / gp.omega_c.value());
    let baths = baths_for(gp, t_c, t_h)?;
    error_propagation(di_dtc(gp, t_c), current_variance(gp, &baths)?, 1)
}

#[cfg(test)]
mod tests;
