//! Quantum Fisher information for the cold temperature.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::symplectic::{omega, williamson};
use crate::error::{Error, Result};
use crate::fock::{DensityOperator, EngineModel, FockCutoff, FockEngine};
use crate::gaussian::{beta, precision_shape, steady_covariance, CovarianceMatrix, GaussianParams};
use crate::params::{thermal_occupation, BathState, MachineParams};
use crate::units::Temperature;

/// Default finite-difference step in T_c.
pub fn default_step() -> Temperature {
    Temperature::from_mk(1e-3)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QfiMethod {
    ClosedForm,
    SymplecticNumeric,
    SldOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QfiResult {
    /// F_{T_c} in internal units (inverse squared temperature).
    pub fisher_information: f64,
    pub method: QfiMethod,
    /// Finite-difference step, when one was used.
    pub step: Option<Temperature>,
}

impl QfiResult {
    /// F in mK⁻².
    pub fn per_mk2(&self) -> f64 {
        let mk = Temperature::from_mk(1.0).value();
        self.fisher_information * mk * mk
    }

    /// Cramér-Rao bound on ΔT_c for the given number of repetitions.
    pub fn delta_tc(&self, repetitions: u64) -> Result<Temperature> {
        cramer_rao(self.fisher_information, repetitions)
    }
}

/// Bath state for the Gaussian model's own frequencies.
pub fn baths_for(gp: &GaussianParams, t_c: Temperature, t_h: Temperature) -> Result<BathState> {
    Ok(BathState {
        t_c,
        t_h,
        n_c: thermal_occupation(gp.omega_c, t_c)?,
        n_h: thermal_occupation(gp.omega_h, t_h)?,
    })
}

/// Central difference ∂Γ/∂T_c at fixed T_h.
pub fn covariance_derivative(
    gp: &GaussianParams,
    t_c: Temperature,
    t_h: Temperature,
    step: Temperature,
) -> Result<Matrix4<f64>> {
    if !(step.value() > 0.0) || step.value() >= t_c.value() {
        return Err(Error::Domain("finite-difference step must lie in (0, T_c)".into()));
    }
    let plus = steady_covariance(gp, &baths_for(gp, t_c + step, t_h)?)?;
    let minus = steady_covariance(gp, &baths_for(gp, t_c - step, t_h)?)?;
    Ok((plus.matrix() - minus.matrix()) / (2.0 * step.value()))
}

/// Gaussian QFI from Γ and ∂Γ.
///
/// The derivative is carried into the Williamson frame of the base point,
/// Γ̇_S = S Γ̇ Sᵀ, with S held fixed.
pub fn qfi_gaussian(gamma: &CovarianceMatrix, dgamma: &Matrix4<f64>) -> Result<QfiResult> {
    let dec = williamson(gamma)?;
    let s = dec.s;
    let om = omega();
    let gs = s * gamma.matrix() * s.transpose();
    let dgs = s * dgamma * s.transpose();
    let lambda = dec.diagonal();
    let num = om.transpose() * gs * dgs * gs * om + dgs * 0.25;
    let phi_s = Matrix4::from_fn(|i, j| {
        let (li, lj) = (lambda[i], lambda[j]);
        num[(i, j)] / (2.0 * li * li * lj * lj - 0.125)
    });
    let s_inv = s
        .try_inverse()
        .ok_or_else(|| Error::Numerical("symplectic transform is singular".into()))?;
    let phi = s_inv * phi_s * s_inv.transpose();
    let f = (om.transpose() * dgamma * om * phi).trace();
    if f < -1e-9 * (1.0 + dgamma.amax().powi(2)) {
        return Err(Error::Numerical(format!("negative Fisher information {f:.3e}")));
    }
    Ok(QfiResult {
        fisher_information: f.max(0.0),
        method: QfiMethod::SymplecticNumeric,
        step: None,
    })
}

/// Gaussian QFI at (T_c, T_h) with ∂Γ/∂T_c by central differences.
pub fn qfi_symplectic_numeric(
    gp: &GaussianParams,
    t_c: Temperature,
    t_h: Temperature,
    step: Temperature,
) -> Result<QfiResult> {
    let gamma = steady_covariance(gp, &baths_for(gp, t_c, t_h)?)?;
    let dgamma = covariance_derivative(gp, t_c, t_h, step)?;
    let mut r = qfi_gaussian(&gamma, &dgamma)?;
    r.step = Some(step);
    Ok(r)
}

/// The rate-dependent prefactor of the Carnot-point QFI, in units of
/// Ω_c²/(T_c⁴ sinh²(Ω_c/2T_c)).
pub fn carnot_qfi_prefactor(gp: &GaussianParams) -> f64 {
    let (g, kc, kh) = (gp.g.value(), gp.kappa_c.value(), gp.kappa_h.value());
    let g2 = g * g;
    let ks = kc + kh;
    let q = kc * kh + 4.0 * g2;
    kc * kc * (8.0 * g2 * kh * (kc + 2.0 * kh) + kh * kh * ks * ks + 32.0 * g2 * g2) / (4.0 * ks * ks * q * q)
}

/// Closed-form QFI at the Carnot point.
pub fn qfi_carnot_closed(gp: &GaussianParams, t_c: Temperature) -> QfiResult {
    let (w, t) = (gp.omega_c.value(), t_c.value());
    let s = (w / (2.0 * t)).sinh();
    QfiResult {
        fisher_information: carnot_qfi_prefactor(gp) * w * w / (t.powi(4) * s * s),
        method: QfiMethod::ClosedForm,
        step: None,
    }
}

/// Optimal single-shot error β·(T_c²/Ω_c)·sinh(Ω_c/2T_c).
pub fn dtc_qfi_closed(gp: &GaussianParams, t_c: Temperature) -> Result<Temperature> {
    let b = beta(gp).expect_finite()?;
    Ok(Temperature::from_internal(b * precision_shape(gp.omega_c, t_c)))
}

fn hermiticity(m: &DMatrix<Complex64>) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Spectral SLD formula F = 2 Σ |⟨i|∂ρ|j⟩|²/(p_i + p_j), skipping pairs with
/// p_i + p_j < 1e-12.
pub fn qfi_sld_oracle(rho: &DensityOperator, drho: &DMatrix<Complex64>) -> Result<QfiResult> {
    let m = rho.matrix();
    if drho.shape() != m.shape() {
        return Err(Error::Domain("derivative and state differ in shape".into()));
    }
    let scale = drho.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if hermiticity(drho) > 1e-10 * scale.max(1e-300) {
        return Err(Error::Domain("state derivative is not Hermitian".into()));
    }
    let eig = SymmetricEigen::new(m.clone());
    let v = &eig.eigenvectors;
    let d = v.adjoint() * drho * v;
    let p = &eig.eigenvalues;
    let mut f = 0.0;
    for i in 0..p.len() {
        for j in 0..p.len() {
            let sum = p[i] + p[j];
            if sum < 1e-12 {
                continue;
            }
            f += 2.0 * d[(i, j)].norm_sqr() / sum;
        }
    }
    Ok(QfiResult {
        fisher_information: f,
        method: QfiMethod::SldOracle,
        step: None,
    })
}

/// SLD QFI of a Fock-space steady state, ∂ρ/∂T_c by central differences.
pub fn qfi_fock_sld(
    model: EngineModel,
    params: &MachineParams,
    cutoff: FockCutoff,
    t_c: Temperature,
    t_h: Temperature,
    step: Temperature,
) -> Result<QfiResult> {
    if !(step.value() > 0.0) || step.value() >= t_c.value() {
        return Err(Error::Domain("finite-difference step must lie in (0, T_c)".into()));
    }
    let engine = FockEngine::new(model, *params, cutoff);
    let at = |tc: Temperature| -> Result<DensityOperator> { engine.steady_state(&BathState::new(params, tc, t_h)?) };
    let rho = at(t_c)?;
    let plus = at(t_c + step)?;
    let minus = at(t_c - step)?;
    let mut drho = (plus.matrix() - minus.matrix()) / Complex64::new(2.0 * step.value(), 0.0);
    // remove the roundoff-level anti-Hermitian part left by the two solves
    drho = (&drho + drho.adjoint()) * Complex64::new(0.5, 0.0);
    let mut r = qfi_sld_oracle(&rho, &drho)?;
    r.step = Some(step);
    Ok(r)
}

/// Quantum Cramér-Rao bound 1/√(νF).
pub fn cramer_rao(fisher_information: f64, repetitions: u64) -> Result<Temperature> {
    if !(fisher_information > 0.0) {
        return Err(Error::Domain("Fisher information must be positive".into()));
    }
    if repetitions == 0 {
        return Err(Error::Domain("need at least one repetition".into()));
    }
    Ok(Temperature::from_internal(1.0 / (repetitions as f64 * fisher_information).sqrt()))
}

/// Error propagation ΔO/(√ν |∂⟨O⟩/∂T_c|), internal units throughout.
pub fn error_propagation(sensitivity: f64, variance: f64, repetitions: u64) -> Result<Temperature> {
    if repetitions == 0 {
        return Err(Error::Domain("need at least one repetition".into()));
    }
    if variance < 0.0 {
        return Err(Error::Domain("variance must be non-negative".into()));
    }
    if variance == 0.0 {
        return Ok(Temperature::ZERO);
    }
    if sensitivity == 0.0 || !sensitivity.is_finite() {
        return Err(Error::Divergent);
    }
    Ok(Temperature::from_internal(
        variance.sqrt() / ((repetitions as f64).sqrt() * sensitivity.abs()),
    ))
}
