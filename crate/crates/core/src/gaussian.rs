//! Bilinear approximation of the engine, H = g(a_h†a_c + h.c.).
//!
//! The steady state is Gaussian and fixed by ten second moments. Mean current,
//! current noise and the precision prefactors α, β all follow in closed form.

use nalgebra::{Matrix4, SMatrix, SVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use crate::config::Config;
use crate::error::{Error, Result};
use crate::params::{BathState, MachineParams, MeasurementNoise};
use crate::units::{Current, Frequency, Temperature};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianParams {
    pub g: Frequency,
    pub kappa_c: Frequency,
    pub kappa_h: Frequency,
    pub omega_c: Frequency,
    pub omega_h: Frequency,
}

impl GaussianParams {
    pub fn new(params: &MachineParams, g: Frequency) -> Self {
        Self {
            g,
            kappa_c: params.kappa_c,
            kappa_h: params.kappa_h,
            omega_c: params.omega_c,
            omega_h: params.omega_h,
        }
    }

    /// Coupling g = ratio·E_J taken from the configuration.
    pub fn from_config(config: &Config) -> Self {
        Self::new(&config.machine, config.g())
    }

    /// The default operating point with g = E_J/8.
    pub fn operating_point() -> Self {
        Self::from_config(&Config::default())
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("g", self.g),
            ("kappa_c", self.kappa_c),
            ("kappa_h", self.kappa_h),
            ("omega_c", self.omega_c),
            ("omega_h", self.omega_h),
        ] {
            if !(v.value() >= 0.0) || !v.value().is_finite() {
                return Err(Error::Domain(format!("{name} must be non-negative and finite")));
            }
        }
        if self.kappa_c.value() + self.kappa_h.value() == 0.0 {
            return Err(Error::Domain("at least one damping rate must be positive".into()));
        }
        Ok(())
    }

    fn rates(&self) -> (f64, f64, f64) {
        (self.g.value(), self.kappa_c.value(), self.kappa_h.value())
    }

    /// κ_cκ_h g²/((κ_c+κ_h)(κ_cκ_h+4g²)), the shape factor shared by the
    /// current and its temperature derivative.
    fn transport_factor(&self) -> f64 {
        let (g, kc, kh) = self.rates();
        kc * kh * g * g / ((kc + kh) * (kc * kh + 4.0 * g * g))
    }
}

/// Symmetrized quadrature covariance, order (x_c, x_h, p_c, p_h).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix(pub Matrix4<f64>);

impl CovarianceMatrix {
    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    /// Product of thermal states with occupations n_c, n_h.
    pub fn thermal(n_c: f64, n_h: f64) -> Self {
        Self(Matrix4::from_diagonal(&nalgebra::Vector4::new(
            n_c + 0.5,
            n_h + 0.5,
            n_c + 0.5,
            n_h + 0.5,
        )))
    }

    /// Cross moment ⟨x_c p_h⟩.
    pub fn cross(&self) -> f64 {
        self.0[(0, 3)]
    }

    fn from_moments(m: &Moments) -> Self {
        let [xc2, sc, pc2, xh2, sh, ph2, xcxh, xcph, pcxh, pcph] = m.0.into();
        Self(Matrix4::new(
            xc2, xcxh, sc, xcph, //
            xcxh, xh2, pcxh, sh, //
            sc, pcxh, pc2, pcph, //
            xcph, sh, pcph, ph2,
        ))
    }
}

/// The ten independent second moments
/// (x_c², s_c, p_c², x_h², s_h, p_h², x_cx_h, x_cp_h, p_cx_h, p_cp_h),
/// where s_α = ⟨x_αp_α + p_αx_α⟩/2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments(pub SVector<f64, 10>);

impl Moments {
    pub fn from_covariance(gamma: &CovarianceMatrix) -> Self {
        let m = &gamma.0;
        Self(SVector::from([
            m[(0, 0)],
            m[(0, 2)],
            m[(2, 2)],
            m[(1, 1)],
            m[(1, 3)],
            m[(3, 3)],
            m[(0, 1)],
            m[(0, 3)],
            m[(2, 1)],
            m[(2, 3)],
        ]))
    }
}

/// Right-hand side of the moment equations. The raw ⟨x_αp_α⟩ = s_α + i/2, so
/// the imaginary constants of the unsymmetrized equations cancel.
pub fn moment_derivatives(gp: &GaussianParams, baths: &BathState, m: &Moments) -> Moments {
    let (g, kc, kh) = gp.rates();
    let ks = 0.5 * (kc + kh);
    let [xc2, sc, pc2, xh2, sh, ph2, xcxh, xcph, pcxh, pcph] = m.0.into();
    let (nc, nh) = (baths.n_c + 0.5, baths.n_h + 0.5);
    Moments(SVector::from([
        2.0 * g * xcph - kc * xc2 + kc * nc,
        -g * (xcxh - pcph) - kc * sc,
        -2.0 * g * pcxh - kc * pc2 + kc * nc,
        2.0 * g * pcxh - kh * xh2 + kh * nh,
        -g * (xcxh - pcph) - kh * sh,
        -2.0 * g * xcph - kh * ph2 + kh * nh,
        g * (sc + sh) - ks * xcxh,
        -g * (xc2 - ph2) - ks * xcph,
        -g * (xh2 - pc2) - ks * pcxh,
        -g * (sc + sh) - ks * pcph,
    ]))
}

/// Steady moments from a direct solve of the linear moment equations.
pub fn steady_moments(gp: &GaussianParams, baths: &BathState) -> Result<Moments> {
    gp.validate()?;
    // the system is affine, f(m) = A m + b; read A and b off by probing
    let b = moment_derivatives(gp, baths, &Moments(SVector::zeros())).0;
    let mut a = SMatrix::<f64, 10, 10>::zeros();
    for j in 0..10 {
        let e = Moments(SVector::from_fn(|i, _| if i == j { 1.0 } else { 0.0 }));
        a.set_column(j, &(moment_derivatives(gp, baths, &e).0 - b));
    }
    let sol = a
        .lu()
        .solve(&(-b))
        .ok_or_else(|| Error::Numerical("moment equations are singular".into()))?;
    Ok(Moments(sol))
}

pub fn steady_covariance(gp: &GaussianParams, baths: &BathState) -> Result<CovarianceMatrix> {
    Ok(CovarianceMatrix::from_moments(&steady_moments(gp, baths)?))
}

/// Quadratic form of the current in units of the quadratures: I = −2g·rᵀCr with
/// rᵀCr = x_cp_h − p_cx_h.
fn current_form() -> Matrix4<f64> {
    let mut c = Matrix4::zeros();
    c[(0, 3)] = 1.0;
    c[(2, 1)] = -1.0;
    c
}

/// Two-point functions ⟨r_ir_j⟩ = Γ_ij + iΩ_ij/2, split into real and
/// imaginary parts.
fn two_point(gamma: &CovarianceMatrix) -> (Matrix4<f64>, Matrix4<f64>) {
    let mut im = Matrix4::zeros();
    im[(0, 2)] = 0.5;
    im[(1, 3)] = 0.5;
    im[(2, 0)] = -0.5;
    im[(3, 1)] = -0.5;
    (gamma.0, im)
}

/// Mean current read off the covariance, −2g(⟨x_cp_h⟩ − ⟨p_cx_h⟩).
pub fn current_from_covariance(gp: &GaussianParams, gamma: &CovarianceMatrix) -> Current {
    let m = &gamma.0;
    Current::from_internal(-2.0 * gp.g.value() * (m[(0, 3)] - m[(2, 1)]))
}

/// Current variance of a zero-mean Gaussian state, by Wick's theorem.
pub fn variance_from_covariance(gp: &GaussianParams, gamma: &CovarianceMatrix) -> f64 {
    let c = current_form();
    let (re, im) = two_point(gamma);
    let gij = |i: usize, j: usize| num_complex::Complex64::new(re[(i, j)], im[(i, j)]);
    let mut var = num_complex::Complex64::new(0.0, 0.0);
    for i in 0..4 {
        for j in 0..4 {
            if c[(i, j)] == 0.0 {
                continue;
            }
            for k in 0..4 {
                for l in 0..4 {
                    if c[(k, l)] == 0.0 {
                        continue;
                    }
                    let w = c[(i, j)] * c[(k, l)];
                    var += (gij(i, k) * gij(j, l) + gij(i, l) * gij(j, k)) * w;
                }
            }
        }
    }
    let two_g = 2.0 * gp.g.value();
    two_g * two_g * var.re
}

/// Closed-form mean current; positive when heat is pumped out of the cold
/// mode.
pub fn mean_current(gp: &GaussianParams, baths: &BathState) -> Current {
    Current::from_internal(-2.0 * 4.0 * gp.transport_factor() * (baths.n_h - baths.n_c))
}

/// Exact current variance ⟨I²⟩ − ⟨I⟩² in the steady state.
pub fn current_variance(gp: &GaussianParams, baths: &BathState) -> Result<f64> {
    Ok(variance_from_covariance(gp, &steady_covariance(gp, baths)?))
}

/// Closed-form approximation to the variance. It drops an 8g²X² term (X the
/// steady cross moment ⟨x_c p_h⟩) and so agrees with [`current_variance`]
/// only at the Carnot point, where X = 0.
pub fn current_variance_approx(gp: &GaussianParams, baths: &BathState) -> f64 {
    let (g, kc, kh) = gp.rates();
    let (nc, nh) = (baths.n_c, baths.n_h);
    let d = nh - nc;
    let den = (kh + kc) * (kh * kc + 4.0 * g * g);
    let bracket = nc * (nh + 1.0) + nh * (nc + 1.0)
        + 8.0 * g * g * d / den * (kh * (nh + 0.5) - kc * (nc + 0.5))
        - 32.0 * g.powi(4) * kh * kc * d * d / (den * den);
    4.0 * g * g * bracket
}

/// Closed-form ∂⟨I⟩/∂T_c in internal units (current per temperature).
pub fn di_dtc(gp: &GaussianParams, t_c: Temperature) -> f64 {
    let (w, t) = (gp.omega_c.value(), t_c.value());
    let s = (w / (2.0 * t)).sinh();
    2.0 * gp.transport_factor() * w / (t * t * s * s)
}

/// (T_c²/Ω_c)·sinh(Ω_c/2T_c): the temperature dependence shared by both
/// precision laws.
pub fn precision_shape(omega_c: Frequency, t_c: Temperature) -> f64 {
    let (w, t) = (omega_c.value(), t_c.value());
    t * t / w * (w / (2.0 * t)).sinh()
}

/// A prefactor that may diverge in a limit of the rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Coefficient {
    Finite(f64),
    Divergent,
}

impl Coefficient {
    pub fn value(self) -> Option<f64> {
        match self {
            Coefficient::Finite(v) => Some(v),
            Coefficient::Divergent => None,
        }
    }

    pub fn expect_finite(self) -> Result<f64> {
        self.value().ok_or(Error::Divergent)
    }
}

/// Current-measurement prefactor α = (κ_h+κ_c)(κ_hκ_c+4g²)/(√2κ_hκ_c g).
pub fn alpha(gp: &GaussianParams) -> Coefficient {
    let (g, kc, kh) = gp.rates();
    let den = SQRT_2 * kh * kc * g;
    if den == 0.0 {
        return Coefficient::Divergent;
    }
    Coefficient::Finite((kh + kc) * (kh * kc + 4.0 * g * g) / den)
}

/// QFI prefactor β.
pub fn beta(gp: &GaussianParams) -> Coefficient {
    let (g, kc, kh) = gp.rates();
    let g2 = g * g;
    let radicand = 8.0 * g2 * kc * kh
        + kh * kh * (kc * kc + 16.0 * g2)
        + 2.0 * kc * kh.powi(3)
        + 32.0 * g2 * g2
        + kh.powi(4);
    let den = kc * radicand.sqrt();
    if den == 0.0 {
        return Coefficient::Divergent;
    }
    Coefficient::Finite(2.0 * (kc + kh) * (kc * kh + 4.0 * g2) / den)
}

/// Terms of the Carnot-point temperature error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub total: Temperature,
    pub current_term: Temperature,
    pub temperature_term: Temperature,
}

impl ErrorBudget {
    /// Combines the current-noise term ΔI/|∂I/∂T_c| with (Ω_c/Ω_h)ΔT_h.
    pub fn from_slope(slope: f64, omega_ratio: f64, noise: &MeasurementNoise) -> Result<Self> {
        noise.validate()?;
        let di = Current::from_pa(noise.delta_i_pa).value();
        let current_term = if di == 0.0 {
            0.0
        } else if slope == 0.0 || !slope.is_finite() {
            return Err(Error::Divergent);
        } else {
            di / slope.abs()
        };
        let temperature_term = omega_ratio * Temperature::from_mk(noise.delta_th_mk).value();
        Ok(Self {
            total: Temperature::from_internal(current_term.hypot(temperature_term)),
            current_term: Temperature::from_internal(current_term),
            temperature_term: Temperature::from_internal(temperature_term),
        })
    }
}

/// ΔT_c at the Carnot point from the closed-form slope.
pub fn delta_tc_budget(gp: &GaussianParams, t_c: Temperature, noise: &MeasurementNoise) -> Result<ErrorBudget> {
    gp.validate()?;
    let ratio = gp.omega_c.value() / gp.omega_h.value();
    ErrorBudget::from_slope(di_dtc(gp, t_c), ratio, noise)
}
