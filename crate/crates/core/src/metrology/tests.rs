use super::*;
use crate::fock::{DensityOperator, EngineModel, FockCutoff};
use crate::gaussian::{alpha, beta, precision_shape, steady_covariance, CovarianceMatrix, GaussianParams};
use crate::params::{BathState, MachineParams};
use crate::units::{Frequency, Temperature};
use nalgebra::{DMatrix, Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn table() -> (MachineParams, GaussianParams) {
    (MachineParams::operating_point(), GaussianParams::operating_point())
}

fn mk(t: f64) -> Temperature {
    Temperature::from_mk(t)
}

fn symplectic_residual(s: &Matrix4<f64>) -> f64 {
    (s * omega() * s.transpose() - omega()).amax()
}

/// Symplectic-orthogonal matrix built from a 2×2 unitary.
fn passive(u: &Matrix2<Complex64>) -> Matrix4<f64> {
    let mut o = Matrix4::zeros();
    for i in 0..2 {
        for j in 0..2 {
            o[(i, j)] = u[(i, j)].re;
            o[(i, j + 2)] = -u[(i, j)].im;
            o[(i + 2, j)] = u[(i, j)].im;
            o[(i + 2, j + 2)] = u[(i, j)].re;
        }
    }
    o
}

fn random_unitary(rng: &mut ChaCha8Rng) -> Matrix2<Complex64> {
    let m = Matrix2::from_fn(|_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    m.qr().q()
}

fn random_covariance(rng: &mut ChaCha8Rng) -> CovarianceMatrix {
    let nu1 = 0.5 + rng.random_range(0.01..3.0);
    let nu2 = 0.5 + rng.random_range(0.01..3.0);
    let (r1, r2): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let squeeze = Matrix4::from_diagonal(&Vector4::new(r1.exp(), r2.exp(), (-r1).exp(), (-r2).exp()));
    let s = passive(&random_unitary(rng)) * squeeze * passive(&random_unitary(rng));
    let d = Matrix4::from_diagonal(&Vector4::new(nu1, nu2, nu1, nu2));
    let g = s * d * s.transpose();
    CovarianceMatrix((g + g.transpose()) * 0.5)
}

#[test]
fn thermal_covariance_is_already_normal() {
    let gamma = CovarianceMatrix::thermal(0.3, 1.2);
    let dec = williamson(&gamma).unwrap();
    assert!((dec.nu[0] - 1.7).abs() < 1e-12 && (dec.nu[1] - 0.8).abs() < 1e-12);
    assert!(symplectic_residual(&dec.s) < 1e-12);
    assert!((dec.s * dec.s.transpose() - Matrix4::identity()).amax() < 1e-12);
}

#[test]
fn carnot_point_spectrum_is_degenerate() {
    let (p, gp) = table();
    let b = BathState::at_carnot(&p, mk(15.0)).unwrap();
    let gamma = steady_covariance(&gp, &b).unwrap();
    let dec = williamson(&gamma).unwrap();
    for nu in dec.nu {
        assert!((nu - (b.n_c + 0.5)).abs() < 1e-12);
    }
    let gs = dec.s * gamma.matrix() * dec.s.transpose();
    assert!((gs - Matrix4::from_diagonal(&dec.diagonal())).amax() < 1e-10);
    assert!(symplectic_residual(&dec.s) < 1e-10);
}

#[test]
fn generic_spectrum_matches_invariants() {
    let (p, gp) = table();
    let b = BathState::new(&p, mk(15.0), mk(100.0)).unwrap();
    let gamma = steady_covariance(&gp, &b).unwrap();
    let dec = williamson(&gamma).unwrap();
    let plain = symplectic_spectrum(&gamma);
    assert!((dec.nu[0] - plain[0]).abs() < 1e-12 && (dec.nu[1] - plain[1]).abs() < 1e-12);
    let det = gamma.matrix().determinant();
    assert!((dec.nu[0] * dec.nu[1] - det.sqrt()).abs() < 1e-12);
    let og = omega() * gamma.matrix();
    let sum_sq = -0.5 * (og * og).trace();
    assert!((dec.nu[0].powi(2) + dec.nu[1].powi(2) - sum_sq).abs() < 1e-12);
}

#[test]
fn williamson_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let gamma = random_covariance(&mut rng);
        let dec = williamson(&gamma).unwrap();
        let scale = gamma.matrix().amax();
        assert!(symplectic_residual(&dec.s) < 1e-10 * scale);
        let gs = dec.s * gamma.matrix() * dec.s.transpose();
        assert!((gs - Matrix4::from_diagonal(&dec.diagonal())).amax() < 1e-10 * scale);
        assert!(dec.nu[0] >= dec.nu[1]);
    }
}

#[test]
fn pure_state_is_rejected() {
    let gamma = CovarianceMatrix::thermal(0.0, 0.2);
    assert!(matches!(williamson(&gamma), Err(crate::Error::SymplecticSingular { .. })));
}

#[test]
fn constant_state_has_no_information() {
    let gamma = CovarianceMatrix::thermal(0.3, 0.4);
    let r = qfi_gaussian(&gamma, &Matrix4::zeros()).unwrap();
    assert_eq!(r.fisher_information, 0.0);
}

fn single_mode_qfi(omega: f64, t: f64) -> f64 {
    let s = (omega / (2.0 * t)).sinh();
    (omega / (t * t)).powi(2) / (4.0 * s * s)
}

#[test]
fn uncoupled_qfi_is_single_mode_thermal() {
    let (_, mut gp) = table();
    gp.g = Frequency::ZERO;
    let t = mk(40.0);
    let r = qfi_symplectic_numeric(&gp, t, mk(200.0), default_step()).unwrap();
    let expected = single_mode_qfi(gp.omega_c.value(), t.value());
    assert!((r.fisher_information / expected - 1.0).abs() < 1e-6);
}

#[test]
fn single_mode_thermal_state_by_sld() {
    // thermal family on the cold mode, hot mode empty
    let space = FockCutoff::new(40, 1).unwrap().space();
    let w = Frequency::from_ghz(1.0);
    let t = mk(40.0);
    let h = mk(1e-3);
    let state = |t: Temperature| {
        let n = crate::params::thermal_occupation(w, t).unwrap();
        DensityOperator::thermal_product(space, n, 0.0)
    };
    let drho = (state(t + h).matrix() - state(t - h).matrix()) / Complex64::new(2.0 * h.value(), 0.0);
    let r = qfi_sld_oracle(&state(t), &drho).unwrap();
    // dn/dT and n(n+1) computed separately
    let n = |t: Temperature| crate::params::thermal_occupation(w, t).unwrap();
    let dn = (n(t + h) - n(t - h)) / (2.0 * h.value());
    let expected = dn * dn / (n(t) * (n(t) + 1.0));
    assert!((r.fisher_information / expected - 1.0).abs() < 1e-6);
    assert!((expected / single_mode_qfi(w.value(), t.value()) - 1.0).abs() < 1e-6);
    assert_eq!(r.method, QfiMethod::SldOracle);
}

#[test]
fn sld_oracle_edge_cases() {
    let space = FockCutoff::new(3, 3).unwrap().space();
    let rho = DensityOperator::thermal_product(space, 0.2, 0.1);
    let zero = DMatrix::zeros(16, 16);
    assert_eq!(qfi_sld_oracle(&rho, &zero).unwrap().fisher_information, 0.0);
    let mut skew = DMatrix::zeros(16, 16);
    skew[(0, 1)] = Complex64::new(1.0, 0.0);
    assert!(qfi_sld_oracle(&rho, &skew).is_err());
}

#[test]
fn numeric_qfi_matches_closed_form_at_carnot_point() {
    let (p, gp) = table();
    let t = mk(15.0);
    let th = crate::params::carnot_hot_temperature(t, &p);
    let numeric = qfi_symplectic_numeric(&gp, t, th, default_step()).unwrap();
    let closed = qfi_carnot_closed(&gp, t);
    let rel = (numeric.fisher_information / closed.fisher_information - 1.0).abs();
    assert!(rel < 1e-3, "{rel}");
    assert_eq!(numeric.step, Some(default_step()));
}

#[test]
fn closed_form_limits() {
    let (_, mut gp) = table();
    gp.g = Frequency::from_ghz(1e-9);
    assert!((carnot_qfi_prefactor(&gp) - 0.25).abs() < 1e-12);
    let (_, mut gp) = table();
    gp.kappa_h = Frequency::from_ghz(1e-12);
    assert!((carnot_qfi_prefactor(&gp) - 0.5).abs() < 1e-9);
    let (_, gp) = table();
    let t = mk(15.0);
    let b = beta(&gp).expect_finite().unwrap();
    assert!((1.0 / carnot_qfi_prefactor(&gp).sqrt() - b).abs() < 1e-12);
    let bound = qfi_carnot_closed(&gp, t).delta_tc(1).unwrap();
    assert!((bound.value() / dtc_qfi_closed(&gp, t).unwrap().value() - 1.0).abs() < 1e-12);
}

#[test]
fn qfi_is_basis_independent() {
    let (p, gp) = table();
    let t = mk(20.0);
    let th = mk(110.0);
    let gamma = steady_covariance(&gp, &BathState::new(&p, t, th).unwrap()).unwrap();
    let dgamma = covariance_derivative(&gp, t, th, default_step()).unwrap();
    let base = qfi_gaussian(&gamma, &dgamma).unwrap().fisher_information;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let o = passive(&random_unitary(&mut rng));
        let g2 = CovarianceMatrix(o * gamma.matrix() * o.transpose());
        let d2 = o * dgamma * o.transpose();
        let f = qfi_gaussian(&g2, &d2).unwrap().fisher_information;
        assert!((f / base - 1.0).abs() < 1e-8);
    }
}

#[test]
fn step_halving_agrees() {
    let (p, gp) = table();
    let t = mk(15.0);
    let th = crate::params::carnot_hot_temperature(t, &p);
    let h = default_step();
    let f1 = qfi_symplectic_numeric(&gp, t, th, h).unwrap().fisher_information;
    let f2 = qfi_symplectic_numeric(&gp, t, th, h * 0.5).unwrap().fisher_information;
    assert!((f1 / f2 - 1.0).abs() < 1e-6);
    assert!(qfi_symplectic_numeric(&gp, t, th, Temperature::ZERO).is_err());
}

#[test]
fn fock_sld_matches_gaussian() {
    let (p, gp) = table();
    let t = mk(15.0);
    let th = crate::params::carnot_hot_temperature(t, &p);
    let r = qfi_fock_sld(EngineModel::bilinear(gp.g), &p, FockCutoff::new(8, 8).unwrap(), t, th, default_step())
        .unwrap();
    let g = qfi_symplectic_numeric(&gp, t, th, default_step()).unwrap();
    assert!((r.fisher_information / g.fisher_information - 1.0).abs() < 1e-2);
}

#[test]
fn cramer_rao_scaling() {
    let one = cramer_rao(4.0, 1).unwrap();
    assert_eq!(one.value(), 0.5);
    assert!((cramer_rao(4.0, 100).unwrap().value() - 0.05).abs() < 1e-15);
    assert!(cramer_rao(0.0, 1).is_err());
    assert!(cramer_rao(1.0, 0).is_err());
}

#[test]
fn current_error_follows_alpha_law() {
    let (_, gp) = table();
    let t = mk(15.0);
    let a = alpha(&gp).expect_finite().unwrap();
    let b = beta(&gp).expect_finite().unwrap();
    let shape = precision_shape(gp.omega_c, t);
    let di = dtc_current(&gp, t).unwrap();
    assert!((di.value() / (a * shape) - 1.0).abs() < 1e-9);
    let dq = qfi_carnot_closed(&gp, t).delta_tc(1).unwrap();
    assert!((di.value() / dq.value() - 2.56).abs() < 0.02);
    assert!((di.value() / dq.value() - a / b).abs() < 1e-9);
    assert_eq!(error_propagation(1.0, 0.0, 1).unwrap(), Temperature::ZERO);
    assert_eq!(error_propagation(0.0, 1.0, 1), Err(crate::Error::Divergent));
}

#[test]
fn measurement_never_beats_the_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let gp = GaussianParams {
            g: Frequency::from_ghz(rng.random_range(0.001..0.2)),
            kappa_c: Frequency::from_ghz(rng.random_range(0.001..0.2)),
            kappa_h: Frequency::from_ghz(rng.random_range(0.001..0.2)),
            ..GaussianParams::operating_point()
        };
        let t = mk(rng.random_range(10.0..150.0));
        let di = dtc_current(&gp, t).unwrap();
        let dq = qfi_carnot_closed(&gp, t).delta_tc(1).unwrap();
        assert!(di.value() >= dq.value() * (1.0 - 1e-12));
    }
}
