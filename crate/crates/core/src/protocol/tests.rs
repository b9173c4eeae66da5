use super::*;
use crate::fock::FockCutoff;
use crate::gaussian::{alpha, beta};

fn mk(t: f64) -> Temperature {
    Temperature::from_mk(t)
}

fn gaussian_model() -> CurrentModel {
    CurrentModel::new(ModelKind::Gaussian, &Config::default())
}

fn quiet() -> ProtocolConfig {
    ProtocolConfig {
        noise: MeasurementNoise::none(),
        ..ProtocolConfig::default()
    }
}

#[test]
fn current_sign_and_zero() {
    let m = gaussian_model();
    let tc = mk(15.0);
    assert_eq!(m.current_at(tc, mk(127.5)).unwrap().pa().abs(), 0.0);
    assert!(m.current_at(tc, mk(100.0)).unwrap().pa() > 0.0);
    assert!(m.current_at(tc, mk(160.0)).unwrap().pa() < 0.0);
    let mut last = f64::INFINITY;
    for k in 0..=42 {
        let i = current_at(&m, tc, mk(40.0 + 5.0 * k as f64)).unwrap().pa();
        assert!(i < last);
        last = i;
    }
    assert!(m.current_at(Temperature::ZERO, mk(100.0)).is_err());
}

#[test]
fn noiseless_servo_finds_the_carnot_point() {
    let m = gaussian_model();
    let cfg = quiet();
    let r = locate_carnot(&cfg, &m).unwrap();
    assert!((r.t_h_located.mk() - 127.5).abs() < cfg.tolerance.mk());
    assert!((r.t_c_estimate.mk() - 15.0).abs() < cfg.tolerance.mk() / 8.5);
    assert_eq!(r.t_h_located, r.t_h_servo);
    assert_eq!(r.trace.len() as u32, r.iterations + 2);
}

#[test]
fn estimator_identity_is_exact() {
    let m = gaussian_model();
    let cfg = ProtocolConfig::default();
    for seed in 0..20 {
        let r = locate_carnot(&ProtocolConfig { seed, ..cfg }, &m).unwrap();
        let ratio = m.params.omega_c.value() / m.params.omega_h.value();
        assert_eq!(r.t_c_estimate.value(), ratio * r.t_h_located.value());
    }
}

#[test]
fn error_shrinks_with_tolerance() {
    let m = gaussian_model();
    let mut last = f64::INFINITY;
    for k in 0..6 {
        let cfg = ProtocolConfig {
            tolerance: mk(10f64.powi(-k)),
            ..quiet()
        };
        let err = (locate_carnot(&cfg, &m).unwrap().t_c_estimate.mk() - 15.0).abs();
        assert!(err <= cfg.tolerance.mk() / 8.5);
        assert!(err <= last.max(1e-12) || err < 1e-9);
        last = err;
    }
    assert!(last < 1e-6);
}

#[test]
fn seeded_runs_are_reproducible() {
    let m = gaussian_model();
    let cfg = ProtocolConfig {
        seed: 42,
        noise_model: CurrentNoiseModel::Independent,
        readings_per_point: 3,
        ..ProtocolConfig::default()
    };
    let a = locate_carnot(&cfg, &m).unwrap();
    let b = locate_carnot(&cfg, &m).unwrap();
    assert_eq!(a, b);
    let c = locate_carnot(&ProtocolConfig { seed: 43, ..cfg }, &m).unwrap();
    assert_ne!(a.t_c_estimate, c.t_c_estimate);
}

#[test]
fn bracket_must_straddle() {
    let m = gaussian_model();
    let cfg = ProtocolConfig {
        bracket: (mk(140.0), mk(200.0)),
        ..quiet()
    };
    match locate_carnot(&cfg, &m) {
        Err(Error::Bracket { lo_mk, lo_reading_pa, hi_reading_pa, .. }) => {
            assert_eq!(lo_mk, 140.0);
            assert!(lo_reading_pa < 0.0 && hi_reading_pa < 0.0);
        }
        other => panic!("expected a bracket error, got {other:?}"),
    }
}

#[test]
fn iteration_cap() {
    let m = gaussian_model();
    let cfg = ProtocolConfig {
        max_iterations: 3,
        ..quiet()
    };
    assert_eq!(locate_carnot(&cfg, &m), Err(Error::NoConvergence(3)));
    let wrong = ProtocolConfig {
        model: ModelKind::Fock,
        ..quiet()
    };
    assert!(matches!(locate_carnot(&wrong, &m), Err(Error::Config(_))));
}

#[test]
fn budget_at_operating_point() {
    let m = gaussian_model();
    let b = error_budget(&m, mk(15.0), &MeasurementNoise::operating_point()).unwrap();
    assert!((b.total.mk() - 1.75).abs() < 0.05);
    assert!((b.current_term.mk() - 1.30).abs() < 0.05);
    assert!((b.temperature_term.mk() - 10.0 / 8.5).abs() < 1e-12);
}

#[test]
fn budget_falls_with_temperature() {
    let m = gaussian_model();
    let grid: Vec<Temperature> = (0..=17).map(|k| mk(15.0 + 5.0 * k as f64)).collect();
    let rows = precision_curve(&m, &MeasurementNoise::operating_point(), &grid, Execution::Parallel).unwrap();
    assert_eq!(rows.len(), grid.len());
    // the error grows towards low T_c, where sinh(Ω_c/2T_c) takes over
    for w in rows.windows(2) {
        assert!(w[1].total_mk < w[0].total_mk);
    }
    let ratio = alpha(&m.gaussian).value().unwrap() / beta(&m.gaussian).value().unwrap();
    for r in &rows {
        assert!((r.dtc_current_mk / r.dtc_qfi_mk / ratio - 1.0).abs() < 1e-9);
        assert_eq!(r.temperature_term_mk, rows[0].temperature_term_mk);
    }
    assert!(precision_curve(&m, &MeasurementNoise::operating_point(), &[], Execution::Parallel)
        .unwrap()
        .is_empty());
}

#[test]
fn fock_budget_close_to_gaussian() {
    let m = CurrentModel::new(ModelKind::Fock, &Config::default())
        .with_cutoff(FockCutoff::new(6, 6).unwrap());
    let b = error_budget(&m, mk(15.0), &MeasurementNoise::operating_point()).unwrap();
    assert!((b.temperature_term.mk() - 10.0 / 8.5).abs() < 1e-12);
    assert!(b.total.mk() < 2.0);
    assert!((b.total.mk() - 1.75).abs() < 0.1, "{}", b.total.mk());
}

#[test]
fn models_locate_the_same_point() {
    let cfg = ProtocolConfig {
        tolerance: mk(0.05),
        bracket: (mk(100.0), mk(160.0)),
        ..quiet()
    };
    let fock = CurrentModel::new(ModelKind::Fock, &Config::default())
        .with_cutoff(FockCutoff::new(6, 6).unwrap());
    let f = locate_carnot(&ProtocolConfig { model: ModelKind::Fock, ..cfg }, &fock).unwrap();
    let g = locate_carnot(&cfg, &gaussian_model()).unwrap();
    assert!((f.t_h_located - g.t_h_located).abs().mk() < 2.0 * cfg.tolerance.mk());
}

#[test]
fn monte_carlo_is_schedule_independent() {
    let m = gaussian_model();
    let cfg = ProtocolConfig {
        seed: 9,
        ..ProtocolConfig::default()
    };
    let a = monte_carlo(&cfg, &m, 200, Execution::Parallel).unwrap();
    let b = monte_carlo(&cfg, &m, 200, Execution::Sequential).unwrap();
    assert_eq!(a.records, b.records);
    assert_eq!(a.summary, b.summary);
    // run 0 is the single-shot protocol
    let single = locate_carnot(&cfg, &m).unwrap();
    let first = a.records[0].outcome.as_ref().unwrap();
    assert_eq!(first.t_c_estimate_mk, single.t_c_estimate.mk());
}

#[test]
fn monte_carlo_unbiased_at_small_current_noise() {
    // with a small ΔI the curvature of I(T_h) is irrelevant
    let m = gaussian_model();
    let cfg = ProtocolConfig {
        noise: MeasurementNoise { delta_i_pa: 0.03, delta_th_mk: 10.0 },
        seed: 5,
        ..ProtocolConfig::default()
    };
    let mc = monte_carlo(&cfg, &m, 4000, Execution::Parallel).unwrap();
    let s = mc.summary;
    assert_eq!(s.failures, 0);
    assert!(s.bias_mk.abs() < 3.0 * s.stderr_mk, "{s:?}");
    assert!((s.std_mk / s.predicted.total.mk() - 1.0).abs() < 0.05, "{s:?}");
}

#[test]
fn independent_readings_model_runs() {
    let m = gaussian_model();
    let cfg = ProtocolConfig {
        noise_model: CurrentNoiseModel::Independent,
        readings_per_point: 4,
        seed: 1,
        ..ProtocolConfig::default()
    };
    let mc = monte_carlo(&cfg, &m, 500, Execution::Parallel).unwrap();
    assert!(mc.summary.std_mk.is_finite() && mc.summary.std_mk > 0.0);
    assert!(mc.summary.runs == 500);
}
