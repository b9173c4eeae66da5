use serde::Serialize;
use serde_json::json;

use qtm_core::exec::{self, Execution};
use qtm_core::fock::{EngineModel, FockEngine};
use qtm_core::gaussian::{alpha, beta, mean_current, GaussianParams};
use qtm_core::metrology::{dtc_current, dtc_qfi_closed};
use qtm_core::protocol::{
    self as proto, monte_carlo, CurrentModel, CurrentNoiseModel, ModelKind, ProtocolConfig,
};
use qtm_core::units::{Current, Power};
use qtm_core::{BathState, Config, Temperature};

use crate::output::{prepare_dir, RunManifest};
use crate::{load_config, CliError, ModelChoice, NoiseChoice, ProtocolArgs, RangeArgs, SweepArgs};

fn mk(t: f64) -> Temperature {
    Temperature::from_mk(t)
}

fn mode(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

fn kinds(choice: ModelChoice) -> Vec<ModelKind> {
    match choice {
        ModelChoice::Fock => vec![ModelKind::Fock],
        ModelChoice::Gaussian => vec![ModelKind::Gaussian],
        ModelChoice::Both => vec![ModelKind::Fock, ModelKind::Gaussian],
    }
}

fn model_name(choice: ModelChoice) -> &'static str {
    match choice {
        ModelChoice::Fock => "fock",
        ModelChoice::Gaussian => "gaussian",
        ModelChoice::Both => "both",
    }
}

/// `n` evenly spaced points from `lo` to `hi`; a degenerate range is a single
/// point.
fn grid(name: &str, lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if !(lo > 0.0) || !(hi >= lo) || !hi.is_finite() {
        return Err(CliError::Config(format!("{name} range must satisfy 0 < min <= max, got [{lo}, {hi}]")));
    }
    Ok(match n {
        0 => Vec::new(),
        _ if lo == hi => vec![lo],
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    })
}

/// Collects per-point results, naming the first point that failed.
fn gather<T>(label: &str, points: &[f64], results: Vec<qtm_core::Result<T>>) -> Result<Vec<T>, CliError> {
    points
        .iter()
        .zip(results)
        .map(|(p, r)| r.map_err(|e| CliError::at(format!("{label} = {p} mK"), e)))
        .collect()
}

#[derive(Serialize)]
struct SweepRow {
    t_h_mk: f64,
    i_pa_fock: Option<f64>,
    i_pa_gaussian: Option<f64>,
    jc_aw: f64,
    jh_aw: f64,
    p_aw: f64,
}

pub fn sweep_current(a: &SweepArgs) -> Result<(), CliError> {
    let cfg = load_config(&a.common)?;
    let t_c = mk(a.tc_mk.unwrap_or(cfg.tc.mk()));
    if !(t_c.value() > 0.0) {
        return Err(CliError::Config("--tc-mk must be positive".into()));
    }
    let points = grid("T_h", a.th_min_mk, a.th_max_mk, a.grid)?;
    prepare_dir(&a.common.out)?;
    let p = cfg.machine;
    let gp = GaussianParams::from_config(&cfg);
    let with_fock = a.model != ModelChoice::Gaussian;
    let with_gaussian = a.model != ModelChoice::Fock;
    let engine = if with_fock && !points.is_empty() {
        let hottest = mk(points.iter().copied().fold(0.0, f64::max));
        let model = CurrentModel::new(ModelKind::Fock, &cfg)
            .prepared_for(t_c, hottest)
            .map_err(|e| CliError::at(format!("choosing the Fock cutoff at T_h = {} mK", hottest.mk()), e))?;
        Some(FockEngine::new(EngineModel::josephson(), p, model.cutoff.expect("cutoff was just chosen")))
    } else {
        None
    };

    let results = exec::map(&points, mode(a.common.sequential), |&th| -> qtm_core::Result<SweepRow> {
        let baths = BathState::new(&p, t_c, mk(th))?;
        let gauss = with_gaussian.then(|| mean_current(&gp, &baths));
        let (fock, flows) = match &engine {
            Some(e) => {
                let o = e.solve(&baths)?.1;
                (Some(o.charge_current), (o.heat_current_c, o.heat_current_h, o.power))
            }
            None => {
                // energy balance of the exchange process: each transferred
                // pair moves Ω_c out of the cold mode and Ω_h into the hot one
                let i = gauss.unwrap_or(Current::ZERO).value();
                (
                    None,
                    (
                        Power::from_internal(-0.5 * i * p.omega_c.value()),
                        Power::from_internal(0.5 * i * p.omega_h.value()),
                        Power::from_internal(0.5 * i * (p.omega_h - p.omega_c).value()),
                    ),
                )
            }
        };
        Ok(SweepRow {
            t_h_mk: th,
            i_pa_fock: fock.map(Current::pa),
            i_pa_gaussian: gauss.map(Current::pa),
            jc_aw: flows.0.aw(),
            jh_aw: flows.1.aw(),
            p_aw: flows.2.aw(),
        })
    });
    let rows = gather("T_h", &points, results)?;

    let primary = |r: &SweepRow| r.i_pa_fock.or(r.i_pa_gaussian).unwrap_or(0.0);
    match rows.windows(2).find(|w| primary(&w[0]) > 0.0 && primary(&w[1]) <= 0.0) {
        Some(w) => {
            let (i0, i1) = (primary(&w[0]), primary(&w[1]));
            let crossing = w[0].t_h_mk + (w[1].t_h_mk - w[0].t_h_mk) * i0 / (i0 - i1);
            println!("current changes sign near T_h = {crossing:.2} mK");
        }
        None if rows.len() > 1 => eprintln!("qtm: warning: no zero crossing of the current in the sweep range"),
        None => {}
    }

    let mut m = RunManifest::new(
        "sweep-current",
        1,
        &cfg,
        json!({
            "model": model_name(a.model),
            "tc_mk": t_c.mk(),
            "th_min_mk": a.th_min_mk,
            "th_max_mk": a.th_max_mk,
            "grid": a.grid,
            "fock_cutoff": engine.map(|e| [e.cutoff.n_max_c(), e.cutoff.n_max_h()]),
        }),
    );
    let dir = &a.common.out;
    m.write_csv(dir, "sweep_current", &["T_h_mK", "I_pA_fock", "I_pA_gaussian", "Jc_aW", "Jh_aW", "P_aW"], &rows)?;
    m.write_script(
        dir,
        "sweep_current",
        &format!(
            "set xlabel 'T_h (mK)'\nset ylabel 'I (pA)'\nset xzeroaxis\n\
             set title 'charge current at T_c = {} mK'\n\
             plot 'sweep_current.csv' using 1:2 with lines lw 2, '' using 1:3 with lines dt 2 lw 2\n",
            t_c.mk()
        ),
    )?;
    m.finish(dir, "sweep_current")
}

pub fn precision_curve(a: &RangeArgs) -> Result<(), CliError> {
    let cfg = load_config(&a.common)?;
    let points = grid("T_c", a.tc_min_mk, a.tc_max_mk, a.grid)?;
    prepare_dir(&a.common.out)?;
    let mut rows = Vec::new();
    for kind in kinds(a.model) {
        let model = CurrentModel::new(kind, &cfg);
        let results = exec::map(&points, mode(a.common.sequential), |&tc| {
            proto::precision_curve(&model, &cfg.noise, &[mk(tc)], Execution::Sequential).map(|mut v| v.remove(0))
        });
        rows.extend(gather("T_c", &points, results)?);
    }
    let mut m = RunManifest::new("precision-curve", 1, &cfg, range_params(a));
    let dir = &a.common.out;
    m.write_csv(
        dir,
        "precision_curve",
        &[
            "model",
            "T_c_mK",
            "dTc_mK",
            "current_term_mK",
            "temperature_term_mK",
            "dTc_current_mK",
            "dTc_qfi_mK",
        ],
        &rows,
    )?;
    m.write_script(
        dir,
        "precision_curve",
        &format!(
            "set xlabel 'T_c (mK)'\nset ylabel 'error (mK)'\n\
             set title 'protocol error, ΔI = {} pA, ΔT_h = {} mK'\n\
             plot 'precision_curve.csv' using 2:3 with lines lw 2, '' using 2:4 with lines dt 2, '' using 2:5 with lines dt 3\n",
            cfg.noise.delta_i_pa, cfg.noise.delta_th_mk
        ),
    )?;
    m.finish(dir, "precision_curve")
}

fn range_params(a: &RangeArgs) -> serde_json::Value {
    json!({
        "model": model_name(a.model),
        "tc_min_mk": a.tc_min_mk,
        "tc_max_mk": a.tc_max_mk,
        "grid": a.grid,
    })
}

#[derive(Serialize)]
struct QfiRow {
    t_c_mk: f64,
    dtc_current_mk: f64,
    dtc_qfi_mk: f64,
    ratio: f64,
}

pub fn qfi_compare(a: &RangeArgs) -> Result<(), CliError> {
    let cfg = load_config(&a.common)?;
    if a.model == ModelChoice::Fock {
        return Err(CliError::Config("qfi-compare uses the Gaussian model".into()));
    }
    let points = grid("T_c", a.tc_min_mk, a.tc_max_mk, a.grid)?;
    prepare_dir(&a.common.out)?;
    let gp = GaussianParams::from_config(&cfg);
    let results = exec::map(&points, mode(a.common.sequential), |&tc| -> qtm_core::Result<QfiRow> {
        let i = dtc_current(&gp, mk(tc))?.mk();
        let q = dtc_qfi_closed(&gp, mk(tc))?.mk();
        Ok(QfiRow {
            t_c_mk: tc,
            dtc_current_mk: i,
            dtc_qfi_mk: q,
            ratio: i / q,
        })
    });
    let rows = gather("T_c", &points, results)?;
    let mut params = range_params(a);
    params["alpha"] = json!(alpha(&gp).value());
    params["beta"] = json!(beta(&gp).value());
    let mut m = RunManifest::new("qfi-compare", 1, &cfg, params);
    let dir = &a.common.out;
    m.write_csv(dir, "qfi_compare", &["T_c_mK", "dTc_current_mK", "dTc_qfi_mK", "ratio"], &rows)?;
    m.write_script(
        dir,
        "qfi_compare",
        "set xlabel 'T_c (mK)'\nset ylabel 'single-shot error (mK)'\nset logscale y\n\
         plot 'qfi_compare.csv' using 1:2 with lines lw 2, '' using 1:3 with lines dt 2 lw 2\n",
    )?;
    m.finish(dir, "qfi_compare")
}

#[derive(Serialize)]
struct RunRow {
    model: ModelKind,
    run: u64,
    status: &'static str,
    t_h_servo_mk: Option<f64>,
    t_h_located_mk: Option<f64>,
    t_c_estimate_mk: Option<f64>,
    iterations: Option<u32>,
    error: Option<String>,
}

#[derive(Serialize)]
struct SummaryRow {
    model: ModelKind,
    runs: u64,
    failures: u64,
    mean_mk: f64,
    std_mk: f64,
    stderr_mk: f64,
    bias_mk: f64,
    predicted_mk: f64,
    predicted_current_term_mk: f64,
    predicted_temperature_term_mk: f64,
}

pub fn protocol(a: &ProtocolArgs) -> Result<(), CliError> {
    let cfg: Config = load_config(&a.common)?;
    prepare_dir(&a.common.out)?;
    let base = ProtocolConfig {
        t_c_true: mk(a.tc_mk.unwrap_or(cfg.tc.mk())),
        bracket: (mk(a.th_min_mk), mk(a.th_max_mk)),
        seed: a.seed,
        readings_per_point: a.readings,
        tolerance: mk(a.tolerance_mk),
        noise_model: match a.noise_model {
            NoiseChoice::ZeroOffset => CurrentNoiseModel::ZeroOffset,
            NoiseChoice::Independent => CurrentNoiseModel::Independent,
        },
        ..ProtocolConfig::from_config(&cfg)
    };
    base.validate().map_err(|e| CliError::at("protocol", e))?;

    let mut runs = Vec::new();
    let mut summaries = Vec::new();
    for kind in kinds(a.model) {
        let pc = ProtocolConfig { model: kind, ..base };
        let model = CurrentModel::new(kind, &cfg)
            .prepared_for(pc.t_c_true, pc.bracket.1)
            .map_err(|e| CliError::at(format!("choosing the Fock cutoff at T_h = {} mK", a.th_max_mk), e))?;
        let mc = monte_carlo(&pc, &model, a.runs, mode(a.common.sequential))
            .map_err(|e| CliError::at(format!("protocol at T_c = {} mK", pc.t_c_true.mk()), e))?;
        for r in mc.records {
            let (ok, err) = match r.outcome {
                Ok(e) => (Some(e), None),
                Err(e) => (None, Some(e)),
            };
            runs.push(RunRow {
                model: kind,
                run: r.run,
                status: if ok.is_some() { "ok" } else { "failed" },
                t_h_servo_mk: ok.map(|e| e.t_h_servo_mk),
                t_h_located_mk: ok.map(|e| e.t_h_located_mk),
                t_c_estimate_mk: ok.map(|e| e.t_c_estimate_mk),
                iterations: ok.map(|e| e.iterations),
                error: err,
            });
        }
        let s = mc.summary;
        println!(
            "{}: mean {:.4} mK, std {:.4} mK, predicted {:.4} mK, {} of {} runs failed",
            match kind {
                ModelKind::Fock => "fock",
                ModelKind::Gaussian => "gaussian",
            },
            s.mean_mk,
            s.std_mk,
            s.predicted.total.mk(),
            s.failures,
            s.runs
        );
        summaries.push(SummaryRow {
            model: kind,
            runs: s.runs,
            failures: s.failures,
            mean_mk: s.mean_mk,
            std_mk: s.std_mk,
            stderr_mk: s.stderr_mk,
            bias_mk: s.bias_mk,
            predicted_mk: s.predicted.total.mk(),
            predicted_current_term_mk: s.predicted.current_term.mk(),
            predicted_temperature_term_mk: s.predicted.temperature_term.mk(),
        });
    }

    let mut m = RunManifest::new(
        "protocol",
        1,
        &cfg,
        json!({
            "model": model_name(a.model),
            "tc_mk": base.t_c_true.mk(),
            "bracket_mk": [a.th_min_mk, a.th_max_mk],
            "seed": a.seed,
            "runs": a.runs,
            "noise_model": base.noise_model,
            "readings": a.readings,
            "tolerance_mk": a.tolerance_mk,
        }),
    );
    let dir = &a.common.out;
    m.write_csv(
        dir,
        "protocol_runs",
        &[
            "model",
            "run",
            "status",
            "T_h_servo_mK",
            "T_h_located_mK",
            "T_c_estimate_mK",
            "iterations",
            "error",
        ],
        &runs,
    )?;
    m.write_csv(
        dir,
        "protocol_summary",
        &[
            "model",
            "runs",
            "failures",
            "mean_mK",
            "std_mK",
            "stderr_mK",
            "bias_mK",
            "predicted_dTc_mK",
            "predicted_current_term_mK",
            "predicted_temperature_term_mK",
        ],
        &summaries,
    )?;
    m.write_script(
        dir,
        "protocol_runs",
        &format!(
            "set xlabel 'estimated T_c (mK)'\nset ylabel 'runs'\nset style fill solid 0.5\n\
             width = 0.25\nbin(x) = width * floor(x / width) + width / 2\n\
             set title 'T_c = {} mK, {} runs'\n\
             plot 'protocol_runs.csv' using (bin($6)):(1.0) smooth frequency with boxes notitle\n",
            base.t_c_true.mk(),
            a.runs
        ),
    )?;
    m.finish(dir, "protocol")
}
