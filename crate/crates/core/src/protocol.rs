//! The Carnot-point thermometry procedure under noisy readings.
//!
//! T_h is servoed by bisection until the measured current vanishes; the cold
//! temperature then follows from T_c = (Ω_c/Ω_h)·T_h.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::fock::{choose_cutoff_for, EngineModel, FockCutoff, FockEngine, DEFAULT_TAIL_TOL};
use crate::gaussian::{self, ErrorBudget, GaussianParams};
use crate::metrology::{dtc_current, dtc_qfi_closed};
use crate::params::{carnot_hot_temperature, BathState, MachineParams, MeasurementNoise};
use crate::units::{Current, Temperature};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Fock,
    Gaussian,
}

impl std::str::FromStr for ModelKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fock" => Ok(ModelKind::Fock),
            "gaussian" => Ok(ModelKind::Gaussian),
            other => Err(Error::Config(format!("unknown model '{other}'"))),
        }
    }
}

/// How current-reading noise enters a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurrentNoiseModel {
    /// Every reading carries a fresh N(0, ΔI) error. The servo stops as soon
    /// as the averaged reading is within ΔI/√readings of zero.
    Independent,
    /// One N(0, ΔI) offset per run: ΔI is the resolution with which zero
    /// current can be identified. The servo bisects down to the tolerance.
    #[default]
    ZeroOffset,
}

/// Source of the noiseless current I(T_c, T_h).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentModel {
    pub kind: ModelKind,
    pub params: MachineParams,
    pub gaussian: GaussianParams,
    /// Fixed truncation for the Fock model; chosen per point when absent.
    pub cutoff: Option<FockCutoff>,
}

impl CurrentModel {
    pub fn new(kind: ModelKind, config: &Config) -> Self {
        Self {
            kind,
            params: config.machine,
            gaussian: GaussianParams::from_config(config),
            cutoff: None,
        }
    }

    pub fn with_cutoff(mut self, cutoff: FockCutoff) -> Self {
        self.cutoff = Some(cutoff);
        self
    }

    /// Fixes the Fock truncation from the hottest point of a sweep, where the
    /// occupations are largest.
    pub fn prepared_for(mut self, t_c: Temperature, t_h_max: Temperature) -> Result<Self> {
        if self.kind == ModelKind::Fock && self.cutoff.is_none() {
            let baths = BathState::new(&self.params, t_c, t_h_max)?;
            self.cutoff = Some(choose_cutoff_for(
                &EngineModel::josephson(),
                &self.params,
                &baths,
                DEFAULT_TAIL_TOL,
                crate::fock::CUTOFF_CAP,
            )?);
        }
        Ok(self)
    }

    fn fock_cutoff(&self, baths: &BathState) -> Result<FockCutoff> {
        match self.cutoff {
            Some(c) => Ok(c),
            None => choose_cutoff_for(
                &EngineModel::josephson(),
                &self.params,
                baths,
                DEFAULT_TAIL_TOL,
                crate::fock::CUTOFF_CAP,
            ),
        }
    }

    /// Noiseless steady-state current.
    pub fn current_at(&self, t_c: Temperature, t_h: Temperature) -> Result<Current> {
        if !(t_c.value() > 0.0) || !(t_h.value() > 0.0) {
            return Err(Error::Domain("temperatures must be positive".into()));
        }
        let baths = BathState::new(&self.params, t_c, t_h)?;
        match self.kind {
            ModelKind::Gaussian => Ok(gaussian::mean_current(&self.gaussian, &baths)),
            ModelKind::Fock => {
                let engine = FockEngine::new(EngineModel::josephson(), self.params, self.fock_cutoff(&baths)?);
                Ok(engine.solve(&baths)?.1.charge_current)
            }
        }
    }

    /// ∂I/∂T_c at the Carnot point of `t_c` (internal units). Closed form for
    /// the Gaussian model, central differences with a 1 µK step otherwise.
    pub fn slope(&self, t_c: Temperature) -> Result<f64> {
        match self.kind {
            ModelKind::Gaussian => Ok(gaussian::di_dtc(&self.gaussian, t_c)),
            ModelKind::Fock => {
                let t_h = carnot_hot_temperature(t_c, &self.params);
                let h = Temperature::from_mk(1e-3);
                let model = match self.cutoff {
                    Some(_) => *self,
                    None => self.prepared_for(t_c + h, t_h)?,
                };
                let up = model.current_at(t_c + h, t_h)?.value();
                let down = model.current_at(t_c - h, t_h)?.value();
                Ok((up - down) / (2.0 * h.value()))
            }
        }
    }
}

/// Free-function form of [`CurrentModel::current_at`].
pub fn current_at(model: &CurrentModel, t_c: Temperature, t_h: Temperature) -> Result<Current> {
    model.current_at(t_c, t_h)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub model: ModelKind,
    pub t_c_true: Temperature,
    pub bracket: (Temperature, Temperature),
    pub noise: MeasurementNoise,
    pub noise_model: CurrentNoiseModel,
    pub seed: u64,
    pub readings_per_point: u32,
    pub tolerance: Temperature,
    pub max_iterations: u32,
}

impl ProtocolConfig {
    pub fn from_config(config: &Config) -> Self {
        Self {
            model: ModelKind::Gaussian,
            t_c_true: config.tc,
            bracket: (Temperature::from_mk(40.0), Temperature::from_mk(250.0)),
            noise: config.noise,
            noise_model: CurrentNoiseModel::default(),
            seed: 0,
            readings_per_point: 1,
            tolerance: Temperature::from_mk(0.01),
            max_iterations: 60,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.noise.validate()?;
        if self.max_iterations == 0 {
            return Err(Error::Domain("need at least one bisection step".into()));
        }
        let (lo, hi) = self.bracket;
        if !(lo.value() > 0.0) || !(hi.value() > lo.value()) {
            return Err(Error::Domain("bracket must satisfy 0 < lo < hi".into()));
        }
        if !(self.t_c_true.value() > 0.0) {
            return Err(Error::Domain("true cold temperature must be positive".into()));
        }
        if self.readings_per_point == 0 {
            return Err(Error::Domain("need at least one reading per point".into()));
        }
        if !(self.tolerance.value() > 0.0) {
            return Err(Error::Domain("bisection tolerance must be positive".into()));
        }
        Ok(())
    }
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self::from_config(&Config::default())
    }
}

/// One servo step: hot temperature and the averaged current reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reading {
    pub t_h_mk: f64,
    pub current_pa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolResult {
    /// Where the servo settled.
    pub t_h_servo: Temperature,
    /// The hot-bath thermometer reading at the servo point.
    pub t_h_located: Temperature,
    pub t_c_estimate: Temperature,
    pub predicted: ErrorBudget,
    pub iterations: u32,
    pub trace: Vec<Reading>,
}

/// Per-run noise source.
struct Meter {
    rng: ChaCha8Rng,
    current: Normal<f64>,
    offset: f64,
    model: CurrentNoiseModel,
    readings: u32,
}

impl Meter {
    fn new(config: &ProtocolConfig, stream: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(stream);
        let current = Normal::new(0.0, config.noise.delta_i_pa)
            .map_err(|e| Error::Domain(format!("current noise: {e}")))?;
        let offset = match config.noise_model {
            CurrentNoiseModel::ZeroOffset => current.sample(&mut rng),
            CurrentNoiseModel::Independent => 0.0,
        };
        Ok(Self {
            rng,
            current,
            offset,
            model: config.noise_model,
            readings: config.readings_per_point,
        })
    }

    /// Averaged reading in pA.
    fn read(&mut self, true_pa: f64) -> f64 {
        match self.model {
            CurrentNoiseModel::ZeroOffset => true_pa + self.offset,
            CurrentNoiseModel::Independent => {
                let n = self.readings;
                let sum: f64 = (0..n).map(|_| true_pa + self.current.sample(&mut self.rng)).sum();
                sum / n as f64
            }
        }
    }

    fn thermometer(&mut self, t_h: Temperature, delta_mk: f64) -> Result<Temperature> {
        let d = Normal::new(0.0, delta_mk).map_err(|e| Error::Domain(format!("temperature noise: {e}")))?;
        Ok(Temperature::from_mk(t_h.mk() + d.sample(&mut self.rng)))
    }
}

fn run(config: &ProtocolConfig, model: &CurrentModel, predicted: ErrorBudget, stream: u64) -> Result<ProtocolResult> {
    let mut meter = Meter::new(config, stream)?;
    let tc = config.t_c_true;
    let stop_band = config.noise.delta_i_pa / (config.readings_per_point as f64).sqrt();
    let mut trace = Vec::new();
    let mut probe = |t_h: Temperature, trace: &mut Vec<Reading>| -> Result<f64> {
        let r = meter.read(model.current_at(tc, t_h)?.pa());
        trace.push(Reading { t_h_mk: t_h.mk(), current_pa: r });
        Ok(r)
    };

    let (mut lo, mut hi) = config.bracket;
    let r_lo = probe(lo, &mut trace)?;
    let r_hi = probe(hi, &mut trace)?;
    if !(r_lo > 0.0 && r_hi < 0.0) {
        return Err(Error::Bracket {
            lo_mk: lo.mk(),
            hi_mk: hi.mk(),
            lo_reading_pa: r_lo,
            hi_reading_pa: r_hi,
        });
    }

    let mut servo = None;
    let mut iterations = 0;
    while iterations < config.max_iterations {
        if (hi - lo).value() < config.tolerance.value() {
            servo = Some(Temperature::from_internal(0.5 * (lo + hi).value()));
            break;
        }
        iterations += 1;
        let mid = Temperature::from_internal(0.5 * (lo + hi).value());
        let r = probe(mid, &mut trace)?;
        if config.noise_model == CurrentNoiseModel::Independent && r.abs() < stop_band {
            servo = Some(mid);
            break;
        }
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t_h_servo = servo.ok_or(Error::NoConvergence(config.max_iterations))?;
    let t_h_located = meter.thermometer(t_h_servo, config.noise.delta_th_mk)?;
    let ratio = model.params.omega_c.value() / model.params.omega_h.value();
    Ok(ProtocolResult {
        t_h_servo,
        t_h_located,
        t_c_estimate: Temperature::from_internal(ratio * t_h_located.value()),
        predicted,
        iterations,
        trace,
    })
}

fn check(config: &ProtocolConfig, model: &CurrentModel) -> Result<()> {
    config.validate()?;
    if config.model != model.kind {
        return Err(Error::Config(format!(
            "protocol configured for {:?} but given a {:?} current model",
            config.model, model.kind
        )));
    }
    Ok(())
}

/// Runs the servo once, on random stream 0 of the configured seed.
pub fn locate_carnot(config: &ProtocolConfig, model: &CurrentModel) -> Result<ProtocolResult> {
    check(config, model)?;
    let predicted = error_budget(model, config.t_c_true, &config.noise)?;
    run(config, model, predicted, 0)
}

/// Analytic ΔT_c at the Carnot point of `t_c`.
pub fn error_budget(model: &CurrentModel, t_c: Temperature, noise: &MeasurementNoise) -> Result<ErrorBudget> {
    let ratio = model.params.omega_c.value() / model.params.omega_h.value();
    ErrorBudget::from_slope(model.slope(t_c)?, ratio, noise)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionRow {
    pub model: ModelKind,
    pub t_c_mk: f64,
    pub total_mk: f64,
    pub current_term_mk: f64,
    pub temperature_term_mk: f64,
    /// Single-shot error of a current measurement in the bilinear model.
    pub dtc_current_mk: f64,
    /// Single-shot Cramér-Rao bound in the bilinear model.
    pub dtc_qfi_mk: f64,
}

pub fn precision_curve(
    model: &CurrentModel,
    noise: &MeasurementNoise,
    grid: &[Temperature],
    mode: Execution,
) -> Result<Vec<PrecisionRow>> {
    exec::map(grid, mode, |&t_c| -> Result<PrecisionRow> {
        let b = error_budget(model, t_c, noise)?;
        Ok(PrecisionRow {
            model: model.kind,
            t_c_mk: t_c.mk(),
            total_mk: b.total.mk(),
            current_term_mk: b.current_term.mk(),
            temperature_term_mk: b.temperature_term.mk(),
            dtc_current_mk: dtc_current(&model.gaussian, t_c)?.mk(),
            dtc_qfi_mk: dtc_qfi_closed(&model.gaussian, t_c)?.mk(),
        })
    })
    .into_iter()
    .collect()
}

/// Outcome of one Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: u64,
    pub outcome: std::result::Result<RunEstimate, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunEstimate {
    pub t_h_servo_mk: f64,
    pub t_h_located_mk: f64,
    pub t_c_estimate_mk: f64,
    pub iterations: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub runs: u64,
    /// Runs whose bracket check or servo failed; excluded from the moments.
    pub failures: u64,
    pub mean_mk: f64,
    pub std_mk: f64,
    pub stderr_mk: f64,
    pub bias_mk: f64,
    pub predicted: ErrorBudget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarlo {
    pub records: Vec<RunRecord>,
    pub summary: MonteCarloSummary,
}

/// Independent protocol runs; run i draws from stream i of the master seed,
/// so the result does not depend on scheduling.
pub fn monte_carlo(config: &ProtocolConfig, model: &CurrentModel, runs: u64, mode: Execution) -> Result<MonteCarlo> {
    check(config, model)?;
    let predicted = error_budget(model, config.t_c_true, &config.noise)?;
    let records: Vec<RunRecord> = exec::map_range(runs as usize, mode, |i| {
        let outcome = run(config, model, predicted, i as u64)
            .map(|r| RunEstimate {
                t_h_servo_mk: r.t_h_servo.mk(),
                t_h_located_mk: r.t_h_located.mk(),
                t_c_estimate_mk: r.t_c_estimate.mk(),
                iterations: r.iterations,
            })
            .map_err(|e| e.to_string());
        RunRecord { run: i as u64, outcome }
    });
    let est: Vec<f64> = records
        .iter()
        .filter_map(|r| r.outcome.as_ref().ok().map(|e| e.t_c_estimate_mk))
        .collect();
    if est.is_empty() {
        return Err(Error::Numerical("every protocol run failed".into()));
    }
    let n = est.len() as f64;
    let mean = est.iter().sum::<f64>() / n;
    let var = est.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let std = var.sqrt();
    let summary = MonteCarloSummary {
        runs,
        failures: runs - est.len() as u64,
        mean_mk: mean,
        std_mk: std,
        stderr_mk: std / n.sqrt(),
        bias_mk: mean - config.t_c_true.mk(),
        predicted,
    };
    Ok(MonteCarlo { records, summary })
}

#[cfg(test)]
mod tests;
