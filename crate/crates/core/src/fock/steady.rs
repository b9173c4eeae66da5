//! Steady states of the Lindblad generator and the transport observables
//! evaluated on them.

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Col;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::liouvillian::{DissipatorRates, Liouvillian};
use super::operators::{DenseOperator, EngineModel, FockCutoff, FockSpace};
use crate::error::{Error, Result};
use crate::params::{BathState, MachineParams};
use crate::units::{Current, Power};

const RESIDUAL_TOL: f64 = 1e-10;
const POSITIVITY_TOL: f64 = 1e-8;
const HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: DMatrix<Complex64>,
    space: FockSpace,
}

impl DensityOperator {
    /// Wraps a matrix after checking shape and Hermiticity.
    pub fn new(matrix: DMatrix<Complex64>, space: FockSpace) -> Result<Self> {
        if matrix.nrows() != space.dim() || matrix.ncols() != space.dim() {
            return Err(Error::Domain(format!(
                "density matrix is {}x{}, space has dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                space.dim()
            )));
        }
        let rho = Self { matrix, space };
        let res = rho.hermiticity_residual();
        if res > HERMITIAN_TOL {
            return Err(Error::Domain(format!("density matrix not Hermitian (residual {res:.2e})")));
        }
        Ok(rho)
    }

    /// Product of thermal states with the given mean occupations.
    pub fn thermal_product(space: FockSpace, n_c: f64, n_h: f64) -> Self {
        let weights = |n: f64, dim: usize| -> Vec<f64> {
            let w: Vec<f64> = (0..dim)
                .map(|k| if n == 0.0 { if k == 0 { 1.0 } else { 0.0 } } else { (n / (n + 1.0)).powi(k as i32) })
                .collect();
            let z: f64 = w.iter().sum();
            w.into_iter().map(|x| x / z).collect()
        };
        let wc = weights(n_c, space.dim_c());
        let wh = weights(n_h, space.dim_h());
        let mut m = DMatrix::zeros(space.dim(), space.dim());
        for (c, pc) in wc.iter().enumerate() {
            for (h, ph) in wh.iter().enumerate() {
                let i = space.index(c, h);
                m[(i, i)] = Complex64::new(pc * ph, 0.0);
            }
        }
        Self { matrix: m, space }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let d = &self.matrix - self.matrix.adjoint();
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> DVector<f64> {
        SymmetricEigen::new(self.matrix.clone()).eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().min()
    }

    /// tr(ρ O).
    pub fn expect(&self, op: &DenseOperator) -> Complex64 {
        (&self.matrix * &op.matrix).trace()
    }

    /// Marginal Fock populations of the cold mode.
    pub fn populations_c(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.space.dim_c()];
        for i in 0..self.space.dim() {
            p[self.space.levels(i).0] += self.matrix[(i, i)].re;
        }
        p
    }

    pub fn populations_h(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.space.dim_h()];
        for i in 0..self.space.dim() {
            p[self.space.levels(i).1] += self.matrix[(i, i)].re;
        }
        p
    }

    /// Population of the top two retained levels of each mode.
    pub fn tail_populations(&self) -> (f64, f64) {
        let top2 = |p: Vec<f64>| p.iter().rev().take(2).sum::<f64>();
        (top2(self.populations_c()), top2(self.populations_h()))
    }
}

/// Steady state of a trace-preserving generator.
///
/// The generator commutes with the global phase rotation e^{iφ(n_c+n_h)},
/// so a unique steady state only has entries ρ_ij with equal total
/// excitation number. The null-space problem is solved on that sector with
/// the ρ_00 row replaced by the trace condition; the residual is then
/// checked against the full generator.
pub fn steady_state(l: &Liouvillian) -> Result<DensityOperator> {
    let space = l.space();
    let d = space.dim();
    let exc: Vec<usize> = (0..d).map(|i| space.excitations(i)).collect();
    let mut sector_of = vec![usize::MAX; d * d];
    let mut members = Vec::new();
    for j in 0..d {
        for i in 0..d {
            if exc[i] == exc[j] {
                sector_of[i + j * d] = members.len();
                members.push(i + j * d);
            }
        }
    }
    let s = members.len();
    // the sector system is as sparse as the generator; the ρ_00 row is
    // replaced by the trace condition
    let trace_row = sector_of[0];
    let mut entries = Vec::new();
    for (r, row) in l.matrix().row_iter().enumerate() {
        let rs = sector_of[r];
        for (&c, &v) in row.col_indices().iter().zip(row.values()) {
            let cs = sector_of[c];
            if cs == usize::MAX {
                continue;
            }
            if rs == usize::MAX {
                if v.norm() > 0.0 {
                    return Err(Error::Numerical(
                        "generator couples excitation sectors; sector solve does not apply".into(),
                    ));
                }
                continue;
            }
            if rs != trace_row && v.norm() > 0.0 {
                entries.push(Triplet::new(rs, cs, v));
            }
        }
    }
    for (cs, &k) in members.iter().enumerate() {
        if k % d == k / d {
            entries.push(Triplet::new(trace_row, cs, Complex64::new(1.0, 0.0)));
        }
    }
    let singular = || Error::Numerical("trace-constrained steady-state system is singular".into());
    let m = SparseColMat::<usize, Complex64>::try_new_from_triplets(s, s, &entries).map_err(|_| singular())?;
    let lu = m.sp_lu().map_err(|_| singular())?;
    let mut rhs = Col::<Complex64>::zeros(s);
    rhs[trace_row] = Complex64::new(1.0, 0.0);
    let x = lu.solve(&rhs);
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(singular());
    }

    let mut rho = DMatrix::<Complex64>::zeros(d, d);
    for (cs, &k) in members.iter().enumerate() {
        rho[(k % d, k / d)] = x[cs];
    }
    let mut rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let tr = rho.trace();
    rho /= tr;

    let resid = l.apply(&rho).norm();
    if !(resid <= RESIDUAL_TOL * l.frobenius_norm()) {
        return Err(Error::Numerical(format!(
            "steady-state residual {resid:.3e} exceeds tolerance"
        )));
    }
    let out = DensityOperator { matrix: rho, space };
    let min_ev = out.min_eigenvalue();
    if min_ev < -POSITIVITY_TOL {
        return Err(Error::Positivity { min_eigenvalue: min_ev });
    }
    Ok(out)
}

/// Transport quantities of a steady state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyObservables {
    /// Positive in the refrigeration regime.
    pub charge_current: Current,
    pub occupation_c: f64,
    pub occupation_h: f64,
    /// Heat flowing into the cold bath.
    pub heat_current_c: Power,
    /// Heat flowing into the hot bath.
    pub heat_current_h: Power,
    /// Electrical power drawn from the bias, P = I·V.
    pub power: Power,
}

pub fn observables(
    rho: &DensityOperator,
    model: &EngineModel,
    params: &MachineParams,
    baths: &BathState,
) -> Result<SteadyObservables> {
    let space = rho.space();
    let cutoff = space.cutoff();
    let current = rho.expect(&model.current_operator(params, cutoff)?).re;
    let occ_c = rho.expect(&space.number_c()).re;
    let occ_h = rho.expect(&space.number_h()).re;
    let rates = DissipatorRates::new(params, baths, model.rates);
    // heat released into each bath, −Ω tr(N D[ρ]), evaluated on the truncated
    // ladder so that the first law holds exactly at any cutoff
    let pops_c = rho.populations_c();
    let pops_h = rho.populations_h();
    let j_c = params.omega_c.value() * bath_outflow(&pops_c, rates.loss_c, rates.gain_c);
    let j_h = params.omega_h.value() * bath_outflow(&pops_h, rates.loss_h, rates.gain_h);
    // eV = (Ω_h − Ω_c)/2 at resonance
    let power = current * 0.5 * (params.omega_h - params.omega_c).value();
    Ok(SteadyObservables {
        charge_current: Current::from_internal(current),
        occupation_c: occ_c,
        occupation_h: occ_h,
        heat_current_c: Power::from_internal(j_c),
        heat_current_h: Power::from_internal(j_h),
        power: Power::from_internal(power),
    })
}

fn bath_outflow(pops: &[f64], loss: f64, gain: f64) -> f64 {
    let top = pops.len() - 1;
    pops.iter()
        .enumerate()
        .map(|(n, p)| {
            let up = if n < top { gain * (n as f64 + 1.0) } else { 0.0 };
            p * (loss * n as f64 - up)
        })
        .sum()
}

/// A model, parameter set and truncation, ready to be solved for any bath
/// state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockEngine {
    pub model: EngineModel,
    pub params: MachineParams,
    pub cutoff: FockCutoff,
}

impl FockEngine {
    pub fn new(model: EngineModel, params: MachineParams, cutoff: FockCutoff) -> Self {
        Self {
            model,
            params,
            cutoff,
        }
    }

    pub fn liouvillian(&self, baths: &BathState) -> Result<Liouvillian> {
        Liouvillian::new(&self.model, &self.params, baths, self.cutoff)
    }

    pub fn steady_state(&self, baths: &BathState) -> Result<DensityOperator> {
        steady_state(&self.liouvillian(baths)?)
    }

    pub fn solve(&self, baths: &BathState) -> Result<(DensityOperator, SteadyObservables)> {
        let rho = self.steady_state(baths)?;
        let obs = observables(&rho, &self.model, &self.params, baths)?;
        Ok((rho, obs))
    }
}

/// Default ceiling for the automatic cutoff search.
pub const CUTOFF_CAP: usize = 40;

/// Tail population accepted when a sweep picks its own truncation.
pub const DEFAULT_TAIL_TOL: f64 = 1e-8;

/// Smallest cutoff whose steady state keeps less than `tail_tol` in the top
/// two levels of each mode.
pub fn choose_cutoff(params: &MachineParams, baths: &BathState, tail_tol: f64) -> Result<FockCutoff> {
    choose_cutoff_for(&EngineModel::josephson(), params, baths, tail_tol, CUTOFF_CAP)
}

/// Doubles each mode's cutoff until its tail is below tolerance, then
/// bisects back down to the smallest passing value.
pub fn choose_cutoff_for(
    model: &EngineModel,
    params: &MachineParams,
    baths: &BathState,
    tail_tol: f64,
    cap: usize,
) -> Result<FockCutoff> {
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::Domain(format!("tail tolerance must lie in (0, 1), got {tail_tol}")));
    }
    let tails = |c: usize, h: usize| -> Result<(f64, f64)> {
        let engine = FockEngine::new(*model, *params, FockCutoff::new(c, h)?);
        Ok(engine.steady_state(baths)?.tail_populations())
    };
    let passes = |t: (f64, f64)| t.0 < tail_tol && t.1 < tail_tol;

    let (mut c, mut h) = (FockCutoff::MIN, FockCutoff::MIN);
    let (mut fail_c, mut fail_h) = (None, None);
    loop {
        let t = tails(c, h)?;
        if passes(t) {
            break;
        }
        let grow = |n: usize| -> Result<usize> {
            if n >= cap {
                Err(Error::Cutoff(format!(
                    "tail population still above {tail_tol:e} at the cap of {cap} levels"
                )))
            } else {
                Ok((2 * n).min(cap))
            }
        };
        if t.0 >= tail_tol {
            fail_c = Some(c);
            c = grow(c)?;
        }
        if t.1 >= tail_tol {
            fail_h = Some(h);
            h = grow(h)?;
        }
    }
    if let Some(mut lo) = fail_c {
        while c - lo > 1 {
            let mid = (lo + c) / 2;
            if passes(tails(mid, h)?) {
                c = mid;
            } else {
                lo = mid;
            }
        }
    }
    if let Some(mut lo) = fail_h {
        while h - lo > 1 {
            let mid = (lo + h) / 2;
            if passes(tails(c, mid)?) {
                h = mid;
            } else {
                lo = mid;
            }
        }
    }
    FockCutoff::new(c, h)
}
