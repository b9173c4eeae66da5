//! Sparse Lindblad generator acting on column-stacked density matrices,
//! vec(ρ)[i + j·D] = ρ_ij.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::operators::{DenseOperator, EngineModel, FockCutoff, FockSpace, RateConvention};
use crate::error::Result;
use crate::params::{BathState, MachineParams};

/// Rates of the four local dissipators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissipatorRates {
    /// κ_c(n_c + 1) on D[a_c].
    pub loss_c: f64,
    /// κ_c·n_c on D[a_c†] (κ_h·n_c under [`RateConvention::HotRateOnColdGain`]).
    pub gain_c: f64,
    pub loss_h: f64,
    pub gain_h: f64,
}

impl DissipatorRates {
    pub fn new(params: &MachineParams, baths: &BathState, convention: RateConvention) -> Self {
        let gain_c_rate = match convention {
            RateConvention::DetailedBalance => params.kappa_c,
            RateConvention::HotRateOnColdGain => params.kappa_h,
        };
        Self {
            loss_c: params.kappa_c.value() * (baths.n_c + 1.0),
            gain_c: gain_c_rate.value() * baths.n_c,
            loss_h: params.kappa_h.value() * (baths.n_h + 1.0),
            gain_h: params.kappa_h.value() * baths.n_h,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Liouvillian {
    matrix: CsrMatrix<Complex64>,
    space: FockSpace,
    rates: DissipatorRates,
}

type Entries = [(usize, usize, Complex64)];

/// Accumulates superoperator terms `coeff · L ρ R`.
struct Builder {
    coo: CooMatrix<Complex64>,
    dim: usize,
}

impl Builder {
    fn new(dim: usize) -> Self {
        Self {
            coo: CooMatrix::new(dim * dim, dim * dim),
            dim,
        }
    }

    // (L ρ R)_ij = Σ L_ii' ρ_i'j' R_j'j
    fn sandwich(&mut self, left: &Entries, right: &Entries, coeff: Complex64) {
        if coeff == Complex64::new(0.0, 0.0) {
            return;
        }
        for &(i, ip, l) in left {
            for &(jp, j, r) in right {
                self.coo
                    .push(i + j * self.dim, ip + jp * self.dim, coeff * l * r);
            }
        }
    }

    fn identity(&self) -> Vec<(usize, usize, Complex64)> {
        (0..self.dim).map(|i| (i, i, Complex64::new(1.0, 0.0))).collect()
    }

    fn dissipator(&mut self, jump: &DenseOperator, rate: f64) {
        if rate == 0.0 {
            return;
        }
        let a = jump.entries();
        let ad = jump.adjoint().entries();
        let ada = DenseOperator::new(jump.matrix.adjoint() * &jump.matrix, "").entries();
        let id = self.identity();
        let r = Complex64::new(rate, 0.0);
        let half = Complex64::new(-0.5 * rate, 0.0);
        self.sandwich(&a, &ad, r);
        self.sandwich(&ada, &id, half);
        self.sandwich(&id, &ada, half);
    }
}

impl Liouvillian {
    pub fn new(
        model: &EngineModel,
        params: &MachineParams,
        baths: &BathState,
        cutoff: FockCutoff,
    ) -> Result<Self> {
        params.validate()?;
        let space = cutoff.space();
        let h = model.hamiltonian(params, cutoff)?;
        let rates = DissipatorRates::new(params, baths, model.rates);
        let mut b = Builder::new(space.dim());
        let h_entries = h.entries();
        let id = b.identity();
        b.sandwich(&h_entries, &id, Complex64::new(0.0, -1.0));
        b.sandwich(&id, &h_entries, Complex64::new(0.0, 1.0));
        let a_c = space.annihilation_c();
        let a_h = space.annihilation_h();
        b.dissipator(&a_c, rates.loss_c);
        b.dissipator(&a_c.adjoint(), rates.gain_c);
        b.dissipator(&a_h, rates.loss_h);
        b.dissipator(&a_h.adjoint(), rates.gain_h);
        Ok(Self {
            matrix: CsrMatrix::from(&b.coo),
            space,
            rates,
        })
    }

    pub fn matrix(&self) -> &CsrMatrix<Complex64> {
        &self.matrix
    }

    pub fn space(&self) -> FockSpace {
        self.space
    }

    pub fn rates(&self) -> DissipatorRates {
        self.rates
    }

    /// Hilbert-space dimension D (the generator is D² × D²).
    pub fn hilbert_dim(&self) -> usize {
        self.space.dim()
    }

    pub fn apply_vec(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let mut out = DVector::zeros(self.matrix.nrows());
        for (r, row) in self.matrix.row_iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (&c, &val) in row.col_indices().iter().zip(row.values()) {
                acc += val * v[c];
            }
            out[r] = acc;
        }
        out
    }

    /// L[ρ] as a D × D matrix.
    pub fn apply(&self, rho: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        let d = self.hilbert_dim();
        let v = DVector::from_column_slice(rho.as_slice());
        DMatrix::from_column_slice(d, d, self.apply_vec(&v).as_slice())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.values().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// max over columns of |Σ_i L[(i,i), col]|; zero for a trace-preserving generator.
    pub fn trace_residual(&self) -> f64 {
        let d = self.hilbert_dim();
        let mut col_sums = vec![Complex64::new(0.0, 0.0); d * d];
        for (r, row) in self.matrix.row_iter().enumerate() {
            if r % d != r / d {
                continue;
            }
            for (&c, &val) in row.col_indices().iter().zip(row.values()) {
                col_sums[c] += val;
            }
        }
        col_sums.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Dense copy, for small spaces and diagnostics.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.matrix.nrows();
        let mut m = DMatrix::zeros(n, n);
        for (r, c, v) in self.matrix.triplet_iter() {
            m[(r, c)] += *v;
        }
        m
    }
}

/// Generator of the Josephson engine with detailed-balance rates.
pub fn build_liouvillian(
    params: &MachineParams,
    baths: &BathState,
    cutoff: FockCutoff,
) -> Result<Liouvillian> {
    Liouvillian::new(&EngineModel::josephson(), params, baths, cutoff)
}
