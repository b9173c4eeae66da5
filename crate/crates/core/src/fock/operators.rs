//! Truncated two-mode Fock space and the operators living on it.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::MachineParams;
use crate::units::Frequency;

/// Highest retained Fock level of each mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FockCutoff {
    n_max_c: usize,
    n_max_h: usize,
}

impl FockCutoff {
    /// Smallest cutoff the automatic selection will return.
    pub const MIN: usize = 2;

    pub fn new(n_max_c: usize, n_max_h: usize) -> Result<Self> {
        if n_max_c < 1 || n_max_h < 1 {
            return Err(Error::Cutoff(format!(
                "need at least one excitation per mode, got ({n_max_c}, {n_max_h})"
            )));
        }
        Ok(Self { n_max_c, n_max_h })
    }

    pub fn n_max_c(&self) -> usize {
        self.n_max_c
    }

    pub fn n_max_h(&self) -> usize {
        self.n_max_h
    }

    pub fn space(&self) -> FockSpace {
        FockSpace { cutoff: *self }
    }
}

/// Product basis |n_c, n_h⟩ with the cold mode as the outer (slow) index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockSpace {
    cutoff: FockCutoff,
}

impl FockSpace {
    pub fn cutoff(&self) -> FockCutoff {
        self.cutoff
    }

    pub fn dim_c(&self) -> usize {
        self.cutoff.n_max_c + 1
    }

    pub fn dim_h(&self) -> usize {
        self.cutoff.n_max_h + 1
    }

    pub fn dim(&self) -> usize {
        self.dim_c() * self.dim_h()
    }

    pub fn index(&self, n_c: usize, n_h: usize) -> usize {
        n_c * self.dim_h() + n_h
    }

    /// (n_c, n_h) of a basis index.
    pub fn levels(&self, idx: usize) -> (usize, usize) {
        (idx / self.dim_h(), idx % self.dim_h())
    }

    /// Total excitation number n_c + n_h of a basis state.
    pub fn excitations(&self, idx: usize) -> usize {
        let (c, h) = self.levels(idx);
        c + h
    }

    pub fn embed_c(&self, op: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        op.kronecker(&DMatrix::identity(self.dim_h(), self.dim_h()))
    }

    pub fn embed_h(&self, op: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        DMatrix::identity(self.dim_c(), self.dim_c()).kronecker(op)
    }

    pub fn annihilation_c(&self) -> DenseOperator {
        DenseOperator::new(self.embed_c(&annihilation(self.cutoff.n_max_c)), "a_c")
    }

    pub fn annihilation_h(&self) -> DenseOperator {
        DenseOperator::new(self.embed_h(&annihilation(self.cutoff.n_max_h)), "a_h")
    }

    pub fn number_c(&self) -> DenseOperator {
        DenseOperator::new(self.embed_c(&number(self.cutoff.n_max_c)), "n_c")
    }

    pub fn number_h(&self) -> DenseOperator {
        DenseOperator::new(self.embed_h(&number(self.cutoff.n_max_h)), "n_h")
    }
}

/// A labelled dense complex matrix on the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    pub matrix: DMatrix<Complex64>,
    pub label: String,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<Complex64>, label: impl Into<String>) -> Self {
        Self {
            matrix,
            label: label.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.matrix.adjoint(), format!("{}†", self.label))
    }

    /// max |O − O†|.
    pub fn hermiticity_residual(&self) -> f64 {
        let d = &self.matrix - self.matrix.adjoint();
        d.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Non-zero entries as (row, col, value).
    pub fn entries(&self) -> Vec<(usize, usize, Complex64)> {
        let mut out = Vec::new();
        for j in 0..self.matrix.ncols() {
            for i in 0..self.matrix.nrows() {
                let v = self.matrix[(i, j)];
                if v != Complex64::new(0.0, 0.0) {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    /// Plain-text dump: a header line followed by one row per line,
    /// entries written as `re,im`.
    pub fn dump(&self) -> String {
        let mut s = format!("# {} {}x{}\n", self.label, self.dim(), self.dim());
        for i in 0..self.matrix.nrows() {
            let row: Vec<String> = (0..self.matrix.ncols())
                .map(|j| {
                    let z = self.matrix[(i, j)];
                    format!("{:.6e},{:.6e}", z.re, z.im)
                })
                .collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}

fn annihilation(n_max: usize) -> DMatrix<Complex64> {
    let d = n_max + 1;
    DMatrix::from_fn(d, d, |i, j| {
        if j == i + 1 {
            Complex64::new((j as f64).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

fn number(n_max: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n_max + 1, n_max + 1, |i, j| {
        Complex64::new(if i == j { i as f64 } else { 0.0 }, 0.0)
    })
}

/// Associated Laguerre polynomial L_n^(1)(x) by upward recurrence.
pub fn laguerre_assoc(n: i64, x: f64) -> Result<f64> {
    if n < 0 {
        return Err(Error::Domain(format!("Laguerre degree must be >= 0, got {n}")));
    }
    let mut prev = 1.0;
    if n == 0 {
        return Ok(prev);
    }
    let mut cur = 2.0 - x;
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 2.0 - x) * cur - (k + 1.0) * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Single-mode nonlinear operator Â = 2λ e^{−2λ²} Σ_n L_n^(1)(4λ²)/(n+1) |n⟩⟨n|.
pub fn build_a_operator(lambda: f64, n_max: usize) -> Result<DenseOperator> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("lambda must be positive, got {lambda}")));
    }
    let pref = 2.0 * lambda * (-2.0 * lambda * lambda).exp();
    let x = 4.0 * lambda * lambda;
    let mut m = DMatrix::zeros(n_max + 1, n_max + 1);
    for n in 0..=n_max {
        let l = laguerre_assoc(n as i64, x)?;
        m[(n, n)] = Complex64::new(pref * l / (n as f64 + 1.0), 0.0);
    }
    Ok(DenseOperator::new(m, "A"))
}

/// How the two oscillators exchange excitations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Coupling {
    /// Rotating-frame Josephson Hamiltonian with the Laguerre nonlinearity.
    Josephson,
    /// Beam-splitter coupling g(a_h†a_c + h.c.) of the approximate model.
    Bilinear { g: Frequency },
}

/// Which rate multiplies the cold-mode pumping dissipator D[a_c†].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RateConvention {
    /// κ_c·n_c, as detailed balance with the cold bath requires.
    #[default]
    DetailedBalance,
    /// κ_h·n_c, which breaks detailed balance. Kept for comparison only.
    HotRateOnColdGain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EngineModel {
    pub coupling: Coupling,
    pub rates: RateConvention,
}

impl Default for EngineModel {
    fn default() -> Self {
        Self::josephson()
    }
}

impl EngineModel {
    pub fn josephson() -> Self {
        Self {
            coupling: Coupling::Josephson,
            rates: RateConvention::DetailedBalance,
        }
    }

    pub fn bilinear(g: Frequency) -> Self {
        Self {
            coupling: Coupling::Bilinear { g },
            rates: RateConvention::DetailedBalance,
        }
    }

    /// Exchange operator K with Ĥ = s(K + K†), together with s.
    fn exchange(&self, params: &MachineParams, cutoff: FockCutoff) -> Result<(DMatrix<Complex64>, f64)> {
        let space = cutoff.space();
        let a_c = space.annihilation_c().matrix;
        let a_h = space.annihilation_h().matrix;
        match self.coupling {
            Coupling::Josephson => {
                let big_a_c = space.embed_c(&build_a_operator(params.lambda_c, cutoff.n_max_c())?.matrix);
                let big_a_h = space.embed_h(&build_a_operator(params.lambda_h, cutoff.n_max_h())?.matrix);
                let k = a_h.adjoint() * big_a_h * big_a_c * a_c;
                Ok((k, 0.5 * params.ej.value()))
            }
            Coupling::Bilinear { g } => Ok((a_h.adjoint() * a_c, g.value())),
        }
    }

    pub fn hamiltonian(&self, params: &MachineParams, cutoff: FockCutoff) -> Result<DenseOperator> {
        let (k, s) = self.exchange(params, cutoff)?;
        let h = (&k + k.adjoint()) * Complex64::new(s, 0.0);
        Ok(DenseOperator::new(h, "H"))
    }

    /// Charge-current operator in units of e·ns⁻¹. Positive values carry
    /// excitations from the cold to the hot mode (refrigeration).
    pub fn current_operator(&self, params: &MachineParams, cutoff: FockCutoff) -> Result<DenseOperator> {
        let (k, s) = self.exchange(params, cutoff)?;
        let i = (k.adjoint() - &k) * Complex64::new(0.0, 2.0 * s);
        Ok(DenseOperator::new(i, "I"))
    }
}

/// Josephson Hamiltonian (E_J/2)(a_h†Â_hÂ_c a_c + h.c.).
pub fn build_hamiltonian(params: &MachineParams, cutoff: FockCutoff) -> Result<DenseOperator> {
    EngineModel::josephson().hamiltonian(params, cutoff)
}
