//! Williamson normal form of two-mode covariance matrices.

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gaussian::CovarianceMatrix;

/// Margin above 1/2 below which a symplectic eigenvalue counts as pure.
pub const PURITY_MARGIN: f64 = 1e-9;

/// Symplectic form for the quadrature order (x_c, x_h, p_c, p_h).
pub fn omega() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 0.0, 1.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, -1.0, 0.0, 0.0,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticDecomposition {
    /// S with SΩSᵀ = Ω and SΓSᵀ = diag(ν₁, ν₂, ν₁, ν₂).
    pub s: Matrix4<f64>,
    /// Symplectic eigenvalues, largest first.
    pub nu: [f64; 2],
}

impl SymplecticDecomposition {
    /// The diagonal of SΓSᵀ in quadrature order.
    pub fn diagonal(&self) -> Vector4<f64> {
        Vector4::new(self.nu[0], self.nu[1], self.nu[0], self.nu[1])
    }
}

fn inverse_sqrt(gamma: &Matrix4<f64>) -> Result<Matrix4<f64>> {
    let eig = SymmetricEigen::new(*gamma);
    if eig.eigenvalues.min() <= 0.0 {
        return Err(Error::Numerical("covariance matrix is not positive definite".into()));
    }
    let d = eig.eigenvalues.map(|x| 1.0 / x.sqrt());
    Ok(eig.eigenvectors * Matrix4::from_diagonal(&d) * eig.eigenvectors.transpose())
}

/// Rotates an eigenvector so its largest component is real and positive.
fn fix_phase(w: &mut [Complex64; 4]) {
    let mut k = 0;
    for i in 1..4 {
        if w[i].norm() > w[k].norm() + 1e-12 {
            k = i;
        }
    }
    let phase = w[k].conj() / w[k].norm();
    for z in w.iter_mut() {
        *z *= phase;
    }
}

/// Williamson decomposition.
///
/// With A = Γ^(-1/2) Ω Γ^(-1/2), the Hermitian matrix iA has eigenvalues
/// ±1/ν. Real and imaginary parts of the eigenvectors for −1/ν form an
/// orthogonal O, and S = D^(1/2) Oᵀ Γ^(-1/2). This stays well defined when
/// ν₁ = ν₂.
pub fn williamson(gamma: &CovarianceMatrix) -> Result<SymplecticDecomposition> {
    let g = gamma.matrix();
    if (g - g.transpose()).amax() > 1e-12 * g.amax().max(1.0) {
        return Err(Error::Domain("covariance matrix is not symmetric".into()));
    }
    let g_is = inverse_sqrt(g)?;
    let a = g_is * omega() * g_is;
    let ia = a.map(|x| Complex64::new(0.0, x));
    let eig = SymmetricEigen::new(ia);

    let mut modes: Vec<(f64, [Complex64; 4])> = (0..4)
        .filter(|&k| eig.eigenvalues[k] < 0.0)
        .map(|k| {
            let col = eig.eigenvectors.column(k);
            let mut w = [col[0], col[1], col[2], col[3]];
            fix_phase(&mut w);
            (-1.0 / eig.eigenvalues[k], w)
        })
        .collect();
    if modes.len() != 2 {
        return Err(Error::Numerical("symplectic spectrum is not paired".into()));
    }
    modes.sort_by(|x, y| y.0.total_cmp(&x.0));
    for &(nu, _) in &modes {
        if nu <= 0.5 + PURITY_MARGIN {
            return Err(Error::SymplecticSingular { nu });
        }
    }

    let r2 = std::f64::consts::SQRT_2;
    let mut o = Matrix4::zeros();
    for (k, (_, w)) in modes.iter().enumerate() {
        for i in 0..4 {
            o[(i, k)] = r2 * w[i].re;
            o[(i, k + 2)] = r2 * w[i].im;
        }
    }
    let nu = [modes[0].0, modes[1].0];
    let d_half = Matrix4::from_diagonal(&Vector4::new(nu[0], nu[1], nu[0], nu[1]).map(f64::sqrt));
    Ok(SymplecticDecomposition {
        s: d_half * o.transpose() * g_is,
        nu,
    })
}

/// Symplectic eigenvalues from the spectrum of ΩΓ (eigenvalues ±iν), without
/// building S.
pub fn symplectic_spectrum(gamma: &CovarianceMatrix) -> [f64; 2] {
    let ev = (omega() * gamma.matrix()).complex_eigenvalues();
    let mut v: Vec<f64> = ev.iter().map(|z| z.im.abs()).collect();
    v.sort_by(|a, b| b.total_cmp(a));
    [v[0], v[2]]
}
