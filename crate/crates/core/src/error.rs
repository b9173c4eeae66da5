use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("Fock cutoff too small: {0}")]
    Cutoff(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("steady state not positive (min eigenvalue {min_eigenvalue:.3e}); increase the Fock cutoff")]
    Positivity { min_eigenvalue: f64 },

    #[error("singular symplectic spectrum: eigenvalue {nu} too close to 1/2")]
    SymplecticSingular { nu: f64 },

    #[error("bracket does not straddle the Carnot point: reading {lo_reading_pa:.4} pA at {lo_mk} mK, {hi_reading_pa:.4} pA at {hi_mk} mK")]
    Bracket {
        lo_mk: f64,
        hi_mk: f64,
        lo_reading_pa: f64,
        hi_reading_pa: f64,
    },

    #[error("no convergence after {0} iterations")]
    NoConvergence(u32),

    #[error("divergent error propagation: zero sensitivity")]
    Divergent,
}

pub type Result<T> = std::result::Result<T, Error>;
