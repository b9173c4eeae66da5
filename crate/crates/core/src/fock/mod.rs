//! Full nonlinear model on a truncated two-mode Fock space.

mod liouvillian;
mod operators;
mod steady;

pub use liouvillian::{build_liouvillian, DissipatorRates, Liouvillian};
pub use operators::{
    build_a_operator, build_hamiltonian, laguerre_assoc, Coupling, DenseOperator, EngineModel,
    FockCutoff, FockSpace, RateConvention,
};
pub use steady::{
    choose_cutoff, choose_cutoff_for, observables, steady_state, DensityOperator, FockEngine,
    SteadyObservables, CUTOFF_CAP, DEFAULT_TAIL_TOL,
};
