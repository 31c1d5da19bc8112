//! Spin-chain quench dynamics with a linear-readout probe.
//!
//! The pipeline: pick a Hamiltonian from [`model`], write a scalar input
//! into the central spin ([`quench`]), evolve exactly ([`engine`]), record
//! single-site expectations ([`observables`]), and regress the inputs back
//! out per site and time ([`analysis`]). Sweeping a model parameter and
//! averaging the resulting R² grids locates quantum phase transitions as
//! dips in readout quality. [`harness`] drives the whole protocol from a
//! config file and persists reproducible artifacts.

pub mod analysis;
pub mod engine;
pub mod harness;
pub mod model;
pub mod observables;
pub mod quench;
pub mod rng;

pub use analysis::{
    build_r2_grid, locate_dip, mean_r2, r_squared, train_readout, DipReport, R2Grid,
    ReadoutWeights, SubsetSpec, SweepResult, DEFAULT_DELTA_THRESHOLD,
};
pub use engine::{
    apply_hamiltonian, evolve, ground_state, EngineError, EngineParams, Propagator, StateVector,
};
pub use model::{expand_terms, Axis, Couplings, ModelError, ModelSpec, PauliTerm};
pub use observables::{
    entanglement_entropy, pauli_expectation, record_entropy_series, record_trajectory,
    EntropySeries, ObservableGrid,
};
pub use quench::{
    build_initial_state, local_state, sample_inputs, Background, Encoding, InputBatch,
    QuenchConfig,
};
