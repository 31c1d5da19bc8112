//! Exact state-vector dynamics: matrix-free Pauli application, Krylov
//! propagation of e^{−iHt}|ψ⟩, and Lanczos ground states.

mod krylov;
mod lanczos;
mod pauli;
mod state;

pub use lanczos::ground_state;
pub use pauli::CompiledHamiltonian;
pub use state::StateVector;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::PauliTerm;
use krylov::KrylovWorkspace;

/// Default ceiling on chain length: 2^22 amplitudes is 64 MB per state.
pub const DEFAULT_MAX_SITES: usize = 22;

#[derive(Debug, Error, PartialEq)]
pub enum EngineError {
    #[error("2^{n_sites} amplitudes do not fit in an address space index")]
    ChainTooLong { n_sites: usize },
    #[error("chain of {n_sites} sites exceeds the size cap {cap}; raise max_sites to override")]
    SizeCapExceeded { n_sites: usize, cap: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("state is not normalized: ‖ψ‖² = {norm_sq}")]
    NotNormalized { norm_sq: f64 },
    #[error("term acts on site {site} but the chain has {n_sites} sites")]
    TermOutOfRange { site: usize, n_sites: usize },
    #[error("invalid engine parameters: {0}")]
    InvalidParams(String),
    #[error("evolution time {t} is not an integer multiple of dt = {dt}")]
    TimeNotMultiple { t: f64, dt: f64 },
    #[error(
        "Krylov step {step} did not reach tolerance: residual {residual:.3e} at dimension {dim}"
    )]
    KrylovNoConvergence { step: u64, residual: f64, dim: usize },
    #[error("Lanczos failed to converge after {restarts} random restarts")]
    LanczosExhausted { restarts: usize },
}

/// Propagation controls. `dt` is the inner integration step; recorded
/// observables are sampled on a coarser grid chosen by the caller.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineParams {
    pub dt: f64,
    pub krylov_dim: usize,
    pub krylov_tol: f64,
    pub t_max: f64,
    pub max_sites: usize,
}

impl Default for EngineParams {
    fn default() -> Self {
        Self {
            dt: 0.005,
            krylov_dim: 20,
            krylov_tol: 1e-12,
            t_max: 5.0,
            max_sites: DEFAULT_MAX_SITES,
        }
    }
}

impl EngineParams {
    pub fn validate(&self, n_sites: usize) -> Result<(), EngineError> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(EngineError::InvalidParams(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(EngineError::InvalidParams(format!(
                "t_max must be positive, got {}",
                self.t_max
            )));
        }
        if self.dt > self.t_max {
            return Err(EngineError::InvalidParams(format!(
                "dt = {} exceeds t_max = {}",
                self.dt, self.t_max
            )));
        }
        if self.krylov_dim < 2 {
            return Err(EngineError::InvalidParams(format!(
                "krylov_dim must be at least 2, got {}",
                self.krylov_dim
            )));
        }
        if !(self.krylov_tol.is_finite() && self.krylov_tol > 0.0) {
            return Err(EngineError::InvalidParams(format!(
                "krylov_tol must be positive, got {}",
                self.krylov_tol
            )));
        }
        if n_sites > self.max_sites {
            return Err(EngineError::SizeCapExceeded {
                n_sites,
                cap: self.max_sites,
            });
        }
        let dim = 1usize
            .checked_shl(n_sites as u32)
            .ok_or(EngineError::ChainTooLong { n_sites })?;
        if self.krylov_dim > dim {
            return Err(EngineError::InvalidParams(format!(
                "krylov_dim = {} exceeds the state dimension {dim}",
                self.krylov_dim
            )));
        }
        Ok(())
    }
}

/// H|ψ⟩ as raw (unnormalized) amplitudes; the input is untouched.
pub fn apply_hamiltonian(
    terms: &[PauliTerm],
    psi: &StateVector,
) -> Result<Vec<Complex64>, EngineError> {
    let ham = CompiledHamiltonian::compile(psi.n_sites(), terms)?;
    let mut out = vec![Complex64::ZERO; psi.dim()];
    ham.apply(psi.amplitudes(), &mut out);
    Ok(out)
}

/// Step-wise Krylov propagator bound to one Hamiltonian and one state.
///
/// Holds the compiled term masks and the Lanczos workspace so that a long
/// trajectory with intermediate readouts pays the setup cost once.
pub struct Propagator {
    ham: CompiledHamiltonian,
    params: EngineParams,
    workspace: KrylovWorkspace,
    state: StateVector,
    steps_taken: u64,
}

impl Propagator {
    pub fn new(
        terms: &[PauliTerm],
        psi: StateVector,
        params: EngineParams,
    ) -> Result<Self, EngineError> {
        params.validate(psi.n_sites())?;
        let ham = CompiledHamiltonian::compile(psi.n_sites(), terms)?;
        let workspace = KrylovWorkspace::new(psi.dim(), params.krylov_dim.min(psi.dim()));
        Ok(Self {
            ham,
            params,
            workspace,
            state: psi,
            steps_taken: 0,
        })
    }

    pub fn state(&self) -> &StateVector {
        &self.state
    }

    /// Elapsed evolution time, `steps · dt`.
    pub fn time(&self) -> f64 {
        self.steps_taken as f64 * self.params.dt
    }

    /// Energy expectation ⟨ψ|H|ψ⟩ of the current state.
    pub fn energy(&self) -> f64 {
        self.ham.expectation(self.state.amplitudes())
    }

    /// Advance by `n_steps` inner steps of dt each.
    pub fn advance(&mut self, n_steps: u64) -> Result<(), EngineError> {
        for _ in 0..n_steps {
            self.workspace
                .step(
                    &self.ham,
                    &mut self.state,
                    self.params.dt,
                    self.params.krylov_tol,
                )
                .map_err(|e| match e {
                    EngineError::KrylovNoConvergence { residual, dim, .. } => {
                        EngineError::KrylovNoConvergence {
                            step: self.steps_taken + 1,
                            residual,
                            dim,
                        }
                    }
                    other => other,
                })?;
            self.steps_taken += 1;
        }
        Ok(())
    }
}

/// Krylov approximation of e^{−iHt}|ψ⟩ taken in steps of `params.dt`.
///
/// `t` must be a whole number of steps; the result is renormalized after
/// every step, so its norm is exactly 1 up to floating-point rounding.
pub fn evolve(
    terms: &[PauliTerm],
    psi: &StateVector,
    params: &EngineParams,
    t: f64,
) -> Result<StateVector, EngineError> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(EngineError::InvalidParams(format!(
            "evolution time must be finite and nonnegative, got {t}"
        )));
    }
    let steps = (t / params.dt).round();
    if (steps * params.dt - t).abs() > 1e-9 * params.dt.max(t) {
        return Err(EngineError::TimeNotMultiple { t, dt: params.dt });
    }
    if steps == 0.0 {
        params.validate(psi.n_sites())?;
        return Ok(psi.clone());
    }
    let mut prop = Propagator::new(terms, psi.clone(), *params)?;
    prop.advance(steps as u64)?;
    Ok(prop.state)
}
