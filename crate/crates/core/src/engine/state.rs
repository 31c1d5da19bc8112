//! Dense state vectors over the computational (σᶻ) product basis.
//!
//! Basis-index convention: site `i` maps to bit `i` of the index; bit value
//! 0 is |↑⟩ (σᶻ = +1), bit value 1 is |↓⟩ (σᶻ = −1). Index 0 is therefore
//! the all-up product state.

use num_complex::Complex64;

use super::EngineError;

/// Tolerance on ‖ψ‖² for accepting externally supplied amplitudes.
const NORM_TOL: f64 = 1e-9;

/// A normalized pure state of `n_sites` spins.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_sites: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wrap amplitudes, checking dimension and normalization.
    pub fn from_amplitudes(
        n_sites: usize,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self, EngineError> {
        let dim = 1usize
            .checked_shl(n_sites as u32)
            .ok_or(EngineError::ChainTooLong { n_sites })?;
        if amplitudes.len() != dim {
            return Err(EngineError::DimensionMismatch {
                expected: dim,
                got: amplitudes.len(),
            });
        }
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(EngineError::NotNormalized { norm_sq });
        }
        Ok(Self {
            n_sites,
            amplitudes,
        })
    }

    /// Wrap raw amplitudes and rescale them to unit norm.
    pub fn normalized(n_sites: usize, mut amplitudes: Vec<Complex64>) -> Result<Self, EngineError> {
        let norm_sq: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq == 0.0 || !norm_sq.is_finite() {
            return Err(EngineError::NotNormalized { norm_sq });
        }
        let inv = 1.0 / norm_sq.sqrt();
        for a in &mut amplitudes {
            *a *= inv;
        }
        Self::from_amplitudes(n_sites, amplitudes)
    }

    /// Computational basis state |index⟩.
    pub fn basis_state(n_sites: usize, index: usize) -> Result<Self, EngineError> {
        let dim = 1usize
            .checked_shl(n_sites as u32)
            .ok_or(EngineError::ChainTooLong { n_sites })?;
        if index >= dim {
            return Err(EngineError::DimensionMismatch {
                expected: dim,
                got: index,
            });
        }
        let mut amplitudes = vec![Complex64::ZERO; dim];
        amplitudes[index] = Complex64::ONE;
        Ok(Self {
            n_sites,
            amplitudes,
        })
    }

    /// All spins up: basis index 0.
    pub fn all_up(n_sites: usize) -> Result<Self, EngineError> {
        Self::basis_state(n_sites, 0)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Mutable amplitude access for in-place evolution. Callers must restore
    /// unit norm before the state is read out.
    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// ⟨self|other⟩ with the left argument conjugated.
    pub fn inner(&self, other: &Self) -> Complex64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Rescale to unit norm, countering drift from repeated propagation.
    pub(crate) fn renormalize(&mut self) {
        let inv = 1.0 / self.norm();
        for a in &mut self.amplitudes {
            *a *= inv;
        }
    }

    /// Overlap-squared |⟨self|other⟩|², a convenience for fidelity checks.
    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }
}
