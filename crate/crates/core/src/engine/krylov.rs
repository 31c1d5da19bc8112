//! Krylov (Lanczos) approximation of one e^{−iH·dt} step.
//!
//! Per step: build an orthonormal basis {v₀ = ψ, Hv₀, …} with the plain
//! three-term recurrence, project H to the small tridiagonal T_m, and take
//! ψ ← V_m · exp(−i T_m dt) e₁. The subspace grows until the standard
//! residual estimate β_{m+1}·|u_{m−1}| drops below tolerance. Steps are
//! short (dt·‖H‖ ≪ 1), so the basis stays small and full
//! reorthogonalization is unnecessary; the ground-state path, which runs
//! long recurrences, reorthogonalizes instead.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::pauli::CompiledHamiltonian;
use super::state::StateVector;
use super::EngineError;

pub(super) struct KrylovWorkspace {
    dim: usize,
    m_max: usize,
    basis: Vec<Vec<Complex64>>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
    /// Subspace size that converged last step; next step starts its
    /// convergence checks one below this.
    last_m: usize,
}

impl KrylovWorkspace {
    pub(super) fn new(dim: usize, m_max: usize) -> Self {
        let m_max = m_max.max(2).min(dim.max(1));
        Self {
            dim,
            m_max,
            basis: Vec::new(),
            alpha: vec![0.0; m_max + 1],
            beta: vec![0.0; m_max + 2],
            last_m: 0,
        }
    }

    fn slot(&mut self, j: usize) -> &mut Vec<Complex64> {
        while self.basis.len() <= j {
            self.basis.push(vec![Complex64::ZERO; self.dim]);
        }
        &mut self.basis[j]
    }

    /// Advance `state` by one step of `dt`. Returns the subspace size used.
    pub(super) fn step(
        &mut self,
        ham: &CompiledHamiltonian,
        state: &mut StateVector,
        dt: f64,
        tol: f64,
    ) -> Result<usize, EngineError> {
        debug_assert_eq!(state.dim(), self.dim);
        let breakdown = 1e-14 * ham.coeff_norm().max(1.0);
        let check_from = self.last_m.saturating_sub(1).max(2);

        self.slot(0).copy_from_slice(state.amplitudes());
        let mut u: Vec<Complex64> = Vec::new();
        let mut m = 0usize;
        let mut converged = false;

        for j in 0..self.m_max {
            // w lives in the slot that becomes v_{j+1}
            self.slot(j + 1);
            let (built, next) = self.basis.split_at_mut(j + 1);
            let v_j = &built[j];
            let w = &mut next[0];
            ham.apply(v_j, w);
            // one fused pass: w −= β·v_{j−1} while accumulating α = ⟨v_j, w⟩
            let mut a = 0.0;
            if j > 0 {
                let b = self.beta[j];
                for ((wi, vi), pi) in w.iter_mut().zip(v_j.iter()).zip(&built[j - 1]) {
                    *wi -= b * pi;
                    a += (vi.conj() * *wi).re;
                }
            } else {
                for (wi, vi) in w.iter().zip(v_j.iter()) {
                    a += (vi.conj() * wi).re;
                }
            }
            self.alpha[j] = a;
            let mut norm_sq = 0.0;
            for (wi, vi) in w.iter_mut().zip(v_j.iter()) {
                *wi -= a * vi;
                norm_sq += wi.norm_sqr();
            }
            let b_next = norm_sq.sqrt();
            self.beta[j + 1] = b_next;
            m = j + 1;

            if b_next <= breakdown {
                // invariant subspace: the projected exponential is exact
                u = expm_tridiag_e1(&self.alpha[..m], &self.beta[1..m], dt);
                converged = true;
                break;
            }
            if m >= check_from || m == self.m_max {
                u = expm_tridiag_e1(&self.alpha[..m], &self.beta[1..m], dt);
                let residual = b_next * u[m - 1].norm();
                if residual <= tol {
                    converged = true;
                    break;
                }
                if m == self.m_max {
                    return Err(EngineError::KrylovNoConvergence {
                        step: 0,
                        residual,
                        dim: m,
                    });
                }
            }
            let inv = 1.0 / b_next;
            for wi in w.iter_mut() {
                *wi *= inv;
            }
        }
        debug_assert!(converged);

        let out = state.amplitudes_mut();
        out.fill(Complex64::ZERO);
        for (uj, vj) in u.iter().zip(&self.basis) {
            for (oi, vi) in out.iter_mut().zip(vj) {
                *oi += uj * vi;
            }
        }
        state.renormalize();
        self.last_m = m;
        Ok(m)
    }
}

/// exp(−i·T·dt)·e₁ for the real symmetric tridiagonal T given by
/// `diag` and `offdiag` (lengths m and m−1).
fn expm_tridiag_e1(diag: &[f64], offdiag: &[f64], dt: f64) -> Vec<Complex64> {
    let m = diag.len();
    let (vals, vecs) = tridiag_eigen(diag, offdiag);
    let mut u = vec![Complex64::ZERO; m];
    for l in 0..m {
        let phase = Complex64::from_polar(1.0, -vals[l] * dt) * vecs[(0, l)];
        for (j, uj) in u.iter_mut().enumerate() {
            *uj += phase * vecs[(j, l)];
        }
    }
    u
}

/// Dense eigendecomposition of a small real symmetric tridiagonal matrix.
pub(super) fn tridiag_eigen(diag: &[f64], offdiag: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let m = diag.len();
    debug_assert_eq!(offdiag.len(), m.saturating_sub(1));
    let mut t = DMatrix::<f64>::zeros(m, m);
    for (j, &a) in diag.iter().enumerate() {
        t[(j, j)] = a;
    }
    for (j, &b) in offdiag.iter().enumerate() {
        t[(j, j + 1)] = b;
        t[(j + 1, j)] = b;
    }
    let eig = t.symmetric_eigen();
    (eig.eigenvalues, eig.eigenvectors)
}
