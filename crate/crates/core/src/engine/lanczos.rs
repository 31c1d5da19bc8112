//! Ground states via restarted Lanczos with full reorthogonalization.

use num_complex::Complex64;
use rand_core::RngCore;

use super::krylov::tridiag_eigen;
use super::pauli::CompiledHamiltonian;
use super::state::StateVector;
use super::{EngineError, EngineParams};
use crate::model::PauliTerm;
use crate::rng::{next_unit_f64, seeded_rng};

/// Fixed seed for start vectors: ground states are deterministic artifacts.
const START_SEED: u64 = 0x4752_4f55_4e44_5354;

const MAX_RESTARTS: usize = 5;
const CYCLES_PER_RESTART: usize = 100;
/// Explicit-residual acceptance: ‖Hx − θx‖ ≤ tol·max(1, |θ|).
const RESIDUAL_TOL: f64 = 1e-10;

/// Lowest eigenpair of the assembled Hamiltonian.
///
/// Restarted Lanczos: each cycle builds a fully reorthogonalized basis from
/// the current best Ritz vector, accepts when the explicit residual is below
/// tolerance, and falls back to a fresh random start on breakdown or
/// stagnation (at most [`MAX_RESTARTS`] times).
pub fn ground_state(
    terms: &[PauliTerm],
    n_sites: usize,
    params: &EngineParams,
) -> Result<(f64, StateVector), EngineError> {
    params.validate(n_sites)?;
    let ham = CompiledHamiltonian::compile(n_sites, terms)?;
    let dim = ham.dim();
    let block = dim.min(64);
    let breakdown = 1e-13 * ham.coeff_norm().max(1.0);
    let mut rng = seeded_rng(START_SEED);

    for _restart in 0..=MAX_RESTARTS {
        let mut v0 = random_unit_vector(&mut rng, dim);
        let mut prev_theta = f64::INFINITY;
        let mut stagnant = 0usize;
        for _ in 0..CYCLES_PER_RESTART {
            let cycle = lanczos_cycle(&ham, &v0, block, breakdown);
            let scale = cycle.theta.abs().max(1.0);
            if cycle.residual <= RESIDUAL_TOL * scale {
                let psi = StateVector::normalized(n_sites, cycle.ritz)?;
                return Ok((cycle.theta, psi));
            }
            if cycle.hit_breakdown {
                // numerically invariant subspace without convergence:
                // the start vector is degenerate, draw a fresh one
                break;
            }
            if (prev_theta - cycle.theta).abs() <= 1e-14 * scale {
                stagnant += 1;
                if stagnant >= 10 {
                    break;
                }
            } else {
                stagnant = 0;
            }
            prev_theta = cycle.theta;
            v0 = cycle.ritz;
        }
    }
    Err(EngineError::LanczosExhausted {
        restarts: MAX_RESTARTS,
    })
}

struct CycleResult {
    theta: f64,
    ritz: Vec<Complex64>,
    residual: f64,
    hit_breakdown: bool,
}

fn lanczos_cycle(
    ham: &CompiledHamiltonian,
    v0: &[Complex64],
    block: usize,
    breakdown: f64,
) -> CycleResult {
    let dim = ham.dim();
    let mut basis: Vec<Vec<Complex64>> = vec![normalize(v0.to_vec())];
    let mut alpha = Vec::with_capacity(block);
    let mut beta = vec![0.0f64];
    let mut hit_breakdown = false;

    let mut w = vec![Complex64::ZERO; dim];
    for j in 0..block {
        ham.apply(&basis[j], &mut w);
        if j > 0 {
            let b = beta[j];
            for (wi, vi) in w.iter_mut().zip(&basis[j - 1]) {
                *wi -= b * vi;
            }
        }
        let a: f64 = basis[j]
            .iter()
            .zip(&w)
            .map(|(vi, wi)| (vi.conj() * wi).re)
            .sum();
        alpha.push(a);
        for (wi, vi) in w.iter_mut().zip(&basis[j]) {
            *wi -= a * vi;
        }
        // full reorthogonalization: long recurrences lose orthogonality
        for v in &basis {
            let h: Complex64 = v.iter().zip(&w).map(|(vi, wi)| vi.conj() * wi).sum();
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= h * vi;
            }
        }
        let b_next = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if b_next <= breakdown || j + 1 == block {
            hit_breakdown = b_next <= breakdown;
            beta.push(b_next);
            break;
        }
        beta.push(b_next);
        let inv = 1.0 / b_next;
        basis.push(w.iter().map(|c| c * inv).collect());
    }

    let m = alpha.len();
    let (vals, vecs) = tridiag_eigen(&alpha, &beta[1..m]);
    let mut min_idx = 0;
    for l in 1..m {
        if vals[l] < vals[min_idx] {
            min_idx = l;
        }
    }
    let theta = vals[min_idx];
    let mut ritz = vec![Complex64::ZERO; dim];
    for (j, v) in basis.iter().enumerate() {
        let y = vecs[(j, min_idx)];
        for (ri, vi) in ritz.iter_mut().zip(v) {
            *ri += y * vi;
        }
    }
    ritz = normalize(ritz);

    // explicit residual on the candidate, immune to basis drift
    ham.apply(&ritz, &mut w);
    let residual = ritz
        .iter()
        .zip(&w)
        .map(|(xi, hi)| (hi - theta * xi).norm_sqr())
        .sum::<f64>()
        .sqrt();

    CycleResult {
        theta,
        ritz,
        residual,
        hit_breakdown,
    }
}

fn normalize(mut v: Vec<Complex64>) -> Vec<Complex64> {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let inv = 1.0 / norm;
    for c in &mut v {
        *c *= inv;
    }
    v
}

fn random_unit_vector(rng: &mut impl RngCore, dim: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..dim)
        .map(|_| {
            let re = next_unit_f64(rng) - 0.5;
            let im = next_unit_f64(rng) - 0.5;
            Complex64::new(re, im)
        })
        .collect();
    normalize(v)
}
