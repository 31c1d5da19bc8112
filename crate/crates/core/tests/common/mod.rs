//! Independent oracles for the integration suites: dense Kronecker-product
//! Hamiltonians, eigendecomposition propagation, partial-trace entropy, and
//! closed-form regression statistics. Everything here is built from the
//! defining formulas so it shares no code path with the engine under test.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use quenchprobe::model::{expand_terms, Axis, ModelSpec, PauliTerm};
use quenchprobe::rng::{next_unit_f64, seeded_rng};
use quenchprobe::StateVector;

pub fn pauli_matrix(axis: Axis) -> DMatrix<Complex64> {
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    // basis order (|up>, |down>) = (bit 0, bit 1)
    match axis {
        Axis::X => DMatrix::from_row_slice(2, 2, &[z, one, one, z]),
        Axis::Y => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        Axis::Z => DMatrix::from_row_slice(2, 2, &[one, z, z, -one]),
    }
}

pub fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

/// One term as a dense operator: site i occupies bit i, so the factor for
/// the highest site sits leftmost in the Kronecker chain.
pub fn dense_term(n_sites: usize, term: &PauliTerm) -> DMatrix<Complex64> {
    let mut op = DMatrix::identity(1, 1);
    for site in (0..n_sites).rev() {
        let factor = term
            .factors()
            .iter()
            .find(|(s, _)| *s == site)
            .map(|&(_, axis)| pauli_matrix(axis))
            .unwrap_or_else(|| DMatrix::identity(2, 2));
        op = kron(&op, &factor);
    }
    op * Complex64::new(term.coefficient, 0.0)
}

pub fn dense_hamiltonian(n_sites: usize, terms: &[PauliTerm]) -> DMatrix<Complex64> {
    let dim = 1usize << n_sites;
    let mut h = DMatrix::zeros(dim, dim);
    for term in terms {
        h += dense_term(n_sites, term);
    }
    h
}

pub fn dense_model(spec: &ModelSpec) -> DMatrix<Complex64> {
    dense_hamiltonian(spec.n_sites(), &expand_terms(spec))
}

/// exp(-iHt)|psi> through full Hermitian eigendecomposition.
pub fn dense_evolve(h: &DMatrix<Complex64>, amps: &[Complex64], t: f64) -> Vec<Complex64> {
    let eig = h.clone().symmetric_eigen();
    let psi = DVector::from_column_slice(amps);
    let mut coeffs = eig.eigenvectors.adjoint() * psi;
    for (k, lambda) in eig.eigenvalues.iter().enumerate() {
        coeffs[k] *= Complex64::new(0.0, -lambda * t).exp();
    }
    let out = eig.eigenvectors * coeffs;
    out.iter().copied().collect()
}

/// Ground energy and one ground vector through full eigendecomposition.
pub fn dense_ground(h: &DMatrix<Complex64>) -> (f64, Vec<Complex64>) {
    let eig = h.clone().symmetric_eigen();
    let mut min_idx = 0;
    for k in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[k] < eig.eigenvalues[min_idx] {
            min_idx = k;
        }
    }
    let column = eig.eigenvectors.column(min_idx);
    (eig.eigenvalues[min_idx], column.iter().copied().collect())
}

/// <psi|O|psi> for a dense Hermitian operator.
pub fn dense_expectation(op: &DMatrix<Complex64>, amps: &[Complex64]) -> f64 {
    let psi = DVector::from_column_slice(amps);
    (psi.adjoint() * op * &psi)[(0, 0)].re
}

/// Entropy of the low-bit block (sites < cut) from the reduced density
/// matrix, in nats.
pub fn dense_entropy(amps: &[Complex64], n_sites: usize, cut: usize) -> f64 {
    let rows = 1usize << cut;
    let cols = 1usize << (n_sites - cut);
    let mut rho = DMatrix::<Complex64>::zeros(rows, rows);
    for a in 0..rows {
        for a2 in 0..rows {
            let mut sum = Complex64::new(0.0, 0.0);
            for b in 0..cols {
                sum += amps[a | (b << cut)] * amps[a2 | (b << cut)].conj();
            }
            rho[(a, a2)] = sum;
        }
    }
    let eig = rho.symmetric_eigen();
    let mut entropy = 0.0;
    for &p in eig.eigenvalues.iter() {
        if p > 1e-12 {
            entropy -= p * p.ln();
        }
    }
    entropy
}

/// Least-squares slope and intercept from the explicit 2x2 normal equations.
pub fn normal_equations(xs: &[f64], ss: &[f64]) -> (f64, f64) {
    let l = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let ssum: f64 = ss.iter().sum();
    let sxs: f64 = xs.iter().zip(ss).map(|(x, s)| x * s).sum();
    let det = sxx * l - sx * sx;
    let w_o = (l * sxs - sx * ssum) / det;
    let w_c = (sxx * ssum - sx * sxs) / det;
    (w_o, w_c)
}

/// Squared Pearson correlation from the textbook covariance formula.
pub fn pearson_r2(ys: &[f64], ss: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let my = ys.iter().sum::<f64>() / n;
    let ms = ss.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vy = 0.0;
    let mut vs = 0.0;
    for (&y, &s) in ys.iter().zip(ss) {
        cov += (y - my) * (s - ms);
        vy += (y - my) * (y - my);
        vs += (s - ms) * (s - ms);
    }
    cov * cov / (vy * vs)
}

/// Haar-ish random normalized state: uniform complex box amplitudes.
pub fn random_state(n_sites: usize, seed: u64) -> StateVector {
    let mut rng = seeded_rng(seed);
    let dim = 1usize << n_sites;
    let amps: Vec<Complex64> = (0..dim)
        .map(|_| {
            Complex64::new(
                next_unit_f64(&mut rng) - 0.5,
                next_unit_f64(&mut rng) - 0.5,
            )
        })
        .collect();
    StateVector::normalized(n_sites, amps).expect("nonzero with probability 1")
}

pub fn random_unit_reals(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = seeded_rng(seed);
    (0..len).map(|_| next_unit_f64(&mut rng)).collect()
}

/// |<a|b>| between amplitude slices.
pub fn overlap_abs(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.conj() * y)
        .sum::<Complex64>()
        .norm()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
