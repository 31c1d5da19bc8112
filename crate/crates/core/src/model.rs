//! Spin-chain Hamiltonians as weighted Pauli-string term lists.
//!
//! Four model families, all with open boundaries:
//!
//!   TFIM          H = −J Σ σᶻᵢσᶻᵢ₊₁ + g Σ σˣᵢ
//!   ANNNI         H = −J Σ σᶻᵢσᶻᵢ₊₁ − κ Σ σᶻᵢσᶻᵢ₊₂ + g Σ σˣᵢ
//!   Cluster       H = −J_zz Σ σᶻᵢσᶻᵢ₊₁ + J_zxz Σ σᶻᵢσˣᵢ₊₁σᶻᵢ₊₂
//!   ClusterField  H = Σ [−J_zz σᶻᵢσᶻᵢ₊₁ − h_x σˣᵢ + J_zxz σᶻᵢσˣᵢ₊₁σᶻᵢ₊₂]
//!
//! Signs are kept exactly as written above; nothing is normalized away.
//! Terms whose coefficient is exactly zero are dropped from the expansion.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Single-site Pauli axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("chain length must be odd to have a unique central site, got {0}")]
    EvenSites(usize),
    #[error("chain length must be at least 3, got {0}")]
    TooFewSites(usize),
    #[error("coupling `{0}` must be finite, got {1}")]
    NonFiniteCoupling(&'static str, f64),
    #[error("alpha must lie in [0, 1], got {0}")]
    AlphaOutOfRange(f64),
    #[error("invalid Pauli term: {0}")]
    InvalidTerm(String),
}

/// A weighted Pauli string: `coefficient · Π σ^{axis}_site`.
///
/// Site indices are strictly increasing; up to three factors (the largest
/// operator in any of the models is the three-body Z-X-Z cluster term).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coefficient: f64,
    factors: Vec<(usize, Axis)>,
}

impl PauliTerm {
    /// Build a term, checking the factor-list invariants.
    pub fn new(coefficient: f64, factors: Vec<(usize, Axis)>) -> Result<Self, ModelError> {
        if factors.is_empty() || factors.len() > 3 {
            return Err(ModelError::InvalidTerm(format!(
                "expected 1–3 factors, got {}",
                factors.len()
            )));
        }
        if !factors.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(ModelError::InvalidTerm(
                "site indices must be strictly increasing".into(),
            ));
        }
        if !coefficient.is_finite() {
            return Err(ModelError::InvalidTerm(format!(
                "non-finite coefficient {coefficient}"
            )));
        }
        Ok(Self {
            coefficient,
            factors,
        })
    }

    pub fn single(coefficient: f64, site: usize, axis: Axis) -> Self {
        Self {
            coefficient,
            factors: vec![(site, axis)],
        }
    }

    pub fn two_body(coefficient: f64, a: (usize, Axis), b: (usize, Axis)) -> Self {
        debug_assert!(a.0 < b.0);
        Self {
            coefficient,
            factors: vec![a, b],
        }
    }

    pub fn three_body(coefficient: f64, a: (usize, Axis), b: (usize, Axis), c: (usize, Axis)) -> Self {
        debug_assert!(a.0 < b.0 && b.0 < c.0);
        Self {
            coefficient,
            factors: vec![a, b, c],
        }
    }

    pub fn factors(&self) -> &[(usize, Axis)] {
        &self.factors
    }

    /// Largest site index referenced by this term.
    pub fn max_site(&self) -> usize {
        self.factors.last().map(|&(s, _)| s).unwrap_or(0)
    }
}

/// Variant-specific coupling constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Couplings {
    Tfim { j: f64, g: f64 },
    Annni { j: f64, kappa: f64, g: f64 },
    Cluster { j_zz: f64, j_zxz: f64 },
    ClusterField { j_zz: f64, j_zxz: f64, h_x: f64 },
}

impl Couplings {
    pub fn variant_name(&self) -> &'static str {
        match self {
            Couplings::Tfim { .. } => "tfim",
            Couplings::Annni { .. } => "annni",
            Couplings::Cluster { .. } => "cluster",
            Couplings::ClusterField { .. } => "cluster_field",
        }
    }

    fn check_finite(&self) -> Result<(), ModelError> {
        let entries: &[(&'static str, f64)] = match *self {
            Couplings::Tfim { j, g } => &[("j", j), ("g", g)],
            Couplings::Annni { j, kappa, g } => &[("j", j), ("kappa", kappa), ("g", g)],
            Couplings::Cluster { j_zz, j_zxz } => &[("j_zz", j_zz), ("j_zxz", j_zxz)],
            Couplings::ClusterField { j_zz, j_zxz, h_x } => {
                &[("j_zz", j_zz), ("j_zxz", j_zxz), ("h_x", h_x)]
            }
        };
        for &(name, value) in entries {
            if !value.is_finite() {
                return Err(ModelError::NonFiniteCoupling(name, value));
            }
        }
        Ok(())
    }
}

/// A validated chain: odd length ≥ 3, open boundaries, finite couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    n_sites: usize,
    couplings: Couplings,
}

impl ModelSpec {
    pub fn new(n_sites: usize, couplings: Couplings) -> Result<Self, ModelError> {
        if n_sites < 3 {
            return Err(ModelError::TooFewSites(n_sites));
        }
        if n_sites % 2 == 0 {
            return Err(ModelError::EvenSites(n_sites));
        }
        couplings.check_finite()?;
        Ok(Self { n_sites, couplings })
    }

    pub fn tfim(n_sites: usize, j: f64, g: f64) -> Result<Self, ModelError> {
        Self::new(n_sites, Couplings::Tfim { j, g })
    }

    pub fn annni(n_sites: usize, j: f64, kappa: f64, g: f64) -> Result<Self, ModelError> {
        Self::new(n_sites, Couplings::Annni { j, kappa, g })
    }

    pub fn cluster(n_sites: usize, j_zz: f64, j_zxz: f64) -> Result<Self, ModelError> {
        Self::new(n_sites, Couplings::Cluster { j_zz, j_zxz })
    }

    pub fn cluster_field(n_sites: usize, j_zz: f64, j_zxz: f64, h_x: f64) -> Result<Self, ModelError> {
        Self::new(n_sites, Couplings::ClusterField { j_zz, j_zxz, h_x })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn couplings(&self) -> Couplings {
        self.couplings
    }

    /// The unique central site, `(N−1)/2`.
    pub fn center(&self) -> usize {
        (self.n_sites - 1) / 2
    }

    /// Compact fingerprint used in output metadata.
    pub fn describe(&self) -> String {
        match self.couplings {
            Couplings::Tfim { j, g } => format!("tfim(n={}, j={j}, g={g})", self.n_sites),
            Couplings::Annni { j, kappa, g } => {
                format!("annni(n={}, j={j}, kappa={kappa}, g={g})", self.n_sites)
            }
            Couplings::Cluster { j_zz, j_zxz } => {
                format!("cluster(n={}, j_zz={j_zz}, j_zxz={j_zxz})", self.n_sites)
            }
            Couplings::ClusterField { j_zz, j_zxz, h_x } => format!(
                "cluster_field(n={}, j_zz={j_zz}, j_zxz={j_zxz}, h_x={h_x})",
                self.n_sites
            ),
        }
    }
}

/// Report a site in centered coordinates, `i − (N−1)/2`.
pub fn site_offset(site: usize, n_sites: usize) -> i64 {
    site as i64 - ((n_sites as i64 - 1) / 2)
}

/// Full term list of a validated spec's Hamiltonian.
///
/// Chain-length validity (odd, ≥ 3) is enforced when the [`ModelSpec`] is
/// built; the expansion itself is total. Raw builders below accept any
/// length ≥ 2 for engine-level work on unconstrained chains.
pub fn expand_terms(spec: &ModelSpec) -> Vec<PauliTerm> {
    let n = spec.n_sites;
    match spec.couplings {
        Couplings::Tfim { j, g } => tfim_terms(n, j, g),
        Couplings::Annni { j, kappa, g } => annni_terms(n, j, kappa, g),
        Couplings::Cluster { j_zz, j_zxz } => cluster_terms(n, j_zz, j_zxz),
        Couplings::ClusterField { j_zz, j_zxz, h_x } => cluster_field_terms(n, j_zz, j_zxz, h_x),
    }
}

fn push_nonzero(terms: &mut Vec<PauliTerm>, term: PauliTerm) {
    if term.coefficient != 0.0 {
        terms.push(term);
    }
}

/// −J Σ σᶻᵢσᶻᵢ₊₁ + g Σ σˣᵢ on `n` sites.
pub fn tfim_terms(n: usize, j: f64, g: f64) -> Vec<PauliTerm> {
    assert!(n >= 2, "need at least one bond");
    let mut terms = Vec::with_capacity(2 * n - 1);
    for i in 0..n - 1 {
        push_nonzero(
            &mut terms,
            PauliTerm::two_body(-j, (i, Axis::Z), (i + 1, Axis::Z)),
        );
    }
    for i in 0..n {
        push_nonzero(&mut terms, PauliTerm::single(g, i, Axis::X));
    }
    terms
}

/// −J Σ σᶻᵢσᶻᵢ₊₁ − κ Σ σᶻᵢσᶻᵢ₊₂ + g Σ σˣᵢ on `n` sites.
///
/// With κ = 0 the list is identical to [`tfim_terms`] at the same (J, g).
pub fn annni_terms(n: usize, j: f64, kappa: f64, g: f64) -> Vec<PauliTerm> {
    assert!(n >= 2, "need at least one bond");
    let mut terms = Vec::with_capacity(3 * n - 3);
    for i in 0..n - 1 {
        push_nonzero(
            &mut terms,
            PauliTerm::two_body(-j, (i, Axis::Z), (i + 1, Axis::Z)),
        );
    }
    for i in 0..n.saturating_sub(2) {
        push_nonzero(
            &mut terms,
            PauliTerm::two_body(-kappa, (i, Axis::Z), (i + 2, Axis::Z)),
        );
    }
    for i in 0..n {
        push_nonzero(&mut terms, PauliTerm::single(g, i, Axis::X));
    }
    terms
}

/// −J_zz Σ σᶻᵢσᶻᵢ₊₁ + J_zxz Σ σᶻᵢσˣᵢ₊₁σᶻᵢ₊₂ on `n` sites.
pub fn cluster_terms(n: usize, j_zz: f64, j_zxz: f64) -> Vec<PauliTerm> {
    assert!(n >= 2, "need at least one bond");
    let mut terms = Vec::with_capacity(2 * n - 3);
    for i in 0..n - 1 {
        push_nonzero(
            &mut terms,
            PauliTerm::two_body(-j_zz, (i, Axis::Z), (i + 1, Axis::Z)),
        );
    }
    for i in 0..n.saturating_sub(2) {
        push_nonzero(
            &mut terms,
            PauliTerm::three_body(j_zxz, (i, Axis::Z), (i + 1, Axis::X), (i + 2, Axis::Z)),
        );
    }
    terms
}

/// Σ [−J_zz σᶻᵢσᶻᵢ₊₁ − h_x σˣᵢ + J_zxz σᶻᵢσˣᵢ₊₁σᶻᵢ₊₂] on `n` sites.
pub fn cluster_field_terms(n: usize, j_zz: f64, j_zxz: f64, h_x: f64) -> Vec<PauliTerm> {
    assert!(n >= 2, "need at least one bond");
    let mut terms = Vec::with_capacity(3 * n - 3);
    for i in 0..n - 1 {
        push_nonzero(
            &mut terms,
            PauliTerm::two_body(-j_zz, (i, Axis::Z), (i + 1, Axis::Z)),
        );
    }
    for i in 0..n {
        push_nonzero(&mut terms, PauliTerm::single(-h_x, i, Axis::X));
    }
    for i in 0..n.saturating_sub(2) {
        push_nonzero(
            &mut terms,
            PauliTerm::three_body(j_zxz, (i, Axis::Z), (i + 1, Axis::X), (i + 2, Axis::Z)),
        );
    }
    terms
}

/// Split a total cluster-plus-field budget of `1 − J_zz` between the two
/// competing terms: returns `(J_zxz, h_x) = ((1−J_zz)·α, (1−J_zz)·(1−α))`.
pub fn alpha_parametrization(j_zz: f64, alpha: f64) -> Result<(f64, f64), ModelError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(ModelError::AlphaOutOfRange(alpha));
    }
    let budget = 1.0 - j_zz;
    Ok((budget * alpha, budget * (1.0 - alpha)))
}
