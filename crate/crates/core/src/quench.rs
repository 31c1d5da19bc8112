//! Input-parametrized initial product states and input sampling.
//!
//! One scalar s ∈ [0,1] is written into the central spin,
//!
//!   x-encoding: √(1−s)|+⟩ + √s|−⟩,    |±⟩   = (|↑⟩ ± |↓⟩)/√2
//!   y-encoding: √(1−s)|+_y⟩ + √s|−_y⟩, |±_y⟩ = (|↑⟩ ± i|↓⟩)/√2
//!
//! while every other site carries the background state (|↑⟩ or |+_y⟩).
//! The x-encoding satisfies ⟨σˣ⟩ = 1 − 2s exactly, the y-encoding the same
//! for ⟨σʸ⟩, which is what makes the linear readout well-posed at t = 0.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EngineError, StateVector};
use crate::rng::{next_unit_f64, seeded_rng};

#[derive(Debug, Error, PartialEq)]
pub enum QuenchError {
    #[error("background {0:?} cannot pair with encoding {1:?}")]
    IncompatiblePair(Background, Encoding),
    #[error("input value s = {0} outside [0, 1]")]
    InputOutOfRange(f64),
    #[error("need at least 2 {role} instances, got {got}")]
    BatchTooSmall { role: &'static str, got: usize },
    #[error("chain length must be odd to have a unique central site, got {0}")]
    EvenSites(usize),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Single-spin state of every non-central site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Background {
    AllUp,
    AllPlusY,
}

/// Basis in which the input scalar is written into the central spin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    XBasis,
    YBasis,
}

/// A validated (background, encoding) pair; the quench site is always the
/// chain center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuenchConfig {
    background: Background,
    encoding: Encoding,
}

impl QuenchConfig {
    /// Allowed pairs: (AllUp, XBasis) and (AllPlusY, YBasis). Mixing them
    /// would break the closed-form t = 0 expectations the readout relies on.
    pub fn new(background: Background, encoding: Encoding) -> Result<Self, QuenchError> {
        match (background, encoding) {
            (Background::AllUp, Encoding::XBasis) | (Background::AllPlusY, Encoding::YBasis) => {
                Ok(Self {
                    background,
                    encoding,
                })
            }
            _ => Err(QuenchError::IncompatiblePair(background, encoding)),
        }
    }

    pub fn background(&self) -> Background {
        self.background
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn center(&self, n_sites: usize) -> usize {
        (n_sites - 1) / 2
    }
}

/// A deterministic train/test batch of input values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputBatch {
    seed: u64,
    n_train: usize,
    n_test: usize,
    values: Vec<f64>,
}

impl InputBatch {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_train(&self) -> usize {
        self.n_train
    }

    pub fn n_test(&self) -> usize {
        self.n_test
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// All values, training instances first.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn train_values(&self) -> &[f64] {
        &self.values[..self.n_train]
    }

    pub fn test_values(&self) -> &[f64] {
        &self.values[self.n_train..]
    }
}

/// Draw `n_train + n_test` i.i.d. uniform [0,1] inputs from the fixed PRNG.
pub fn sample_inputs(seed: u64, n_train: usize, n_test: usize) -> Result<InputBatch, QuenchError> {
    if n_train < 2 {
        return Err(QuenchError::BatchTooSmall {
            role: "training",
            got: n_train,
        });
    }
    if n_test < 2 {
        return Err(QuenchError::BatchTooSmall {
            role: "test",
            got: n_test,
        });
    }
    let mut rng = seeded_rng(seed);
    let values = (0..n_train + n_test)
        .map(|_| next_unit_f64(&mut rng))
        .collect();
    Ok(InputBatch {
        seed,
        n_train,
        n_test,
        values,
    })
}

/// Single-spin amplitudes (⟨↑|ψ⟩, ⟨↓|ψ⟩) carrying the input s.
pub fn local_state(s: f64, encoding: Encoding) -> Result<[Complex64; 2], QuenchError> {
    if !(0.0..=1.0).contains(&s) {
        return Err(QuenchError::InputOutOfRange(s));
    }
    let (a, b) = ((1.0 - s).sqrt(), s.sqrt());
    // dividing by √2 keeps s = 0.5 exactly |↑⟩: (a+b) = fl(√2) there
    let sum = (a + b) / std::f64::consts::SQRT_2;
    let diff = (a - b) / std::f64::consts::SQRT_2;
    Ok(match encoding {
        Encoding::XBasis => [Complex64::new(sum, 0.0), Complex64::new(diff, 0.0)],
        Encoding::YBasis => [Complex64::new(sum, 0.0), Complex64::new(0.0, diff)],
    })
}

fn background_state(background: Background) -> [Complex64; 2] {
    match background {
        Background::AllUp => [Complex64::ONE, Complex64::ZERO],
        Background::AllPlusY => [
            Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
            Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2),
        ],
    }
}

/// The full product state: background everywhere, input at the center.
pub fn build_initial_state(
    s: f64,
    n_sites: usize,
    config: &QuenchConfig,
) -> Result<StateVector, QuenchError> {
    if n_sites % 2 == 0 || n_sites == 0 {
        return Err(QuenchError::EvenSites(n_sites));
    }
    let center = config.center(n_sites);
    let local = local_state(s, config.encoding)?;
    let bg = background_state(config.background);

    // product state by site-at-a-time Kronecker doubling, site 0 = bit 0
    let mut amps: Vec<Complex64> = vec![Complex64::ONE];
    for site in 0..n_sites {
        let factor = if site == center { local } else { bg };
        let half = amps.len();
        amps.extend_from_within(..);
        for (i, a) in amps.iter_mut().enumerate() {
            *a *= factor[(i >= half) as usize];
        }
    }
    Ok(StateVector::from_amplitudes(n_sites, amps)?)
}
