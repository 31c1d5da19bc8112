//! Single-site Pauli expectations over time and the entanglement monitor.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EngineError, EngineParams, Propagator, StateVector};
use crate::model::{expand_terms, Axis, ModelSpec};
use crate::quench::{build_initial_state, QuenchConfig, QuenchError};

#[derive(Debug, Error)]
pub enum ObservableError {
    #[error("site {site} out of range for {n_sites} sites")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("cut {cut} out of range: need 1 ≤ cut ≤ {max}")]
    CutOutOfRange { cut: usize, max: usize },
    #[error("invalid recording cadence: {0}")]
    InvalidCadence(String),
    #[error("instance {index} failed: {source}")]
    Instance { index: usize, source: EngineError },
    #[error(transparent)]
    Quench(#[from] QuenchError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// Provenance stamp carried by every recorded grid.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridMeta {
    pub model: String,
    pub quench: String,
    pub engine: String,
}

/// ⟨O_i(t)⟩ for every instance, indexed [instance k][site i][time m],
/// time fastest. Entries obey the Pauli bound |v| ≤ 1 (to 10⁻⁹ slack).
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableGrid {
    n_instances: usize,
    n_sites: usize,
    times: Vec<f64>,
    observable_axis: Axis,
    meta: GridMeta,
    values: Vec<f64>,
}

impl ObservableGrid {
    /// Reassemble a grid from storage, revalidating shape and bounds.
    pub fn from_parts(
        n_instances: usize,
        n_sites: usize,
        times: Vec<f64>,
        observable_axis: Axis,
        meta: GridMeta,
        values: Vec<f64>,
    ) -> Result<Self, ObservableError> {
        let expected = n_instances * n_sites * times.len();
        if values.len() != expected {
            return Err(ObservableError::InvalidCadence(format!(
                "value count {} does not match {n_instances}×{n_sites}×{}",
                values.len(),
                times.len()
            )));
        }
        if !times.windows(2).all(|w| w[1] > w[0]) {
            return Err(ObservableError::InvalidCadence(
                "times must be strictly increasing".into(),
            ));
        }
        if let Some(&bad) = values.iter().find(|v| !(v.abs() <= 1.0 + 1e-9)) {
            return Err(ObservableError::InvalidCadence(format!(
                "entry {bad} violates the Pauli bound"
            )));
        }
        Ok(Self {
            n_instances,
            n_sites,
            times,
            observable_axis,
            meta,
            values,
        })
    }

    pub fn n_instances(&self) -> usize {
        self.n_instances
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn observable_axis(&self) -> Axis {
        self.observable_axis
    }

    pub fn meta(&self) -> &GridMeta {
        &self.meta
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, instance: usize, site: usize, time_idx: usize) -> f64 {
        self.values[(instance * self.n_sites + site) * self.times.len() + time_idx]
    }

    /// One (site, time) cell across all instances, in instance order.
    pub fn across_instances(&self, site: usize, time_idx: usize) -> Vec<f64> {
        (0..self.n_instances)
            .map(|k| self.value(k, site, time_idx))
            .collect()
    }
}

/// Block entropy over time for one evolving instance, in nats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropySeries {
    pub cut: usize,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

/// ⟨ψ|σ^axis_site|ψ⟩. The imaginary residual is asserted below 10⁻¹⁰ and
/// discarded.
pub fn pauli_expectation(
    psi: &StateVector,
    site: usize,
    axis: Axis,
) -> Result<f64, ObservableError> {
    if site >= psi.n_sites() {
        return Err(ObservableError::SiteOutOfRange {
            site,
            n_sites: psi.n_sites(),
        });
    }
    let amps = psi.amplitudes();
    let mask = 1usize << site;
    let value = match axis {
        Axis::Z => amps
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let sign = if i & mask == 0 { 1.0 } else { -1.0 };
                sign * a.norm_sqr()
            })
            .sum::<f64>(),
        Axis::X => {
            let acc: Complex64 = amps
                .iter()
                .enumerate()
                .map(|(i, a)| a.conj() * amps[i ^ mask])
                .sum();
            debug_assert!(acc.im.abs() <= 1e-10);
            acc.re
        }
        Axis::Y => {
            let acc: Complex64 = amps
                .iter()
                .enumerate()
                .map(|(i, a)| {
                    let me = if i & mask == 0 {
                        Complex64::new(0.0, -1.0)
                    } else {
                        Complex64::new(0.0, 1.0)
                    };
                    a.conj() * me * amps[i ^ mask]
                })
                .sum();
            debug_assert!(acc.im.abs() <= 1e-10);
            acc.re
        }
    };
    Ok(value)
}

fn recording_grid(
    engine: &EngineParams,
    dt_record: f64,
    t_max: f64,
) -> Result<(u64, Vec<f64>), ObservableError> {
    if !(dt_record.is_finite() && dt_record > 0.0) {
        return Err(ObservableError::InvalidCadence(format!(
            "dt_record must be positive, got {dt_record}"
        )));
    }
    let steps_per_record = (dt_record / engine.dt).round();
    if steps_per_record < 1.0
        || (steps_per_record * engine.dt - dt_record).abs() > 1e-9 * dt_record
    {
        return Err(ObservableError::InvalidCadence(format!(
            "dt_record = {dt_record} is not an integer multiple of dt = {}",
            engine.dt
        )));
    }
    let n_records = (t_max / dt_record).round();
    if n_records < 1.0 || (n_records * dt_record - t_max).abs() > 1e-9 * t_max {
        return Err(ObservableError::InvalidCadence(format!(
            "t_max = {t_max} is not an integer multiple of dt_record = {dt_record}"
        )));
    }
    let times = (0..=n_records as usize)
        .map(|m| m as f64 * dt_record)
        .collect();
    Ok((steps_per_record as u64, times))
}

fn grid_meta(model: &ModelSpec, quench: &QuenchConfig, engine: &EngineParams) -> GridMeta {
    GridMeta {
        model: model.describe(),
        quench: format!("{:?}/{:?}", quench.background(), quench.encoding()),
        engine: format!(
            "dt={};krylov_dim={};krylov_tol={:e}",
            engine.dt, engine.krylov_dim, engine.krylov_tol
        ),
    }
}

/// Evolve every instance and record ⟨σ^axis_i(t)⟩ on all sites at the
/// cadence dt_record, t = 0 included. Instances run in parallel; each
/// writes only its own block, so results are identical at any worker count.
pub fn record_trajectory(
    s_values: &[f64],
    model: &ModelSpec,
    quench: &QuenchConfig,
    engine: &EngineParams,
    axis: Axis,
    dt_record: f64,
    t_max: f64,
) -> Result<ObservableGrid, ObservableError> {
    let (steps_per_record, times) = recording_grid(engine, dt_record, t_max)?;
    let n_sites = model.n_sites();
    let n_times = times.len();
    let terms = expand_terms(model);
    let mut values = vec![0.0f64; s_values.len() * n_sites * n_times];

    values
        .par_chunks_mut(n_sites * n_times)
        .zip(s_values.par_iter())
        .enumerate()
        .try_for_each(|(k, (block, &s))| -> Result<(), ObservableError> {
            let attach = |source: EngineError| ObservableError::Instance { index: k, source };
            let psi = build_initial_state(s, n_sites, quench)?;
            let mut prop = Propagator::new(&terms, psi, *engine).map_err(attach)?;
            for m in 0..n_times {
                if m > 0 {
                    prop.advance(steps_per_record).map_err(attach)?;
                }
                for site in 0..n_sites {
                    block[site * n_times + m] = pauli_expectation(prop.state(), site, axis)?;
                }
            }
            Ok(())
        })?;

    ObservableGrid::from_parts(
        s_values.len(),
        n_sites,
        times,
        axis,
        grid_meta(model, quench, engine),
        values,
    )
}

/// Von Neumann entropy of the first `cut` sites, S = −Σ λ² ln λ², from the
/// singular values of the amplitude matrix reshaped to 2^cut × 2^(N−cut).
pub fn entanglement_entropy(psi: &StateVector, cut: usize) -> Result<f64, ObservableError> {
    let n = psi.n_sites();
    if cut == 0 || cut >= n {
        return Err(ObservableError::CutOutOfRange { cut, max: n - 1 });
    }
    let rows = 1usize << cut;
    let cols = 1usize << (n - cut);
    let amps = psi.amplitudes();
    // left block = low bits (sites 0..cut), right block = high bits
    let m = DMatrix::<Complex64>::from_fn(rows, cols, |r, c| amps[r | (c << cut)]);
    let singular = m.singular_values();
    let mut entropy = 0.0;
    for sv in singular.iter() {
        let p = sv * sv;
        if p > 0.0 {
            entropy -= p * p.ln();
        }
    }
    Ok(entropy)
}

/// Entropy of one evolving instance over the recording grid.
pub fn record_entropy_series(
    s: f64,
    model: &ModelSpec,
    quench: &QuenchConfig,
    engine: &EngineParams,
    cut: usize,
    dt_record: f64,
    t_max: f64,
) -> Result<EntropySeries, ObservableError> {
    let (steps_per_record, times) = recording_grid(engine, dt_record, t_max)?;
    let terms = expand_terms(model);
    let psi = build_initial_state(s, model.n_sites(), quench)?;
    let mut prop = Propagator::new(&terms, psi, *engine)?;
    let mut values = Vec::with_capacity(times.len());
    for m in 0..times.len() {
        if m > 0 {
            prop.advance(steps_per_record)?;
        }
        values.push(entanglement_entropy(prop.state(), cut)?);
    }
    Ok(EntropySeries { cut, times, values })
}
