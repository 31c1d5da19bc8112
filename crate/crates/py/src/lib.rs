//! Python bindings: the chain models, the exact-evolution engine, the
//! quench protocol, and the sweep harness behind an importable module.
//!
//! Heavy calls (evolution, point runs, sweeps) release the GIL, so a
//! driving notebook stays responsive and can thread around them.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use quenchprobe::harness::{run_point, run_sweep, ExperimentConfig, HarnessError};
use quenchprobe::model::alpha_parametrization;
use quenchprobe::{
    build_initial_state, entanglement_entropy, expand_terms, mean_r2, pauli_expectation,
    Axis, Background, Encoding, EngineParams, ModelSpec, QuenchConfig, StateVector,
};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn harness_err(e: HarnessError) -> PyErr {
    match &e {
        HarnessError::Config(_) => PyValueError::new_err(e.to_string()),
        HarnessError::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse_axis(name: &str) -> PyResult<Axis> {
    match name.to_ascii_lowercase().as_str() {
        "x" => Ok(Axis::X),
        "y" => Ok(Axis::Y),
        "z" => Ok(Axis::Z),
        other => Err(PyValueError::new_err(format!(
            "unknown axis `{other}` (expected x, y, or z)"
        ))),
    }
}

fn parse_background(name: &str) -> PyResult<Background> {
    match name.to_ascii_lowercase().as_str() {
        "all_up" => Ok(Background::AllUp),
        "all_plus_y" => Ok(Background::AllPlusY),
        other => Err(PyValueError::new_err(format!(
            "unknown background `{other}` (expected all_up or all_plus_y)"
        ))),
    }
}

fn parse_encoding(name: &str) -> PyResult<Encoding> {
    match name.to_ascii_lowercase().as_str() {
        "x_basis" => Ok(Encoding::XBasis),
        "y_basis" => Ok(Encoding::YBasis),
        other => Err(PyValueError::new_err(format!(
            "unknown encoding `{other}` (expected x_basis or y_basis)"
        ))),
    }
}

fn engine_params(dt: f64, krylov_dim: usize, krylov_tol: f64) -> EngineParams {
    EngineParams {
        dt,
        krylov_dim,
        krylov_tol,
        ..EngineParams::default()
    }
}

/// One of the four supported chain Hamiltonians at fixed couplings.
#[pyclass(name = "Model", module = "quenchprobe_py", skip_from_py_object)]
#[derive(Clone)]
struct PyModel {
    spec: ModelSpec,
}

#[pymethods]
impl PyModel {
    /// Transverse-field Ising chain: -j ZZ + g X.
    #[staticmethod]
    fn tfim(n_sites: usize, j: f64, g: f64) -> PyResult<Self> {
        Ok(Self {
            spec: ModelSpec::tfim(n_sites, j, g).map_err(value_err)?,
        })
    }

    /// Next-nearest-neighbor Ising chain: -j ZZ - kappa ZZ' + g X.
    #[staticmethod]
    fn annni(n_sites: usize, j: f64, kappa: f64, g: f64) -> PyResult<Self> {
        Ok(Self {
            spec: ModelSpec::annni(n_sites, j, kappa, g).map_err(value_err)?,
        })
    }

    /// Cluster chain: -j_zz ZZ + j_zxz ZXZ.
    #[staticmethod]
    fn cluster(n_sites: usize, j_zz: f64, j_zxz: f64) -> PyResult<Self> {
        Ok(Self {
            spec: ModelSpec::cluster(n_sites, j_zz, j_zxz).map_err(value_err)?,
        })
    }

    /// Cluster chain with a transverse field: -j_zz ZZ - h_x X + j_zxz ZXZ.
    #[staticmethod]
    fn cluster_field(n_sites: usize, j_zz: f64, j_zxz: f64, h_x: f64) -> PyResult<Self> {
        Ok(Self {
            spec: ModelSpec::cluster_field(n_sites, j_zz, j_zxz, h_x).map_err(value_err)?,
        })
    }

    /// Cluster-field shorthand: j_zxz = (1-j_zz)*alpha, h_x = (1-j_zz)*(1-alpha).
    #[staticmethod]
    fn cluster_field_alpha(n_sites: usize, j_zz: f64, alpha: f64) -> PyResult<Self> {
        let (j_zxz, h_x) = alpha_parametrization(j_zz, alpha).map_err(value_err)?;
        Self::cluster_field(n_sites, j_zz, j_zxz, h_x)
    }

    #[getter]
    fn n_sites(&self) -> usize {
        self.spec.n_sites()
    }

    fn describe(&self) -> String {
        self.spec.describe()
    }

    fn __repr__(&self) -> String {
        format!("Model({})", self.spec.describe())
    }
}

/// A normalized pure state of the chain, site i on bit i.
#[pyclass(name = "State", module = "quenchprobe_py", skip_from_py_object)]
#[derive(Clone)]
struct PyState {
    inner: StateVector,
}

#[pymethods]
impl PyState {
    /// Wraps raw amplitudes, rescaling them to unit norm.
    #[new]
    fn new(n_sites: usize, amplitudes: Vec<Complex64>) -> PyResult<Self> {
        Ok(Self {
            inner: StateVector::normalized(n_sites, amplitudes).map_err(value_err)?,
        })
    }

    #[staticmethod]
    fn all_up(n_sites: usize) -> PyResult<Self> {
        Ok(Self {
            inner: StateVector::all_up(n_sites).map_err(value_err)?,
        })
    }

    #[getter]
    fn n_sites(&self) -> usize {
        self.inner.n_sites()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.inner.amplitudes().to_vec()
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    /// Overlap-squared |<self|other>|^2.
    fn fidelity(&self, other: &PyState) -> f64 {
        self.inner.fidelity(&other.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "State(n_sites={}, dim={})",
            self.inner.n_sites(),
            self.inner.dim()
        )
    }
}

/// A parsed sweep configuration, the same TOML the CLI consumes.
#[pyclass(name = "Config", module = "quenchprobe_py", skip_from_py_object)]
#[derive(Clone)]
struct PyConfig {
    inner: ExperimentConfig,
}

#[pymethods]
impl PyConfig {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: ExperimentConfig::load(&path).map_err(harness_err)?,
        })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: ExperimentConfig::from_toml_str(text).map_err(harness_err)?,
        })
    }

    fn validate(&self) -> PyResult<()> {
        self.inner.validate().map_err(harness_err)
    }

    fn fingerprint(&self) -> String {
        self.inner.fingerprint()
    }

    #[getter]
    fn parameter(&self) -> String {
        self.inner.sweep.parameter.clone()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.sweep.values.clone()
    }

    #[getter]
    fn output_directory(&self) -> PathBuf {
        self.inner.output.directory.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "Config(parameter={}, values={:?})",
            self.inner.sweep.parameter, self.inner.sweep.values
        )
    }
}

/// In-memory result of one sweep point: the R2 heatmap, the deviation
/// gate, and the half-chain entropy trace.
#[pyclass(name = "PointResult", module = "quenchprobe_py")]
struct PyPointResult {
    #[pyo3(get)]
    parameter_value: f64,
    #[pyo3(get)]
    mean_r2: f64,
    #[pyo3(get)]
    times: Vec<f64>,
    /// r2[site][time_index], zeroed where the deviation gate tripped.
    #[pyo3(get)]
    r2: Vec<Vec<f64>>,
    #[pyo3(get)]
    delta: Vec<Vec<f64>>,
    #[pyo3(get)]
    zeroed_cells: usize,
    #[pyo3(get)]
    entropy_times: Vec<f64>,
    #[pyo3(get)]
    entropy: Vec<f64>,
}

/// Sweep-level summary mirroring the on-disk sweep table.
#[pyclass(name = "SweepSummary", module = "quenchprobe_py")]
struct PySweepSummary {
    #[pyo3(get)]
    parameter: String,
    #[pyo3(get)]
    values: Vec<f64>,
    #[pyo3(get)]
    r2_mean: Vec<f64>,
    #[pyo3(get)]
    dip_value: Option<f64>,
    #[pyo3(get)]
    dip_r2: Option<f64>,
    #[pyo3(get)]
    dip_interior: Option<bool>,
    #[pyo3(get)]
    n_completed: usize,
    #[pyo3(get)]
    n_failed: usize,
    #[pyo3(get)]
    directory: PathBuf,
}

/// Central-site product state carrying the scalar input s.
#[pyfunction]
#[pyo3(signature = (s, n_sites, background = "all_up", encoding = "x_basis"))]
fn initial_state(s: f64, n_sites: usize, background: &str, encoding: &str) -> PyResult<PyState> {
    let quench = QuenchConfig::new(parse_background(background)?, parse_encoding(encoding)?)
        .map_err(value_err)?;
    Ok(PyState {
        inner: build_initial_state(s, n_sites, &quench).map_err(value_err)?,
    })
}

/// exp(-iHt)|state> by Krylov stepping; t must be a multiple of dt.
#[pyfunction]
#[pyo3(signature = (model, state, t, dt = 0.005, krylov_dim = 20, krylov_tol = 1e-12))]
fn evolve(
    py: Python<'_>,
    model: &PyModel,
    state: &PyState,
    t: f64,
    dt: f64,
    krylov_dim: usize,
    krylov_tol: f64,
) -> PyResult<PyState> {
    let terms = expand_terms(&model.spec);
    let params = engine_params(dt, krylov_dim, krylov_tol);
    let psi = state.inner.clone();
    let out = py
        .detach(move || quenchprobe::evolve(&terms, &psi, &params, t))
        .map_err(runtime_err)?;
    Ok(PyState { inner: out })
}

/// Lowest eigenpair (energy, state) by restarted Lanczos.
#[pyfunction]
#[pyo3(signature = (model, krylov_dim = 64, krylov_tol = 1e-12))]
fn ground_state(
    py: Python<'_>,
    model: &PyModel,
    krylov_dim: usize,
    krylov_tol: f64,
) -> PyResult<(f64, PyState)> {
    let terms = expand_terms(&model.spec);
    let n_sites = model.spec.n_sites();
    let params = engine_params(0.005, krylov_dim, krylov_tol);
    let (energy, state) = py
        .detach(move || quenchprobe::ground_state(&terms, n_sites, &params))
        .map_err(runtime_err)?;
    Ok((energy, PyState { inner: state }))
}

/// <state|sigma^axis_site|state>.
#[pyfunction(name = "pauli_expectation")]
fn pauli_expectation_py(state: &PyState, site: usize, axis: &str) -> PyResult<f64> {
    pauli_expectation(&state.inner, site, parse_axis(axis)?).map_err(value_err)
}

/// Von Neumann entropy, in nats, across the bond left of `cut`.
#[pyfunction(name = "entanglement_entropy")]
fn entanglement_entropy_py(state: &PyState, cut: usize) -> PyResult<f64> {
    entanglement_entropy(&state.inner, cut).map_err(value_err)
}

/// Deterministic uniform [0,1] inputs: (train, test) split.
#[pyfunction]
fn sample_inputs(seed: u64, n_train: usize, n_test: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let batch = quenchprobe::sample_inputs(seed, n_train, n_test).map_err(value_err)?;
    Ok((batch.train_values().to_vec(), batch.test_values().to_vec()))
}

/// Least-squares readout weights (w_o, w_c) for y = w_o*x + w_c.
#[pyfunction]
fn train_readout(observations: Vec<f64>, inputs: Vec<f64>) -> PyResult<(f64, f64)> {
    if observations.len() != inputs.len() {
        return Err(PyValueError::new_err(format!(
            "length mismatch: {} observations vs {} inputs",
            observations.len(),
            inputs.len()
        )));
    }
    let weights = quenchprobe::train_readout(&observations, &inputs);
    Ok((weights.w_o, weights.w_c))
}

/// Squared Pearson correlation between predictions and targets.
#[pyfunction]
fn r_squared(predictions: Vec<f64>, targets: Vec<f64>) -> PyResult<f64> {
    quenchprobe::r_squared(&predictions, &targets).map_err(value_err)
}

/// Simulates one sweep point in memory; nothing is written to disk.
#[pyfunction(name = "run_point")]
fn run_point_py(py: Python<'_>, config: &PyConfig, value: f64) -> PyResult<PyPointResult> {
    let cfg = config.inner.clone();
    let arts = py
        .detach(move || run_point(&cfg, value))
        .map_err(harness_err)?;
    let mean = mean_r2(&arts.r2, &config.inner.subset).map_err(value_err)?;
    let n_sites = arts.r2.n_sites();
    let n_times = arts.r2.n_times();
    let unflatten = |flat: &[f64]| -> Vec<Vec<f64>> {
        (0..n_sites)
            .map(|site| flat[site * n_times..(site + 1) * n_times].to_vec())
            .collect()
    };
    Ok(PyPointResult {
        parameter_value: arts.parameter_value,
        mean_r2: mean,
        times: arts.r2.times().to_vec(),
        r2: unflatten(arts.r2.r2_values()),
        delta: unflatten(arts.r2.delta_values()),
        zeroed_cells: arts.r2.masked_count(),
        entropy_times: arts.entropy.times.clone(),
        entropy: arts.entropy.values.clone(),
    })
}

/// Runs (or resumes) a full sweep, persisting artifacts like the CLI.
#[pyfunction(name = "run_sweep")]
#[pyo3(signature = (config, output_dir = None, resume = false))]
fn run_sweep_py(
    py: Python<'_>,
    config: &PyConfig,
    output_dir: Option<PathBuf>,
    resume: bool,
) -> PyResult<PySweepSummary> {
    let cfg = config.inner.clone();
    let dir = output_dir.unwrap_or_else(|| cfg.output.directory.clone());
    let run_dir = dir.clone();
    let outcome = py
        .detach(move || run_sweep(&cfg, &run_dir, resume))
        .map_err(harness_err)?;
    Ok(PySweepSummary {
        parameter: outcome.result.parameter_name,
        values: outcome.result.parameter_values,
        r2_mean: outcome.result.r2_mean,
        dip_value: outcome.dip.map(|d| d.parameter),
        dip_r2: outcome.dip.map(|d| d.r2_mean),
        dip_interior: outcome.dip.map(|d| d.interior),
        n_completed: outcome.n_completed,
        n_failed: outcome.n_failed,
        directory: dir,
    })
}

#[pymodule]
fn quenchprobe_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add("PRNG_ID", quenchprobe::rng::PRNG_ID)?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyState>()?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PyPointResult>()?;
    m.add_class::<PySweepSummary>()?;
    m.add_function(wrap_pyfunction!(initial_state, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(ground_state, m)?)?;
    m.add_function(wrap_pyfunction!(pauli_expectation_py, m)?)?;
    m.add_function(wrap_pyfunction!(entanglement_entropy_py, m)?)?;
    m.add_function(wrap_pyfunction!(sample_inputs, m)?)?;
    m.add_function(wrap_pyfunction!(train_readout, m)?)?;
    m.add_function(wrap_pyfunction!(r_squared, m)?)?;
    m.add_function(wrap_pyfunction!(run_point_py, m)?)?;
    m.add_function(wrap_pyfunction!(run_sweep_py, m)?)?;
    Ok(())
}
