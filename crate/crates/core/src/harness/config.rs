//! Experiment configuration: one TOML file describes one sweep.
//!
//! ```toml
//! [model]
//! variant = "tfim"
//! n_sites = 13
//! j = 1.0
//! g = 1.0
//!
//! [sweep]
//! parameter = "g"
//! values = [0.6, 0.8, 1.0, 1.2, 1.4]
//!
//! [quench]
//! background = "all_up"
//! encoding = "x_basis"
//!
//! [observable]
//! axis = "x"
//!
//! [batch]
//! seed = 7
//!
//! [subset]
//! window_sites = 9
//! t_lo = 0.0
//! t_hi = 5.0
//!
//! [output]
//! directory = "out/tfim"
//! ```
//!
//! `[engine]` and `[analysis]` are optional and default to dt = 0.005,
//! krylov_dim = 20, krylov_tol = 1e-12, t_max = 5, Δ_th = 1e-5; `[batch]`
//! counts default to 64/64. The sweep parameter must name a coupling of the
//! chosen variant; its `[model]` entry (if any) is ignored in favor of the
//! per-point sweep value.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::analysis::{SubsetSpec, DEFAULT_DELTA_THRESHOLD};
use crate::engine::EngineParams;
use crate::model::{alpha_parametrization, Axis, ModelSpec};
use crate::quench::{Background, Encoding, QuenchConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "snake_case")]
pub enum ModelVariant {
    Tfim,
    Annni,
    Cluster,
    ClusterField,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub variant: ModelVariant,
    pub n_sites: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j_zz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j_zxz: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_x: Option<f64>,
    /// Cluster-field shorthand: j_zxz = (1−j_zz)·alpha, h_x = (1−j_zz)(1−alpha).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuenchSection {
    pub background: Background,
    pub encoding: Encoding,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSection {
    pub axis: Axis,
    #[serde(default = "default_dt_record")]
    pub dt_record: f64,
}

fn default_dt_record() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchSection {
    pub seed: u64,
    #[serde(default = "default_batch_half")]
    pub n_train: usize,
    #[serde(default = "default_batch_half")]
    pub n_test: usize,
}

fn default_batch_half() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default = "default_threshold")]
    pub delta_threshold: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        Self {
            delta_threshold: default_threshold(),
        }
    }
}

fn default_threshold() -> f64 {
    DEFAULT_DELTA_THRESHOLD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
}

/// Everything one experiment needs, declaratively.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSection,
    pub sweep: SweepSection,
    pub quench: QuenchSection,
    #[serde(default)]
    pub engine: EngineParams,
    pub observable: ObservableSection,
    pub batch: BatchSection,
    pub subset: SubsetSpec,
    #[serde(default)]
    pub analysis: AnalysisSection,
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// Sweepable coupling names for the configured variant.
    fn sweepable(&self) -> &'static [&'static str] {
        match self.model.variant {
            ModelVariant::Tfim => &["j", "g"],
            ModelVariant::Annni => &["j", "kappa", "g"],
            ModelVariant::Cluster => &["j_zz", "j_zxz"],
            ModelVariant::ClusterField => &["j_zz", "j_zxz", "h_x", "alpha"],
        }
    }

    fn coupling(&self, name: &str, sweep_value: Option<f64>) -> Result<f64, HarnessError> {
        if self.sweep.parameter == name {
            if let Some(v) = sweep_value {
                return Ok(v);
            }
        }
        let stored = match name {
            "j" => self.model.j,
            "kappa" => self.model.kappa,
            "g" => self.model.g,
            "j_zz" => self.model.j_zz,
            "j_zxz" => self.model.j_zxz,
            "h_x" => self.model.h_x,
            "alpha" => self.model.alpha,
            _ => None,
        };
        stored.ok_or_else(|| {
            HarnessError::Config(format!(
                "model coupling `{name}` is required for variant {:?} and is neither set nor swept",
                self.model.variant
            ))
        })
    }

    /// The concrete model at one sweep value.
    pub fn resolve_model(&self, sweep_value: f64) -> Result<ModelSpec, HarnessError> {
        let v = Some(sweep_value);
        let n = self.model.n_sites;
        let spec = match self.model.variant {
            ModelVariant::Tfim => ModelSpec::tfim(n, self.coupling("j", v)?, self.coupling("g", v)?),
            ModelVariant::Annni => ModelSpec::annni(
                n,
                self.coupling("j", v)?,
                self.coupling("kappa", v)?,
                self.coupling("g", v)?,
            ),
            ModelVariant::Cluster => {
                ModelSpec::cluster(n, self.coupling("j_zz", v)?, self.coupling("j_zxz", v)?)
            }
            ModelVariant::ClusterField => {
                let j_zz = self.coupling("j_zz", v)?;
                let uses_alpha =
                    self.model.alpha.is_some() || self.sweep.parameter == "alpha";
                if uses_alpha {
                    if self.model.j_zxz.is_some() || self.model.h_x.is_some() {
                        return Err(HarnessError::Config(
                            "cluster_field takes either alpha or explicit j_zxz/h_x, not both"
                                .into(),
                        ));
                    }
                    let (j_zxz, h_x) = alpha_parametrization(j_zz, self.coupling("alpha", v)?)?;
                    ModelSpec::cluster_field(n, j_zz, j_zxz, h_x)
                } else {
                    ModelSpec::cluster_field(
                        n,
                        j_zz,
                        self.coupling("j_zxz", v)?,
                        self.coupling("h_x", v)?,
                    )
                }
            }
        };
        Ok(spec?)
    }

    pub fn quench_config(&self) -> Result<QuenchConfig, HarnessError> {
        Ok(QuenchConfig::new(
            self.quench.background,
            self.quench.encoding,
        )?)
    }

    /// Full cross-field validation; every run entry point calls this first.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.sweep.values.is_empty() {
            return Err(HarnessError::Config("sweep.values must be nonempty".into()));
        }
        if !self.sweep.values.iter().all(|v| v.is_finite()) {
            return Err(HarnessError::Config(
                "sweep.values must all be finite".into(),
            ));
        }
        if !self.sweepable().contains(&self.sweep.parameter.as_str()) {
            return Err(HarnessError::Config(format!(
                "`{}` is not a sweepable coupling of variant {:?} (expected one of {:?})",
                self.sweep.parameter,
                self.model.variant,
                self.sweepable()
            )));
        }
        for &value in &self.sweep.values {
            let model = self.resolve_model(value)?;
            self.engine.validate(model.n_sites())?;
        }
        self.quench_config()?;

        let dt_record = self.observable.dt_record;
        let steps = (dt_record / self.engine.dt).round();
        if steps < 1.0 || (steps * self.engine.dt - dt_record).abs() > 1e-9 * dt_record {
            return Err(HarnessError::Config(format!(
                "observable.dt_record = {dt_record} must be a whole number of engine steps (dt = {})",
                self.engine.dt
            )));
        }
        let records = (self.engine.t_max / dt_record).round();
        if records < 1.0 || (records * dt_record - self.engine.t_max).abs() > 1e-9 * self.engine.t_max
        {
            return Err(HarnessError::Config(format!(
                "engine.t_max = {} must be a whole number of recording intervals (dt_record = {dt_record})",
                self.engine.t_max
            )));
        }

        if self.batch.n_train < 2 || self.batch.n_test < 2 {
            return Err(HarnessError::Config(
                "batch.n_train and batch.n_test must both be at least 2".into(),
            ));
        }
        if !(self.analysis.delta_threshold.is_finite() && self.analysis.delta_threshold >= 0.0) {
            return Err(HarnessError::Config(format!(
                "analysis.delta_threshold must be a nonnegative number, got {}",
                self.analysis.delta_threshold
            )));
        }

        self.subset
            .site_bounds(self.model.n_sites)
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.subset.t_hi > self.engine.t_max + 1e-9 {
            return Err(HarnessError::Config(format!(
                "subset.t_hi = {} exceeds the recorded range t_max = {}",
                self.subset.t_hi, self.engine.t_max
            )));
        }
        let any_recorded = (0..=records as usize)
            .map(|m| m as f64 * dt_record)
            .any(|t| self.subset.contains_time(t));
        if !any_recorded {
            return Err(HarnessError::Config(format!(
                "subset time window ({}, {}] contains no recorded times",
                self.subset.t_lo, self.subset.t_hi
            )));
        }
        Ok(())
    }

    /// Content hash of the effective config (canonical TOML serialization),
    /// the key for resume matching.
    pub fn fingerprint(&self) -> String {
        let canonical = toml::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hex_digest(hasher)
    }
}

pub(crate) fn hex_digest(hasher: Sha256) -> String {
    let bytes = hasher.finalize();
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        out.push_str(&format!("{b:02x}"));
    }
    out
}
