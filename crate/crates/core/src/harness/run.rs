//! Point and sweep execution with resumable, hash-verified persistence.
//!
//! A sweep output directory contains one subdirectory per parameter value
//! (`point_<parameter>_<value>/` with the binary grids plus their tabular
//! exports), a sweep-level `sweep.csv`, and `manifest.json` tying every file
//! to the config fingerprint and a content hash. Re-running with `resume`
//! skips points whose files all verify, so an interrupted sweep picks up
//! where it stopped and still produces bit-identical outputs.

use std::fs;
use std::path::Path;

use crate::analysis::{build_r2_grid, locate_dip, mean_r2, DipReport, R2Grid, SweepResult};
use crate::observables::{
    record_entropy_series, record_trajectory, EntropySeries, ObservableGrid,
};
use crate::quench::sample_inputs;

use super::binfmt::{read_r2_grid, write_observable_grid, write_r2_grid};
use super::config::ExperimentConfig;
use super::export::{write_entropy_table, write_heatmap, write_sweep_table};
use super::manifest::{
    sha256_file, unix_now, FileDigest, PointRecord, PointStatus, RunManifest, SweepSummary,
};
use super::HarnessError;

pub const OBSERVABLES_FILE: &str = "observables.qrpg";
pub const R2_FILE: &str = "r2.qrpg";
pub const HEATMAP_FILE: &str = "heatmap.csv";
pub const ENTROPY_FILE: &str = "entropy.csv";
pub const SWEEP_FILE: &str = "sweep.csv";

/// Input value of the single instance tracked by the entropy monitor.
pub const ENTROPY_PROBE_INPUT: f64 = 0.5;

/// Everything one parameter value produces, in memory.
#[derive(Debug, Clone)]
pub struct PointArtifacts {
    pub parameter_value: f64,
    pub observables: ObservableGrid,
    pub r2: R2Grid,
    pub entropy: EntropySeries,
}

/// Outcome of a sweep over completed points; failures live in the manifest.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub result: SweepResult,
    pub dip: Option<DipReport>,
    pub manifest: RunManifest,
    pub n_completed: usize,
    pub n_failed: usize,
}

pub fn point_dir_name(parameter: &str, value: f64) -> String {
    format!("point_{parameter}_{value}")
}

/// Progress notifications emitted by [`run_sweep_with`], one pair per point.
#[derive(Debug)]
pub enum PointEvent<'a> {
    Started {
        index: usize,
        total: usize,
        value: f64,
    },
    Completed {
        value: f64,
        r2_mean: f64,
        resumed: bool,
    },
    Failed {
        value: f64,
        error: &'a HarnessError,
    },
}

/// One sweep value end to end: input batch, evolution of every instance,
/// per-cell readout regression, and the half-chain entropy monitor.
pub fn run_point(config: &ExperimentConfig, value: f64) -> Result<PointArtifacts, HarnessError> {
    config.validate()?;
    let model = config.resolve_model(value)?;
    config.engine.validate(model.n_sites())?;
    let quench = config.quench_config()?;
    let batch = sample_inputs(config.batch.seed, config.batch.n_train, config.batch.n_test)?;

    let observables = record_trajectory(
        batch.values(),
        &model,
        &quench,
        &config.engine,
        config.observable.axis,
        config.observable.dt_record,
        config.engine.t_max,
    )?;
    let r2 = build_r2_grid(&observables, &batch, config.analysis.delta_threshold)?;
    let entropy = record_entropy_series(
        ENTROPY_PROBE_INPUT,
        &model,
        &quench,
        &config.engine,
        model.n_sites() / 2,
        config.observable.dt_record,
        config.engine.t_max,
    )?;

    Ok(PointArtifacts {
        parameter_value: value,
        observables,
        r2,
        entropy,
    })
}

/// Write one point's four artifact files under `output_dir` and return the
/// completed record plus the subset-averaged R̄².
pub fn persist_point(
    config: &ExperimentConfig,
    artifacts: &PointArtifacts,
    output_dir: &Path,
) -> Result<(PointRecord, f64), HarnessError> {
    let dir_name = point_dir_name(&config.sweep.parameter, artifacts.parameter_value);
    let point_dir = output_dir.join(&dir_name);
    fs::create_dir_all(&point_dir).map_err(|e| HarnessError::io(&point_dir, e))?;

    write_observable_grid(&point_dir.join(OBSERVABLES_FILE), &artifacts.observables)?;
    write_r2_grid(&point_dir.join(R2_FILE), &artifacts.r2)?;
    write_heatmap(&point_dir.join(HEATMAP_FILE), &artifacts.r2)?;
    write_entropy_table(&point_dir.join(ENTROPY_FILE), &artifacts.entropy)?;
    let mean = mean_r2(&artifacts.r2, &config.subset)?;

    let mut files = Vec::with_capacity(4);
    for name in [OBSERVABLES_FILE, R2_FILE, HEATMAP_FILE, ENTROPY_FILE] {
        let rel = format!("{dir_name}/{name}");
        files.push(FileDigest {
            sha256: sha256_file(&output_dir.join(&rel))?,
            path: rel,
        });
    }
    let record = PointRecord {
        parameter_value: artifacts.parameter_value,
        directory: dir_name,
        status: PointStatus::Completed,
        files,
    };
    Ok((record, mean))
}

/// Run every sweep value, persist artifacts, and summarize. Failed points
/// are recorded and skipped over; with `resume`, points already on disk
/// under the same config fingerprint are reused after hash verification.
pub fn run_sweep(
    config: &ExperimentConfig,
    output_dir: &Path,
    resume: bool,
) -> Result<SweepOutcome, HarnessError> {
    run_sweep_with(config, output_dir, resume, |_| {})
}

/// [`run_sweep`] with a per-point progress observer.
pub fn run_sweep_with(
    config: &ExperimentConfig,
    output_dir: &Path,
    resume: bool,
    mut observe: impl FnMut(PointEvent<'_>),
) -> Result<SweepOutcome, HarnessError> {
    config.validate()?;
    fs::create_dir_all(output_dir).map_err(|e| HarnessError::io(output_dir, e))?;
    let fingerprint = config.fingerprint();

    let previous = if resume {
        RunManifest::load(output_dir)
            .ok()
            .filter(|m| m.config_fingerprint == fingerprint)
    } else {
        None
    };

    let mut manifest = RunManifest::new(fingerprint, config.sweep.parameter.clone());
    let mut completed_values = Vec::new();
    let mut completed_means = Vec::new();
    let mut n_failed = 0usize;

    let total = config.sweep.values.len();
    for (index, &value) in config.sweep.values.iter().enumerate() {
        observe(PointEvent::Started {
            index,
            total,
            value,
        });
        if let Some(prev) = previous
            .as_ref()
            .and_then(|m| m.verified_point(output_dir, value))
        {
            let r2 = read_r2_grid(&output_dir.join(&prev.directory).join(R2_FILE))?;
            let mean = mean_r2(&r2, &config.subset)?;
            completed_values.push(value);
            completed_means.push(mean);
            manifest.points.push(prev.clone());
            manifest.save(output_dir)?;
            observe(PointEvent::Completed {
                value,
                r2_mean: mean,
                resumed: true,
            });
            continue;
        }

        match run_point(config, value).and_then(|a| persist_point(config, &a, output_dir)) {
            Ok((record, mean)) => {
                completed_values.push(value);
                completed_means.push(mean);
                manifest.points.push(record);
                observe(PointEvent::Completed {
                    value,
                    r2_mean: mean,
                    resumed: false,
                });
            }
            Err(err) => {
                n_failed += 1;
                observe(PointEvent::Failed {
                    value,
                    error: &err,
                });
                manifest.points.push(PointRecord {
                    parameter_value: value,
                    directory: point_dir_name(&config.sweep.parameter, value),
                    status: PointStatus::Failed {
                        error: err.to_string(),
                    },
                    files: Vec::new(),
                });
            }
        }
        manifest.save(output_dir)?;
    }

    let result = SweepResult {
        parameter_name: config.sweep.parameter.clone(),
        parameter_values: completed_values,
        r2_mean: completed_means,
    };
    let dip = if result.parameter_values.is_empty() {
        None
    } else {
        let d = locate_dip(&result)?;
        write_sweep_table(&output_dir.join(SWEEP_FILE), &result, Some(&d))?;
        manifest.sweep = Some(SweepSummary {
            r2_mean: result.r2_mean.clone(),
            dip: d,
        });
        Some(d)
    };
    manifest.completed_unix = Some(unix_now());
    manifest.save(output_dir)?;

    Ok(SweepOutcome {
        n_completed: result.parameter_values.len(),
        result,
        dip,
        manifest,
        n_failed,
    })
}

/// Regenerate every tabular artifact in a sweep directory from its stored
/// binaries and manifest, without re-simulating. Returns the file count.
pub fn export_tables(output_dir: &Path) -> Result<usize, HarnessError> {
    let manifest = RunManifest::load(output_dir)?;
    let mut written = 0usize;

    let mut completed = Vec::new();
    for point in &manifest.points {
        if point.status != PointStatus::Completed {
            continue;
        }
        let point_dir = output_dir.join(&point.directory);
        let r2 = read_r2_grid(&point_dir.join(R2_FILE))?;
        write_heatmap(&point_dir.join(HEATMAP_FILE), &r2)?;
        written += 1;
        completed.push(point.parameter_value);
    }

    if let Some(summary) = &manifest.sweep {
        if summary.r2_mean.len() != completed.len() {
            return Err(HarnessError::Format {
                path: output_dir.join(super::manifest::MANIFEST_FILE),
                reason: format!(
                    "sweep summary covers {} points but {} completed",
                    summary.r2_mean.len(),
                    completed.len()
                ),
            });
        }
        let result = SweepResult {
            parameter_name: manifest.parameter_name.clone(),
            parameter_values: completed,
            r2_mean: summary.r2_mean.clone(),
        };
        write_sweep_table(&output_dir.join(SWEEP_FILE), &result, Some(&summary.dip))?;
        written += 1;
    }
    Ok(written)
}
