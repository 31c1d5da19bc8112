//! Linear readout training and determination-coefficient analysis.
//!
//! Per (site, time) cell: fit y = w_O·⟨O⟩ + w_c to the training inputs by
//! pseudoinverse, score the squared Pearson correlation R² between predicted
//! and true inputs on held-out test instances, and zero out cells whose
//! training observable barely moves (average absolute deviation below Δ_th).
//! Window averages R̄² of those grids are the phase-transition probe.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::observables::ObservableGrid;
use crate::quench::InputBatch;

/// Δ_th default: below this training-set deviation a cell reads as input
/// independent and its R² is forced to zero.
pub const DEFAULT_DELTA_THRESHOLD: f64 = 1e-5;

/// Relative singular-value cutoff for the pseudoinverse.
const SV_CUTOFF: f64 = 1e-12;

/// σ²(y) at or below this absolute level counts as "no output variance".
const OUTPUT_VARIANCE_FLOOR: f64 = 1e-14;

/// Time-membership slack: recorded times accumulate one rounding per step.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("input arrays differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("need at least 2 instances, got {0}")]
    TooFewInstances(usize),
    #[error("test inputs have zero variance; batch is malformed")]
    ZeroTargetVariance,
    #[error("grid holds {grid} instances but the batch has {batch}")]
    BatchMismatch { grid: usize, batch: usize },
    #[error("invalid subset: {0}")]
    InvalidSubset(String),
    #[error("sweep is empty")]
    EmptySweep,
}

/// Trained readout for one (site, time) cell: y = w_o·x + w_c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadoutWeights {
    pub w_o: f64,
    pub w_c: f64,
}

impl ReadoutWeights {
    pub fn predict(&self, x: f64) -> f64 {
        self.w_o * x + self.w_c
    }
}

/// Least-squares weights via pseudoinverse of the l×2 design [x_k, 1].
///
/// A degenerate design (observable column constant up to the relative
/// singular-value cutoff) yields w_o = 0, w_c = mean(s): no information in
/// the observable, predict the mean.
pub fn train_readout(train_obs: &[f64], train_s: &[f64]) -> ReadoutWeights {
    assert_eq!(train_obs.len(), train_s.len(), "design/target mismatch");
    let l = train_obs.len();
    assert!(l >= 2, "need at least 2 training instances");

    let design = DMatrix::<f64>::from_fn(l, 2, |k, c| if c == 0 { train_obs[k] } else { 1.0 });
    let svd = design.svd(true, true);
    let sv_max = svd.singular_values.max();
    let sv_min = svd.singular_values.min();
    if sv_min <= SV_CUTOFF * sv_max {
        let mean = train_s.iter().sum::<f64>() / l as f64;
        return ReadoutWeights { w_o: 0.0, w_c: mean };
    }
    let rhs = DVector::<f64>::from_column_slice(train_s);
    let w = svd
        .solve(&rhs, SV_CUTOFF * sv_max)
        .expect("SVD of a full-rank 2-column design cannot fail");
    let weights = ReadoutWeights {
        w_o: w[0],
        w_c: w[1],
    };
    debug_assert!(weights.w_o.is_finite() && weights.w_c.is_finite());
    weights
}

/// Squared Pearson correlation cov²(y,s) / (σ²(y)·σ²(s)) on the test set.
///
/// σ²(y) = 0 (within the absolute floor) maps to 0 by convention: constant
/// output carries no input information. Zero σ²(s) is a malformed batch.
pub fn r_squared(test_outputs: &[f64], test_s: &[f64]) -> Result<f64, AnalysisError> {
    if test_outputs.len() != test_s.len() {
        return Err(AnalysisError::LengthMismatch(
            test_outputs.len(),
            test_s.len(),
        ));
    }
    let n = test_outputs.len();
    if n < 2 {
        return Err(AnalysisError::TooFewInstances(n));
    }
    let inv = 1.0 / n as f64;
    let mean_y = test_outputs.iter().sum::<f64>() * inv;
    let mean_s = test_s.iter().sum::<f64>() * inv;
    let mut cov = 0.0;
    let mut var_y = 0.0;
    let mut var_s = 0.0;
    for (&y, &s) in test_outputs.iter().zip(test_s) {
        let dy = y - mean_y;
        let ds = s - mean_s;
        cov += dy * ds;
        var_y += dy * dy;
        var_s += ds * ds;
    }
    cov *= inv;
    var_y *= inv;
    var_s *= inv;
    if var_s <= 0.0 {
        return Err(AnalysisError::ZeroTargetVariance);
    }
    if var_y <= OUTPUT_VARIANCE_FLOOR {
        return Ok(0.0);
    }
    // Cauchy-Schwarz bounds this by 1; shave the f64 rounding overshoot
    Ok((cov * cov / (var_y * var_s)).min(1.0))
}

/// (1/l)·Σ|x_k − mean(x)| over the training instances.
pub fn average_abs_deviation(train_obs: &[f64]) -> f64 {
    assert!(train_obs.len() >= 2, "need at least 2 training instances");
    let inv = 1.0 / train_obs.len() as f64;
    let mean = train_obs.iter().sum::<f64>() * inv;
    train_obs.iter().map(|x| (x - mean).abs()).sum::<f64>() * inv
}

/// R²_i(t) with the deviation and zeroing bookkeeping, [site][time].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct R2Grid {
    n_sites: usize,
    times: Vec<f64>,
    threshold: f64,
    r2: Vec<f64>,
    delta: Vec<f64>,
    zeroed_mask: Vec<bool>,
}

impl R2Grid {
    /// Reassemble from storage, revalidating the grid invariants.
    pub fn from_parts(
        n_sites: usize,
        times: Vec<f64>,
        threshold: f64,
        r2: Vec<f64>,
        delta: Vec<f64>,
        zeroed_mask: Vec<bool>,
    ) -> Result<Self, AnalysisError> {
        let cells = n_sites * times.len();
        if r2.len() != cells || delta.len() != cells || zeroed_mask.len() != cells {
            return Err(AnalysisError::InvalidSubset(format!(
                "cell arrays must hold {cells} entries"
            )));
        }
        for (idx, &v) in r2.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(AnalysisError::InvalidSubset(format!(
                    "r2[{idx}] = {v} outside [0, 1]"
                )));
            }
        }
        for idx in 0..cells {
            let expect = delta[idx] < threshold;
            if zeroed_mask[idx] != expect {
                return Err(AnalysisError::InvalidSubset(format!(
                    "mask[{idx}] inconsistent with delta and threshold"
                )));
            }
        }
        Ok(Self {
            n_sites,
            times,
            threshold,
            r2,
            delta,
            zeroed_mask,
        })
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

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    #[inline]
    fn idx(&self, site: usize, time_idx: usize) -> usize {
        site * self.times.len() + time_idx
    }

    pub fn r2(&self, site: usize, time_idx: usize) -> f64 {
        self.r2[self.idx(site, time_idx)]
    }

    pub fn delta(&self, site: usize, time_idx: usize) -> f64 {
        self.delta[self.idx(site, time_idx)]
    }

    pub fn masked(&self, site: usize, time_idx: usize) -> bool {
        self.zeroed_mask[self.idx(site, time_idx)]
    }

    pub fn r2_values(&self) -> &[f64] {
        &self.r2
    }

    pub fn delta_values(&self) -> &[f64] {
        &self.delta
    }

    pub fn mask_values(&self) -> &[bool] {
        &self.zeroed_mask
    }

    /// Count of cells zeroed by the deviation threshold.
    pub fn masked_count(&self) -> usize {
        self.zeroed_mask.iter().filter(|&&m| m).count()
    }
}

/// Regress every (site, time) cell of the grid against the batch inputs.
///
/// Training instances determine both the deviation gate Δ and the weights;
/// R² is evaluated on the test instances only.
pub fn build_r2_grid(
    grid: &ObservableGrid,
    batch: &InputBatch,
    threshold: f64,
) -> Result<R2Grid, AnalysisError> {
    if grid.n_instances() != batch.len() {
        return Err(AnalysisError::BatchMismatch {
            grid: grid.n_instances(),
            batch: batch.len(),
        });
    }
    let n_train = batch.n_train();
    let train_s = batch.train_values();
    let test_s = batch.test_values();
    let (n_sites, n_times) = (grid.n_sites(), grid.n_times());
    let mut r2 = vec![0.0f64; n_sites * n_times];
    let mut delta = vec![0.0f64; n_sites * n_times];
    let mut mask = vec![false; n_sites * n_times];

    for site in 0..n_sites {
        for m in 0..n_times {
            let xs = grid.across_instances(site, m);
            let (xs_train, xs_test) = xs.split_at(n_train);
            let cell = site * n_times + m;
            let dev = average_abs_deviation(xs_train);
            delta[cell] = dev;
            if dev < threshold {
                mask[cell] = true;
                continue;
            }
            let weights = train_readout(xs_train, train_s);
            let ys: Vec<f64> = xs_test.iter().map(|&x| weights.predict(x)).collect();
            r2[cell] = r_squared(&ys, test_s)?;
        }
    }
    R2Grid::from_parts(n_sites, grid.times().to_vec(), threshold, r2, delta, mask)
}

/// A centered site window and a half-open time window (t_lo, t_hi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsetSpec {
    /// Odd number of sites centered on the quench site.
    pub window_sites: usize,
    pub t_lo: f64,
    pub t_hi: f64,
}

impl SubsetSpec {
    pub fn centered(window_sites: usize, t_lo: f64, t_hi: f64) -> Self {
        Self {
            window_sites,
            t_lo,
            t_hi,
        }
    }

    /// Site range [lo, hi] on a chain of `n_sites`.
    pub fn site_bounds(&self, n_sites: usize) -> Result<(usize, usize), AnalysisError> {
        if self.window_sites == 0 || self.window_sites % 2 == 0 {
            return Err(AnalysisError::InvalidSubset(format!(
                "site window must be odd and positive, got {}",
                self.window_sites
            )));
        }
        if self.window_sites > n_sites {
            return Err(AnalysisError::InvalidSubset(format!(
                "window of {} sites exceeds the {n_sites}-site chain",
                self.window_sites
            )));
        }
        let center = (n_sites - 1) / 2;
        let half = (self.window_sites - 1) / 2;
        Ok((center - half, center + half))
    }

    /// Membership test for recorded times, with rounding slack.
    pub fn contains_time(&self, t: f64) -> bool {
        t > self.t_lo + TIME_EPS && t <= self.t_hi + TIME_EPS
    }
}

/// Arithmetic mean of R² over the subset, zeroed cells included.
pub fn mean_r2(grid: &R2Grid, subset: &SubsetSpec) -> Result<f64, AnalysisError> {
    let (site_lo, site_hi) = subset.site_bounds(grid.n_sites())?;
    let mut sum = 0.0;
    let mut count = 0usize;
    for site in site_lo..=site_hi {
        for (m, &t) in grid.times().iter().enumerate() {
            if subset.contains_time(t) {
                sum += grid.r2(site, m);
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(AnalysisError::InvalidSubset(format!(
            "no recorded times in ({}, {}]",
            subset.t_lo, subset.t_hi
        )));
    }
    Ok(sum / count as f64)
}

/// R̄² per sweep value of one control parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub parameter_name: String,
    pub parameter_values: Vec<f64>,
    pub r2_mean: Vec<f64>,
}

/// The sweep minimum and whether it sits strictly inside the sampled range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipReport {
    pub parameter: f64,
    pub r2_mean: f64,
    /// False when the argmin is an endpoint or fewer than 3 values exist.
    pub interior: bool,
}

/// Argmin of R̄² over the sampled values; ties break toward the smaller
/// parameter value.
pub fn locate_dip(sweep: &SweepResult) -> Result<DipReport, AnalysisError> {
    let n = sweep.parameter_values.len();
    if n == 0 || sweep.r2_mean.len() != n {
        return Err(AnalysisError::EmptySweep);
    }
    let mut min_idx = 0;
    for idx in 1..n {
        if sweep.r2_mean[idx] < sweep.r2_mean[min_idx] {
            min_idx = idx;
        }
    }
    Ok(DipReport {
        parameter: sweep.parameter_values[min_idx],
        r2_mean: sweep.r2_mean[min_idx],
        interior: n >= 3 && min_idx > 0 && min_idx < n - 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Axis;
    use crate::observables::GridMeta;
    use crate::quench::sample_inputs;

    fn meta() -> GridMeta {
        GridMeta {
            model: "test".into(),
            quench: "test".into(),
            engine: "test".into(),
        }
    }

    /// Grid whose every cell reads f(s_k) for the instance inputs.
    fn synthetic_grid(s_values: &[f64], n_sites: usize, n_times: usize, f: impl Fn(f64) -> f64) -> ObservableGrid {
        let times: Vec<f64> = (0..n_times).map(|m| m as f64 * 0.05).collect();
        let mut values = Vec::with_capacity(s_values.len() * n_sites * n_times);
        for &s in s_values {
            for _ in 0..n_sites * n_times {
                values.push(f(s));
            }
        }
        ObservableGrid::from_parts(s_values.len(), n_sites, times, Axis::X, meta(), values)
            .unwrap()
    }

    #[test]
    fn exact_linear_observable_inverts() {
        let s: Vec<f64> = (1..=9).map(|k| k as f64 / 10.0).collect();
        let obs: Vec<f64> = s.iter().map(|s| 2.0 * s + 3.0).collect();
        let w = train_readout(&obs, &s);
        assert!((w.w_o - 0.5).abs() < 1e-10);
        assert!((w.w_c + 1.5).abs() < 1e-10);
        for (&x, &target) in obs.iter().zip(&s) {
            assert!((w.predict(x) - target).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_observable_predicts_the_mean() {
        let s = [0.2, 0.4, 0.9, 0.1];
        let obs = [0.7; 4];
        let w = train_readout(&obs, &s);
        assert_eq!(w.w_o, 0.0);
        assert!((w.w_c - 0.4).abs() < 1e-15);
    }

    #[test]
    fn r_squared_conventions() {
        let s = [0.1, 0.4, 0.7, 0.9];
        assert!((r_squared(&s, &s).unwrap() - 1.0).abs() < 1e-14);
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        assert!((r_squared(&neg, &s).unwrap() - 1.0).abs() < 1e-14);
        let flat = [0.3; 4];
        assert_eq!(r_squared(&flat, &s).unwrap(), 0.0);
        assert_eq!(
            r_squared(&s, &flat).unwrap_err(),
            AnalysisError::ZeroTargetVariance
        );
        assert!(r_squared(&s, &s[..3]).is_err());
    }

    #[test]
    fn deviation_examples() {
        assert_eq!(average_abs_deviation(&[0.5, 0.5, 0.5, 0.5]), 0.0);
        assert!((average_abs_deviation(&[0.0, 1.0]) - 0.5).abs() < 1e-15);
        let dev = average_abs_deviation(&[0.1, 0.2, 0.4]);
        assert!((dev - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn identity_grid_scores_one_everywhere() {
        let batch = sample_inputs(11, 16, 16).unwrap();
        let grid = synthetic_grid(batch.values(), 3, 4, |s| s);
        let r2 = build_r2_grid(&grid, &batch, DEFAULT_DELTA_THRESHOLD).unwrap();
        assert_eq!(r2.masked_count(), 0);
        for site in 0..3 {
            for m in 0..4 {
                assert!((r2.r2(site, m) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_grid_is_fully_masked() {
        let batch = sample_inputs(11, 16, 16).unwrap();
        let grid = synthetic_grid(batch.values(), 3, 4, |_| 0.42);
        let r2 = build_r2_grid(&grid, &batch, DEFAULT_DELTA_THRESHOLD).unwrap();
        assert_eq!(r2.masked_count(), 12);
        assert!(r2.r2_values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn batch_grid_size_mismatch_rejected() {
        let batch = sample_inputs(11, 16, 16).unwrap();
        let grid = synthetic_grid(&batch.values()[..30], 3, 4, |s| s);
        assert!(matches!(
            build_r2_grid(&grid, &batch, 1e-5).unwrap_err(),
            AnalysisError::BatchMismatch { .. }
        ));
    }

    fn toy_r2_grid(r2_by_cell: Vec<f64>, n_sites: usize, times: Vec<f64>) -> R2Grid {
        let cells = r2_by_cell.len();
        R2Grid::from_parts(
            n_sites,
            times,
            1e-5,
            r2_by_cell,
            vec![1.0; cells],
            vec![false; cells],
        )
        .unwrap()
    }

    #[test]
    fn mean_r2_basics() {
        let times = vec![0.0, 0.05, 0.1];
        let grid = toy_r2_grid(vec![1.0; 9], 3, times.clone());
        let subset = SubsetSpec::centered(3, 0.0, 0.1);
        assert!((mean_r2(&grid, &subset).unwrap() - 1.0).abs() < 1e-15);

        // half ones, half zeros inside the window (t = 0 excluded)
        let mut cells = vec![0.0; 9];
        for site in 0..3 {
            cells[site * 3 + 1] = 1.0;
        }
        let grid = toy_r2_grid(cells, 3, times);
        assert!((mean_r2(&grid, &subset).unwrap() - 0.5).abs() < 1e-15);

        assert!(mean_r2(&grid, &SubsetSpec::centered(5, 0.0, 0.1)).is_err());
        assert!(mean_r2(&grid, &SubsetSpec::centered(2, 0.0, 0.1)).is_err());
        assert!(mean_r2(&grid, &SubsetSpec::centered(3, 0.2, 0.4)).is_err());
    }

    #[test]
    fn time_window_is_half_open() {
        let times = vec![0.0, 1.0, 2.0];
        let mut cells = vec![0.0; 3];
        cells[1] = 1.0; // only t = 1 scores
        let grid = toy_r2_grid(cells, 1, times);
        // (0, 1]: picks exactly t = 1
        let m = mean_r2(&grid, &SubsetSpec::centered(1, 0.0, 1.0)).unwrap();
        assert!((m - 1.0).abs() < 1e-15);
        // (1, 2]: picks exactly t = 2
        let m = mean_r2(&grid, &SubsetSpec::centered(1, 1.0, 2.0)).unwrap();
        assert!(m.abs() < 1e-15);
    }

    #[test]
    fn dip_location_rules() {
        let sweep = SweepResult {
            parameter_name: "g".into(),
            parameter_values: vec![0.5, 1.0, 1.5],
            r2_mean: vec![0.8, 0.3, 0.7],
        };
        let dip = locate_dip(&sweep).unwrap();
        assert_eq!((dip.parameter, dip.r2_mean, dip.interior), (1.0, 0.3, true));

        let monotone = SweepResult {
            parameter_name: "g".into(),
            parameter_values: vec![0.5, 1.0, 1.5],
            r2_mean: vec![0.9, 0.8, 0.7],
        };
        let dip = locate_dip(&monotone).unwrap();
        assert_eq!((dip.parameter, dip.interior), (1.5, false));

        let tied = SweepResult {
            parameter_name: "g".into(),
            parameter_values: vec![0.5, 1.0, 1.5],
            r2_mean: vec![0.9, 0.3, 0.3],
        };
        assert_eq!(locate_dip(&tied).unwrap().parameter, 1.0);

        let single = SweepResult {
            parameter_name: "g".into(),
            parameter_values: vec![1.0],
            r2_mean: vec![0.5],
        };
        assert!(!locate_dip(&single).unwrap().interior);
    }

    #[test]
    fn raising_threshold_only_grows_the_mask() {
        let batch = sample_inputs(3, 8, 8).unwrap();
        // spread of deviations: scale s by widely different gains per cell
        let times: Vec<f64> = (0..4).map(|m| m as f64 * 0.05).collect();
        let mut values = Vec::new();
        for &s in batch.values() {
            for site in 0..3usize {
                for m in 0..4usize {
                    let gain = 10f64.powi(-((site * 4 + m) as i32) - 1);
                    values.push((gain * s).min(1.0));
                }
            }
        }
        let grid = ObservableGrid::from_parts(16, 3, times, Axis::X, meta(), values).unwrap();
        let loose = build_r2_grid(&grid, &batch, 1e-6).unwrap();
        let tight = build_r2_grid(&grid, &batch, 1e-4).unwrap();
        assert!(loose.masked_count() < tight.masked_count());
        for (l, t) in loose.mask_values().iter().zip(tight.mask_values()) {
            assert!(!l || *t, "mask must be monotone in the threshold");
        }
    }
}
