//! Figure-ready tabular artifacts. Floats print at 9 significant digits;
//! the binary grids next to them stay authoritative.

use std::path::Path;

use super::binfmt::write_atomic;
use super::HarnessError;
use crate::analysis::{DipReport, R2Grid, SweepResult};
use crate::model::site_offset;
use crate::observables::EntropySeries;

fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

/// Long-form (site_offset_from_center, time, r2, delta, masked) rows,
/// site-major, time within site.
pub fn heatmap_csv(grid: &R2Grid) -> String {
    let mut out = String::from("site_offset_from_center,time,r2,delta,masked\n");
    for site in 0..grid.n_sites() {
        let offset = site_offset(site, grid.n_sites());
        for (m, &t) in grid.times().iter().enumerate() {
            out.push_str(&format!(
                "{offset},{},{},{},{}\n",
                sig9(t),
                sig9(grid.r2(site, m)),
                sig9(grid.delta(site, m)),
                grid.masked(site, m)
            ));
        }
    }
    out
}

pub fn write_heatmap(path: &Path, grid: &R2Grid) -> Result<(), HarnessError> {
    write_atomic(path, heatmap_csv(grid).as_bytes())
}

/// Sweep-level R̄² table with the dip row flagged.
pub fn sweep_csv(sweep: &SweepResult, dip: Option<&DipReport>) -> String {
    let mut out = format!("{},r2_mean,dip\n", sweep.parameter_name);
    for (&value, &r2) in sweep.parameter_values.iter().zip(&sweep.r2_mean) {
        let is_dip = dip.map(|d| d.parameter == value).unwrap_or(false);
        out.push_str(&format!("{},{},{}\n", sig9(value), sig9(r2), is_dip));
    }
    out
}

pub fn write_sweep_table(
    path: &Path,
    sweep: &SweepResult,
    dip: Option<&DipReport>,
) -> Result<(), HarnessError> {
    write_atomic(path, sweep_csv(sweep, dip).as_bytes())
}

/// (time, entropy) table for the representative-instance monitor.
pub fn entropy_csv(series: &EntropySeries) -> String {
    let mut out = String::from("time,entropy_nats\n");
    for (&t, &s) in series.times.iter().zip(&series.values) {
        out.push_str(&format!("{},{}\n", sig9(t), sig9(s)));
    }
    out
}

pub fn write_entropy_table(path: &Path, series: &EntropySeries) -> Result<(), HarnessError> {
    write_atomic(path, entropy_csv(series).as_bytes())
}
