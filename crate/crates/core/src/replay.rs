//! Event replay: snapshots of the interpolated frequency-deviation map.

use crate::error::{Error, Result};
use crate::field::{idw, GridSpec, IdwConfig, ScalarField};
use crate::geometry::Point;
use crate::sensor::FrequencyTrace;

/// One IDW frame per requested time. Trace values are linearly interpolated
/// in time; every frame time must lie inside every trace's coverage.
pub fn replay_frames(
    traces: &[FrequencyTrace],
    grid: &GridSpec,
    frame_times: &[f64],
    cfg: &IdwConfig,
) -> Result<Vec<ScalarField>> {
    grid.validate()?;
    if traces.is_empty() {
        return Err(Error::EmptySamples);
    }
    frame_times
        .iter()
        .map(|&t| {
            let points: Vec<(Point, f64)> =
                traces.iter().map(|tr| tr.value_at(t).map(|v| (tr.pos, v))).collect::<Result<_>>()?;
            idw(&points, grid, cfg)
        })
        .collect()
}

/// Cells whose absolute value reaches `threshold`.
pub fn active_cells(frame: &ScalarField, threshold: f64) -> Vec<bool> {
    frame.values.iter().zip(&frame.mask).map(|(v, m)| *m && v.abs() >= threshold).collect()
}
