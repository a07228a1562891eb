//! Disturbance localisation by exhaustive grid search.
//!
//! For each candidate node the model `tdoa_k ≈ s·‖pos − pos_k‖` is fitted with
//! a closed-form least-squares slowness `s ≥ 0`; the node with the smallest
//! residual wins, ties going to the lowest `(row, column)`.

use serde::Serialize;

use crate::detect::{TdoaSamples, MIN_ARRIVALS};
use crate::error::{Error, Result};
use crate::field::GridSpec;
use crate::geometry::{collinear, Point};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocateResult {
    pub pos: Point,
    pub row: usize,
    pub col: usize,
    /// Sum of squared TDOA misfits, s².
    pub residual: f64,
    /// Best-fit propagation speed (infinite when the fitted slowness is 0).
    pub v_hat: f64,
    /// Every sensor lies on one line; the solution is mirror-ambiguous.
    pub collinear: bool,
}

fn fit(candidate: Point, data: &[(Point, f64)], dist: &mut [f64]) -> (f64, f64) {
    let mut td = 0.0;
    let mut dd = 0.0;
    for (k, &(q, t)) in data.iter().enumerate() {
        let d = candidate.distance(q);
        dist[k] = d;
        td += t * d;
        dd += d * d;
    }
    let slowness = if dd > 0.0 { (td / dd).max(0.0) } else { 0.0 };
    let residual = data.iter().zip(dist.iter()).map(|(&(_, t), &d)| (t - slowness * d).powi(2)).sum();
    (residual, slowness)
}

pub fn locate_event(samples: &TdoaSamples, grid: &GridSpec) -> Result<LocateResult> {
    grid.validate()?;
    let data = samples.points();
    if data.len() < MIN_ARRIVALS {
        return Err(Error::TooFewArrivals { found: data.len(), required: MIN_ARRIVALS });
    }
    let is_collinear = collinear(&data.iter().map(|p| p.0).collect::<Vec<_>>());

    let mut scratch = vec![0.0; data.len()];
    let mut best: Option<LocateResult> = None;
    for row in 0..grid.ny {
        for col in 0..grid.nx {
            let pos = grid.point(col, row);
            let (residual, slowness) = fit(pos, &data, &mut scratch);
            if best.as_ref().is_none_or(|b| residual < b.residual) {
                best = Some(LocateResult {
                    pos,
                    row,
                    col,
                    residual,
                    v_hat: 1.0 / slowness,
                    collinear: is_collinear,
                });
            }
        }
    }
    Ok(best.expect("grid has at least four nodes"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::TdoaEntry;

    fn exact(source: Point, sensors: &[Point], v: f64) -> TdoaSamples {
        let entries = sensors
            .iter()
            .enumerate()
            .map(|(k, &p)| TdoaEntry { bus: k as u32 + 1, pos: p, tdoa: source.distance(p) / v })
            .collect();
        TdoaSamples::new(entries, 0.0, None)
    }

    #[test]
    fn recovers_grid_node_exactly() {
        let grid = GridSpec::new(0.0, 1000.0, 0.0, 800.0, 51, 41).unwrap();
        let sensors = [
            Point::new(10.0, 20.0),
            Point::new(900.0, 50.0),
            Point::new(480.0, 760.0),
            Point::new(120.0, 600.0),
            Point::new(700.0, 400.0),
        ];
        let source = grid.point(17, 29);
        let r = locate_event(&exact(source, &sensors, 1500.0), &grid).unwrap();
        assert_eq!((r.col, r.row), (17, 29));
        assert!(r.residual <= 1e-12);
        approx::assert_relative_eq!(r.v_hat, 1500.0, max_relative = 1e-9);
        assert!(!r.collinear);
    }

    #[test]
    fn collinear_sensors_are_flagged() {
        let grid = GridSpec::new(0.0, 100.0, 0.0, 100.0, 11, 11).unwrap();
        let sensors: Vec<Point> = (0..5).map(|k| Point::new(20.0 * k as f64, 0.0)).collect();
        let r = locate_event(&exact(Point::new(40.0, 60.0), &sensors, 10.0), &grid).unwrap();
        assert!(r.collinear);
        assert_eq!(r.col, 4);
    }

    #[test]
    fn needs_three_samples() {
        let grid = GridSpec::new(0.0, 1.0, 0.0, 1.0, 3, 3).unwrap();
        let s = exact(Point::new(0.0, 0.0), &[Point::new(1.0, 0.0), Point::new(0.0, 1.0)], 1.0);
        assert!(matches!(locate_event(&s, &grid), Err(Error::TooFewArrivals { found: 2, .. })));
    }
}
