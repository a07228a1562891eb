//! Regular rasters: inverse-distance-weighted arrival maps and the
//! propagation-speed field obtained from their gradient.

use std::ops::Deref;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::detect::TdoaSamples;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Node-centred raster: node `(i, j)` sits at
/// `(x_min + i·dx, y_min + j·dy)` with `dx = (x_max − x_min)/(nx − 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    #[serde(default = "default_cells")]
    pub nx: usize,
    #[serde(default = "default_cells")]
    pub ny: usize,
}

fn default_cells() -> usize {
    100
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64, nx: usize, ny: usize) -> Result<Self> {
        let g = GridSpec { x_min, x_max, y_min, y_max, nx, ny };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max].iter().all(|v| v.is_finite());
        if !finite || self.x_max <= self.x_min || self.y_max <= self.y_min {
            return Err(Error::InvalidParameter(format!(
                "grid bounds [{}, {}] x [{}, {}] are empty",
                self.x_min, self.x_max, self.y_min, self.y_max
            )));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidParameter(format!("grid needs nx, ny >= 2, got {}x{}", self.nx, self.ny)));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.y_max - self.y_min) / (self.ny - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i == self.nx - 1 {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx()
        }
    }

    pub fn y(&self, j: usize) -> f64 {
        if j == self.ny - 1 {
            self.y_max
        } else {
            self.y_min + j as f64 * self.dy()
        }
    }

    pub fn point(&self, i: usize, j: usize) -> Point {
        Point::new(self.x(i), self.y(j))
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major index; row `j` runs along x.
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Nearest node to `p`, clamped to the grid.
    pub fn nearest(&self, p: Point) -> (usize, usize) {
        let clamp = |v: f64, n: usize| (v.round().max(0.0) as usize).min(n - 1);
        (
            clamp((p.x - self.x_min) / self.dx(), self.nx),
            clamp((p.y - self.y_min) / self.dy(), self.ny),
        )
    }
}

/// Values on a [`GridSpec`]; masked cells hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

impl ScalarField {
    pub fn from_fn(grid: GridSpec, f: impl Fn(Point) -> Option<f64>) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        let mut mask = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                match f(grid.point(i, j)) {
                    Some(v) => {
                        values.push(v);
                        mask.push(true);
                    }
                    None => {
                        values.push(f64::NAN);
                        mask.push(false);
                    }
                }
            }
        }
        ScalarField { grid, values, mask }
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let k = self.grid.index(i, j);
        self.mask[k].then(|| self.values[k])
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }

    pub fn valid_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().zip(&self.mask).filter(|(_, m)| **m).map(|(v, _)| *v)
    }
}

/// Propagation speed in distance units per second.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeedField(pub ScalarField);

impl Deref for SpeedField {
    type Target = ScalarField;
    fn deref(&self) -> &ScalarField {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdwConfig {
    pub power: f64,
    /// Only samples within this distance contribute; cells with none are masked.
    pub max_radius: Option<f64>,
}

impl Default for IdwConfig {
    fn default() -> Self {
        IdwConfig { power: 2.0, max_radius: None }
    }
}

const COINCIDENT: f64 = 1e-9;

/// Inverse-distance weighting of scattered `(position, value)` pairs.
pub fn idw(points: &[(Point, f64)], grid: &GridSpec, cfg: &IdwConfig) -> Result<ScalarField> {
    grid.validate()?;
    if points.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !(cfg.power.is_finite() && cfg.power > 0.0) {
        return Err(Error::InvalidParameter(format!("IDW power {} must be positive", cfg.power)));
    }
    if let Some(r) = cfg.max_radius {
        if r.is_nan() || r <= 0.0 {
            return Err(Error::InvalidParameter(format!("max_radius {r} must be positive")));
        }
    }

    let cell = |p: Point| -> Option<f64> {
        let mut num = 0.0;
        let mut den = 0.0;
        for &(q, v) in points {
            let d = p.distance(q);
            if d < COINCIDENT {
                return Some(v);
            }
            if cfg.max_radius.is_some_and(|r| d > r) {
                continue;
            }
            let w = d.powf(-cfg.power);
            num += w * v;
            den += w;
        }
        (den > 0.0).then(|| num / den)
    };

    let rows: Vec<Vec<Option<f64>>> =
        (0..grid.ny).into_par_iter().map(|j| (0..grid.nx).map(|i| cell(grid.point(i, j))).collect()).collect();
    let mut values = Vec::with_capacity(grid.len());
    let mut mask = Vec::with_capacity(grid.len());
    for v in rows.into_iter().flatten() {
        values.push(v.unwrap_or(f64::NAN));
        mask.push(v.is_some());
    }
    Ok(ScalarField { grid: *grid, values, mask })
}

pub fn interpolate_field(samples: &TdoaSamples, grid: &GridSpec, cfg: &IdwConfig) -> Result<ScalarField> {
    idw(&samples.points(), grid, cfg)
}

pub const DEFAULT_MIN_GRAD: f64 = 1e-6;

/// Derivative along one axis at `k` given neighbour lookups; central where
/// both neighbours are valid, one-sided otherwise.
fn axis_derivative(center: f64, prev: Option<f64>, next: Option<f64>, step: f64) -> Option<f64> {
    match (prev, next) {
        (Some(a), Some(b)) => Some((b - a) / (2.0 * step)),
        (None, Some(b)) => Some((b - center) / step),
        (Some(a), None) => Some((center - a) / step),
        (None, None) => None,
    }
}

/// Speed as the reciprocal of the arrival-time gradient magnitude. Cells with
/// a gradient below `min_grad` (s per distance unit) or without a usable
/// neighbour on either axis are masked.
pub fn speed_field(tdoa: &ScalarField, min_grad: f64) -> Result<SpeedField> {
    if !(min_grad.is_finite() && min_grad >= 0.0) {
        return Err(Error::InvalidParameter(format!("min_grad {min_grad} must be non-negative")));
    }
    let g = tdoa.grid;
    let (dx, dy) = (g.dx(), g.dy());
    let out = ScalarField::from_fn(g, |_| None);
    let mut values = out.values;
    let mut mask = out.mask;
    for j in 0..g.ny {
        for i in 0..g.nx {
            let Some(center) = tdoa.get(i, j) else { continue };
            let gx = axis_derivative(
                center,
                i.checked_sub(1).and_then(|p| tdoa.get(p, j)),
                (i + 1 < g.nx).then(|| tdoa.get(i + 1, j)).flatten(),
                dx,
            );
            let gy = axis_derivative(
                center,
                j.checked_sub(1).and_then(|p| tdoa.get(i, p)),
                (j + 1 < g.ny).then(|| tdoa.get(i, j + 1)).flatten(),
                dy,
            );
            let (Some(gx), Some(gy)) = (gx, gy) else { continue };
            let norm = gx.hypot(gy);
            if norm < min_grad || norm == 0.0 {
                continue;
            }
            let k = g.index(i, j);
            values[k] = 1.0 / norm;
            mask[k] = true;
        }
    }
    if !mask.iter().any(|m| *m) {
        return Err(Error::DegenerateField("no cell has a usable arrival-time gradient".into()));
    }
    Ok(SpeedField(ScalarField { grid: g, values, mask }))
}
