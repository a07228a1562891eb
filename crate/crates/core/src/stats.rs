//! Summary statistics over speed fields.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{idw, GridSpec, IdwConfig, ScalarField, SpeedField};
use crate::network::Network;

pub const MIN_CORRELATION_CELLS: usize = 10;

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Pearson correlation. Fails with `ZeroVariance` when either input is
/// constant to within relative rounding.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    assert_eq!(a.len(), b.len(), "pearson inputs differ in length");
    if a.len() < 2 {
        return Err(Error::InsufficientCells { found: a.len(), required: 2 });
    }
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    let flat = |ss: f64, m: f64, n: usize| ss <= (1e-12 * m.abs().max(f64::MIN_POSITIVE)).powi(2) * n as f64;
    if flat(saa, ma, a.len()) {
        return Err(Error::ZeroVariance("first variable".into()));
    }
    if flat(sbb, mb, b.len()) {
        return Err(Error::ZeroVariance("second variable".into()));
    }
    Ok((sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0))
}

/// Average ranks (ties share the mean rank), 1-based.
pub fn ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut k = 0;
    while k < order.len() {
        let mut end = k;
        while end + 1 < order.len() && v[order[end + 1]] == v[order[k]] {
            end += 1;
        }
        let rank = (k + end) as f64 / 2.0 + 1.0;
        for &idx in &order[k..=end] {
            out[idx] = rank;
        }
        k = end + 1;
    }
    out
}

pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    pearson(&ranks(a), &ranks(b))
}

/// Linear-interpolated quantile of sorted data, `q ∈ [0, 1]`.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// IDW raster of per-bus PV fraction on `grid`.
pub fn rasterize_penetration(net: &Network, grid: &GridSpec) -> Result<ScalarField> {
    let points: Vec<_> = net.buses().iter().map(|b| (b.pos(), b.pv_fraction)).collect();
    idw(&points, grid, &IdwConfig::default())
}

/// Pearson r between rasterised local PV penetration and speed over cells
/// valid in both.
pub fn penetration_speed_correlation(speed: &SpeedField, net: &Network) -> Result<f64> {
    let pen = rasterize_penetration(net, &speed.grid)?;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for k in 0..speed.grid.len() {
        if speed.mask[k] && pen.mask[k] {
            a.push(pen.values[k]);
            b.push(speed.values[k]);
        }
    }
    if a.len() < MIN_CORRELATION_CELLS {
        return Err(Error::InsufficientCells { found: a.len(), required: MIN_CORRELATION_CELLS });
    }
    pearson(&a, &b)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub name: String,
    pub cells: Vec<bool>,
}

impl Region {
    pub fn all(name: &str, grid: &GridSpec) -> Self {
        Region { name: name.into(), cells: vec![true; grid.len()] }
    }

    /// Nodes inside the inclusive rectangle.
    pub fn rect(name: &str, grid: &GridSpec, x: (f64, f64), y: (f64, f64)) -> Self {
        let mut cells = vec![false; grid.len()];
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let p = grid.point(i, j);
                cells[grid.index(i, j)] = p.x >= x.0 && p.x <= x.1 && p.y >= y.0 && p.y <= y.1;
            }
        }
        Region { name: name.into(), cells }
    }

    /// Nodes at least `margin` cells away from every grid edge.
    pub fn interior(name: &str, grid: &GridSpec, margin: usize) -> Self {
        let mut cells = vec![false; grid.len()];
        for j in margin..grid.ny.saturating_sub(margin) {
            for i in margin..grid.nx.saturating_sub(margin) {
                cells[grid.index(i, j)] = true;
            }
        }
        Region { name: name.into(), cells }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionStats {
    pub name: String,
    pub cells: usize,
    pub mean: f64,
    pub median: f64,
    pub p5: f64,
    pub p95: f64,
}

pub fn region_stats(field: &ScalarField, region: &Region) -> Result<RegionStats> {
    if region.cells.len() != field.grid.len() {
        return Err(Error::InvalidParameter(format!("region '{}' does not match the grid", region.name)));
    }
    let mut vals: Vec<f64> = (0..field.grid.len())
        .filter(|&k| region.cells[k] && field.mask[k])
        .map(|k| field.values[k])
        .collect();
    if vals.is_empty() {
        return Err(Error::EmptyRegion(region.name.clone()));
    }
    vals.sort_by(f64::total_cmp);
    Ok(RegionStats {
        name: region.name.clone(),
        cells: vals.len(),
        mean: mean(&vals),
        median: quantile(&vals, 0.5),
        p5: quantile(&vals, 0.05),
        p95: quantile(&vals, 0.95),
    })
}

pub fn regional_speed_stats(speed: &SpeedField, regions: &[Region]) -> Result<Vec<RegionStats>> {
    regions.iter().map(|r| region_stats(speed, r)).collect()
}
