//! Sensor-grade measurement synthesis: nearest-sample decimation of the dense
//! trajectory plus seeded i.i.d. Gaussian noise.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dynamics::TrajectorySet;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::network::{BusId, Network};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorConfig {
    /// Samples per second.
    pub sample_rate: f64,
    /// Standard deviation of additive noise, Hz.
    pub noise_sigma: f64,
    /// Set from the run's root seed, never read from config files.
    #[serde(skip)]
    pub seed: u64,
    /// `None` means every bus.
    pub sensor_buses: Option<Vec<BusId>>,
}

impl Default for SensorConfig {
    fn default() -> Self {
        SensorConfig { sample_rate: 10.0, noise_sigma: 0.0002, seed: 0, sensor_buses: None }
    }
}

impl SensorConfig {
    pub fn noiseless(sample_rate: f64) -> Self {
        SensorConfig { sample_rate, noise_sigma: 0.0, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyTrace {
    pub bus: BusId,
    pub pos: Point,
    pub times: Vec<f64>,
    /// Measured frequency deviation, Hz.
    pub values: Vec<f64>,
}

impl FrequencyTrace {
    /// Linear interpolation of the trace at `t`.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        let (first, last) = match (self.times.first(), self.times.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(Error::TimeOutOfRange(t)),
        };
        if !(t >= first && t <= last) {
            return Err(Error::TimeOutOfRange(t));
        }
        let k = self.times.partition_point(|&s| s <= t);
        if k == 0 {
            return Ok(self.values[0]);
        }
        if k == self.times.len() || self.times[k - 1] == t {
            return Ok(self.values[k - 1]);
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (v0, v1) = (self.values[k - 1], self.values[k]);
        Ok(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
    }
}

pub fn sample_measurements(traj: &TrajectorySet, net: &Network, cfg: &SensorConfig) -> Result<Vec<FrequencyTrace>> {
    let sim_rate = 1.0 / traj.dt;
    if !(cfg.sample_rate.is_finite() && cfg.sample_rate > 0.0 && cfg.sample_rate <= sim_rate * (1.0 + 1e-9)) {
        return Err(Error::InvalidParameter(format!(
            "sample_rate {} must be positive and at most the simulation rate {sim_rate}",
            cfg.sample_rate
        )));
    }
    if !(cfg.noise_sigma.is_finite() && cfg.noise_sigma >= 0.0) {
        return Err(Error::InvalidParameter(format!("noise_sigma {} must be non-negative", cfg.noise_sigma)));
    }

    let buses: Vec<BusId> = match &cfg.sensor_buses {
        Some(list) => list.clone(),
        None => traj.bus_ids.clone(),
    };
    let rows: Vec<usize> = buses
        .iter()
        .map(|id| traj.bus_ids.iter().position(|b| b == id).ok_or(Error::UnknownSensorBus(*id)))
        .collect::<Result<_>>()?;

    let t_end = traj.times.last().copied().unwrap_or(0.0);
    let count = (t_end * cfg.sample_rate + 1e-9).floor() as usize + 1;
    let times: Vec<f64> = (0..count).map(|k| k as f64 / cfg.sample_rate).collect();
    let picks: Vec<usize> =
        times.iter().map(|t| ((t / traj.dt).round() as usize).min(traj.len() - 1)).collect();

    let noise = (cfg.noise_sigma > 0.0).then(|| Normal::new(0.0, cfg.noise_sigma).expect("sigma validated"));
    let mut rng = rng::seeded(cfg.seed, rng::Stream::SensorNoise);

    buses
        .iter()
        .zip(rows)
        .map(|(&bus, row)| {
            let pos = net.bus(bus).ok_or(Error::UnknownSensorBus(bus))?.pos();
            let series = &traj.freq_dev[row];
            let values = picks
                .iter()
                .map(|&k| match &noise {
                    Some(dist) => series[k] + dist.sample(&mut rng),
                    None => series[k],
                })
                .collect();
            Ok(FrequencyTrace { bus, pos, times: times.clone(), values })
        })
        .collect()
}
