//! Threshold arrival detection (TDOA) on frequency traces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::network::BusId;
use crate::sensor::FrequencyTrace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdMode {
    /// Fixed deviation in Hz.
    Absolute,
    /// Fraction of the trace's post-event peak deviation.
    Relative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub mode: ThresholdMode,
    /// Hz, used in absolute mode.
    pub threshold: f64,
    /// Used in relative mode.
    pub fraction: f64,
    /// Seconds before the event used for the baseline mean.
    pub baseline_window: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig { mode: ThresholdMode::Absolute, threshold: 0.003, fraction: 0.2, baseline_window: 2.0 }
    }
}

impl DetectorConfig {
    pub fn absolute(threshold: f64) -> Self {
        DetectorConfig { threshold, ..Default::default() }
    }

    pub fn relative(fraction: f64) -> Self {
        DetectorConfig { mode: ThresholdMode::Relative, fraction, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(Error::InvalidParameter(format!("threshold {} must be positive", self.threshold)));
        }
        if !(self.fraction > 0.0 && self.fraction < 1.0) {
            return Err(Error::InvalidParameter(format!("fraction {} must lie in (0, 1)", self.fraction)));
        }
        if !(self.baseline_window.is_finite() && self.baseline_window > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "baseline_window {} must be positive",
                self.baseline_window
            )));
        }
        Ok(())
    }
}

/// Time from `event_time` until the trace first departs from its pre-event
/// mean by at least the threshold, refined by linear interpolation between
/// the bracketing samples.
pub fn detect_tdoa(trace: &FrequencyTrace, event_time: f64, cfg: &DetectorConfig) -> Result<f64> {
    cfg.validate()?;
    let times = &trace.times;
    let values = &trace.values;
    let half_step = if times.len() > 1 { 0.5 * (times[1] - times[0]) } else { 0.0 };
    let window_start = event_time - cfg.baseline_window;
    if times.is_empty() || times[0] > window_start + half_step {
        return Err(Error::InsufficientBaseline(trace.bus));
    }
    let (sum, count) = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= window_start - half_step && **t <= event_time)
        .fold((0.0, 0usize), |(s, c), (_, v)| (s + v, c + 1));
    if count == 0 {
        return Err(Error::InsufficientBaseline(trace.bus));
    }
    let baseline = sum / count as f64;

    let first_post = times.partition_point(|&t| t <= event_time);
    let deviation = |k: usize| (values[k] - baseline).abs();
    let threshold = match cfg.mode {
        ThresholdMode::Absolute => cfg.threshold,
        ThresholdMode::Relative => {
            let peak = (first_post..times.len()).map(deviation).fold(0.0, f64::max);
            if peak == 0.0 {
                return Err(Error::NoCrossing(trace.bus));
            }
            cfg.fraction * peak
        }
    };

    let k = (first_post..times.len())
        .find(|&k| deviation(k) >= threshold)
        .ok_or(Error::NoCrossing(trace.bus))?;
    let mut t_cross = times[k];
    if k > 0 {
        // Only the sample at or before the event can already exceed the
        // threshold; the crossing is then pinned to it.
        let (d0, d1) = (deviation(k - 1), deviation(k));
        let frac = if d0 >= threshold { 0.0 } else { (threshold - d0) / (d1 - d0) };
        t_cross = times[k - 1] + frac * (times[k] - times[k - 1]);
    }
    Ok((t_cross - event_time).max(0.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TdoaEntry {
    pub bus: BusId,
    pub pos: Point,
    /// Seconds.
    pub tdoa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Exclusion {
    pub bus: BusId,
    pub code: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TdoaSamples {
    pub entries: Vec<TdoaEntry>,
    pub event_time: f64,
    pub event_pos: Option<Point>,
    pub exclusions: Vec<Exclusion>,
}

impl TdoaSamples {
    pub fn new(entries: Vec<TdoaEntry>, event_time: f64, event_pos: Option<Point>) -> Self {
        TdoaSamples { entries, event_time, event_pos, exclusions: Vec::new() }
    }

    pub fn points(&self) -> Vec<(Point, f64)> {
        self.entries.iter().map(|e| (e.pos, e.tdoa)).collect()
    }

    /// Entry with the smallest TDOA (first one on ties).
    pub fn earliest(&self) -> Option<&TdoaEntry> {
        self.entries.iter().reduce(|a, b| if b.tdoa < a.tdoa { b } else { a })
    }
}

pub const MIN_ARRIVALS: usize = 3;

/// Runs detection on every trace. Failed detections and repeated positions
/// are recorded as exclusions rather than aborting.
pub fn build_tdoa_samples(
    traces: &[FrequencyTrace],
    event_time: f64,
    event_pos: Option<Point>,
    cfg: &DetectorConfig,
) -> Result<TdoaSamples> {
    cfg.validate()?;
    let mut samples = TdoaSamples::new(Vec::new(), event_time, event_pos);
    for trace in traces {
        match detect_tdoa(trace, event_time, cfg) {
            Ok(tdoa) => {
                if samples.entries.iter().any(|e| e.pos == trace.pos) {
                    samples.exclusions.push(Exclusion {
                        bus: trace.bus,
                        code: "DUPLICATE_POSITION".into(),
                        reason: format!("position ({}, {}) already sampled", trace.pos.x, trace.pos.y),
                    });
                } else {
                    samples.entries.push(TdoaEntry { bus: trace.bus, pos: trace.pos, tdoa });
                }
            }
            Err(e @ (Error::NoCrossing(_) | Error::InsufficientBaseline(_))) => {
                samples.exclusions.push(Exclusion { bus: trace.bus, code: e.code().into(), reason: e.to_string() })
            }
            Err(e) => return Err(e),
        }
    }
    if samples.entries.len() < MIN_ARRIVALS {
        return Err(Error::TooFewArrivals { found: samples.entries.len(), required: MIN_ARRIVALS });
    }
    Ok(samples)
}
