//! Run configuration: one JSON document plus command-line overrides.
//!
//! Overrides are `(dotted.key, value)` pairs applied to the parsed document
//! before it is typed, so every config key can be overridden and flags win.
//! Values parse as JSON when possible and fall back to plain strings.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::detect::DetectorConfig;
use crate::dynamics::{Disturbance, SimConfig};
use crate::error::{Error, Result};
use crate::field::{GridSpec, IdwConfig, DEFAULT_MIN_GRAD};
use crate::sensor::SensorConfig;

/// Keys holding file-system paths; relative values in a config file are
/// resolved against the file's directory.
pub const PATH_KEYS: [&str; 5] = ["network", "out", "traces", "tdoa", "scenarios"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    pub name: String,
    pub x: [f64; 2],
    pub y: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub network: Option<PathBuf>,
    #[serde(default)]
    pub disturbance: Option<Disturbance>,
    #[serde(default)]
    pub sim: Option<SimConfig>,
    #[serde(default)]
    pub sensor: SensorConfig,
    #[serde(default)]
    pub detector: DetectorConfig,
    /// Defaults to the bounding box of the sensor positions at 100×100.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub idw: IdwConfig,
    #[serde(default = "default_min_grad")]
    pub min_grad: f64,
    #[serde(default)]
    pub regions: Vec<RegionSpec>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Trace directory for `analyze` and `replay`; defaults to `out`.
    #[serde(default)]
    pub traces: Option<PathBuf>,
    /// TDOA table for `locate`; defaults to `out/tdoa.csv`.
    #[serde(default)]
    pub tdoa: Option<PathBuf>,
    #[serde(default)]
    pub scenarios: Option<PathBuf>,
    /// Replay frame times, seconds.
    #[serde(default)]
    pub frames: Vec<f64>,
    #[serde(default = "default_stride")]
    pub trajectory_stride: usize,
}

fn default_min_grad() -> f64 {
    DEFAULT_MIN_GRAD
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

fn default_stride() -> usize {
    1
}

impl RunConfig {
    /// Reads `path` (if any), applies `overrides` in order and types the result.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut doc = match path {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                let mut v: Value =
                    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {}", p.display(), e)))?;
                let base = p.parent().unwrap_or(Path::new(""));
                resolve_paths(&mut v, base);
                v
            }
            None => Value::Object(Map::new()),
        };
        for (key, raw) in overrides {
            set_dotted(&mut doc, key, parse_override(raw))?;
        }
        Self::from_value(doc)
    }

    pub fn from_value(doc: Value) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_value(doc).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.detector.validate()?;
        if let Some(g) = &self.grid {
            g.validate()?;
        }
        if !(self.min_grad.is_finite() && self.min_grad > 0.0) {
            return Err(Error::InvalidParameter(format!("min_grad {} must be positive", self.min_grad)));
        }
        if self.trajectory_stride == 0 {
            return Err(Error::InvalidParameter("trajectory_stride must be at least 1".into()));
        }
        for r in &self.regions {
            if !(r.x[0] <= r.x[1] && r.y[0] <= r.y[1]) {
                return Err(Error::InvalidParameter(format!("region '{}' has inverted bounds", r.name)));
            }
        }
        Ok(())
    }

    pub fn network_path(&self) -> Result<&Path> {
        self.network.as_deref().ok_or_else(|| missing("network"))
    }

    pub fn disturbance(&self) -> Result<Disturbance> {
        self.disturbance.ok_or_else(|| missing("disturbance"))
    }

    pub fn sim(&self) -> Result<SimConfig> {
        self.sim.ok_or_else(|| missing("sim"))
    }

    pub fn traces_dir(&self) -> PathBuf {
        self.traces.clone().unwrap_or_else(|| self.out.clone())
    }

    pub fn tdoa_path(&self) -> PathBuf {
        self.tdoa.clone().unwrap_or_else(|| self.out.join("tdoa.csv"))
    }

    /// Sensor settings with the noise seed taken from the root seed.
    pub fn sensor_config(&self) -> SensorConfig {
        SensorConfig { seed: self.seed, ..self.sensor.clone() }
    }

    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("config serializes")
    }
}

fn missing(key: &str) -> Error {
    Error::Config(format!("missing key '{key}'"))
}

fn resolve_paths(doc: &mut Value, base: &Path) {
    let Some(map) = doc.as_object_mut() else { return };
    for key in PATH_KEYS {
        if let Some(Value::String(s)) = map.get_mut(key) {
            let p = Path::new(s.as_str());
            if p.is_relative() {
                *s = base.join(p).to_string_lossy().into_owned();
            }
        }
    }
}

pub fn parse_override(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Sets `a.b.c` inside `doc`, creating intermediate objects.
pub fn set_dotted(doc: &mut Value, key: &str, value: Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad override key '{key}'")));
    }
    let mut node = doc;
    for part in &parts[..parts.len() - 1] {
        let map = node.as_object_mut().ok_or_else(|| Error::Config(format!("'{key}' crosses a non-object value")))?;
        node = map.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
        if node.is_null() {
            *node = Value::Object(Map::new());
        }
    }
    let map = node.as_object_mut().ok_or_else(|| Error::Config(format!("'{key}' crosses a non-object value")))?;
    map.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
