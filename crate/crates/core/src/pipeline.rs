//! End-to-end runs behind the CLI subcommands. Each `run_*` writes its files
//! under `cfg.out` and a `manifest_<command>.json` listing them.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{RunConfig, PATH_KEYS};
use crate::detect::{build_tdoa_samples, TdoaSamples};
use crate::dynamics::{simulate, Disturbance, TrajectorySet};
use crate::error::{Error, Result};
use crate::export;
use crate::field::{interpolate_field, speed_field, GridSpec, ScalarField, SpeedField};
use crate::geometry::Point;
use crate::locate::{locate_event, LocateResult};
use crate::network::{load_network, Network};
use crate::replay::replay_frames;
use crate::scenario::{apply_pv_scenario, load_scenarios, ScenarioSpec};
use crate::sensor::{sample_measurements, FrequencyTrace};
use crate::stats::{penetration_speed_correlation, rasterize_penetration, region_stats, Region};

pub const THREADS_ENV: &str = "EMWAVE_THREADS";
const DEFAULT_CELLS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub fn file_name(&self) -> String {
        format!("manifest_{}.json", self.command)
    }
}

fn hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Content digest of a file, or of every file in a directory by sorted name.
fn digest_path(path: &Path) -> Result<String> {
    if path.is_dir() {
        let mut names: Vec<PathBuf> = fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        names.sort();
        let mut h = Sha256::new();
        for p in names {
            h.update(p.file_name().unwrap_or_default().as_encoded_bytes());
            h.update(fs::read(&p).map_err(|e| Error::io(&p, e))?);
        }
        Ok(format!("{:x}", h.finalize()))
    } else {
        Ok(hex(&fs::read(path).map_err(|e| Error::io(path, e))?))
    }
}

/// Hash of every semantic config field. The output directory is left out and
/// input paths are replaced by digests of their contents.
pub fn config_hash(cfg: &RunConfig) -> Result<String> {
    let mut v = cfg.to_value();
    let map = v.as_object_mut().expect("config is an object");
    map.remove("out");
    for key in PATH_KEYS {
        if let Some(Value::String(s)) = map.get(key) {
            let p = Path::new(s);
            if p.exists() {
                let d = digest_path(p)?;
                map.insert(key.to_string(), Value::String(format!("sha256:{d}")));
            }
        }
    }
    Ok(hex(serde_json::to_string(&v).expect("value serializes").as_bytes()))
}

struct Outputs {
    dir: PathBuf,
    names: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Outputs { dir: dir.to_path_buf(), names: Vec::new() })
    }

    fn path(&mut self, name: impl Into<String>) -> PathBuf {
        let name = name.into();
        let p = self.dir.join(&name);
        self.names.push(name);
        p
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<()> {
        let p = self.path(name);
        let mut text = serde_json::to_string_pretty(value).expect("value serializes");
        text.push('\n');
        fs::write(&p, text).map_err(|e| Error::io(&p, e))
    }

    fn finish(self, command: &str, cfg: &RunConfig) -> Result<Manifest> {
        let files = self
            .names
            .iter()
            .map(|n| {
                let p = self.dir.join(n);
                Ok(FileEntry { name: n.clone(), sha256: hex(&fs::read(&p).map_err(|e| Error::io(&p, e))?) })
            })
            .collect::<Result<_>>()?;
        let m = Manifest { command: command.into(), config_hash: config_hash(cfg)?, seed: cfg.seed, files };
        let p = self.dir.join(m.file_name());
        let mut text = serde_json::to_string_pretty(&m).expect("manifest serializes");
        text.push('\n');
        fs::write(&p, text).map_err(|e| Error::io(&p, e))?;
        Ok(m)
    }
}

/// Bounding box of `points` on a 100×100 raster. A degenerate axis is
/// padded by half the other extent (or 1).
pub fn default_grid(points: &[Point]) -> Result<GridSpec> {
    if points.is_empty() {
        return Err(Error::EmptySamples);
    }
    let fold = |f: fn(&Point) -> f64| {
        points.iter().map(f).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (mut x0, mut x1) = fold(|p| p.x);
    let (mut y0, mut y1) = fold(|p| p.y);
    let pad = 0.5 * (x1 - x0).max(y1 - y0).max(2.0);
    if x1 - x0 <= 0.0 {
        (x0, x1) = (x0 - pad, x1 + pad);
    }
    if y1 - y0 <= 0.0 {
        (y0, y1) = (y0 - pad, y1 + pad);
    }
    GridSpec::new(x0, x1, y0, y1, DEFAULT_CELLS, DEFAULT_CELLS)
}

fn grid_for(cfg: &RunConfig, points: &[Point]) -> Result<GridSpec> {
    match cfg.grid {
        Some(g) => Ok(g),
        None => default_grid(points),
    }
}

fn regions_for(cfg: &RunConfig, grid: &GridSpec) -> Vec<Region> {
    let mut out = vec![Region::all("all", grid), Region::interior("interior", grid, 1)];
    out.extend(cfg.regions.iter().map(|r| Region::rect(&r.name, grid, (r.x[0], r.x[1]), (r.y[0], r.y[1]))));
    out
}

fn check_disturbance(net: &Network, dist: &Disturbance) -> Result<Point> {
    net.bus(dist.bus)
        .map(|b| b.pos())
        .ok_or_else(|| Error::InvalidDisturbance(format!("unknown bus {}", dist.bus)))
}

/// Simulation plus sensor synthesis under `cfg`'s seed.
pub fn measure(net: &Network, cfg: &RunConfig) -> Result<(TrajectorySet, Vec<FrequencyTrace>)> {
    let dist = cfg.disturbance()?;
    let traj = simulate(net, &dist, &cfg.sim()?)?;
    let traces = sample_measurements(&traj, net, &cfg.sensor_config())?;
    Ok((traj, traces))
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub samples: TdoaSamples,
    pub tdoa_field: ScalarField,
    pub speed: SpeedField,
    pub penetration: ScalarField,
    pub stats: Value,
}

impl Analysis {
    /// Median speed of a named region from the stats document.
    pub fn median(&self, region: &str) -> Option<f64> {
        self.stats["regions"].as_array()?.iter().find(|r| r["name"] == region)?["median"].as_f64()
    }

    pub fn correlation(&self) -> Option<f64> {
        self.stats["correlation"]["r"].as_f64()
    }
}

/// Detection, interpolation, gradient and statistics for one trace set.
pub fn analyze_traces(traces: &[FrequencyTrace], net: &Network, cfg: &RunConfig) -> Result<Analysis> {
    let dist = cfg.disturbance()?;
    let event_pos = check_disturbance(net, &dist)?;
    let samples = build_tdoa_samples(traces, dist.t_event, Some(event_pos), &cfg.detector)?;
    let positions: Vec<Point> = samples.entries.iter().map(|e| e.pos).collect();
    let grid = grid_for(cfg, &positions)?;
    let tdoa_field = interpolate_field(&samples, &grid, &cfg.idw)?;
    let speed = speed_field(&tdoa_field, cfg.min_grad)?;
    let penetration = rasterize_penetration(net, &grid)?;

    let regions: Vec<Value> = regions_for(cfg, &grid)
        .iter()
        .map(|r| match region_stats(&speed, r) {
            Ok(s) => serde_json::to_value(s).expect("stats serialize"),
            Err(e) => json!({ "name": r.name, "error": e.code(), "message": e.to_string() }),
        })
        .collect();
    let correlation = match penetration_speed_correlation(&speed, net) {
        Ok(r) => json!({ "r": r }),
        Err(e) => json!({ "r": null, "error": e.code(), "message": e.to_string() }),
    };
    let earliest = samples.earliest().map(|e| e.bus);
    let stats = json!({
        "event": { "bus": dist.bus, "t_event": dist.t_event, "x": event_pos.x, "y": event_pos.y },
        "arrivals": samples.entries.len(),
        "earliest_bus": earliest,
        "exclusions": samples.exclusions,
        "speed_cells": speed.valid_count(),
        "regions": regions,
        "correlation": correlation,
    });
    Ok(Analysis { samples, tdoa_field, speed, penetration, stats })
}

fn write_analysis(out: &mut Outputs, prefix: &str, a: &Analysis) -> Result<()> {
    export::write_tdoa_csv(&out.path(format!("{prefix}tdoa.csv")), &a.samples)?;
    export::write_field_csv(&out.path(format!("{prefix}tdoa_field.csv")), &a.tdoa_field)?;
    export::write_field_csv(&out.path(format!("{prefix}speed_field.csv")), &a.speed)?;
    export::write_field_csv(&out.path(format!("{prefix}penetration_field.csv")), &a.penetration)?;
    out.json(&format!("{prefix}stats.json"), &a.stats)
}

pub fn run_simulate(cfg: &RunConfig) -> Result<Manifest> {
    let net = load_network(cfg.network_path()?)?;
    let (traj, traces) = measure(&net, cfg)?;
    let mut out = Outputs::new(&cfg.out)?;
    for tr in &traces {
        export::write_trace_csv(&out.path(export::trace_file_name(tr.bus)), tr)?;
    }
    export::write_trajectory_csv(&out.path("trajectory.csv"), &traj, cfg.trajectory_stride)?;
    out.finish("simulate", cfg)
}

pub fn run_analyze(cfg: &RunConfig) -> Result<(Manifest, Analysis)> {
    let net = load_network(cfg.network_path()?)?;
    let traces = export::read_trace_dir(&cfg.traces_dir(), &net)?;
    let analysis = analyze_traces(&traces, &net, cfg)?;
    let mut out = Outputs::new(&cfg.out)?;
    write_analysis(&mut out, "", &analysis)?;
    Ok((out.finish("analyze", cfg)?, analysis))
}

/// Simulation, sensing and analysis in one pass; only the analysis outputs
/// are written.
pub fn run_end_to_end(cfg: &RunConfig) -> Result<(Manifest, Analysis)> {
    let net = load_network(cfg.network_path()?)?;
    let (_, traces) = measure(&net, cfg)?;
    let analysis = analyze_traces(&traces, &net, cfg)?;
    let mut out = Outputs::new(&cfg.out)?;
    write_analysis(&mut out, "", &analysis)?;
    Ok((out.finish("end_to_end", cfg)?, analysis))
}

/// Worker count for sweeps: `EMWAVE_THREADS` when set, else rayon's default.
pub fn sweep_threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{s}'"))),
        },
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub spec: ScenarioSpec,
    pub result: Result<Analysis>,
}

/// Runs every scenario against `base`; order of the result follows `specs`.
pub fn sweep(base: &Network, specs: &[ScenarioSpec], cfg: &RunConfig, threads: Option<usize>) -> Result<Vec<ScenarioOutcome>> {
    let run = |spec: &ScenarioSpec| {
        let result = apply_pv_scenario(base, spec)
            .and_then(|net| measure(&net, cfg).and_then(|(_, traces)| analyze_traces(&traces, &net, cfg)));
        ScenarioOutcome { spec: spec.clone(), result }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| specs.par_iter().map(run).collect()))
}

pub fn run_scenario(cfg: &RunConfig) -> Result<(Manifest, Vec<ScenarioOutcome>)> {
    let base = load_network(cfg.network_path()?)?;
    let path = cfg.scenarios.as_deref().ok_or_else(|| Error::Config("missing key 'scenarios'".into()))?;
    let specs = load_scenarios(path)?;
    let outcomes = sweep(&base, &specs, cfg, sweep_threads()?)?;

    let mut out = Outputs::new(&cfg.out)?;
    let mut rows = Vec::new();
    let mut table = String::from("scenario,penetration,status,r,median_all,median_interior\n");
    let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for (k, o) in outcomes.iter().enumerate() {
        match &o.result {
            Ok(a) => {
                let prefix = format!("scenario_{k}_");
                export::write_tdoa_csv(&out.path(format!("{prefix}tdoa.csv")), &a.samples)?;
                export::write_field_csv(&out.path(format!("{prefix}speed_field.csv")), &a.speed)?;
                table += &format!(
                    "{k},{},ok,{},{},{}\n",
                    o.spec.penetration,
                    cell(a.correlation()),
                    cell(a.median("all")),
                    cell(a.median("interior"))
                );
                rows.push(json!({ "scenario": k, "spec": o.spec, "status": "ok", "stats": a.stats }));
            }
            Err(e) => {
                table += &format!("{k},{},{},,,\n", o.spec.penetration, e.code());
                rows.push(json!({
                    "scenario": k, "spec": o.spec, "status": "failed",
                    "error": e.code(), "message": e.to_string(),
                }));
            }
        }
    }
    out.json("summary.json", &rows)?;
    let p = out.path("summary.csv");
    fs::write(&p, table).map_err(|e| Error::io(&p, e))?;
    Ok((out.finish("scenario", cfg)?, outcomes))
}

pub fn run_locate(cfg: &RunConfig) -> Result<(Manifest, LocateResult)> {
    let samples = export::read_tdoa_csv(&cfg.tdoa_path())?;
    let positions: Vec<Point> = samples.entries.iter().map(|e| e.pos).collect();
    let grid = grid_for(cfg, &positions)?;
    let loc = locate_event(&samples, &grid)?;
    let mut out = Outputs::new(&cfg.out)?;
    export::write_location_csv(&out.path("location.csv"), &loc)?;
    Ok((out.finish("locate", cfg)?, loc))
}

pub fn run_replay(cfg: &RunConfig) -> Result<Manifest> {
    if cfg.frames.is_empty() {
        return Err(Error::Config("no replay frame times ('frames')".into()));
    }
    let net = load_network(cfg.network_path()?)?;
    let traces = export::read_trace_dir(&cfg.traces_dir(), &net)?;
    let positions: Vec<Point> = traces.iter().map(|t| t.pos).collect();
    let grid = grid_for(cfg, &positions)?;
    let frames = replay_frames(&traces, &grid, &cfg.frames, &cfg.idw)?;
    let mut out = Outputs::new(&cfg.out)?;
    for (k, f) in frames.iter().enumerate() {
        export::write_field_csv(&out.path(format!("frame_{k:04}.csv")), f)?;
    }
    out.finish("replay", cfg)
}
