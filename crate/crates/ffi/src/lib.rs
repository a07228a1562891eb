//! C ABI over the emwave core.
//!
//! Objects cross the boundary as opaque handles created by `emwave_*` and
//! released with the matching `*_free`. Every fallible call returns an
//! [`EmwaveStatus`]; on failure `emwave_last_error()` holds a message for the
//! calling thread until its next failing call.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use emwave::detect::{build_tdoa_samples, DetectorConfig, TdoaSamples};
use emwave::dynamics::{simulate, Disturbance, SimConfig, TrajectorySet};
use emwave::field::{interpolate_field, speed_field, GridSpec, IdwConfig, ScalarField};
use emwave::locate::locate_event;
use emwave::network::{build_chain, build_lattice, load_network, Network, UniformParams};
use emwave::scenario::{apply_pv_scenario, ScenarioSpec};
use emwave::sensor::{sample_measurements, FrequencyTrace, SensorConfig};
use emwave::stats::penetration_speed_correlation;
use emwave::Error;

/// Result codes. Values 2 and above equal the CLI exit codes of the same
/// error class.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmwaveStatus {
    Ok = 0,
    /// Null pointer, bad UTF-8 or out-of-range index.
    InvalidArgument = 1,
    NotFound = 2,
    Io = 3,
    Parse = 4,
    Validation = 5,
    InvalidParameter = 6,
    Config = 7,
    InfeasiblePenetration = 8,
    NoConvergence = 9,
    NumericalBlowup = 10,
    InvalidDisturbance = 11,
    UnknownSensorBus = 12,
    NoCrossing = 13,
    InsufficientBaseline = 14,
    TooFewArrivals = 15,
    EmptySamples = 16,
    DegenerateField = 17,
    TimeOutOfRange = 18,
    InsufficientCells = 19,
    ZeroVariance = 20,
    EmptyRegion = 21,
    /// A Rust panic was caught at the boundary.
    Internal = 100,
}

impl From<&Error> for EmwaveStatus {
    fn from(e: &Error) -> Self {
        use EmwaveStatus::*;
        match e {
            Error::NotFound(_) => NotFound,
            Error::Io(_) => Io,
            Error::Parse(_) => Parse,
            Error::Validation(_) => Validation,
            Error::InvalidParameter(_) => InvalidParameter,
            Error::Config(_) => Config,
            Error::InfeasiblePenetration { .. } => InfeasiblePenetration,
            Error::NoConvergence { .. } => NoConvergence,
            Error::NumericalBlowup { .. } => NumericalBlowup,
            Error::InvalidDisturbance(_) => InvalidDisturbance,
            Error::UnknownSensorBus(_) => UnknownSensorBus,
            Error::NoCrossing(_) => NoCrossing,
            Error::InsufficientBaseline(_) => InsufficientBaseline,
            Error::TooFewArrivals { .. } => TooFewArrivals,
            Error::EmptySamples => EmptySamples,
            Error::DegenerateField(_) => DegenerateField,
            Error::TimeOutOfRange(_) => TimeOutOfRange,
            Error::InsufficientCells { .. } => InsufficientCells,
            Error::ZeroVariance(_) => ZeroVariance,
            Error::EmptyRegion(_) => EmptyRegion,
        }
    }
}

pub struct EmwaveNetwork(Network);
pub struct EmwaveTrajectory(TrajectorySet);
pub struct EmwaveTraces(Vec<FrequencyTrace>);
pub struct EmwaveTdoa(TdoaSamples);
pub struct EmwaveField(ScalarField);

/// Node-centred raster bounds; `nx`, `ny` ≥ 2.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct EmwaveGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub nx: usize,
    pub ny: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct EmwaveLocation {
    pub x: f64,
    pub y: f64,
    pub residual: f64,
    pub v_hat: f64,
    pub collinear: bool,
}

/// Threshold detection mode for [`emwave_detect`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmwaveThresholdMode {
    Absolute = 0,
    Relative = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

enum Fail {
    Arg(String),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> EmwaveStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EmwaveStatus::Ok,
        Ok(Err(Fail::Arg(msg))) => {
            set_error(format!("INVALID_ARGUMENT: {msg}"));
            EmwaveStatus::InvalidArgument
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(format!("{}: {}", e.code(), e));
            EmwaveStatus::from(&e)
        }
        Err(_) => {
            set_error("INTERNAL: panic in emwave".into());
            EmwaveStatus::Internal
        }
    }
}

unsafe fn get<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail::Arg(format!("{name} is null")))
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Arg(format!("{name} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Arg(format!("{name} is not UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Arg("output pointer is null".into()));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn grid(g: &EmwaveGrid) -> Result<GridSpec, Fail> {
    Ok(GridSpec::new(g.x_min, g.x_max, g.y_min, g.y_max, g.nx, g.ny)?)
}

/// Message of the calling thread's last failure, or null. Owned by the
/// library; valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn emwave_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Stable upper-case name of a status code (static storage); null for
/// values that are not an [`EmwaveStatus`].
#[no_mangle]
pub extern "C" fn emwave_status_name(status: i32) -> *const c_char {
    match EmwaveStatus::from_code(status) {
        Some(s) => status_name(s).as_ptr(),
        None => ptr::null(),
    }
}

impl EmwaveStatus {
    const ALL: [EmwaveStatus; 23] = {
        use EmwaveStatus::*;
        [
            Ok, InvalidArgument, NotFound, Io, Parse, Validation, InvalidParameter, Config,
            InfeasiblePenetration, NoConvergence, NumericalBlowup, InvalidDisturbance, UnknownSensorBus,
            NoCrossing, InsufficientBaseline, TooFewArrivals, EmptySamples, DegenerateField, TimeOutOfRange,
            InsufficientCells, ZeroVariance, EmptyRegion, Internal,
        ]
    };

    pub fn from_code(code: i32) -> Option<Self> {
        Self::ALL.into_iter().find(|s| *s as i32 == code)
    }
}

fn status_name(status: EmwaveStatus) -> &'static CStr {
    match status {
        EmwaveStatus::Ok => c"OK",
        EmwaveStatus::InvalidArgument => c"INVALID_ARGUMENT",
        EmwaveStatus::NotFound => c"NOT_FOUND",
        EmwaveStatus::Io => c"IO",
        EmwaveStatus::Parse => c"PARSE",
        EmwaveStatus::Validation => c"VALIDATION",
        EmwaveStatus::InvalidParameter => c"INVALID_PARAMETER",
        EmwaveStatus::Config => c"CONFIG",
        EmwaveStatus::InfeasiblePenetration => c"INFEASIBLE_PENETRATION",
        EmwaveStatus::NoConvergence => c"NO_CONVERGENCE",
        EmwaveStatus::NumericalBlowup => c"NUMERICAL_BLOWUP",
        EmwaveStatus::InvalidDisturbance => c"INVALID_DISTURBANCE",
        EmwaveStatus::UnknownSensorBus => c"UNKNOWN_SENSOR_BUS",
        EmwaveStatus::NoCrossing => c"NO_CROSSING",
        EmwaveStatus::InsufficientBaseline => c"INSUFFICIENT_BASELINE",
        EmwaveStatus::TooFewArrivals => c"TOO_FEW_ARRIVALS",
        EmwaveStatus::EmptySamples => c"EMPTY_SAMPLES",
        EmwaveStatus::DegenerateField => c"DEGENERATE_FIELD",
        EmwaveStatus::TimeOutOfRange => c"TIME_OUT_OF_RANGE",
        EmwaveStatus::InsufficientCells => c"INSUFFICIENT_CELLS",
        EmwaveStatus::ZeroVariance => c"ZERO_VARIANCE",
        EmwaveStatus::EmptyRegion => c"EMPTY_REGION",
        EmwaveStatus::Internal => c"INTERNAL",
    }
}

// Networks

#[no_mangle]
pub unsafe extern "C" fn emwave_network_load(path: *const c_char, out: *mut *mut EmwaveNetwork) -> EmwaveStatus {
    guard(|| {
        let net = load_network(Path::new(text(path, "path")?))?;
        put(out, EmwaveNetwork(net))
    })
}

#[no_mangle]
pub unsafe extern "C" fn emwave_network_from_json(json: *const c_char, out: *mut *mut EmwaveNetwork) -> EmwaveStatus {
    guard(|| put(out, EmwaveNetwork(Network::from_json(text(json, "json")?)?)))
}

/// Network document as JSON; release with [`emwave_string_free`].
#[no_mangle]
pub unsafe extern "C" fn emwave_network_to_json(net: *const EmwaveNetwork, out: *mut *mut c_char) -> EmwaveStatus {
    guard(|| {
        let s = get(net, "net")?.0.to_json();
        if out.is_null() {
            return Err(Fail::Arg("output pointer is null".into()));
        }
        *out = CString::new(s).map_err(|_| Fail::Arg("json contains nul".into()))?.into_raw();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn emwave_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Uniform chain; `flow` is carried from bus 1 towards bus n.
#[no_mangle]
pub unsafe extern "C" fn emwave_network_build_chain(
    n: usize,
    spacing: f64,
    h: f64,
    d: f64,
    b: f64,
    v: f64,
    flow: f64,
    out: *mut *mut EmwaveNetwork,
) -> EmwaveStatus {
    guard(|| put(out, EmwaveNetwork(build_chain(n, &UniformParams::new(spacing, h, d, b, v), flow)?)))
}

/// Uniform lattice with `generation` dispatched at every bus.
#[no_mangle]
pub unsafe extern "C" fn emwave_network_build_lattice(
    rows: usize,
    cols: usize,
    spacing: f64,
    h: f64,
    d: f64,
    b: f64,
    v: f64,
    generation: f64,
    out: *mut *mut EmwaveNetwork,
) -> EmwaveStatus {
    guard(|| {
        let params = UniformParams::new(spacing, h, d, b, v).with_generation(generation);
        put(out, EmwaveNetwork(build_lattice(rows, cols, &params, &[])?))
    })
}

/// Applies a scenario given as JSON (`{"penetration", "region_weights", "seed"}`).
#[no_mangle]
pub unsafe extern "C" fn emwave_network_apply_scenario(
    net: *const EmwaveNetwork,
    scenario_json: *const c_char,
    out: *mut *mut EmwaveNetwork,
) -> EmwaveStatus {
    guard(|| {
        let spec: ScenarioSpec = serde_json::from_str(text(scenario_json, "scenario_json")?)
            .map_err(|e| Error::Parse(e.to_string()))?;
        put(out, EmwaveNetwork(apply_pv_scenario(&get(net, "net")?.0, &spec)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn emwave_network_bus_count(net: *const EmwaveNetwork) -> usize {
    net.as_ref().map_or(0, |n| n.0.len())
}

#[no_mangle]
pub unsafe extern "C" fn emwave_network_free(net: *mut EmwaveNetwork) {
    free(net)
}

// Simulation and sensing

#[no_mangle]
pub unsafe extern "C" fn emwave_simulate(
    net: *const EmwaveNetwork,
    bus: u32,
    delta_p: f64,
    t_event: f64,
    dt: f64,
    t_end: f64,
    out: *mut *mut EmwaveTrajectory,
) -> EmwaveStatus {
    guard(|| {
        let dist = Disturbance { bus, delta_p, t_event };
        put(out, EmwaveTrajectory(simulate(&get(net, "net")?.0, &dist, &SimConfig::new(dt, t_end))?))
    })
}

/// Number of time samples.
#[no_mangle]
pub unsafe extern "C" fn emwave_trajectory_len(traj: *const EmwaveTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.len())
}

/// Copies the frequency deviation (Hz) of bus `id` into `buf`, which must
/// hold at least [`emwave_trajectory_len`] values.
#[no_mangle]
pub unsafe extern "C" fn emwave_trajectory_freq_dev(
    traj: *const EmwaveTrajectory,
    id: u32,
    buf: *mut f64,
    len: usize,
) -> EmwaveStatus {
    guard(|| {
        let t = &get(traj, "traj")?.0;
        let series = t.series(id).ok_or(Error::UnknownSensorBus(id))?;
        copy_out(series, buf, len)
    })
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, len: usize) -> Result<(), Fail> {
    if buf.is_null() || len < src.len() {
        return Err(Fail::Arg(format!("buffer needs {} values", src.len())));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

#[no_mangle]
pub unsafe extern "C" fn emwave_trajectory_free(traj: *mut EmwaveTrajectory) {
    free(traj)
}

/// Samples every bus at `sample_rate` with seeded Gaussian noise.
#[no_mangle]
pub unsafe extern "C" fn emwave_sample(
    traj: *const EmwaveTrajectory,
    net: *const EmwaveNetwork,
    sample_rate: f64,
    noise_sigma: f64,
    seed: u64,
    out: *mut *mut EmwaveTraces,
) -> EmwaveStatus {
    guard(|| {
        let cfg = SensorConfig { sample_rate, noise_sigma, seed, sensor_buses: None };
        put(out, EmwaveTraces(sample_measurements(&get(traj, "traj")?.0, &get(net, "net")?.0, &cfg)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn emwave_traces_count(traces: *const EmwaveTraces) -> usize {
    traces.as_ref().map_or(0, |t| t.0.len())
}

#[no_mangle]
pub unsafe extern "C" fn emwave_traces_free(traces: *mut EmwaveTraces) {
    free(traces)
}

// Wavefront analysis

/// `mode` is an [`EmwaveThresholdMode`]; `level` is the threshold in Hz
/// (absolute) or the peak fraction (relative).
#[no_mangle]
pub unsafe extern "C" fn emwave_detect(
    traces: *const EmwaveTraces,
    t_event: f64,
    mode: i32,
    level: f64,
    baseline_window: f64,
    out: *mut *mut EmwaveTdoa,
) -> EmwaveStatus {
    guard(|| {
        let mut cfg = match mode {
            m if m == EmwaveThresholdMode::Absolute as i32 => DetectorConfig::absolute(level),
            m if m == EmwaveThresholdMode::Relative as i32 => DetectorConfig::relative(level),
            m => return Err(Fail::Arg(format!("unknown threshold mode {m}"))),
        };
        cfg.baseline_window = baseline_window;
        put(out, EmwaveTdoa(build_tdoa_samples(&get(traces, "traces")?.0, t_event, None, &cfg)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn emwave_tdoa_count(tdoa: *const EmwaveTdoa) -> usize {
    tdoa.as_ref().map_or(0, |t| t.0.entries.len())
}

/// Number of traces excluded during detection.
#[no_mangle]
pub unsafe extern "C" fn emwave_tdoa_excluded(tdoa: *const EmwaveTdoa) -> usize {
    tdoa.as_ref().map_or(0, |t| t.0.exclusions.len())
}

#[no_mangle]
pub unsafe extern "C" fn emwave_tdoa_get(
    tdoa: *const EmwaveTdoa,
    index: usize,
    bus: *mut u32,
    x: *mut f64,
    y: *mut f64,
    seconds: *mut f64,
) -> EmwaveStatus {
    guard(|| {
        let entries = &get(tdoa, "tdoa")?.0.entries;
        let e = entries.get(index).ok_or_else(|| Fail::Arg(format!("index {index} out of range")))?;
        if bus.is_null() || x.is_null() || y.is_null() || seconds.is_null() {
            return Err(Fail::Arg("output pointer is null".into()));
        }
        (*bus, *x, *y, *seconds) = (e.bus, e.pos.x, e.pos.y, e.tdoa);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn emwave_tdoa_free(tdoa: *mut EmwaveTdoa) {
    free(tdoa)
}

/// IDW arrival map; `max_radius` ≤ 0 means unlimited.
#[no_mangle]
pub unsafe extern "C" fn emwave_interpolate(
    tdoa: *const EmwaveTdoa,
    grid_spec: *const EmwaveGrid,
    power: f64,
    max_radius: f64,
    out: *mut *mut EmwaveField,
) -> EmwaveStatus {
    guard(|| {
        let g = grid(get(grid_spec, "grid")?)?;
        let cfg = IdwConfig { power, max_radius: (max_radius > 0.0).then_some(max_radius) };
        put(out, EmwaveField(interpolate_field(&get(tdoa, "tdoa")?.0, &g, &cfg)?))
    })
}

#[no_mangle]
pub unsafe extern "C" fn emwave_speed_field(
    tdoa_field: *const EmwaveField,
    min_grad: f64,
    out: *mut *mut EmwaveField,
) -> EmwaveStatus {
    guard(|| put(out, EmwaveField(speed_field(&get(tdoa_field, "tdoa_field")?.0, min_grad)?.0)))
}

#[no_mangle]
pub unsafe extern "C" fn emwave_field_grid(field: *const EmwaveField, out: *mut EmwaveGrid) -> EmwaveStatus {
    guard(|| {
        let g = get(field, "field")?.0.grid;
        if out.is_null() {
            return Err(Fail::Arg("output pointer is null".into()));
        }
        *out = EmwaveGrid { x_min: g.x_min, x_max: g.x_max, y_min: g.y_min, y_max: g.y_max, nx: g.nx, ny: g.ny };
        Ok(())
    })
}

/// Copies `nx·ny` values row-major from `y_min`; masked cells are NaN.
#[no_mangle]
pub unsafe extern "C" fn emwave_field_values(field: *const EmwaveField, buf: *mut f64, len: usize) -> EmwaveStatus {
    guard(|| copy_out(&get(field, "field")?.0.values, buf, len))
}

#[no_mangle]
pub unsafe extern "C" fn emwave_field_free(field: *mut EmwaveField) {
    free(field)
}

#[no_mangle]
pub unsafe extern "C" fn emwave_locate(
    tdoa: *const EmwaveTdoa,
    grid_spec: *const EmwaveGrid,
    out: *mut EmwaveLocation,
) -> EmwaveStatus {
    guard(|| {
        let g = grid(get(grid_spec, "grid")?)?;
        let r = locate_event(&get(tdoa, "tdoa")?.0, &g)?;
        if out.is_null() {
            return Err(Fail::Arg("output pointer is null".into()));
        }
        *out = EmwaveLocation { x: r.pos.x, y: r.pos.y, residual: r.residual, v_hat: r.v_hat, collinear: r.collinear };
        Ok(())
    })
}

/// Pearson r between the network's rasterised PV fraction and `speed`.
#[no_mangle]
pub unsafe extern "C" fn emwave_penetration_correlation(
    speed: *const EmwaveField,
    net: *const EmwaveNetwork,
    r: *mut f64,
) -> EmwaveStatus {
    guard(|| {
        let field = emwave::field::SpeedField(get(speed, "speed")?.0.clone());
        let value = penetration_speed_correlation(&field, &get(net, "net")?.0)?;
        if r.is_null() {
            return Err(Fail::Arg("output pointer is null".into()));
        }
        *r = value;
        Ok(())
    })
}
