//! Classical swing-equation dynamics on a lossless network.
//!
//! Per bus: `(2H/ω_s)·θ̈ = (p_mech − p_load − P_e) − D·θ̇/ω_s`, integrated with
//! fixed-step RK4. Frequency deviation is the angle-rate state divided by 2π.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{BusId, Network};
use crate::powerflow::{electrical_power, solve_equilibrium};

pub const BLOWUP_HZ: f64 = 10.0;
pub const MAX_DT: f64 = 0.01;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Disturbance {
    pub bus: BusId,
    /// Step added to the bus's p_mech; negative for a generation trip.
    pub delta_p: f64,
    pub t_event: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "default_dt")]
    pub dt: f64,
    pub t_end: f64,
}

fn default_dt() -> f64 {
    0.001
}

impl SimConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        SimConfig { dt, t_end }
    }

    fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Angles (rad) and angle rates (rad/s, deviation from synchronous speed).
#[derive(Debug, Clone, PartialEq)]
pub struct SwingState {
    pub angles: Vec<f64>,
    pub rates: Vec<f64>,
}

impl SwingState {
    pub fn at_rest(angles: Vec<f64>) -> Self {
        let rates = vec![0.0; angles.len()];
        SwingState { angles, rates }
    }
}

/// Dense simulated series on a uniform time axis, one row per bus in
/// network order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    pub times: Vec<f64>,
    pub dt: f64,
    pub bus_ids: Vec<BusId>,
    pub angles: Vec<Vec<f64>>,
    /// Hz; exactly `rate / 2π` of the integrated state.
    pub freq_dev: Vec<Vec<f64>>,
}

impl TrajectorySet {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state_at(&self, k: usize) -> SwingState {
        SwingState {
            angles: self.angles.iter().map(|a| a[k]).collect(),
            rates: self.freq_dev.iter().map(|f| f[k] * TWO_PI).collect(),
        }
    }

    pub fn series(&self, bus: BusId) -> Option<&[f64]> {
        self.bus_ids.iter().position(|&b| b == bus).map(|i| self.freq_dev[i].as_slice())
    }
}

struct SwingModel {
    /// ω_s / (2H) per bus.
    accel_gain: Vec<f64>,
    /// D / ω_s per bus.
    damping: Vec<f64>,
    links: Vec<(usize, usize, f64)>,
}

impl SwingModel {
    fn new(net: &Network) -> Self {
        let omega_s = net.omega_s();
        let buses = net.buses();
        let links = net
            .branch_indices()
            .into_iter()
            .map(|(i, j, b)| (i, j, buses[i].voltage * buses[j].voltage * b))
            .collect();
        SwingModel {
            accel_gain: buses.iter().map(|b| omega_s / (2.0 * b.inertia_h)).collect(),
            damping: buses.iter().map(|b| b.damping / omega_s).collect(),
            links,
        }
    }

    fn derivative(&self, injection: &[f64], theta: &[f64], rate: &[f64], d_theta: &mut [f64], d_rate: &mut [f64]) {
        d_theta.copy_from_slice(rate);
        d_rate.copy_from_slice(injection);
        for &(i, j, k) in &self.links {
            let flow = k * (theta[i] - theta[j]).sin();
            d_rate[i] -= flow;
            d_rate[j] += flow;
        }
        for (n, acc) in d_rate.iter_mut().enumerate() {
            *acc = self.accel_gain[n] * (*acc - self.damping[n] * rate[n]);
        }
    }
}

fn validate(net: &Network, dist: &Disturbance, cfg: &SimConfig) -> Result<usize> {
    if !(cfg.dt.is_finite() && cfg.dt > 0.0 && cfg.dt <= MAX_DT) {
        return Err(Error::InvalidParameter(format!("dt must lie in (0, {MAX_DT}], got {}", cfg.dt)));
    }
    let bus = net
        .index_of(dist.bus)
        .ok_or_else(|| Error::InvalidDisturbance(format!("bus {} not in network", dist.bus)))?;
    if !(dist.t_event.is_finite() && dist.t_event >= 0.0) {
        return Err(Error::InvalidDisturbance(format!("t_event must be non-negative, got {}", dist.t_event)));
    }
    if !dist.delta_p.is_finite() {
        return Err(Error::InvalidDisturbance("delta_p must be finite".into()));
    }
    if !(cfg.t_end.is_finite() && cfg.t_end > dist.t_event) {
        return Err(Error::InvalidParameter(format!(
            "t_end {} must exceed t_event {}",
            cfg.t_end, dist.t_event
        )));
    }
    Ok(bus)
}

/// Simulates the disturbance starting from the solved equilibrium at rest.
///
/// The pre-event injections are taken as the electrical power at the solved
/// angles (which matches `p_mech − p_load` to the solver tolerance), so the
/// initial state is an exact fixed point of the discrete integrator.
pub fn simulate(net: &Network, dist: &Disturbance, cfg: &SimConfig) -> Result<TrajectorySet> {
    validate(net, dist, cfg)?;
    let theta0 = solve_equilibrium(net)?;
    let injection = electrical_power(net, &theta0);
    integrate(net, SwingState::at_rest(theta0), injection, dist, cfg)
}

/// Simulates from an arbitrary initial state using the network's scheduled
/// injections `p_mech − p_load`.
pub fn simulate_from(net: &Network, initial: SwingState, dist: &Disturbance, cfg: &SimConfig) -> Result<TrajectorySet> {
    validate(net, dist, cfg)?;
    if initial.angles.len() != net.len() || initial.rates.len() != net.len() {
        return Err(Error::InvalidParameter("initial state dimension does not match network".into()));
    }
    let injection = net.buses().iter().map(|b| b.net_injection()).collect();
    integrate(net, initial, injection, dist, cfg)
}

fn integrate(
    net: &Network,
    initial: SwingState,
    pre_injection: Vec<f64>,
    dist: &Disturbance,
    cfg: &SimConfig,
) -> Result<TrajectorySet> {
    let n = net.len();
    let dist_bus = net.index_of(dist.bus).expect("validated");
    let model = SwingModel::new(net);
    let steps = cfg.steps();
    let event_step = (dist.t_event / cfg.dt).round() as usize;

    let mut post_injection = pre_injection.clone();
    post_injection[dist_bus] += dist.delta_p;

    let mut angles: Vec<Vec<f64>> = (0..n).map(|_| Vec::with_capacity(steps + 1)).collect();
    let mut freq: Vec<Vec<f64>> = (0..n).map(|_| Vec::with_capacity(steps + 1)).collect();
    let SwingState { angles: mut theta, rates: mut rate } = initial;

    let mut k1 = (vec![0.0; n], vec![0.0; n]);
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    let h = cfg.dt;

    let record = |theta: &[f64], rate: &[f64], angles: &mut Vec<Vec<f64>>, freq: &mut Vec<Vec<f64>>| {
        for i in 0..n {
            angles[i].push(theta[i]);
            freq[i].push(rate[i] / TWO_PI);
        }
    };
    record(&theta, &rate, &mut angles, &mut freq);

    // tmp = state + coef·k
    let offset = |coef: f64, theta: &[f64], rate: &[f64], k: &(Vec<f64>, Vec<f64>), tmp: &mut (Vec<f64>, Vec<f64>)| {
        for i in 0..n {
            tmp.0[i] = theta[i] + coef * k.0[i];
            tmp.1[i] = rate[i] + coef * k.1[i];
        }
    };

    for step in 0..steps {
        let injection = if step >= event_step { &post_injection } else { &pre_injection };
        model.derivative(injection, &theta, &rate, &mut k1.0, &mut k1.1);
        offset(0.5 * h, &theta, &rate, &k1, &mut tmp);
        model.derivative(injection, &tmp.0, &tmp.1, &mut k2.0, &mut k2.1);
        offset(0.5 * h, &theta, &rate, &k2, &mut tmp);
        model.derivative(injection, &tmp.0, &tmp.1, &mut k3.0, &mut k3.1);
        offset(h, &theta, &rate, &k3, &mut tmp);
        model.derivative(injection, &tmp.0, &tmp.1, &mut k4.0, &mut k4.1);

        let sixth = h / 6.0;
        for i in 0..n {
            theta[i] += sixth * (k1.0[i] + 2.0 * k2.0[i] + 2.0 * k3.0[i] + k4.0[i]);
            rate[i] += sixth * (k1.1[i] + 2.0 * k2.1[i] + 2.0 * k3.1[i] + k4.1[i]);
        }

        if let Some((i, r)) = rate.iter().enumerate().find(|(_, r)| r.is_nan() || r.abs() / TWO_PI > BLOWUP_HZ) {
            return Err(Error::NumericalBlowup {
                time: (step + 1) as f64 * h,
                bus: net.buses()[i].id,
                value: r.abs() / TWO_PI,
            });
        }
        record(&theta, &rate, &mut angles, &mut freq);
    }

    Ok(TrajectorySet {
        times: (0..=steps).map(|k| k as f64 * h).collect(),
        dt: h,
        bus_ids: net.buses().iter().map(|b| b.id).collect(),
        angles,
        freq_dev: freq,
    })
}

/// Kinetic `Σ (H/ω_s)·θ̇²` plus potential
/// `−Σ_branches V_i V_j B cos(θ_i − θ_j) + Σ (p_load − p_mech)·θ`, with the
/// disturbance step (if any) included in the injections.
pub fn total_energy(net: &Network, state: &SwingState, dist: Option<&Disturbance>) -> f64 {
    let omega_s = net.omega_s();
    let buses = net.buses();
    let kinetic: f64 = buses.iter().zip(&state.rates).map(|(b, r)| b.inertia_h / omega_s * r * r).sum();
    kinetic + potential_energy(net, &state.angles, dist)
}

pub fn potential_energy(net: &Network, angles: &[f64], dist: Option<&Disturbance>) -> f64 {
    let buses = net.buses();
    let mut pot = 0.0;
    for (i, j, b) in net.branch_indices() {
        pot -= buses[i].voltage * buses[j].voltage * b * (angles[i] - angles[j]).cos();
    }
    for (k, bus) in buses.iter().enumerate() {
        let mut inj = bus.net_injection();
        if let Some(d) = dist.filter(|d| d.bus == bus.id) {
            inj += d.delta_p;
        }
        pot -= inj * angles[k];
    }
    pot
}

/// Inertia-weighted mean frequency deviation in Hz.
pub fn coi_frequency(net: &Network, state: &SwingState) -> f64 {
    let (num, den) = net
        .buses()
        .iter()
        .zip(&state.rates)
        .fold((0.0, 0.0), |(n, d), (b, r)| (n + b.inertia_h * r / TWO_PI, d + b.inertia_h));
    num / den
}
