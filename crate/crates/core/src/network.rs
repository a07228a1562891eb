//! Network data model: geo-located swing buses joined by lossless branches.
//!
//! A [`Network`] is validated on construction and immutable afterwards. The
//! on-disk format is a JSON document with `f0`, `buses` and `branches` keys;
//! numbers are written as shortest round-trip decimals so that
//! `load_network(save_network(net)) == net` holds exactly.

use std::collections::{HashMap, HashSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point;

pub type BusId = u32;

/// Lowest inertia constant any bus may carry, in seconds.
pub const H_FLOOR: f64 = 0.01;
/// Inertia assumed for a bus whose file entry omits `h` (motor load).
pub const LOAD_BUS_INERTIA: f64 = 0.5;
pub const DEFAULT_F0: f64 = 60.0;

const BALANCE_TOL: f64 = 1e-9;

fn default_f0() -> f64 {
    DEFAULT_F0
}
fn default_h() -> f64 {
    LOAD_BUS_INERTIA
}
fn default_v() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: BusId,
    pub x: f64,
    pub y: f64,
    /// Inertia constant H in seconds.
    #[serde(rename = "h", default = "default_h")]
    pub inertia_h: f64,
    /// Damping on the per-unit frequency deviation.
    #[serde(rename = "d", default)]
    pub damping: f64,
    #[serde(rename = "v", default = "default_v")]
    pub voltage: f64,
    #[serde(default)]
    pub p_mech: f64,
    #[serde(default)]
    pub p_load: f64,
    #[serde(default)]
    pub pv_fraction: f64,
}

impl Bus {
    pub fn pos(&self) -> Point {
        Point::new(self.x, self.y)
    }

    pub fn net_injection(&self) -> f64 {
        self.p_mech - self.p_load
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub from: BusId,
    pub to: BusId,
    #[serde(rename = "b")]
    pub susceptance: f64,
}

#[derive(Serialize, Deserialize)]
struct NetworkFile {
    #[serde(default = "default_f0")]
    f0: f64,
    buses: Vec<Bus>,
    branches: Vec<Branch>,
}

/// A validated, connected, balanced network.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    f0: f64,
    buses: Vec<Bus>,
    branches: Vec<Branch>,
    index: HashMap<BusId, usize>,
}

impl Network {
    pub fn new(f0: f64, buses: Vec<Bus>, branches: Vec<Branch>) -> Result<Self> {
        if !(f0.is_finite() && f0 > 0.0) {
            return Err(Error::Validation(format!("f0 must be positive, got {f0}")));
        }
        if buses.is_empty() {
            return Err(Error::Validation("network has no buses".into()));
        }
        let mut index = HashMap::with_capacity(buses.len());
        for (i, bus) in buses.iter().enumerate() {
            validate_bus(bus)?;
            if index.insert(bus.id, i).is_some() {
                return Err(Error::Validation(format!("duplicate bus id {}", bus.id)));
            }
        }

        let mut pairs = HashSet::with_capacity(branches.len());
        for br in &branches {
            for end in [br.from, br.to] {
                if !index.contains_key(&end) {
                    return Err(Error::Validation(format!(
                        "branch {}-{} references unknown bus id {}",
                        br.from, br.to, end
                    )));
                }
            }
            if br.from == br.to {
                return Err(Error::Validation(format!("branch {}-{} is a self-loop", br.from, br.to)));
            }
            if !(br.susceptance.is_finite() && br.susceptance > 0.0) {
                return Err(Error::Validation(format!(
                    "branch {}-{} has non-positive susceptance {}",
                    br.from, br.to, br.susceptance
                )));
            }
            let key = (br.from.min(br.to), br.from.max(br.to));
            if !pairs.insert(key) {
                return Err(Error::Validation(format!("parallel branch between {} and {}", key.0, key.1)));
            }
        }

        let net = Network { f0, buses, branches, index };
        net.check_connected()?;
        net.check_balanced()?;
        Ok(net)
    }

    pub fn f0(&self) -> f64 {
        self.f0
    }

    /// Synchronous angular speed 2π·f0 in rad/s.
    pub fn omega_s(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.f0
    }

    pub fn buses(&self) -> &[Bus] {
        &self.buses
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    pub fn len(&self) -> usize {
        self.buses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buses.is_empty()
    }

    pub fn index_of(&self, id: BusId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn bus(&self, id: BusId) -> Option<&Bus> {
        self.index_of(id).map(|i| &self.buses[i])
    }

    /// Branches as `(from_index, to_index, susceptance)` triples.
    pub fn branch_indices(&self) -> Vec<(usize, usize, f64)> {
        self.branches
            .iter()
            .map(|b| (self.index[&b.from], self.index[&b.to], b.susceptance))
            .collect()
    }

    /// Returns a copy with the bus list replaced. Topology must be unchanged.
    pub fn with_buses(&self, buses: Vec<Bus>) -> Result<Self> {
        Network::new(self.f0, buses, self.branches.clone())
    }

    pub fn degree(&self, id: BusId) -> usize {
        self.branches.iter().filter(|b| b.from == id || b.to == id).count()
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.buses.len();
        let mut adj = vec![Vec::new(); n];
        for (i, j, _) in self.branch_indices() {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        match seen.iter().position(|s| !s) {
            Some(k) => Err(Error::Validation(format!(
                "network is disconnected: bus {} unreachable from bus {}",
                self.buses[k].id, self.buses[0].id
            ))),
            None => Ok(()),
        }
    }

    fn check_balanced(&self) -> Result<()> {
        let gen: f64 = self.buses.iter().map(|b| b.p_mech).sum();
        let load: f64 = self.buses.iter().map(|b| b.p_load).sum();
        if (gen - load).abs() > BALANCE_TOL * gen.abs().max(load.abs()).max(1.0) {
            return Err(Error::Validation(format!(
                "unbalanced injections: sum p_mech = {gen}, sum p_load = {load}"
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let file = NetworkFile { f0: self.f0, buses: self.buses.clone(), branches: self.branches.clone() };
        serde_json::to_string_pretty(&file).expect("network serialization is infallible")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Network::new(file.f0, file.buses, file.branches)
    }
}

fn validate_bus(bus: &Bus) -> Result<()> {
    let fail = |what: &str| Err(Error::Validation(format!("bus {}: {what}", bus.id)));
    let finite = [bus.x, bus.y, bus.inertia_h, bus.damping, bus.voltage, bus.p_mech, bus.p_load, bus.pv_fraction];
    if finite.iter().any(|v| !v.is_finite()) {
        return fail("non-finite field");
    }
    if bus.inertia_h < H_FLOOR {
        return fail(&format!("inertia {} below floor {H_FLOOR}", bus.inertia_h));
    }
    if bus.damping < 0.0 {
        return fail("negative damping");
    }
    if bus.voltage <= 0.0 {
        return fail("non-positive voltage");
    }
    if !(0.0..=1.0).contains(&bus.pv_fraction) {
        return fail("pv_fraction outside [0, 1]");
    }
    Ok(())
}

pub fn load_network(path: &Path) -> Result<Network> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Network::from_json(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn save_network(net: &Network, path: &Path) -> Result<()> {
    let mut text = net.to_json();
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Electrical and mechanical parameters shared by every bus and branch of a
/// synthetic network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformParams {
    pub spacing: f64,
    pub inertia_h: f64,
    pub damping: f64,
    pub susceptance: f64,
    pub voltage: f64,
    /// Local generation matched by an equal local load at every bus.
    #[serde(default)]
    pub generation: f64,
}

impl UniformParams {
    pub fn new(spacing: f64, inertia_h: f64, damping: f64, susceptance: f64, voltage: f64) -> Self {
        UniformParams { spacing, inertia_h, damping, susceptance, voltage, generation: 0.0 }
    }

    pub fn with_generation(mut self, generation: f64) -> Self {
        self.generation = generation;
        self
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("spacing", self.spacing),
            ("inertia_h", self.inertia_h),
            ("damping", self.damping),
            ("susceptance", self.susceptance),
            ("voltage", self.voltage),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.generation.is_finite() && self.generation >= 0.0) {
            return Err(Error::InvalidParameter(format!("generation must be non-negative, got {}", self.generation)));
        }
        Ok(())
    }

    fn bus(&self, id: BusId, x: f64, y: f64) -> Bus {
        Bus {
            id,
            x,
            y,
            inertia_h: self.inertia_h,
            damping: self.damping,
            voltage: self.voltage,
            p_mech: self.generation,
            p_load: self.generation,
            pv_fraction: 0.0,
        }
    }
}

/// `n` buses on the x axis with ids `1..=n`. A non-zero `flow` injects that
/// power at one end and withdraws it at the other, so every link carries it.
pub fn build_chain(n: usize, params: &UniformParams, flow: f64) -> Result<Network> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("chain needs at least 2 buses, got {n}")));
    }
    params.validate()?;
    if !flow.is_finite() {
        return Err(Error::InvalidParameter("flow must be finite".into()));
    }
    let mut buses: Vec<Bus> =
        (0..n).map(|i| params.bus(i as BusId + 1, i as f64 * params.spacing, 0.0)).collect();
    if flow > 0.0 {
        buses[0].p_mech += flow;
        buses[n - 1].p_load += flow;
    } else if flow < 0.0 {
        buses[0].p_load -= flow;
        buses[n - 1].p_mech -= flow;
    }
    let branches = (1..n)
        .map(|i| Branch { from: i as BusId, to: i as BusId + 1, susceptance: params.susceptance })
        .collect();
    Network::new(DEFAULT_F0, buses, branches)
}

/// Axis-aligned rectangle (inclusive) whose buses get their inertia scaled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertiaRegion {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub multiplier: f64,
}

impl InertiaRegion {
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}

/// Id of the lattice bus at `(row, col)`.
pub fn lattice_id(cols: usize, row: usize, col: usize) -> BusId {
    (row * cols + col) as BusId + 1
}

/// `rows × cols` buses on a square grid with 4-neighbour branches. Bus
/// `(r, c)` sits at `(c·spacing, r·spacing)`. Regions apply multiplicatively
/// to the inertia of every bus they contain.
pub fn build_lattice(
    rows: usize,
    cols: usize,
    params: &UniformParams,
    heterogeneity: &[InertiaRegion],
) -> Result<Network> {
    if rows < 2 || cols < 2 {
        return Err(Error::InvalidParameter(format!("lattice needs at least 2x2 buses, got {rows}x{cols}")));
    }
    params.validate()?;
    for region in heterogeneity {
        if !(region.multiplier.is_finite() && region.multiplier > 0.0) {
            return Err(Error::InvalidParameter(format!("inertia multiplier {} must be positive", region.multiplier)));
        }
    }
    let mut buses = Vec::with_capacity(rows * cols);
    let mut branches = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let id = lattice_id(cols, r, c);
            let mut bus = params.bus(id, c as f64 * params.spacing, r as f64 * params.spacing);
            let pos = bus.pos();
            for region in heterogeneity.iter().filter(|g| g.contains(pos)) {
                bus.inertia_h = (bus.inertia_h * region.multiplier).max(H_FLOOR);
            }
            buses.push(bus);
            if c + 1 < cols {
                branches.push(Branch { from: id, to: lattice_id(cols, r, c + 1), susceptance: params.susceptance });
            }
            if r + 1 < rows {
                branches.push(Branch { from: id, to: lattice_id(cols, r + 1, c), susceptance: params.susceptance });
            }
        }
    }
    Network::new(DEFAULT_F0, buses, branches)
}
