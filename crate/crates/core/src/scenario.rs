//! PV-penetration scenarios: inverter-based generation displaces synchronous
//! dispatch one-for-one and carries no rotating mass.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{BusId, Network, H_FLOOR};
use crate::rng;

/// Where PV concentrates. Buses absent from a per-bus map get weight 0.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WeightsRepr", into = "WeightsRepr")]
pub enum RegionWeights {
    #[default]
    Uniform,
    /// Weights drawn uniformly in [0, 1) per generating bus from the scenario seed.
    Random,
    PerBus(BTreeMap<BusId, f64>),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum WeightsRepr {
    Named(String),
    Map(BTreeMap<String, f64>),
}

impl TryFrom<WeightsRepr> for RegionWeights {
    type Error = String;
    fn try_from(repr: WeightsRepr) -> std::result::Result<Self, String> {
        match repr {
            WeightsRepr::Named(s) if s == "uniform" => Ok(RegionWeights::Uniform),
            WeightsRepr::Named(s) if s == "random" => Ok(RegionWeights::Random),
            WeightsRepr::Named(s) => Err(format!("unknown region_weights '{s}'")),
            WeightsRepr::Map(m) => m
                .into_iter()
                .map(|(k, w)| k.parse::<BusId>().map(|id| (id, w)).map_err(|_| format!("bad bus id '{k}'")))
                .collect::<std::result::Result<_, _>>()
                .map(RegionWeights::PerBus),
        }
    }
}

impl From<RegionWeights> for WeightsRepr {
    fn from(w: RegionWeights) -> Self {
        match w {
            RegionWeights::Uniform => WeightsRepr::Named("uniform".into()),
            RegionWeights::Random => WeightsRepr::Named("random".into()),
            RegionWeights::PerBus(m) => WeightsRepr::Map(m.into_iter().map(|(k, w)| (k.to_string(), w)).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    /// Target share of total p_mech supplied by PV.
    pub penetration: f64,
    #[serde(default)]
    pub region_weights: RegionWeights,
    #[serde(default)]
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn uniform(penetration: f64) -> Self {
        ScenarioSpec { penetration, region_weights: RegionWeights::Uniform, seed: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.penetration.is_finite() && (0.0..=1.0).contains(&self.penetration)) {
            return Err(Error::InvalidParameter(format!("penetration {} outside [0, 1]", self.penetration)));
        }
        if let RegionWeights::PerBus(map) = &self.region_weights {
            if let Some((id, w)) = map.iter().find(|(_, w)| !(w.is_finite() && **w >= 0.0)) {
                return Err(Error::InvalidParameter(format!("region weight {w} for bus {id} must be non-negative")));
            }
        }
        Ok(())
    }
}

pub fn load_scenarios(path: &Path) -> Result<Vec<ScenarioSpec>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        Many(Vec<ScenarioSpec>),
        One(ScenarioSpec),
    }
    let parsed: OneOrMany =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    let specs = match parsed {
        OneOrMany::Many(v) => v,
        OneOrMany::One(s) => vec![s],
    };
    for s in &specs {
        s.validate()?;
    }
    Ok(specs)
}

/// Assigns per-bus PV fractions so that the dispatch-weighted share equals
/// `spec.penetration`, then scales each bus's inertia by `1 − pv_fraction`
/// (floored at [`H_FLOOR`]). Fractions follow `min(1, α·w_i)` with a single
/// water level α. Existing `pv_fraction` values are replaced; injections,
/// voltages, positions and branches are untouched.
pub fn apply_pv_scenario(net: &Network, spec: &ScenarioSpec) -> Result<Network> {
    spec.validate()?;
    let buses = net.buses();
    let total_gen: f64 = buses.iter().filter(|b| b.p_mech > 0.0).map(|b| b.p_mech).sum();

    let weights: Vec<f64> = match &spec.region_weights {
        RegionWeights::Uniform => vec![1.0; buses.len()],
        RegionWeights::Random => {
            let mut rng = rng::seeded(spec.seed, rng::Stream::Siting);
            buses.iter().map(|_| rng.random::<f64>()).collect()
        }
        RegionWeights::PerBus(map) => {
            if let Some(id) = map.keys().find(|id| net.index_of(**id).is_none()) {
                return Err(Error::InvalidParameter(format!("region weight for unknown bus {id}")));
            }
            buses.iter().map(|b| map.get(&b.id).copied().unwrap_or(0.0)).collect()
        }
    };

    let pv = if spec.penetration == 0.0 {
        vec![0.0; buses.len()]
    } else {
        if total_gen <= 0.0 {
            return Err(Error::InfeasiblePenetration {
                target: spec.penetration,
                reason: "network has no generation to displace".into(),
            });
        }
        water_fill(
            &buses.iter().map(|b| b.p_mech.max(0.0)).collect::<Vec<_>>(),
            &weights,
            spec.penetration,
            total_gen,
        )?
    };

    let new_buses = buses
        .iter()
        .zip(&pv)
        .map(|(bus, &frac)| {
            let mut b = bus.clone();
            b.pv_fraction = frac;
            if frac > 0.0 {
                b.inertia_h = (bus.inertia_h * (1.0 - frac)).max(H_FLOOR);
            }
            b
        })
        .collect();
    net.with_buses(new_buses)
}

fn water_fill(gen: &[f64], weights: &[f64], penetration: f64, total_gen: f64) -> Result<Vec<f64>> {
    let target = penetration * total_gen;
    let reachable: f64 = gen.iter().zip(weights).filter(|(g, w)| **g > 0.0 && **w > 0.0).map(|(g, _)| g).sum();
    if reachable < target * (1.0 - 1e-12) {
        return Err(Error::InfeasiblePenetration {
            target: penetration,
            reason: format!("weighted buses carry only {:.6} of generation", reachable / total_gen),
        });
    }

    // Candidate buses in order of saturation (largest weight saturates first).
    let mut order: Vec<usize> = (0..gen.len()).filter(|&i| gen[i] > 0.0 && weights[i] > 0.0).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));

    let mut saturated = 0.0;
    let mut level = 0.0;
    for (k, &i) in order.iter().enumerate() {
        let rest = &order[k..];
        let weighted: f64 = rest.iter().map(|&j| weights[j] * gen[j]).sum();
        let unsat_gen: f64 = rest.iter().map(|&j| gen[j]).sum();
        level = if saturated == 0.0 && rest.iter().all(|&j| weights[j] == weights[i]) {
            // Equal weights: keep the fraction exactly equal to the target share.
            (penetration * (total_gen / unsat_gen)) / weights[i]
        } else {
            (target - saturated) / weighted
        };
        if level * weights[i] <= 1.0 {
            break;
        }
        saturated += gen[i];
        level = 1.0 / weights[i];
    }
    Ok(gen
        .iter()
        .zip(weights)
        .map(|(g, w)| if *g > 0.0 && *w > 0.0 { (level * w).min(1.0) } else { 0.0 })
        .collect())
}
