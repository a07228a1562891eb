//! Acceptance gate. Runs criteria 1–7 twice in separate directories, checks
//! criterion 8 by comparing the two output trees byte for byte, prints one
//! PASS/FAIL line per criterion and exits non-zero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use emwave::config::RunConfig;
use emwave::detect::{TdoaEntry, TdoaSamples};
use emwave::dynamics::{simulate, simulate_from, total_energy, Disturbance, SimConfig, SwingState};
use emwave::export::write_field_csv;
use emwave::field::{speed_field, GridSpec, ScalarField};
use emwave::locate::locate_event;
use emwave::network::{build_chain, build_lattice, lattice_id, save_network, Bus, Network, UniformParams};
use emwave::pipeline::{run_analyze, run_end_to_end, run_locate, run_scenario, run_simulate, Analysis};
use emwave::powerflow::solve_equilibrium;
use emwave::scenario::{apply_pv_scenario, RegionWeights, ScenarioSpec};
use emwave::stats::spearman;

type Check = Result<(bool, String), String>;

const LATTICE: usize = 30;
const SPACING: f64 = 100.0;
const EXTENT: f64 = SPACING * (LATTICE - 1) as f64;

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn lattice_params(h: f64, d: f64) -> UniformParams {
    UniformParams::new(SPACING, h, d, 4.0, 1.0)
}

fn aligned_grid() -> Value {
    json!({ "x_min": 0.0, "x_max": EXTENT, "y_min": 0.0, "y_max": EXTENT, "nx": LATTICE, "ny": LATTICE })
}

fn save(dir: &Path, name: &str, net: &Network) -> Result<PathBuf, String> {
    let p = dir.join(name);
    save_network(net, &p).map_err(fail)?;
    Ok(p)
}

fn config(doc: Value) -> Result<RunConfig, String> {
    RunConfig::from_value(doc).map_err(fail)
}

fn tdoa_by_bus(a: &Analysis) -> BTreeMap<u32, f64> {
    a.samples.entries.iter().map(|e| (e.bus, e.tdoa)).collect()
}

/// 1. TDOA increases with distance from the tripped end of a chain.
fn tdoa_monotonicity(dir: &Path) -> Check {
    let net = build_chain(20, &UniformParams::new(50.0, 4.0, 1.0, 10.0, 1.0), 0.0).map_err(fail)?;
    let net_path = save(dir, "chain20.json", &net)?;
    let run = |name: &str, sigma: f64| -> Result<Analysis, String> {
        let cfg = config(json!({
            "network": net_path,
            "disturbance": { "bus": 1, "delta_p": -1.0, "t_event": 2.0 },
            "sim": { "dt": 0.001, "t_end": 6.0 },
            "sensor": { "noise_sigma": sigma },
            "seed": 2024,
            "out": dir.join(name),
        }))?;
        run_simulate(&cfg).map_err(fail)?;
        Ok(run_analyze(&cfg).map_err(fail)?.1)
    };

    let clean = tdoa_by_bus(&run("chain_noiseless", 0.0)?);
    let increasing = clean.len() == 20 && clean.values().zip(clean.values().skip(1)).all(|(a, b)| b > a);

    let noisy = tdoa_by_bus(&run("chain_noisy", 0.0002)?);
    let ids: Vec<f64> = noisy.keys().map(|&b| b as f64).collect();
    let times: Vec<f64> = noisy.values().copied().collect();
    let rho = spearman(&ids, &times).map_err(fail)?;
    Ok((
        increasing && noisy.len() == 20 && rho >= 0.99,
        format!("noiseless strictly increasing: {increasing} ({} arrivals); noisy Spearman {rho:.4} (>= 0.99)", clean.len()),
    ))
}

/// 2. Scaling H by 4 and D by 2 doubles every TDOA and halves speeds.
fn inertia_scaling(dir: &Path) -> Check {
    let trip = lattice_id(LATTICE, LATTICE / 2, LATTICE / 2);
    let run = |name: &str, h: f64, d: f64, t_end: f64| -> Result<Analysis, String> {
        let net = build_lattice(LATTICE, LATTICE, &lattice_params(h, d), &[]).map_err(fail)?;
        let net_path = save(dir, &format!("{name}.json"), &net)?;
        let cfg = config(json!({
            "network": net_path,
            "disturbance": { "bus": trip, "delta_p": -2.0, "t_event": 2.0 },
            "sim": { "dt": 0.001, "t_end": t_end },
            "sensor": { "sample_rate": 1000.0, "noise_sigma": 0.0 },
            "detector": { "mode": "relative", "fraction": 0.2 },
            "grid": aligned_grid(),
            "out": dir.join(name),
        }))?;
        Ok(run_end_to_end(&cfg).map_err(fail)?.1)
    };
    // Time stretches by √4 = 2, so the scaled run needs twice the post-event span.
    let base = run("lattice_h4", 4.0, 1.0, 5.0)?;
    let scaled = run("lattice_h16", 16.0, 2.0, 8.0)?;

    let (tb, ts) = (tdoa_by_bus(&base), tdoa_by_bus(&scaled));
    let same_set = tb.len() == LATTICE * LATTICE && tb.keys().eq(ts.keys());
    let ratios: Vec<f64> = tb.iter().filter_map(|(bus, t)| ts.get(bus).map(|s| s / t)).collect();
    let worst = ratios.iter().map(|r| (r / 2.0 - 1.0).abs()).fold(0.0, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let (mb, ms) = (base.median("interior").ok_or("no interior median")?, scaled.median("interior").ok_or("no interior median")?);
    let speed_ratio = ms / mb;
    let speed_err = (speed_ratio / 0.5 - 1.0).abs();
    Ok((
        same_set && worst <= 0.01 && speed_err <= 0.02,
        format!(
            "{} TDOA ratios in [{lo:.5}, {hi:.5}] (2 ± 1%); interior median speed {mb:.1} -> {ms:.1}, ratio {speed_ratio:.5} (0.5 ± 2%)",
            ratios.len()
        ),
    ))
}

/// 3. Two-region lattice: speed correlates with local PV penetration.
fn penetration_correlation(dir: &Path) -> Check {
    let base = build_lattice(LATTICE, LATTICE, &lattice_params(4.0, 1.0).with_generation(1.0), &[]).map_err(fail)?;
    let mid = EXTENT / 2.0;
    let weights = base.buses().iter().map(|b| (b.id, if b.x > mid { 1.0 } else { 0.0 })).collect();
    let spec = ScenarioSpec { penetration: 0.3, region_weights: RegionWeights::PerBus(weights), seed: 0 };
    let net = apply_pv_scenario(&base, &spec).map_err(fail)?;
    let pv_ok = net.buses().iter().all(|b| b.pv_fraction == if b.x > mid { 0.6 } else { 0.0 });
    let net_path = save(dir, "two_region.json", &net)?;

    let cfg = config(json!({
        "network": net_path,
        "disturbance": { "bus": lattice_id(LATTICE, LATTICE / 2, LATTICE / 2), "delta_p": -2.0, "t_event": 2.0 },
        "sim": { "dt": 0.001, "t_end": 6.0 },
        "sensor": { "sample_rate": 100.0, "noise_sigma": 0.0002 },
        "grid": aligned_grid(),
        "min_grad": 2e-4,
        "regions": [
            { "name": "A", "x": [0.0, mid], "y": [0.0, EXTENT] },
            { "name": "B", "x": [mid, EXTENT], "y": [0.0, EXTENT] },
        ],
        "seed": 7,
        "out": dir.join("two_region"),
    }))?;
    let a = run_end_to_end(&cfg).map_err(fail)?.1;
    let r = a.correlation().ok_or("correlation undefined")?;
    let (ma, mb) = (a.median("A").ok_or("no A median")?, a.median("B").ok_or("no B median")?);
    Ok((
        pv_ok && r > 0.8 && mb >= 1.2 * ma,
        format!("Pearson r {r:.4} (> 0.8); median speed A {ma:.1}, B {mb:.1}, B/A {:.3} (>= 1.2)", mb / ma),
    ))
}

/// 4. Uniform sweep: median speed rises with penetration, 0% matches baseline bytes.
fn monotone_sweep(dir: &Path) -> Check {
    let net = build_lattice(LATTICE, LATTICE, &lattice_params(4.0, 1.0).with_generation(1.0), &[]).map_err(fail)?;
    let net_path = save(dir, "sweep_lattice.json", &net)?;
    let scenarios = dir.join("sweep_scenarios.json");
    let specs = json!([
        { "penetration": 0.0, "region_weights": "uniform", "seed": 0 },
        { "penetration": 0.25, "region_weights": "uniform", "seed": 0 },
        { "penetration": 0.65, "region_weights": "uniform", "seed": 0 },
    ]);
    fs::write(&scenarios, specs.to_string()).map_err(fail)?;
    let doc = |out: &str| {
        json!({
            "network": net_path,
            "disturbance": { "bus": lattice_id(LATTICE, LATTICE / 2, LATTICE / 2), "delta_p": -2.0, "t_event": 2.0 },
            "sim": { "dt": 0.001, "t_end": 6.0 },
            "grid": aligned_grid(),
            "scenarios": scenarios,
            "seed": 99,
            "trajectory_stride": 1000,
            "out": dir.join(out),
        })
    };

    let sweep_cfg = config(doc("sweep"))?;
    let (_, outcomes) = run_scenario(&sweep_cfg).map_err(fail)?;
    let medians: Vec<f64> = outcomes
        .iter()
        .map(|o| o.result.as_ref().map_err(fail).and_then(|a| a.median("interior").ok_or("no median".into())))
        .collect::<Result<_, String>>()?;
    let increasing = medians.windows(2).all(|w| w[1] > w[0]);

    let base_cfg = config(doc("sweep_baseline"))?;
    run_simulate(&base_cfg).map_err(fail)?;
    run_analyze(&base_cfg).map_err(fail)?;
    let same = |a: &str, b: &str| -> Result<bool, String> {
        Ok(fs::read(dir.join("sweep").join(a)).map_err(fail)? == fs::read(dir.join("sweep_baseline").join(b)).map_err(fail)?)
    };
    let identical = same("scenario_0_speed_field.csv", "speed_field.csv")? && same("scenario_0_tdoa.csv", "tdoa.csv")?;
    Ok((
        increasing && identical,
        format!(
            "interior median speed at 0/25/65%: {:.1} / {:.1} / {:.1}; 0% scenario byte-identical to baseline: {identical}",
            medians[0], medians[1], medians[2]
        ),
    ))
}

/// 5. Gradient oracle on injected planar and radial arrival maps.
fn speed_oracle(dir: &Path) -> Check {
    let c = 1500.0;
    let planar_grid = GridSpec::new(0.0, 3000.0, 0.0, 2000.0, 61, 41).map_err(fail)?;
    let planar = ScalarField::from_fn(planar_grid, |p| Some(p.x / c));
    let ps = speed_field(&planar, 1e-6).map_err(fail)?;
    let mut planar_err: f64 = 0.0;
    let mut planar_cells = 0;
    for j in 1..planar_grid.ny - 1 {
        for i in 1..planar_grid.nx - 1 {
            let v = ps.get(i, j).ok_or("interior planar cell masked")?;
            planar_err = planar_err.max((v - c).abs() / c);
            planar_cells += 1;
        }
    }

    // 200×200 nodes with the apex on node (100, 100).
    let h = 10.0;
    let radial_grid = GridSpec::new(-100.0 * h, 99.0 * h, -100.0 * h, 99.0 * h, 200, 200).map_err(fail)?;
    let radial = ScalarField::from_fn(radial_grid, |p| Some((p.x * p.x + p.y * p.y).sqrt() / c));
    let rs = speed_field(&radial, 1e-6).map_err(fail)?;
    let mut radial_err: f64 = 0.0;
    let mut radial_cells = 0;
    for j in 0..200usize {
        for i in 0..200usize {
            if i.abs_diff(100) <= 3 && j.abs_diff(100) <= 3 {
                continue;
            }
            if let Some(v) = rs.get(i, j) {
                radial_err = radial_err.max((v - c).abs() / c);
                radial_cells += 1;
            }
        }
    }
    write_field_csv(&dir.join("oracle_planar_speed.csv"), &ps).map_err(fail)?;
    write_field_csv(&dir.join("oracle_radial_speed.csv"), &rs).map_err(fail)?;
    Ok((
        planar_err <= 1e-12 && radial_err <= 0.02 && radial_cells == 200 * 200 - 49,
        format!(
            "planar: {planar_cells} interior cells, max rel error {planar_err:.2e} (<= 1e-12); radial: {radial_cells} cells, max rel error {:.3}% (<= 2%)",
            radial_err * 100.0
        ),
    ))
}

/// 6. Grid-search localisation, exact and end to end.
fn localization(dir: &Path) -> Check {
    let grid = GridSpec::new(0.0, EXTENT, 0.0, EXTENT, LATTICE, LATTICE).map_err(fail)?;
    let (src_col, src_row) = (7, 19);
    let source = grid.point(src_col, src_row);
    let entries = (0..LATTICE * LATTICE)
        .step_by(7)
        .map(|k| {
            let pos = grid.point(k % LATTICE, k / LATTICE);
            TdoaEntry { bus: k as u32 + 1, pos, tdoa: source.distance(pos) / 1500.0 }
        })
        .collect();
    let exact = locate_event(&TdoaSamples::new(entries, 0.0, None), &grid).map_err(fail)?;
    let exact_ok = (exact.col, exact.row) == (src_col, src_row) && exact.residual <= 1e-20;

    let net = build_lattice(LATTICE, LATTICE, &lattice_params(4.0, 1.0), &[]).map_err(fail)?;
    let net_path = save(dir, "locate_lattice.json", &net)?;
    let trials: Vec<Result<(usize, usize, usize, usize), String>> = (0..20u64)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + trial);
            let (row, col) = (rng.random_range(3..LATTICE - 3), rng.random_range(3..LATTICE - 3));
            let out = dir.join(format!("locate_trial_{trial:02}"));
            let cfg = config(json!({
                "network": net_path,
                "disturbance": { "bus": lattice_id(LATTICE, row, col), "delta_p": -2.0, "t_event": 2.0 },
                "sim": { "dt": 0.001, "t_end": 6.0 },
                "grid": aligned_grid(),
                "seed": trial,
                "out": out,
                "tdoa": out.join("tdoa.csv"),
            }))?;
            run_end_to_end(&cfg).map_err(fail)?;
            let (_, loc) = run_locate(&cfg).map_err(fail)?;
            Ok((row, col, loc.row, loc.col))
        })
        .collect();
    let trials: Vec<_> = trials.into_iter().collect::<Result<_, _>>()?;
    let hits = trials.iter().filter(|(r, c, lr, lc)| r.abs_diff(*lr) <= 1 && c.abs_diff(*lc) <= 1).count();
    let misses: Vec<String> = trials
        .iter()
        .filter(|(r, c, lr, lc)| r.abs_diff(*lr) > 1 || c.abs_diff(*lc) > 1)
        .map(|(r, c, lr, lc)| format!("({r},{c})->({lr},{lc})"))
        .collect();
    Ok((
        exact_ok && hits * 100 >= 95 * trials.len(),
        format!(
            "exact: node ({},{}) residual {:.1e}; end-to-end: {hits}/{} within one cell (>= 95%){}",
            exact.col,
            exact.row,
            exact.residual,
            trials.len(),
            if misses.is_empty() { String::new() } else { format!(", misses {}", misses.join(" ")) }
        ),
    ))
}

fn undamped(net: &Network) -> Result<Network, String> {
    let buses: Vec<Bus> = net.buses().iter().map(|b| Bus { damping: 0.0, ..b.clone() }).collect();
    net.with_buses(buses).map_err(fail)
}

/// 7. Conservation, fixed point, oscillation period and step convergence.
fn dynamics_suite(dir: &Path) -> Check {
    let params = UniformParams::new(50.0, 4.0, 1.0, 10.0, 1.0);

    // Energy drift with D = 0 over 10 s, relative to |E(t_event⁺)|; the drift
    // against the peak kinetic energy is reported alongside as a stricter view.
    let chain = undamped(&build_chain(20, &params, 0.0).map_err(fail)?)?;
    let dist = Disturbance { bus: 1, delta_p: -0.5, t_event: 0.0 };
    let theta0 = solve_equilibrium(&chain).map_err(fail)?;
    let traj = simulate_from(&chain, SwingState::at_rest(theta0), &dist, &SimConfig::new(0.001, 10.0)).map_err(fail)?;
    let omega_s = chain.omega_s();
    let energies: Vec<f64> = (0..traj.len()).map(|k| total_energy(&chain, &traj.state_at(k), Some(&dist))).collect();
    let peak_kinetic = (0..traj.len())
        .map(|k| {
            let s = traj.state_at(k);
            chain.buses().iter().zip(&s.rates).map(|(b, r)| b.inertia_h / omega_s * r * r).sum::<f64>()
        })
        .fold(0.0, f64::max);
    let abs_drift = energies.iter().map(|e| (e - energies[0]).abs()).fold(0.0, f64::max);
    let drift = abs_drift / energies[0].abs();
    let drift_kinetic = abs_drift / peak_kinetic;

    // Zero disturbance on a loaded chain stays at rest.
    let loaded = build_chain(20, &params, 3.0).map_err(fail)?;
    let rest = simulate(&loaded, &Disturbance { bus: 5, delta_p: 0.0, t_event: 1.0 }, &SimConfig::new(0.001, 10.0))
        .map_err(fail)?;
    let rest_dev = rest.freq_dev.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);

    // Two identical machines: small-signal period 2π / √(K (1/M1 + 1/M2)),
    // i.e. 2π / √(ω_s B / H) at θ* = 0.
    let (h1, h2, b) = (4.0, 4.0, 8.0);
    let two = Network::new(
        60.0,
        vec![
            Bus { id: 1, x: 0.0, y: 0.0, inertia_h: h1, damping: 0.0, voltage: 1.0, p_mech: 0.0, p_load: 0.0, pv_fraction: 0.0 },
            Bus { id: 2, x: 100.0, y: 0.0, inertia_h: h2, damping: 0.0, voltage: 1.0, p_mech: 0.0, p_load: 0.0, pv_fraction: 0.0 },
        ],
        vec![emwave::network::Branch { from: 1, to: 2, susceptance: b }],
    )
    .map_err(fail)?;
    let w_s = two.omega_s();
    let (m1, m2) = (2.0 * h1 / w_s, 2.0 * h2 / w_s);
    let step = 1e-3;
    // Post-event equilibrium angle difference: B sin δ = ΔP · M2 / (M1 + M2).
    let delta = (step * m2 / (m1 + m2) / b).asin();
    let expected = 2.0 * std::f64::consts::PI / (b * delta.cos() * (1.0 / m1 + 1.0 / m2)).sqrt();
    let osc = simulate(&two, &Disturbance { bus: 1, delta_p: step, t_event: 0.0 }, &SimConfig::new(0.0005, 10.0))
        .map_err(fail)?;
    let rel: Vec<f64> = osc.freq_dev[0].iter().zip(&osc.freq_dev[1]).map(|(a, b)| a - b).collect();
    let mut crossings = Vec::new();
    for k in 1..rel.len() {
        if rel[k - 1] < 0.0 && rel[k] >= 0.0 || rel[k - 1] > 0.0 && rel[k] <= 0.0 {
            let f = rel[k - 1] / (rel[k - 1] - rel[k]);
            crossings.push(osc.times[k - 1] + f * osc.dt);
        }
    }
    crossings.retain(|t| *t > 1e-9);
    let measured = if crossings.len() >= 3 {
        2.0 * (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64
    } else {
        f64::NAN
    };
    let period_err = (measured / expected - 1.0).abs();

    // Step halving on the default-damped chain.
    let trip = Disturbance { bus: 1, delta_p: -1.0, t_event: 1.0 };
    let chain_d = build_chain(20, &params, 0.0).map_err(fail)?;
    let coarse = simulate(&chain_d, &trip, &SimConfig::new(0.001, 5.0)).map_err(fail)?;
    let fine = simulate(&chain_d, &trip, &SimConfig::new(0.0005, 5.0)).map_err(fail)?;
    let mut halving: f64 = 0.0;
    for (sc, sf) in coarse.freq_dev.iter().zip(&fine.freq_dev) {
        for k in 0..coarse.len() {
            halving = halving.max((sc[k] - sf[2 * k]).abs());
        }
    }

    let report = json!({
        "energy_drift_relative": drift,
        "energy_drift_over_peak_kinetic": drift_kinetic,
        "fixed_point_max_hz": rest_dev,
        "two_machine_period": { "expected_s": expected, "measured_s": measured, "relative_error": period_err },
        "dt_halving_max_hz": halving,
    });
    fs::write(dir.join("dynamics_suite.json"), serde_json::to_string_pretty(&report).map_err(fail)?).map_err(fail)?;
    Ok((
        drift <= 1e-6 && rest_dev <= 1e-12 && period_err <= 0.01 && halving <= 1e-7,
        format!(
            "energy drift {drift:.2e} of |E0| (<= 1e-6), {drift_kinetic:.2e} of peak kinetic; fixed point {rest_dev:.1e} Hz (<= 1e-12); period {measured:.5} s vs {expected:.5} s, error {:.3}% (<= 1%); dt halving {halving:.2e} Hz (<= 1e-7)",
            period_err * 100.0
        ),
    ))
}

struct Criterion {
    id: u8,
    name: &'static str,
    limit: Option<Duration>,
    run: fn(&Path) -> Check,
}

const CRITERIA: [Criterion; 7] = [
    Criterion { id: 1, name: "TDOA-distance monotonicity", limit: Some(Duration::from_secs(10)), run: tdoa_monotonicity },
    Criterion { id: 2, name: "inertia scaling", limit: Some(Duration::from_secs(60)), run: inertia_scaling },
    Criterion { id: 3, name: "penetration-speed correlation", limit: Some(Duration::from_secs(60)), run: penetration_correlation },
    Criterion { id: 4, name: "monotone penetration sweep", limit: None, run: monotone_sweep },
    Criterion { id: 5, name: "speed-field oracle", limit: None, run: speed_oracle },
    Criterion { id: 6, name: "localization", limit: Some(Duration::from_secs(300)), run: localization },
    Criterion { id: 7, name: "dynamics conservation suite", limit: None, run: dynamics_suite },
];

struct Outcome {
    pass: bool,
    detail: String,
}

fn run_suite(root: &Path) -> Vec<Outcome> {
    CRITERIA
        .iter()
        .map(|c| {
            let dir = root.join(format!("criterion_{}", c.id));
            fs::create_dir_all(&dir).expect("create criterion dir");
            let start = Instant::now();
            let result = (c.run)(&dir);
            let elapsed = start.elapsed();
            let within = c.limit.is_none_or(|l| elapsed < l);
            let timing = match c.limit {
                Some(l) => format!("{:.1} s (limit {} s)", elapsed.as_secs_f64(), l.as_secs()),
                None => format!("{:.1} s", elapsed.as_secs_f64()),
            };
            match result {
                Ok((pass, detail)) => Outcome { pass: pass && within, detail: format!("{detail}; {timing}") },
                Err(e) => Outcome { pass: false, detail: format!("error: {e}; {timing}") },
            }
        })
        .collect()
}

fn files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).expect("read output dir") {
            let p = entry.expect("dir entry").path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).expect("read output"));
            }
        }
    }
    out
}

fn main() -> ExitCode {
    let first = tempfile::tempdir().expect("temp dir");
    let second = tempfile::tempdir().expect("temp dir");
    let outcomes = run_suite(first.path());
    let rerun = run_suite(second.path());

    let (a, b) = (files(first.path()), files(second.path()));
    let differing: Vec<String> = a
        .iter()
        .filter(|(p, bytes)| b.get(*p) != Some(bytes))
        .map(|(p, _)| p.display().to_string())
        .chain(b.keys().filter(|p| !a.contains_key(*p)).map(|p| p.display().to_string()))
        .collect();
    let same_verdicts = outcomes.iter().zip(&rerun).all(|(x, y)| x.pass == y.pass);
    let repro = Outcome {
        pass: differing.is_empty() && same_verdicts && !a.is_empty(),
        detail: format!(
            "{} output files compared across two runs, {} differ{}",
            a.len(),
            differing.len(),
            if differing.is_empty() { String::new() } else { format!(": {}", differing.join(", ")) }
        ),
    };

    let mut all = true;
    println!();
    for (c, o) in CRITERIA.iter().zip(&outcomes).map(|(c, o)| ((c.id, c.name), o)).chain([((8, "reproducibility"), &repro)]) {
        all &= o.pass;
        println!("criterion {} [{}] {}: {}", c.0, if o.pass { "PASS" } else { "FAIL" }, c.1, o.detail);
    }
    println!("\nacceptance: {}", if all { "all criteria passed" } else { "FAILED" });
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
