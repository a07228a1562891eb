//! Pre-disturbance operating point of the lossless network.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::network::Network;

pub const EQUILIBRIUM_TOL: f64 = 1e-10;
pub const MAX_NEWTON_ITERATIONS: usize = 50;

/// Electrical power leaving each bus, `P_e,i = Σ_j V_i V_j B_ij sin(θ_i − θ_j)`.
pub fn electrical_power(net: &Network, angles: &[f64]) -> Vec<f64> {
    let mut pe = vec![0.0; net.len()];
    let buses = net.buses();
    for (i, j, b) in net.branch_indices() {
        let flow = buses[i].voltage * buses[j].voltage * b * (angles[i] - angles[j]).sin();
        pe[i] += flow;
        pe[j] -= flow;
    }
    pe
}

/// Power-balance mismatch `P_e − (p_mech − p_load)` per bus.
pub fn mismatch(net: &Network, angles: &[f64]) -> Vec<f64> {
    electrical_power(net, angles)
        .into_iter()
        .zip(net.buses())
        .map(|(pe, bus)| pe - bus.net_injection())
        .collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Solves for the angles at which every bus is in power balance, with the
/// first bus as the zero-angle reference. Damped Newton with step halving;
/// the final residual is recomputed and checked before returning.
pub fn solve_equilibrium(net: &Network) -> Result<Vec<f64>> {
    let n = net.len();
    let mut theta = vec![0.0; n];
    let mut resid = mismatch(net, &theta);
    let mut norm = max_abs(&resid);
    let branches = net.branch_indices();
    let buses = net.buses();

    // Once inside tolerance, a couple of extra Newton steps bring the residual
    // down to rounding level.
    let mut polish = 0;
    for iteration in 0..=MAX_NEWTON_ITERATIONS {
        if norm <= EQUILIBRIUM_TOL {
            if norm == 0.0 || polish >= 2 || iteration == MAX_NEWTON_ITERATIONS {
                return finish(net, theta);
            }
            polish += 1;
        }
        if iteration == MAX_NEWTON_ITERATIONS {
            break;
        }

        // Jacobian of P_e over the non-reference angles.
        let m = n - 1;
        let mut jac = DMatrix::<f64>::zeros(m, m);
        for &(i, j, b) in &branches {
            let g = buses[i].voltage * buses[j].voltage * b * (theta[i] - theta[j]).cos();
            if i > 0 {
                jac[(i - 1, i - 1)] += g;
            }
            if j > 0 {
                jac[(j - 1, j - 1)] += g;
            }
            if i > 0 && j > 0 {
                jac[(i - 1, j - 1)] -= g;
                jac[(j - 1, i - 1)] -= g;
            }
        }
        let rhs = DVector::from_iterator(m, resid[1..].iter().map(|r| -r));
        let Some(step) = jac.lu().solve(&rhs) else {
            break;
        };

        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..12 {
            let trial: Vec<f64> = theta
                .iter()
                .enumerate()
                .map(|(k, t)| if k == 0 { *t } else { t + alpha * step[k - 1] })
                .collect();
            let trial_resid = mismatch(net, &trial);
            let trial_norm = max_abs(&trial_resid);
            if trial_norm < norm {
                theta = trial;
                resid = trial_resid;
                norm = trial_norm;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted && norm <= EQUILIBRIUM_TOL {
            return finish(net, theta);
        }
        if !accepted {
            // Take the smallest step anyway so the iteration can escape a
            // plateau; the cap bounds the work.
            for k in 1..n {
                theta[k] += alpha * step[k - 1];
            }
            resid = mismatch(net, &theta);
            norm = max_abs(&resid);
        }
    }
    Err(Error::NoConvergence { iterations: MAX_NEWTON_ITERATIONS, residual: norm })
}

fn finish(net: &Network, theta: Vec<f64>) -> Result<Vec<f64>> {
    let check = max_abs(&mismatch(net, &theta));
    if check <= EQUILIBRIUM_TOL {
        Ok(theta)
    } else {
        Err(Error::NoConvergence { iterations: MAX_NEWTON_ITERATIONS, residual: check })
    }
}
