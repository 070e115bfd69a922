//! Thermal-creep (and temperature-jump) boundary layers and the slip
//! coefficient `beta0`.
//!
//! The layer distribution solves the half-space problem with incoming data
//! `Phi(0, v) = -A . grad T / (2 T^2)` and zero mass flux; its far state
//! `Phi_inf = mu_w^{1/2} (rho_B/rho + u_B . v / T + T_B (|v|^2 - 3T)/(2T^2))`
//! carries the slip velocity. For purely tangential wall-temperature
//! gradients the solution is odd in the tangential velocities, so `rho_B`
//! and `T_B` vanish and the tangential limit velocity per unit gradient is
//! the slip coefficient.

use crate::kinetics::burnett::BurnettFunctions;

use super::solve::{
    solve_milne, FluxConstraint, MilneGrid, MilneProblem, MilneSolution, SweepOptions, WallOperator,
};
use super::Result;

/// Far-state of a creep/jump layer in fluid variables.
#[derive(Debug, Clone)]
pub struct CreepLayerResult {
    pub rho_b: f64,
    pub u_b: [f64; 3],
    pub t_b: f64,
    /// Tangential limit velocity per unit tangential wall-temperature
    /// gradient; absent when the data had no tangential gradient.
    pub beta0: Option<f64>,
    pub solution: MilneSolution,
}

/// Incoming data `-A . g / (2 T^2)` restricted to `v_eta > 0`, with the
/// Burnett vectors expressed on the wall-frame grid (axis 0 = eta).
pub fn creep_incoming_data(
    burnett: &BurnettFunctions,
    temperature: f64,
    gradient: [f64; 3],
) -> Vec<f64> {
    let n = burnett.a[0].len();
    let scale = -0.5 / (temperature * temperature);
    (0..n)
        .map(|i| {
            scale
                * (burnett.a[0][i] * gradient[0]
                    + burnett.a[1][i] * gradient[1]
                    + burnett.a[2][i] * gradient[2])
        })
        .collect()
}

/// Solve the creep layer for a wall-temperature gradient
/// `(g_eta, g_phi, g_psi)` (normal component drives the temperature-jump
/// part, tangential components the creep part).
pub fn thermal_creep_layer(
    wall: &WallOperator,
    grid: &MilneGrid,
    burnett: &BurnettFunctions,
    gradient: [f64; 3],
    opts: SweepOptions,
) -> Result<CreepLayerResult> {
    let t = wall.maxwellian.temperature;
    let rho = wall.maxwellian.density();
    let incoming = creep_incoming_data(burnett, t, gradient);
    let problem = MilneProblem {
        wall_maxwellian: wall.maxwellian,
        q0: wall.q0,
        incoming,
        constraint: FluxConstraint::ZeroMassFlux,
        theta: 0.0,
    };
    let sol = solve_milne(wall, grid, &problem, opts)?;
    // map (p, b, c) to fluid variables: T_B = 2 T^2 c, u_B = T b,
    // rho_B = rho (p - 2 T c)
    let t_b = 2.0 * t * t * sol.limit_c;
    let u_b = [t * sol.limit_b[0], t * sol.limit_b[1], t * sol.limit_b[2]];
    let rho_b = rho * (sol.limit_p - 2.0 * t * sol.limit_c);
    let tang = (gradient[1] * gradient[1] + gradient[2] * gradient[2]).sqrt();
    let beta0 = if tang > 0.0 {
        // average the two tangential directions (identical by symmetry)
        Some((u_b[1] * gradient[1] + u_b[2] * gradient[2]) / (tang * tang))
    } else {
        None
    };
    Ok(CreepLayerResult { rho_b, u_b, t_b, beta0, solution: sol })
}
