//! Gaussian moment identities used throughout the energy estimates:
//! `int |v|^2 mu = 3 P` and `int mu |v|^2 (|v|^2 - 5T)^2 = 30 P T^2`.

use super::grid::VelocityGrid;
use super::maxwellian::LocalMaxwellian;

#[derive(Debug, Clone, serde::Serialize)]
pub struct MomentReport {
    pub pressure: f64,
    pub temperature: f64,
    pub second_moment: f64,
    pub second_moment_target: f64,
    pub second_moment_rel_error: f64,
    pub weighted_fourth_moment: f64,
    pub weighted_fourth_moment_target: f64,
    pub weighted_fourth_moment_rel_error: f64,
}

pub fn moment_identities(grid: &VelocityGrid, m: &LocalMaxwellian) -> MomentReport {
    let t = m.temperature;
    let p = m.pressure;
    let mu = m.on(grid);
    let m2: f64 = crate::util::kahan_sum(grid.nodes.iter().zip(&mu).zip(&grid.weights).map(
        |((v, &density), &w)| {
            let q = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            w * q * density
        },
    ));
    let m4: f64 = crate::util::kahan_sum(grid.nodes.iter().zip(&mu).zip(&grid.weights).map(
        |((v, &density), &w)| {
            let q = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
            let s = q - 5.0 * t;
            w * q * s * s * density
        },
    ));
    let t2 = 3.0 * p;
    let t4 = 30.0 * p * t * t;
    MomentReport {
        pressure: p,
        temperature: t,
        second_moment: m2,
        second_moment_target: t2,
        second_moment_rel_error: ((m2 - t2) / t2).abs(),
        weighted_fourth_moment: m4,
        weighted_fourth_moment_target: t4,
        weighted_fourth_moment_rel_error: ((m4 - t4) / t4).abs(),
    }
}
