//! Burnett functions and the transport coefficients built from them.
//!
//! `A_bar = v (|v|^2 - 5T) mu^{1/2}` and the traceless tensor
//! `B_bar = (v (x) v - |v|^2/3 I) mu^{1/2}` lie in `N-perp`; their
//! quasi-inverses `A = L^{-1} A_bar`, `B = L^{-1} B_bar` determine
//! `kappa I = int A (x) A_bar`, `sigma I = int (|v|^2 - 5T) A (x) A_bar`,
//! `lambda = T^{-1} int B_ij B_bar_ij (i != j)`.

use std::sync::Arc;

use super::cg::QuasiInverse;
use super::nullspace::NullSpaceBasis;
use super::operator::LinearizedOperator;
use super::{KineticsError, Result};

/// Upper-triangle order for symmetric 3x3 component storage.
pub const SYM_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

#[derive(Debug, Clone)]
pub struct BurnettFunctions {
    /// `A_i = L^{-1}[v_i (|v|^2 - 5T) mu^{1/2}]`, three grid vectors.
    pub a: [Vec<f64>; 3],
    pub a_bar: [Vec<f64>; 3],
    /// Independent components of the traceless symmetric `B`, `SYM_PAIRS` order.
    pub b: [Vec<f64>; 6],
    pub b_bar: [Vec<f64>; 6],
    /// Max projected residual of the quasi-inverse solves.
    pub max_residual: f64,
}

/// Build the source vectors `A_bar` on a grid.
pub fn a_bar_vectors(
    grid: &super::grid::VelocityGrid,
    m: &super::maxwellian::LocalMaxwellian,
) -> [Vec<f64>; 3] {
    let t = m.temperature;
    let mh = m.sqrt_on(grid);
    std::array::from_fn(|i| {
        grid.nodes
            .iter()
            .zip(&mh)
            .map(|(v, &s)| {
                let q = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                v[i] * (q - 5.0 * t) * s
            })
            .collect()
    })
}

/// Build the source vectors `B_bar` on a grid (`SYM_PAIRS` order).
pub fn b_bar_vectors(
    grid: &super::grid::VelocityGrid,
    m: &super::maxwellian::LocalMaxwellian,
) -> [Vec<f64>; 6] {
    let mh = m.sqrt_on(grid);
    std::array::from_fn(|k| {
        let (i, j) = SYM_PAIRS[k];
        grid.nodes
            .iter()
            .zip(&mh)
            .map(|(v, &s)| {
                let q = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                let delta = if i == j { q / 3.0 } else { 0.0 };
                (v[i] * v[j] - delta) * s
            })
            .collect()
    })
}

pub fn burnett_functions(
    op: &LinearizedOperator,
    basis: &NullSpaceBasis,
) -> Result<BurnettFunctions> {
    let grid = &op.grid;
    let a_bar = a_bar_vectors(grid, &op.maxwellian);
    let b_bar = b_bar_vectors(grid, &op.maxwellian);
    let qi = QuasiInverse::new(op, basis);
    let mut max_residual: f64 = 0.0;
    let solve = |g: &Vec<f64>, max_res: &mut f64| -> Result<Vec<f64>> {
        let mut rhs = g.clone();
        basis.project_out(&mut rhs);
        let sol = qi.solve(&rhs)?;
        *max_res = max_res.max(sol.projected_residual);
        Ok(sol.f)
    };
    let a: [Vec<f64>; 3] = [
        solve(&a_bar[0], &mut max_residual)?,
        solve(&a_bar[1], &mut max_residual)?,
        solve(&a_bar[2], &mut max_residual)?,
    ];
    let mut b: Vec<Vec<f64>> = Vec::with_capacity(6);
    for g in &b_bar {
        b.push(solve(g, &mut max_residual)?);
    }
    let b: [Vec<f64>; 6] = b.try_into().expect("six components");
    Ok(BurnettFunctions { a, a_bar, b, b_bar, max_residual })
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TransportCoefficients {
    pub kappa: f64,
    pub sigma: f64,
    pub lambda: f64,
    pub temperature_at: f64,
    /// Largest off-diagonal magnitude of the two `A (x) A_bar` tensors
    /// relative to the diagonal mean.
    pub isotropy_defect: f64,
}

/// Transport coefficients from Burnett moments, with an isotropy report.
pub fn transport_coefficients(
    burnett: &BurnettFunctions,
    op: &LinearizedOperator,
    isotropy_threshold: f64,
) -> Result<TransportCoefficients> {
    let grid = &op.grid;
    let t = op.maxwellian.temperature;
    let mut kappa_t = [[0.0f64; 3]; 3];
    let mut sigma_t = [[0.0f64; 3]; 3];
    let weighted: Vec<f64> = grid
        .nodes
        .iter()
        .map(|v| v[0] * v[0] + v[1] * v[1] + v[2] * v[2] - 5.0 * t)
        .collect();
    for i in 0..3 {
        for j in 0..3 {
            kappa_t[i][j] = grid.inner(&burnett.a[i], &burnett.a_bar[j]);
            let wa: Vec<f64> =
                burnett.a[i].iter().zip(&weighted).map(|(&x, &wgt)| x * wgt).collect();
            sigma_t[i][j] = grid.inner(&wa, &burnett.a_bar[j]);
        }
    }
    let diag = |m: &[[f64; 3]; 3]| (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    let offdiag = |m: &[[f64; 3]; 3]| {
        let mut worst: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    worst = worst.max(m[i][j].abs());
                }
            }
        }
        worst
    };
    let kappa = diag(&kappa_t);
    let sigma = diag(&sigma_t);
    let defect = offdiag(&kappa_t).max(offdiag(&sigma_t)) / kappa.abs();
    if defect > isotropy_threshold {
        return Err(KineticsError::IsotropyDefect { offdiag: defect, threshold: isotropy_threshold });
    }
    // lambda from the off-diagonal shear components
    let mut lambda = 0.0;
    for k in 3..6 {
        lambda += grid.inner(&burnett.b[k], &burnett.b_bar[k]);
    }
    let lambda = lambda / (3.0 * t);
    Ok(TransportCoefficients { kappa, sigma, lambda, temperature_at: t, isotropy_defect: defect })
}

/// Convenience: assemble operator + basis + Burnett + coefficients at `(P, T)`.
pub fn coefficients_at(
    grid: &Arc<super::grid::VelocityGrid>,
    pressure: f64,
    temperature: f64,
    q0: f64,
    opts: super::operator::AssemblyOptions,
) -> Result<(TransportCoefficients, BurnettFunctions, LinearizedOperator, NullSpaceBasis)> {
    let m = super::maxwellian::LocalMaxwellian::new(pressure, temperature);
    let op = LinearizedOperator::assemble(grid.clone(), &m, q0, opts)?;
    let basis = NullSpaceBasis::new(grid.clone(), &m);
    let burnett = burnett_functions(&op, &basis)?;
    let coeffs = transport_coefficients(&burnett, &op, 1e-6)?;
    Ok((coeffs, burnett, op, basis))
}
