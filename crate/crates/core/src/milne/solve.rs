//! Transport sweeps and source iteration for the half-space problem.

use std::sync::Arc;

use crate::kinetics::grid::VelocityGrid;
use crate::kinetics::maxwellian::LocalMaxwellian;
use crate::kinetics::nullspace::{ConservativeOperator, NullSpaceBasis};
use crate::kinetics::operator::{AssemblyOptions, LinearizedOperator};
use crate::util::line_fit;

use super::{bump_chibar, MilneError, Result};

/// Spatial grid in the stretched wall coordinate.
///
/// `eta` is measured in thermal mean free paths `l0 = sqrt(T) / nu(sqrt(T))`
/// of the wall gas and converted to the solver's physical units internally.
#[derive(Debug, Clone)]
pub struct MilneGrid {
    /// Node positions, `eta_nodes[0] = 0`, last = `length_mfp`, in mean
    /// free paths.
    pub eta_nodes: Vec<f64>,
    /// Half-space truncation depth in mean free paths.
    pub length_mfp: f64,
    /// Velocity grid in wall coordinates `(v_eta, v_phi, v_psi)` =
    /// grid axes `(0, 1, 2)`.
    pub velocity: Arc<VelocityGrid>,
}

impl MilneGrid {
    /// Geometrically stretched nodes: first cell `first_cell` mean free
    /// paths, growing by `ratio` per cell, capped at `max_cell`.
    pub fn stretched(
        velocity: Arc<VelocityGrid>,
        length_mfp: f64,
        first_cell: f64,
        ratio: f64,
        max_cell: f64,
    ) -> Self {
        assert!(length_mfp > 0.0 && first_cell > 0.0 && ratio >= 1.0);
        let mut eta_nodes = vec![0.0];
        let mut d = first_cell;
        while *eta_nodes.last().unwrap() + d < length_mfp {
            let next = eta_nodes.last().unwrap() + d;
            eta_nodes.push(next);
            d = (d * ratio).min(max_cell);
        }
        eta_nodes.push(length_mfp);
        Self { eta_nodes, length_mfp, velocity }
    }

    /// Default resolution for a given depth.
    pub fn standard(velocity: Arc<VelocityGrid>, length_mfp: f64) -> Self {
        Self::stretched(velocity, length_mfp, 0.02, 1.06, 0.35)
    }

    pub fn cells(&self) -> usize {
        self.eta_nodes.len() - 1
    }
}

/// Incoming-data constraint at the wall.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FluxConstraint {
    /// Shift the incoming datum along the incoming null direction until the
    /// wall mass flux vanishes.
    ZeroMassFlux,
    None,
}

/// Problem data for one half-space solve.
#[derive(Clone)]
pub struct MilneProblem {
    /// Wall temperature defining `mu_w`, `nu_w`, `K_w` (pressure enters
    /// through the Maxwellian's density).
    pub wall_maxwellian: LocalMaxwellian,
    pub q0: f64,
    /// Incoming data on `v_eta > 0` (full grid vector; only incoming
    /// entries are used).
    pub incoming: Vec<f64>,
    pub constraint: FluxConstraint,
    /// Velocity cutoff; 0 disables it. Must not exceed the smallest
    /// positive `v_eta` node.
    pub theta: f64,
}

/// Converged half-space profile with its diagnostics.
pub struct MilneSolution {
    pub grid: MilneGrid,
    /// Node values `G(eta_j, v_i)`, layout `node-major [i * n_eta + j]`.
    pub profile: Vec<f64>,
    /// Null-space coefficients `(p, b, c)` of the far state.
    pub limit_p: f64,
    pub limit_b: [f64; 3],
    pub limit_c: f64,
    /// Fitted decay rate (per mean free path) of `||G - g_inf||`.
    pub decay_rate: f64,
    /// Mass flux at every eta node.
    pub flux_trace: Vec<f64>,
    pub iterations: usize,
    /// Relative sup-norm changes per iteration.
    pub iteration_log: Vec<f64>,
    /// Mean free path used for unit conversion.
    pub mfp: f64,
    pub basis: Arc<NullSpaceBasis>,
}

impl MilneSolution {
    pub fn n_eta(&self) -> usize {
        self.grid.eta_nodes.len()
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        let n_eta = self.n_eta();
        (0..self.grid.velocity.len()).map(|i| self.profile[i * n_eta + j]).collect()
    }

    /// Far state as a grid vector.
    pub fn limit_vector(&self) -> Vec<f64> {
        let g = &self.grid.velocity;
        let m = &self.basis.maxwellian;
        let t = m.temperature;
        let mh = m.sqrt_on(g);
        g.nodes
            .iter()
            .zip(&mh)
            .map(|(v, &s)| {
                let q = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
                (self.limit_p
                    + self.limit_b[0] * v[0]
                    + self.limit_b[1] * v[1]
                    + self.limit_b[2] * v[2]
                    + self.limit_c * (q - 5.0 * t))
                    * s
            })
            .collect()
    }

    /// Max flux drift relative to `||G||`.
    pub fn flux_drift(&self) -> f64 {
        let f0 = self.flux_trace[0];
        let worst = self
            .flux_trace
            .iter()
            .map(|&f| (f - f0).abs())
            .fold(0.0, f64::max);
        let norm = self.profile_norm();
        if norm == 0.0 {
            worst
        } else {
            worst / norm
        }
    }

    /// L2 norm of the profile over `eta (trapezoid) x velocity`.
    pub fn profile_norm(&self) -> f64 {
        let n_eta = self.n_eta();
        let g = &self.grid.velocity;
        let mut acc = 0.0;
        for j in 0..n_eta {
            let deta = eta_weight(&self.grid.eta_nodes, j) * self.mfp;
            let col_sq: f64 = (0..g.len())
                .map(|i| {
                    let x = self.profile[i * n_eta + j];
                    g.weights[i] * x * x
                })
                .sum();
            acc += deta * col_sq;
        }
        acc.sqrt()
    }
}

pub(crate) fn eta_weight(nodes: &[f64], j: usize) -> f64 {
    let m = nodes.len();
    if j == 0 {
        0.5 * (nodes[1] - nodes[0])
    } else if j == m - 1 {
        0.5 * (nodes[m - 1] - nodes[m - 2])
    } else {
        0.5 * (nodes[j + 1] - nodes[j - 1])
    }
}

/// Thermal mean free path `sqrt(T) / nu(sqrt(T))` of a wall gas.
pub fn mean_free_path(m: &LocalMaxwellian, q0: f64) -> f64 {
    let t = m.temperature;
    let vt = t.sqrt();
    vt / crate::kinetics::operator::nu_at(m, q0, [vt, 0.0, 0.0])
}

/// Shared operator context for repeated solves at one wall state.
pub struct WallOperator {
    pub op: Arc<LinearizedOperator>,
    pub conservative: ConservativeOperator,
    pub basis: Arc<NullSpaceBasis>,
    pub maxwellian: LocalMaxwellian,
    pub q0: f64,
    pub mfp: f64,
    pub mh: Vec<f64>,
}

impl WallOperator {
    pub fn build(
        velocity: Arc<VelocityGrid>,
        m: &LocalMaxwellian,
        q0: f64,
        opts: AssemblyOptions,
    ) -> Result<Self> {
        let op = Arc::new(LinearizedOperator::assemble(velocity.clone(), m, q0, opts)?);
        let basis = Arc::new(NullSpaceBasis::new(velocity.clone(), m));
        let conservative = ConservativeOperator::new(op.clone(), basis.clone());
        let mh = m.sqrt_on(&velocity);
        Ok(Self { op, conservative, basis, maxwellian: *m, q0, mfp: mean_free_path(m, q0), mh })
    }
}

/// Options for the source iteration.
#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub tol: f64,
    pub max_iterations: usize,
    /// Anderson mixing depth (0 disables acceleration).
    pub anderson_depth: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iterations: 2000, anderson_depth: 4 }
    }
}

/// Solve the half-space problem.
pub fn solve_milne(
    wall: &WallOperator,
    grid: &MilneGrid,
    problem: &MilneProblem,
    opts: SweepOptions,
) -> Result<MilneSolution> {
    let v_min = grid.velocity.min_positive_speed();
    if problem.theta > v_min {
        return Err(MilneError::CutoffTooLarge { theta: problem.theta, v_min });
    }
    match problem.constraint {
        FluxConstraint::None => solve_fixed_data(wall, grid, problem, opts),
        FluxConstraint::ZeroMassFlux => {
            let base = solve_fixed_data(wall, grid, problem, opts)?;
            let f0 = base.flux_trace[0];
            if f0.abs() <= 1e-13 * base.profile_norm().max(1e-300) {
                return Ok(base);
            }
            // shift along the incoming null direction v_eta mu_w^{1/2}
            let shift_data: Vec<f64> = grid
                .velocity
                .nodes
                .iter()
                .zip(&wall.mh)
                .map(|(v, &s)| v[0] * s)
                .collect();
            let mut shifted = problem.clone();
            for (dst, &sh) in shifted.incoming.iter_mut().zip(&shift_data) {
                *dst += sh;
            }
            let probe = solve_fixed_data(wall, grid, &shifted, opts)?;
            let f1 = probe.flux_trace[0];
            let c = -f0 / (f1 - f0);
            // linear combination (problem is linear in the data)
            let mut combo = base;
            for (x, &y) in combo.profile.iter_mut().zip(&probe.profile) {
                *x = (1.0 - c) * *x + c * y;
            }
            for (x, &y) in combo.flux_trace.iter_mut().zip(&probe.flux_trace) {
                *x = (1.0 - c) * *x + c * y;
            }
            finalize_limits(&mut combo)?;
            Ok(combo)
        }
    }
}

fn solve_fixed_data(
    wall: &WallOperator,
    grid: &MilneGrid,
    problem: &MilneProblem,
    opts: SweepOptions,
) -> Result<MilneSolution> {
    let vel = &grid.velocity;
    let nv = vel.len();
    let n_eta = grid.eta_nodes.len();
    let n_cells = n_eta - 1;
    let mfp = wall.mfp;
    let nu = &wall.op.nu;
    let flip = vel.flip_axis_map(0);

    // cutoff mask chibar(v_eta / theta) at nodes
    let chibar: Vec<f64> = if problem.theta > 0.0 {
        vel.nodes.iter().map(|v| bump_chibar(v[0] / problem.theta)).collect()
    } else {
        vec![1.0; nv]
    };
    let incoming: Vec<f64> = problem
        .incoming
        .iter()
        .zip(&chibar)
        .map(|(&h, &c)| c * h)
        .collect();

    // cell sizes in physical units
    let deta: Vec<f64> = (0..n_cells)
        .map(|j| (grid.eta_nodes[j + 1] - grid.eta_nodes[j]) * mfp)
        .collect();

    // per (velocity, cell) sweep factors
    // e = exp(-nu deta / |v_eta|), wgt = weighted-diamond weight
    let mut efac = vec![0.0; nv * n_cells];
    let mut wgt = vec![0.0; nv * n_cells];
    for i in 0..nv {
        let speed = vel.nodes[i][0].abs();
        for j in 0..n_cells {
            let a = nu[i] * deta[j] / speed;
            let e = (-a).exp();
            efac[i * n_cells + j] = e;
            wgt[i * n_cells + j] = if a < 1e-6 {
                0.5 + a / 12.0
            } else {
                1.0 / (1.0 - e) - 1.0 / a
            };
        }
    }

    let mut source = vec![0.0f64; nv * n_cells]; // cell averages M
    let mut g = vec![0.0f64; nv * n_eta];
    let mut log = Vec::new();

    // Anderson mixing state
    let depth = opts.anderson_depth;
    let mut hist_x: Vec<Vec<f64>> = Vec::new();
    let mut hist_fx: Vec<Vec<f64>> = Vec::new();

    let mut iterations = 0;
    let mut converged = false;
    for it in 0..opts.max_iterations {
        iterations = it + 1;
        // gain refresh: S = chibar K[M] per cell
        let kfield = wall.conservative.apply_gain_multi(&source, n_cells);
        // sweep producing G and new cell averages
        let mut new_m = vec![0.0f64; nv * n_cells];
        for i in 0..nv {
            let vn = vel.nodes[i][0];
            if vn > 0.0 {
                g[i * n_eta] = incoming[i];
                for j in 0..n_cells {
                    let s = chibar[i] * kfield[i * n_cells + j] / nu[i];
                    let e = efac[i * n_cells + j];
                    let up = g[i * n_eta + j];
                    let down = e * up + (1.0 - e) * s;
                    g[i * n_eta + j + 1] = down;
                    let w = wgt[i * n_cells + j];
                    new_m[i * n_cells + j] = (1.0 - w) * up + w * down;
                }
            }
        }
        // specular far-field: incoming for v_eta < 0 at eta = L
        for i in 0..nv {
            if vel.nodes[i][0] < 0.0 {
                g[i * n_eta + n_eta - 1] = g[flip[i] * n_eta + n_eta - 1];
            }
        }
        for i in 0..nv {
            let vn = vel.nodes[i][0];
            if vn < 0.0 {
                for j in (0..n_cells).rev() {
                    let s = chibar[i] * kfield[i * n_cells + j] / nu[i];
                    let e = efac[i * n_cells + j];
                    let up = g[i * n_eta + j + 1];
                    let down = e * up + (1.0 - e) * s;
                    g[i * n_eta + j] = down;
                    let w = wgt[i * n_cells + j];
                    new_m[i * n_cells + j] = (1.0 - w) * up + w * down;
                }
            }
        }

        // convergence measure: relative sup change of the cell field
        let scale = new_m.iter().fold(0.0f64, |a, &x| a.max(x.abs())).max(1e-300);
        let diff = source
            .iter()
            .zip(&new_m)
            .fold(0.0f64, |a, (&x, &y)| a.max((x - y).abs()));
        let rel = diff / scale;
        log.push(rel);
        if rel < opts.tol {
            source = new_m;
            converged = true;
            break;
        }

        // Anderson update on the fixed-point map M -> F(M) = new_m
        if depth == 0 {
            source = new_m;
        } else {
            hist_x.push(source.clone());
            hist_fx.push(new_m.clone());
            if hist_x.len() > depth {
                hist_x.remove(0);
                hist_fx.remove(0);
            }
            source = anderson_mix(&hist_x, &hist_fx);
        }
    }
    if !converged {
        let m = log.len();
        let spectral = if m >= 6 { (log[m - 1] / log[m - 5]).powf(0.25) } else { 1.0 };
        return Err(MilneError::NoConvergence {
            rel_change: *log.last().unwrap_or(&f64::NAN),
            iterations,
            spectral_radius: spectral,
        });
    }

    // one final sweep from the converged source so G matches exactly
    let kfield = wall.conservative.apply_gain_multi(&source, n_cells);
    for i in 0..nv {
        let vn = vel.nodes[i][0];
        if vn > 0.0 {
            g[i * n_eta] = incoming[i];
            for j in 0..n_cells {
                let s = chibar[i] * kfield[i * n_cells + j] / nu[i];
                let e = efac[i * n_cells + j];
                g[i * n_eta + j + 1] = e * g[i * n_eta + j] + (1.0 - e) * s;
            }
        }
    }
    for i in 0..nv {
        if vel.nodes[i][0] < 0.0 {
            g[i * n_eta + n_eta - 1] = g[flip[i] * n_eta + n_eta - 1];
        }
    }
    for i in 0..nv {
        if vel.nodes[i][0] < 0.0 {
            for j in (0..n_cells).rev() {
                let s = chibar[i] * kfield[i * n_cells + j] / nu[i];
                let e = efac[i * n_cells + j];
                g[i * n_eta + j] = e * g[i * n_eta + j + 1] + (1.0 - e) * s;
            }
        }
    }

    // flux trace: paired reduction so even profiles give exactly zero
    let flux_trace: Vec<f64> = (0..n_eta)
        .map(|j| {
            let col: Vec<f64> = (0..nv).map(|i| wall.mh[i] * g[i * n_eta + j]).collect();
            vel.first_moment(&col, 0)
        })
        .collect();

    let mut sol = MilneSolution {
        grid: grid.clone(),
        profile: g,
        limit_p: 0.0,
        limit_b: [0.0; 3],
        limit_c: 0.0,
        decay_rate: 0.0,
        flux_trace,
        iterations,
        iteration_log: log,
        mfp,
        basis: wall.basis.clone(),
    };
    finalize_limits(&mut sol)?;
    Ok(sol)
}

/// Extract the far state (averaged over the last quarter) and fit the decay
/// rate on the interior window `[L/4, 3L/4]`.
pub fn finalize_limits(sol: &mut MilneSolution) -> Result<()> {
    let n_eta = sol.n_eta();
    let basis = sol.basis.clone();
    let nodes = sol.grid.eta_nodes.clone();
    let l = sol.grid.length_mfp;

    // average hydro coefficients over the last quarter
    let mut count = 0.0;
    let mut acc = (0.0, [0.0; 3], 0.0);
    for j in 0..n_eta {
        if nodes[j] >= 0.75 * l {
            let col = sol.column(j);
            let (p, b, c, _) = basis.hydro_split(&col);
            acc.0 += p;
            for k in 0..3 {
                acc.1[k] += b[k];
            }
            acc.2 += c;
            count += 1.0;
        }
    }
    sol.limit_p = acc.0 / count;
    for k in 0..3 {
        sol.limit_b[k] = acc.1[k] / count;
    }
    sol.limit_c = acc.2 / count;

    // decay fit of log ||G - g_inf|| on [L/4, 3L/4]
    let ginf = sol.limit_vector();
    let norm0 = sol.profile_norm();
    if norm0 <= 1e-300 {
        sol.decay_rate = 0.0;
        return Ok(()); // zero solution: fit skipped
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for j in 0..n_eta {
        if nodes[j] >= 0.25 * l && nodes[j] <= 0.75 * l {
            let col = sol.column(j);
            let diff: Vec<f64> =
                col.iter().zip(&ginf).map(|(&a, &b)| a - b).collect();
            let nrm = sol.grid.velocity.norm(&diff);
            if nrm > 1e-14 * norm0 {
                xs.push(nodes[j]);
                ys.push(nrm.ln());
            }
        }
    }
    if xs.len() < 3 {
        sol.decay_rate = 0.0;
        return Ok(());
    }
    let (_, slope, _) = line_fit(&xs, &ys);
    if slope >= 0.0 {
        return Err(MilneError::DecayFitFailed { slope });
    }
    sol.decay_rate = -slope;
    Ok(())
}

/// Anderson mixing step from histories of inputs and outputs.
fn anderson_mix(xs: &[Vec<f64>], fxs: &[Vec<f64>]) -> Vec<f64> {
    let m = xs.len();
    let n = xs[0].len();
    if m == 1 {
        return fxs[0].clone();
    }
    // residuals r_k = F(x_k) - x_k; minimize || sum c_k r_k || with sum c = 1
    let res: Vec<Vec<f64>> = xs
        .iter()
        .zip(fxs)
        .map(|(x, fx)| x.iter().zip(fx).map(|(&a, &b)| b - a).collect())
        .collect();
    // solve via differences: minimize || r_last - D gamma ||, D_k = r_last - r_k
    let last = m - 1;
    let p = m - 1;
    let mut dmat = vec![vec![0.0; n]; p];
    for k in 0..p {
        for i in 0..n {
            dmat[k][i] = res[last][i] - res[k][i];
        }
    }
    // normal equations with Tikhonov guard
    let mut a = vec![vec![0.0; p]; p];
    let mut b = vec![0.0; p];
    for k in 0..p {
        for l in 0..p {
            a[k][l] = dmat[k].iter().zip(&dmat[l]).map(|(&x, &y)| x * y).sum();
        }
        b[k] = dmat[k].iter().zip(&res[last]).map(|(&x, &y)| x * y).sum();
    }
    let scale = (0..p).map(|k| a[k][k]).fold(0.0f64, f64::max).max(1e-300);
    for (k, row) in a.iter_mut().enumerate() {
        row[k] += 1e-12 * scale;
    }
    let gamma = solve_small(&mut a, &mut b);
    // x_new = F(x_last) - sum gamma_k (F(x_last) - F(x_k))
    let mut out = fxs[last].clone();
    for k in 0..p {
        let gk = gamma[k];
        if gk != 0.0 {
            for i in 0..n {
                out[i] -= gk * (fxs[last][i] - fxs[k][i]);
            }
        }
    }
    out
}

fn solve_small(a: &mut [Vec<f64>], b: &mut [f64]) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if a[r][col].abs() > a[piv][col].abs() {
                piv = r;
            }
        }
        a.swap(col, piv);
        b.swap(col, piv);
        let d = a[col][col];
        if d.abs() < 1e-300 {
            continue;
        }
        for r in 0..n {
            if r != col {
                let f = a[r][col] / d;
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    (0..n)
        .map(|i| if a[i][i].abs() < 1e-300 { 0.0 } else { b[i] / a[i][i] })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn context() -> (WallOperator, MilneGrid) {
        let vel = Arc::new(VelocityGrid::build(8, 6.0).unwrap());
        let m = LocalMaxwellian::new(1.0, 1.0);
        let wall = WallOperator::build(
            vel.clone(),
            &m,
            1.0,
            AssemblyOptions { memory_limit_mb: 100, ..Default::default() },
        )
        .unwrap();
        let grid = MilneGrid::stretched(vel, 15.0, 0.05, 1.1, 0.5);
        (wall, grid)
    }

    #[test]
    fn zero_data_gives_zero_solution() {
        let (wall, grid) = context();
        let problem = MilneProblem {
            wall_maxwellian: wall.maxwellian,
            q0: wall.q0,
            incoming: vec![0.0; grid.velocity.len()],
            constraint: FluxConstraint::None,
            theta: 0.0,
        };
        let sol = solve_milne(&wall, &grid, &problem, SweepOptions::default()).unwrap();
        let worst = sol.profile.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        assert!(worst < 1e-12, "max |G| = {worst}");
        assert_eq!(sol.limit_p, 0.0);
    }

    #[test]
    fn maxwellian_incoming_is_exact_fixed_point() {
        let (wall, grid) = context();
        let problem = MilneProblem {
            wall_maxwellian: wall.maxwellian,
            q0: wall.q0,
            incoming: wall.mh.clone(),
            constraint: FluxConstraint::None,
            theta: 0.0,
        };
        let sol = solve_milne(&wall, &grid, &problem, SweepOptions::default()).unwrap();
        let n_eta = sol.n_eta();
        let mut worst = 0.0f64;
        for i in 0..grid.velocity.len() {
            for j in 0..n_eta {
                worst = worst.max((sol.profile[i * n_eta + j] - wall.mh[i]).abs());
            }
        }
        assert!(worst < 1e-8, "max |G - mu_w^(1/2)| = {worst}");
        // mass flux vanishes identically by oddness
        for &f in &sol.flux_trace {
            assert_eq!(f, 0.0);
        }
        assert!((sol.limit_p - 1.0).abs() < 1e-8);
    }

    #[test]
    fn cutoff_too_large_rejected() {
        let (wall, grid) = context();
        let v_min = grid.velocity.min_positive_speed();
        let problem = MilneProblem {
            wall_maxwellian: wall.maxwellian,
            q0: wall.q0,
            incoming: vec![0.0; grid.velocity.len()],
            constraint: FluxConstraint::None,
            theta: 1.5 * v_min,
        };
        assert!(matches!(
            solve_milne(&wall, &grid, &problem, SweepOptions::default()),
            Err(MilneError::CutoffTooLarge { .. })
        ));
    }

    #[test]
    fn cutoff_solution_vanishes_exactly_in_dead_band() {
        let (wall, grid) = context();
        let v_min = grid.velocity.min_positive_speed();
        // generic creep-like data, odd in v_phi
        let incoming: Vec<f64> = grid
            .velocity
            .nodes
            .iter()
            .zip(&wall.mh)
            .map(|(v, &s)| v[1] * s)
            .collect();
        let problem = MilneProblem {
            wall_maxwellian: wall.maxwellian,
            q0: wall.q0,
            incoming,
            constraint: FluxConstraint::None,
            theta: v_min,
        };
        let sol = solve_milne(&wall, &grid, &problem, SweepOptions::default()).unwrap();
        let n_eta = sol.n_eta();
        let mut nonzero_somewhere = false;
        for (i, v) in grid.velocity.nodes.iter().enumerate() {
            for j in 0..n_eta {
                let val = sol.profile[i * n_eta + j];
                if v[0].abs() <= problem.theta {
                    assert_eq!(val, 0.0, "dead band must be exactly zero");
                } else if val != 0.0 {
                    nonzero_somewhere = true;
                }
            }
        }
        assert!(nonzero_somewhere);
    }

    #[test]
    fn parity_preserved_and_flux_conserved() {
        let (wall, grid) = context();
        // data odd in v_phi (axis 1)
        let incoming: Vec<f64> = grid
            .velocity
            .nodes
            .iter()
            .zip(&wall.mh)
            .map(|(v, &s)| v[1] * (1.0 + 0.2 * v[0].abs()) * s)
            .collect();
        let problem = MilneProblem {
            wall_maxwellian: wall.maxwellian,
            q0: wall.q0,
            incoming,
            constraint: FluxConstraint::ZeroMassFlux,
            theta: 0.0,
        };
        let sol = solve_milne(&wall, &grid, &problem, SweepOptions::default()).unwrap();
        assert!(sol.flux_drift() < 1e-8, "flux drift {}", sol.flux_drift());
        let flip1 = grid.velocity.flip_axis_map(1);
        let n_eta = sol.n_eta();
        let scale = sol.profile.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        for i in 0..grid.velocity.len() {
            for j in (0..n_eta).step_by(7) {
                let a = sol.profile[i * n_eta + j];
                let b = sol.profile[flip1[i] * n_eta + j];
                assert!((a + b).abs() <= 1e-9 * scale, "parity violation {a} vs {b}");
            }
        }
        // decay rate positive
        assert!(sol.decay_rate > 0.0);
    }
}
