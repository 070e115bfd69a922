//! Quasi-inverse of the linearized operator on the orthogonal complement of
//! the null space: conjugate-gradient iteration with re-projection onto
//! `N-perp` every step, Jacobi preconditioned by `1/nu`.

use super::nullspace::NullSpaceBasis;
use super::operator::LinearizedOperator;
use super::{KineticsError, Result};

/// Outcome of a quasi-inverse solve.
#[derive(Debug, Clone)]
pub struct QuasiInverseSolution {
    pub f: Vec<f64>,
    /// Relative residual of the projected system `|| Pi (L f - g) || / ||g||`.
    pub projected_residual: f64,
    /// Relative null-space leakage of the raw re-application
    /// `|| P (L f - g) || / ||g||`; bounded by the operator's raw
    /// invariant residuals times `||f||/||g||`.
    pub null_leakage: f64,
    pub iterations: usize,
}

pub struct QuasiInverse<'a> {
    pub op: &'a LinearizedOperator,
    pub basis: &'a NullSpaceBasis,
    pub tol: f64,
    pub solvability_tol: f64,
    pub max_iter_factor: usize,
}

impl<'a> QuasiInverse<'a> {
    pub fn new(op: &'a LinearizedOperator, basis: &'a NullSpaceBasis) -> Self {
        Self { op, basis, tol: 1e-10, solvability_tol: 1e-6, max_iter_factor: 10 }
    }

    /// Solve `L f = g` for `f` orthogonal to the null space. Fails with
    /// `SolvabilityViolation` if `g` has a null component beyond tolerance.
    pub fn solve(&self, g: &[f64]) -> Result<QuasiInverseSolution> {
        let grid = &self.op.grid;
        let gnorm = grid.norm(g);
        if gnorm == 0.0 {
            return Ok(QuasiInverseSolution {
                f: vec![0.0; g.len()],
                projected_residual: 0.0,
                null_leakage: 0.0,
                iterations: 0,
            });
        }
        let null_part = self.basis.null_norm(g);
        if null_part / gnorm > self.solvability_tol {
            return Err(KineticsError::SolvabilityViolation {
                rel: null_part / gnorm,
                tol: self.solvability_tol,
            });
        }
        let mut rhs = g.to_vec();
        self.basis.project_out(&mut rhs);

        let n = g.len();
        let max_iter = self.max_iter_factor * n;
        let mut f = vec![0.0; n];
        let mut r = rhs.clone();
        let precond = |v: &[f64]| -> Vec<f64> {
            v.iter().zip(&self.op.nu).map(|(&x, &nu)| x / nu).collect()
        };
        let mut z = precond(&r);
        self.basis.project_out(&mut z);
        let mut p = z.clone();
        let mut rz = grid.inner(&r, &z);
        let mut trace = Vec::new();
        let mut iterations = 0;
        for it in 0..max_iter {
            iterations = it + 1;
            let mut ap = self.op.apply(&p);
            self.basis.project_out(&mut ap);
            let pap = grid.inner(&p, &ap);
            if pap <= 0.0 {
                return Err(KineticsError::NoConvergence {
                    residual: grid.norm(&r) / gnorm,
                    iterations,
                    trace,
                });
            }
            let alpha = rz / pap;
            for i in 0..n {
                f[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            self.basis.project_out(&mut r);
            let rn = grid.norm(&r) / gnorm;
            trace.push(rn);
            if rn < self.tol {
                break;
            }
            let mut z2 = precond(&r);
            self.basis.project_out(&mut z2);
            let rz2 = grid.inner(&r, &z2);
            let beta = rz2 / rz;
            for i in 0..n {
                p[i] = z2[i] + beta * p[i];
            }
            rz = rz2;
            z = z2;
        }
        let _ = z;
        let final_res = *trace.last().unwrap_or(&0.0);
        if final_res >= self.tol {
            return Err(KineticsError::NoConvergence { residual: final_res, iterations, trace });
        }
        self.basis.project_out(&mut f);
        // diagnostics from the raw re-application
        let lf = self.op.apply(&f);
        let diff: Vec<f64> = lf.iter().zip(g).map(|(&a, &b)| a - b).collect();
        let mut proj_diff = diff.clone();
        self.basis.project_out(&mut proj_diff);
        Ok(QuasiInverseSolution {
            f,
            projected_residual: grid.norm(&proj_diff) / gnorm,
            null_leakage: self.basis.null_norm(&diff) / gnorm,
            iterations,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::operator::AssemblyOptions;
    use crate::{LocalMaxwellian, VelocityGrid};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn setup() -> (Arc<VelocityGrid>, LinearizedOperator, NullSpaceBasis) {
        let grid = Arc::new(VelocityGrid::build(8, 6.0).unwrap());
        let m = LocalMaxwellian::new(1.0, 1.0);
        let op = LinearizedOperator::assemble(grid.clone(), &m, 1.0, AssemblyOptions::default())
            .unwrap();
        let basis = NullSpaceBasis::new(grid.clone(), &m);
        (grid, op, basis)
    }

    #[test]
    fn rejects_null_space_rhs() {
        let (_, op, basis) = setup();
        let qi = QuasiInverse::new(&op, &basis);
        let g = basis.raw[0].clone(); // mu^{1/2}
        assert!(matches!(qi.solve(&g), Err(KineticsError::SolvabilityViolation { .. })));
    }

    #[test]
    fn forward_apply_roundtrip() {
        let (grid, op, basis) = setup();
        let qi = QuasiInverse::new(&op, &basis);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut h: Vec<f64> = grid
            .nodes
            .iter()
            .map(|v| {
                let q: f64 = v.iter().map(|x| x * x).sum();
                rng.gen_range(-1.0..1.0) * (-q / 6.0).exp()
            })
            .collect();
        basis.project_out(&mut h);
        let mut g = op.apply(&h);
        basis.project_out(&mut g); // remove quadrature null leakage so rhs is solvable
        let sol = qi.solve(&g).unwrap();
        let err = grid
            .norm(&sol.f.iter().zip(&h).map(|(&a, &b)| a - b).collect::<Vec<_>>())
            / grid.norm(&h);
        assert!(err < 1e-7, "roundtrip err {err}");
        assert!(sol.projected_residual < 1e-10);
    }

    #[test]
    fn coercivity_on_random_vectors() {
        let (grid, op, basis) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut min_ratio = f64::INFINITY;
        for _ in 0..100 {
            let mut f: Vec<f64> = grid
                .nodes
                .iter()
                .map(|v| {
                    let q: f64 = v.iter().map(|x| x * x).sum();
                    rng.gen_range(-1.0..1.0) * (-q / 8.0).exp()
                })
                .collect();
            basis.project_out(&mut f);
            let quad = op.quadratic_form(&f, &f);
            assert!(quad >= 0.0, "coercivity violated: {quad}");
            // delta in the nu-weighted norm
            let nu_norm: f64 = f
                .iter()
                .zip(&op.nu)
                .zip(&grid.weights)
                .map(|((&x, &nu), &w)| w * nu * x * x)
                .sum();
            min_ratio = min_ratio.min(quad / nu_norm);
        }
        assert!(min_ratio > 0.0, "empirical coercivity constant {min_ratio}");
    }
}
