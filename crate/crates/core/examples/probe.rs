//! Scratch accuracy probe for assembly/Gamma tuning (not part of the test suite).
use ghost_kinetics::kinetics::gamma::{GammaOperator, GammaOptions};
use ghost_kinetics::kinetics::nullspace::NullSpaceBasis;
use ghost_kinetics::kinetics::operator::{invariant_residual_report, AssemblyOptions, LinearizedOperator};
use ghost_kinetics::{LocalMaxwellian, VelocityGrid};
use std::sync::Arc;

fn main() {
    let m = LocalMaxwellian::new(1.0, 1.0);
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).map(|s| s.as_str()).unwrap_or("inv");
    if mode == "inv" {
        for &(n, r) in &[(8usize, 6.0f64), (12, 6.0), (12, 7.0), (16, 6.0), (16, 7.0), (20, 6.0), (20, 7.0)] {
            let grid = VelocityGrid::build(n, r).unwrap();
            let t0 = std::time::Instant::now();
            let (raw, corr) = invariant_residual_report(Arc::new(grid), &m, 1.0, AssemblyOptions::default()).unwrap();
            println!("n={n:2} R={r}: raw=[{}] corr_max={:.2e} ({:.1}s)",
                raw.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", "),
                corr.iter().cloned().fold(0.0f64, f64::max),
                t0.elapsed().as_secs_f64());
        }
    } else if mode == "kappa" {
        kappa_ladder();
    } else {
        for &(n, r) in &[(8usize, 6.0f64), (12, 6.0)] {
            let grid = Arc::new(VelocityGrid::build(n, r).unwrap());
            let basis = NullSpaceBasis::new(grid.clone(), &m);
            let gam = GammaOperator::new(grid.clone(), &m, 1.0, GammaOptions::default());
            let op = LinearizedOperator::assemble(grid.clone(), &m, 1.0, AssemblyOptions::default()).unwrap();
            let mh = m.sqrt_on(&grid);
            let f: Vec<f64> = grid.nodes.iter().zip(&mh).map(|(v, &s)| v[0] * s).collect();
            let g: Vec<f64> = grid.nodes.iter().zip(&mh).map(|(v, &s)| (v[0] * v[0] - 1.0) * s).collect();
            let t0 = std::time::Instant::now();
            let out = gam.apply(&f, &g);
            let frac = basis.null_norm(&out) / grid.norm(&out);
            // consistency with L
            let f2: Vec<f64> = grid.nodes.iter().zip(&mh).map(|(v, &s)| (0.4 * v[0] + 0.2 * v[1] * v[2]) * s).collect();
            let lhs = gam.apply(&mh, &f2);
            let lf = op.apply(&f2);
            let num = grid.norm(&lhs.iter().zip(&lf).map(|(&a, &b)| a + 0.5 * b).collect::<Vec<_>>());
            println!("n={n:2}: nullfrac={frac:.3e} consist={:.3e} ({:.1}s/apply)", num / grid.norm(&lf), t0.elapsed().as_secs_f64());
        }
    }
}

#[allow(dead_code)]
fn kappa_ladder() {
    let m = LocalMaxwellian::new(1.0, 1.0);
    for &(n, r) in &[(10usize, 6.0f64), (12, 6.0), (16, 6.0), (20, 6.0)] {
        let grid = Arc::new(VelocityGrid::build(n, r).unwrap());
        let t0 = std::time::Instant::now();
        match ghost_kinetics::kinetics::burnett::coefficients_at(
            &grid, 1.0, 1.0, 1.0, AssemblyOptions { memory_limit_mb: 4000, ..Default::default() }) {
            Ok((tc, ..)) => println!(
                "n={n:2}: kappa={:.6} sigma={:.6} lambda={:.6} iso={:.2e} ({:.1}s)",
                tc.kappa, tc.sigma, tc.lambda, tc.isotropy_defect, t0.elapsed().as_secs_f64()),
            Err(e) => println!("n={n:2}: error {e}"),
        }
    }
}
