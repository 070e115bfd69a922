//! Half-space (Milne) problems in the Knudsen layer.
//!
//! The transport equation `v_eta dG/deta + nu_w G = chibar(v_eta/theta) K_w[G]`
//! is solved on `eta in [0, L]` with prescribed incoming data at the wall,
//! specular reflection at the far end, and an optional velocity cutoff
//! `theta` that kills the gain term and incoming data on `|v_eta| <= theta`.
//! Sweeps use step characteristics (exact exponential integration against
//! piecewise-constant cell sources), the gain refresh uses the
//! invariant-exact projected operator so the discrete mass flux telescopes
//! to round-off, and the source iteration is Anderson-accelerated.

pub mod creep;
pub mod solve;
pub mod studies;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MilneError {
    #[error("source iteration did not converge: rel change {rel_change:.3e} after {iterations} iterations (spectral radius estimate {spectral_radius:.4})")]
    NoConvergence { rel_change: f64, iterations: usize, spectral_radius: f64 },
    #[error("cutoff theta = {theta} exceeds the smallest positive v_eta node {v_min}")]
    CutoffTooLarge { theta: f64, v_min: f64 },
    #[error("decay fit failed: fitted slope {slope:.3e} is not negative")]
    DecayFitFailed { slope: f64 },
    #[error("kinetics error: {0}")]
    Kinetics(#[from] crate::kinetics::KineticsError),
}

pub type Result<T> = std::result::Result<T, MilneError>;

/// Smooth even bump: 1 on `|y| <= 1`, 0 on `|y| >= 2`, C-infinity between.
pub fn bump_chi(y: f64) -> f64 {
    let a = y.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let up = (-1.0 / (2.0 - a)).exp();
        let dn = (-1.0 / (a - 1.0)).exp();
        up / (up + dn)
    }
}

/// Complement cutoff `chibar = 1 - chi`: 0 on `|y| <= 1`, 1 on `|y| >= 2`.
pub fn bump_chibar(y: f64) -> f64 {
    1.0 - bump_chi(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_plateaus_and_smooth_interior() {
        assert_eq!(bump_chi(0.5), 1.0);
        assert_eq!(bump_chi(-1.0), 1.0);
        assert_eq!(bump_chi(2.0), 0.0);
        assert_eq!(bump_chi(-3.0), 0.0);
        let mid = bump_chi(1.5);
        assert!(mid > 0.0 && mid < 1.0);
        assert!((bump_chi(1.5) + bump_chibar(1.5) - 1.0).abs() < 1e-15);
        // monotone decreasing on [1, 2]
        let mut last = 1.0;
        for k in 0..=20 {
            let v = bump_chi(1.0 + 0.05 * k as f64);
            assert!(v <= last + 1e-14);
            last = v;
        }
    }
}
