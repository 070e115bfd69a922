//! Velocity-space discretization and the hard-sphere linearized collision
//! operator: quadrature grid, local Maxwellians, the operator `L = nu - K`
//! with its null-space projections and quasi-inverse, Burnett functions,
//! transport coefficients, and the bilinear operator `Gamma`.

pub mod burnett;
pub mod cg;
pub mod gamma;
pub mod grid;
pub mod maxwellian;
pub mod moments;
pub mod nullspace;
pub mod operator;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum KineticsError {
    #[error("nodes_per_axis must be even and >= 8, got {0}")]
    BadNodesPerAxis(usize),
    #[error("cutoff_radius must be at least 5 thermal speeds (need >= {need}, got {got})")]
    CutoffTooSmall { need: f64, got: f64 },
    #[error("operator of {nodes} nodes needs {need_mb} MB which exceeds the {limit_mb} MB budget")]
    MemoryBudget { nodes: usize, need_mb: usize, limit_mb: usize },
    #[error("right-hand side has a null-space component of relative size {rel:.3e} (tolerance {tol:.3e})")]
    SolvabilityViolation { rel: f64, tol: f64 },
    #[error("iterative solve did not converge: residual {residual:.3e} after {iterations} iterations")]
    NoConvergence { residual: f64, iterations: usize, trace: Vec<f64> },
    #[error("transport tensor off-diagonal {offdiag:.3e} exceeds isotropy threshold {threshold:.3e}")]
    IsotropyDefect { offdiag: f64, threshold: f64 },
    #[error("maxwellian must have zero bulk velocity for operator assembly")]
    NonzeroBulk,
}

pub type Result<T> = std::result::Result<T, KineticsError>;
