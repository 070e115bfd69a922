//! Numerical toolkit for slow, slightly rarefied gas flow between walls:
//! hard-sphere linearized collision operator with its transport coefficients,
//! Knudsen-layer (Milne) half-space solves with thermal-creep slip extraction,
//! the steady ghost-effect Navier-Stokes-Fourier system on a slab, and
//! assembly/audit of the matched interior + boundary-layer expansion.

pub mod cli;
pub mod fluid;
pub mod hilbert;
pub mod kinetics;
pub mod milne;
pub mod util;

pub use kinetics::grid::VelocityGrid;
pub use kinetics::maxwellian::LocalMaxwellian;
pub use kinetics::operator::LinearizedOperator;
