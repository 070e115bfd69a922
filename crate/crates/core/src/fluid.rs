//! Ghost-effect Navier-Stokes-Fourier solver on a slab. (under construction)
