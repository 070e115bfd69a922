//! Local Maxwellian state of the gas.

/// Gas state `(P, T)` with optional bulk velocity; density is derived from
/// the uniform-pressure relation `rho = P / T` so `P = rho T` holds exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalMaxwellian {
    pub pressure: f64,
    pub temperature: f64,
    pub bulk_velocity: [f64; 3],
}

impl LocalMaxwellian {
    pub fn new(pressure: f64, temperature: f64) -> Self {
        assert!(pressure > 0.0 && temperature > 0.0);
        Self { pressure, temperature, bulk_velocity: [0.0; 3] }
    }

    pub fn with_bulk(pressure: f64, temperature: f64, bulk_velocity: [f64; 3]) -> Self {
        assert!(pressure > 0.0 && temperature > 0.0);
        Self { pressure, temperature, bulk_velocity }
    }

    #[inline]
    pub fn density(&self) -> f64 {
        self.pressure / self.temperature
    }

    /// `mu(v) = rho (2 pi T)^{-3/2} exp(-|v - u|^2 / 2T)`.
    #[inline]
    pub fn eval(&self, v: [f64; 3]) -> f64 {
        let t = self.temperature;
        let d0 = v[0] - self.bulk_velocity[0];
        let d1 = v[1] - self.bulk_velocity[1];
        let d2 = v[2] - self.bulk_velocity[2];
        let q = d0 * d0 + d1 * d1 + d2 * d2;
        self.density() / (2.0 * std::f64::consts::PI * t).powf(1.5) * (-0.5 * q / t).exp()
    }

    #[inline]
    pub fn eval_sqrt(&self, v: [f64; 3]) -> f64 {
        self.eval(v).sqrt()
    }

    /// Grid vector of `mu^{1/2}` values.
    pub fn sqrt_on(&self, grid: &super::grid::VelocityGrid) -> Vec<f64> {
        grid.nodes.iter().map(|&v| self.eval_sqrt(v)).collect()
    }

    /// Grid vector of `mu` values.
    pub fn on(&self, grid: &super::grid::VelocityGrid) -> Vec<f64> {
        grid.nodes.iter().map(|&v| self.eval(v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boussinesq_exact_and_positive() {
        let m = LocalMaxwellian::new(2.0, 0.5);
        assert_eq!(m.density() * m.temperature, m.pressure);
        assert!(m.eval([5.0, -5.0, 5.0]) > 0.0);
    }

    #[test]
    fn integrates_to_density() {
        let g = crate::VelocityGrid::build(16, 6.0).unwrap();
        let m = LocalMaxwellian::new(1.3, 0.9);
        let mass = g.integrate(&m.on(&g));
        assert!((mass - m.density()).abs() / m.density() < 1e-6);
    }
}
