//! Cubic interpolation of tabulated coefficient curves and grid-vector tables.

/// Natural cubic spline through `(x, y)` samples with strictly increasing `x`.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>, // second derivatives at knots
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert_eq!(x.len(), y.len());
        assert!(x.len() >= 2, "spline needs at least two knots");
        assert!(x.windows(2).all(|w| w[1] > w[0]), "knots must increase");
        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas solve of the natural-spline tridiagonal system.
            let mut sub = vec![0.0; n];
            let mut diag = vec![0.0; n];
            let mut sup = vec![0.0; n];
            let mut rhs = vec![0.0; n];
            diag[0] = 1.0;
            diag[n - 1] = 1.0;
            for i in 1..n - 1 {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                sub[i] = h0 / 6.0;
                diag[i] = (h0 + h1) / 3.0;
                sup[i] = h1 / 6.0;
                rhs[i] = (y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0;
            }
            for i in 1..n {
                let w = sub[i] / diag[i - 1];
                diag[i] -= w * sup[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            m[n - 1] = rhs[n - 1] / diag[n - 1];
            for i in (0..n - 1).rev() {
                m[i] = (rhs[i] - sup[i] * m[i + 1]) / diag[i];
            }
        }
        Self { x, y, m }
    }

    /// Evaluate at `t`; clamped extrapolation beyond the knot span is linear.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            let d = self.deriv_at_knot(0);
            return self.y[0] + d * (t - self.x[0]);
        }
        if t >= self.x[n - 1] {
            let d = self.deriv_at_knot(n - 1);
            return self.y[n - 1] + d * (t - self.x[n - 1]);
        }
        let seg = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            k => k - 1,
        };
        let (x0, x1) = (self.x[seg], self.x[seg + 1]);
        let h = x1 - x0;
        let a = (x1 - t) / h;
        let b = (t - x0) / h;
        a * self.y[seg]
            + b * self.y[seg + 1]
            + ((a * a * a - a) * self.m[seg] + (b * b * b - b) * self.m[seg + 1]) * h * h / 6.0
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.deriv_at_knot(0);
        }
        if t >= self.x[n - 1] {
            return self.deriv_at_knot(n - 1);
        }
        let seg = match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            k => k - 1,
        };
        let (x0, x1) = (self.x[seg], self.x[seg + 1]);
        let h = x1 - x0;
        let a = (x1 - t) / h;
        let b = (t - x0) / h;
        (self.y[seg + 1] - self.y[seg]) / h
            + ((3.0 * b * b - 1.0) * self.m[seg + 1] - (3.0 * a * a - 1.0) * self.m[seg]) * h / 6.0
    }

    fn deriv_at_knot(&self, k: usize) -> f64 {
        let n = self.x.len();
        let (i, j) = if k == 0 { (0, 1) } else { (n - 2, n - 1) };
        let h = self.x[j] - self.x[i];
        let base = (self.y[j] - self.y[i]) / h;
        if k == 0 {
            base - h / 6.0 * (2.0 * self.m[i] + self.m[j])
        } else {
            base + h / 6.0 * (self.m[i] + 2.0 * self.m[j])
        }
    }
}

/// Componentwise cubic interpolation of a family of equal-length vectors
/// tabulated against a scalar parameter (used for temperature tables of
/// grid vectors).
#[derive(Debug, Clone)]
pub struct VectorTable {
    params: Vec<f64>,
    columns: Vec<Vec<f64>>, // columns[k] = vector at params[k]
}

impl VectorTable {
    pub fn new(params: Vec<f64>, columns: Vec<Vec<f64>>) -> Self {
        assert_eq!(params.len(), columns.len());
        assert!(params.len() >= 2);
        let len = columns[0].len();
        assert!(columns.iter().all(|c| c.len() == len));
        Self { params, columns }
    }

    pub fn param_range(&self) -> (f64, f64) {
        (self.params[0], *self.params.last().unwrap())
    }

    /// Interpolate the whole vector at parameter `t` (cubic Lagrange on the
    /// four nearest knots; falls back to the available stencil near edges).
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let np = self.params.len();
        let len = self.columns[0].len();
        let mut seg = match self.params.partition_point(|&v| v <= t) {
            0 => 0,
            k => (k - 1).min(np - 2),
        };
        // choose 4-point stencil [seg-1 ..= seg+2] clamped to range
        let lo = seg.saturating_sub(1).min(np.saturating_sub(4));
        seg = lo;
        let m = 4.min(np);
        let xs = &self.params[seg..seg + m];
        // Lagrange weights
        let mut wts = vec![0.0; m];
        for (a, wa) in wts.iter_mut().enumerate() {
            let mut w = 1.0;
            for b in 0..m {
                if a != b {
                    w *= (t - xs[b]) / (xs[a] - xs[b]);
                }
            }
            *wa = w;
        }
        let mut out = vec![0.0; len];
        for (a, &w) in wts.iter().enumerate() {
            let col = &self.columns[seg + a];
            for (o, &c) in out.iter_mut().zip(col.iter()) {
                *o += w * c;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spline_reproduces_smooth_function() {
        let x: Vec<f64> = (0..9).map(|i| 0.8 + 0.05625 * i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&t| t.powf(0.7) * (1.0 + 0.3 * t)).collect();
        let sp = CubicSpline::new(x, y);
        let t: f64 = 1.03;
        let exact = t.powf(0.7) * (1.0 + 0.3 * t);
        assert!((sp.eval(t) - exact).abs() < 2e-6, "got {}", sp.eval(t));
        let d_exact = 0.7 * t.powf(-0.3) * (1.0 + 0.3 * t) + t.powf(0.7) * 0.3;
        assert!((sp.deriv(t) - d_exact).abs() < 2e-4);
    }

    #[test]
    fn vector_table_interpolates_cubically() {
        let params: Vec<f64> = (0..6).map(|i| 1.0 + 0.1 * i as f64).collect();
        let cols: Vec<Vec<f64>> = params.iter().map(|&t| vec![t * t * t, 2.0 - t]).collect();
        let table = VectorTable::new(params, cols);
        let v = table.eval(1.234);
        assert!((v[0] - 1.234f64.powi(3)).abs() < 1e-12); // cubic is exact
        assert!((v[1] - (2.0 - 1.234)).abs() < 1e-12);
    }
}
