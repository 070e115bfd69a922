//! Null space of the linearized operator and the associated projections.
//!
//! The five collision invariants `mu^{1/2} {1, v, |v|^2 - 3T}` span the null
//! space N. The raw analytic basis is nearly but not exactly orthogonal under
//! quadrature, so it is orthonormalized with modified Gram-Schmidt before any
//! projection is taken.

use std::sync::Arc;

use super::grid::VelocityGrid;
use super::maxwellian::LocalMaxwellian;
use super::operator::LinearizedOperator;

/// Orthonormalized basis of the five-dimensional null space.
#[derive(Debug, Clone)]
pub struct NullSpaceBasis {
    pub grid: Arc<VelocityGrid>,
    pub maxwellian: LocalMaxwellian,
    /// Orthonormal vectors in order: mass, v1, v2, v3, energy.
    pub vectors: [Vec<f64>; 5],
    /// Raw (un-normalized) analytic invariants in the same order.
    pub raw: [Vec<f64>; 5],
}

impl NullSpaceBasis {
    pub fn new(grid: Arc<VelocityGrid>, m: &LocalMaxwellian) -> Self {
        let t = m.temperature;
        let mh = m.sqrt_on(&grid);
        let raw: [Vec<f64>; 5] = std::array::from_fn(|k| {
            grid.nodes
                .iter()
                .zip(&mh)
                .map(|(v, &s)| match k {
                    0 => s,
                    1..=3 => v[k - 1] * s,
                    _ => (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] - 3.0 * t) * s,
                })
                .collect()
        });
        // modified Gram-Schmidt; the raw basis is already orthogonal up to
        // quadrature error so this is well conditioned
        let mut vectors = raw.clone();
        for k in 0..5 {
            for l in 0..k {
                let (head, tail) = vectors.split_at_mut(k);
                let c = grid.inner(&head[l], &tail[0]);
                for (x, &y) in tail[0].iter_mut().zip(&head[l]) {
                    *x -= c * y;
                }
            }
            let n = grid.norm(&vectors[k]);
            for x in vectors[k].iter_mut() {
                *x /= n;
            }
        }
        Self { grid, maxwellian: *m, vectors, raw }
    }

    /// Coefficients of `f` against the orthonormal basis.
    pub fn coefficients(&self, f: &[f64]) -> [f64; 5] {
        std::array::from_fn(|k| self.grid.inner(&self.vectors[k], f))
    }

    /// Orthogonal projection `P[f]` onto N.
    pub fn project(&self, f: &[f64]) -> Vec<f64> {
        let c = self.coefficients(f);
        let mut out = vec![0.0; f.len()];
        for k in 0..5 {
            for (o, &b) in out.iter_mut().zip(&self.vectors[k]) {
                *o += c[k] * b;
            }
        }
        out
    }

    /// `(I - P)[f]`, in place.
    pub fn project_out(&self, f: &mut [f64]) {
        let c = self.coefficients(f);
        for k in 0..5 {
            for (x, &b) in f.iter_mut().zip(&self.vectors[k]) {
                *x -= c[k] * b;
            }
        }
    }

    /// Norm of the null-space component.
    pub fn null_norm(&self, f: &[f64]) -> f64 {
        let c = self.coefficients(f);
        c.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Splits `f` into hydrodynamic coefficients `(p, b, c)` of the
    /// decomposition `P[f] = (p + v.b + (|v|^2 - 5T) c) mu^{1/2}` plus the
    /// orthogonal remainder. Note the `(|v|^2 - 5T)` convention: with
    /// `chi_e = (|v|^2 - 3T) mu^{1/2}` one has
    /// `(|v|^2 - 5T) mu^{1/2} = chi_e - 2T mu^{1/2}`.
    pub fn hydro_split(&self, f: &[f64]) -> (f64, [f64; 3], f64, Vec<f64>) {
        let mut rem = f.to_vec();
        self.project_out(&mut rem);
        // exact analytic moments against the raw basis via the orthonormal
        // coefficients: reconstruct from projections on raw vectors
        let t = self.maxwellian.temperature;
        let rho = self.maxwellian.density();
        // <mu^{1/2} raw_0, f> etc with known raw Gram entries in continuum;
        // use the orthonormalized coefficients instead and convert.
        // P[f] = sum c_k e_k; we need p, b, c with
        // P[f] = (p + v.b + (|v|^2-5T) c) mu^{1/2}.
        // Work with the raw inner products and the continuum Gram matrix to
        // round-off-consistent accuracy: the raw Gram is diagonal by parity
        // except the (mass, energy) pair.
        let g = &self.grid;
        let m0 = g.inner(&self.raw[0], f);
        let mb = [
            g.inner(&self.raw[1], f),
            g.inner(&self.raw[2], f),
            g.inner(&self.raw[3], f),
        ];
        let me = g.inner(&self.raw[4], f);
        // Gram entries (quadrature values, not continuum):
        let g00 = g.inner(&self.raw[0], &self.raw[0]);
        let g04 = g.inner(&self.raw[0], &self.raw[4]);
        let g44 = g.inner(&self.raw[4], &self.raw[4]);
        let gbb = [
            g.inner(&self.raw[1], &self.raw[1]),
            g.inner(&self.raw[2], &self.raw[2]),
            g.inner(&self.raw[3], &self.raw[3]),
        ];
        // f_hydro = a raw0 + sum b_k raw_k + e raw4; p = a - 2T e, c = e:
        // (|v|^2-5T) mu^{1/2} = raw4 - 2T raw0.
        let det = g00 * g44 - g04 * g04;
        let a = (m0 * g44 - me * g04) / det;
        let e = (me * g00 - m0 * g04) / det;
        let b = [mb[0] / gbb[0], mb[1] / gbb[1], mb[2] / gbb[2]];
        let p = a + 2.0 * t * e;
        let _ = rho;
        (p, b, e, rem)
    }
}

/// Operator wrapper whose action annihilates the discrete null space exactly:
/// `L_c = Pi L Pi` with `Pi = I - P`. Self-adjointness and coercivity carry
/// over, and `<chi, L_c f> = 0` to round-off for every invariant, which makes
/// transport sweeps built on it conserve their moments.
#[derive(Clone)]
pub struct ConservativeOperator {
    pub op: Arc<LinearizedOperator>,
    pub basis: Arc<NullSpaceBasis>,
}

impl ConservativeOperator {
    pub fn new(op: Arc<LinearizedOperator>, basis: Arc<NullSpaceBasis>) -> Self {
        Self { op, basis }
    }

    /// `Pi L Pi [f]`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mut x = f.to_vec();
        self.basis.project_out(&mut x);
        let mut y = self.op.apply(&x);
        self.basis.project_out(&mut y);
        y
    }

    /// Gain part consistent with the projected operator:
    /// `K_c[f] = nu f - Pi L Pi [f]`.
    pub fn apply_gain(&self, f: &[f64]) -> Vec<f64> {
        let l = self.apply(f);
        f.iter()
            .zip(&self.op.nu)
            .zip(&l)
            .map(|((&x, &nu), &lf)| nu * x - lf)
            .collect()
    }

    /// Multi-column gain, `cols` node-major `n x m`.
    pub fn apply_gain_multi(&self, cols: &[f64], m: usize) -> Vec<f64> {
        let n = self.op.len();
        assert_eq!(cols.len(), n * m);
        // project columns out of N
        let mut x = cols.to_vec();
        for c in 0..m {
            let mut col: Vec<f64> = (0..n).map(|i| x[i * m + c]).collect();
            self.basis.project_out(&mut col);
            for i in 0..n {
                x[i * m + c] = col[i];
            }
        }
        let mut y = self.op.apply_gain_multi(&x, m);
        // y currently holds K[Pi f]; complete to nu f - Pi(nu Pi f - K Pi f)
        for c in 0..m {
            let mut col: Vec<f64> = (0..n).map(|i| self.op.nu[i] * x[i * m + c] - y[i * m + c]).collect();
            self.basis.project_out(&mut col);
            for i in 0..n {
                y[i * m + c] = self.op.nu[i] * cols[i * m + c] - col[i];
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::operator::AssemblyOptions;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (Arc<VelocityGrid>, LocalMaxwellian, NullSpaceBasis) {
        let grid = Arc::new(VelocityGrid::build(8, 6.0).unwrap());
        let m = LocalMaxwellian::new(1.0, 1.0);
        let basis = NullSpaceBasis::new(grid.clone(), &m);
        (grid, m, basis)
    }

    #[test]
    fn basis_orthonormal() {
        let (grid, _, basis) = setup();
        for i in 0..5 {
            for j in 0..5 {
                let d = grid.inner(&basis.vectors[i], &basis.vectors[j]);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-12, "({i},{j}) = {d}");
            }
        }
    }

    #[test]
    fn projection_is_idempotent_and_orthogonal() {
        let (grid, _, basis) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let pf = basis.project(&f);
        let ppf = basis.project(&pf);
        let d: f64 = pf.iter().zip(&ppf).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(d < 1e-12);
        // Pythagoras
        let mut rem = f.clone();
        basis.project_out(&mut rem);
        let lhs = grid.inner(&pf, &pf) + grid.inner(&rem, &rem);
        let rhs = grid.inner(&f, &f);
        assert!((lhs - rhs).abs() < 1e-10 * rhs);
    }

    #[test]
    fn hydro_split_recovers_mu_half() {
        let (_, m, basis) = setup();
        let f = m.sqrt_on(&basis.grid);
        let (p, b, c, rem) = basis.hydro_split(&f);
        assert!((p - 1.0).abs() < 1e-10, "p = {p}");
        assert!(b.iter().all(|&x| x.abs() < 1e-12));
        assert!(c.abs() < 1e-10);
        assert!(basis.grid.norm(&rem) < 1e-10);
    }

    #[test]
    fn conservative_operator_kills_invariants_exactly() {
        let (grid, m, basis) = setup();
        let op = Arc::new(
            LinearizedOperator::assemble(grid.clone(), &m, 1.0, AssemblyOptions::default()).unwrap(),
        );
        let cop = ConservativeOperator::new(op, Arc::new(basis.clone()));
        for k in 0..5 {
            let r = cop.apply(&basis.raw[k]);
            let rel = grid.norm(&r) / grid.norm(&basis.raw[k]);
            assert!(rel < 1e-13, "invariant {k} residual {rel}");
        }
        // moments of L_c f vanish for random f
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lf = cop.apply(&f);
        assert!(basis.null_norm(&lf) < 1e-13 * grid.norm(&lf).max(1.0));
    }

    #[test]
    fn conservative_multi_matches_single() {
        let (grid, m, basis) = setup();
        let op = Arc::new(
            LinearizedOperator::assemble(grid.clone(), &m, 1.0, AssemblyOptions::default()).unwrap(),
        );
        let cop = ConservativeOperator::new(op, Arc::new(basis));
        let n = grid.len();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cols: Vec<f64> = (0..n * 3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let multi = cop.apply_gain_multi(&cols, 3);
        for c in 0..3 {
            let col: Vec<f64> = (0..n).map(|i| cols[i * 3 + c]).collect();
            let single = cop.apply_gain(&col);
            for i in 0..n {
                assert!((multi[i * 3 + c] - single[i]).abs() < 1e-11);
            }
        }
    }
}
