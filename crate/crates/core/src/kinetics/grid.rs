//! Symmetric tensor-product velocity grid.
//!
//! Uniform midpoint nodes per axis at `+/-(k - 1/2) h`, `h = 2 R / n`, so the
//! node set contains no zero coordinate and is exactly closed under single-axis
//! sign flips, the full inversion `v -> -v`, and coordinate permutations with
//! equal weights on each orbit. Trapezoid (= midpoint here) weights `h^3`
//! against rapidly decaying integrands converge superalgebraically, which the
//! recorded Gaussian-moment error tracks.

use super::{KineticsError, Result};

/// Symmetry class marker for the node set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryTag {
    FullOctahedral,
}

#[derive(Debug, Clone)]
pub struct VelocityGrid {
    /// Nodes per axis (even).
    pub nodes_per_axis: usize,
    /// Half-width of the represented cube per axis; max represented speed
    /// along any axis.
    pub cutoff_radius: f64,
    /// Axis coordinates, ascending, length `nodes_per_axis`.
    pub axis: Vec<f64>,
    /// All `n^3` nodes in lexicographic `(ix, iy, iz)` order.
    pub nodes: Vec<[f64; 3]>,
    /// Quadrature weights (all equal to `h^3`).
    pub weights: Vec<f64>,
    pub symmetry_tag: SymmetryTag,
    /// Relative error of `sum w exp(-|v|^2/2)` against `(2 pi)^{3/2}`.
    pub gaussian_moment_rel_error: f64,
}

impl VelocityGrid {
    /// Build the grid. `nodes_per_axis` must be even and at least 8;
    /// `cutoff_radius` must cover five thermal speeds of the unit gas.
    pub fn build(nodes_per_axis: usize, cutoff_radius: f64) -> Result<Self> {
        if nodes_per_axis % 2 != 0 || nodes_per_axis < 8 {
            return Err(KineticsError::BadNodesPerAxis(nodes_per_axis));
        }
        let need = 5.0;
        if cutoff_radius < need {
            return Err(KineticsError::CutoffTooSmall { need, got: cutoff_radius });
        }
        let n = nodes_per_axis;
        let h = 2.0 * cutoff_radius / n as f64;
        let axis: Vec<f64> = (0..n).map(|k| -cutoff_radius + (k as f64 + 0.5) * h).collect();
        let mut nodes = Vec::with_capacity(n * n * n);
        for &x in &axis {
            for &y in &axis {
                for &z in &axis {
                    nodes.push([x, y, z]);
                }
            }
        }
        let w = h * h * h;
        let weights = vec![w; nodes.len()];
        let mut grid = Self {
            nodes_per_axis,
            cutoff_radius,
            axis,
            nodes,
            weights,
            symmetry_tag: SymmetryTag::FullOctahedral,
            gaussian_moment_rel_error: 0.0,
        };
        let target = (2.0 * std::f64::consts::PI).powf(1.5);
        let got: f64 = grid
            .nodes
            .iter()
            .map(|v| w * (-0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp())
            .sum();
        grid.gaussian_moment_rel_error = ((got - target) / target).abs();
        Ok(grid)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        2.0 * self.cutoff_radius / self.nodes_per_axis as f64
    }

    /// Smallest positive axis coordinate (`h/2`).
    #[inline]
    pub fn min_positive_speed(&self) -> f64 {
        0.5 * self.spacing()
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.nodes_per_axis + iy) * self.nodes_per_axis + iz
    }

    #[inline]
    pub fn decompose_index(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.nodes_per_axis;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    /// Node permutation implementing the sign flip of one axis (0, 1 or 2).
    pub fn flip_axis_map(&self, axis: usize) -> Vec<usize> {
        let n = self.nodes_per_axis;
        (0..self.len())
            .map(|idx| {
                let (ix, iy, iz) = self.decompose_index(idx);
                match axis {
                    0 => self.index(n - 1 - ix, iy, iz),
                    1 => self.index(ix, n - 1 - iy, iz),
                    _ => self.index(ix, iy, n - 1 - iz),
                }
            })
            .collect()
    }

    /// Node permutation for a coordinate permutation `perm` of axes, i.e.
    /// node `v` maps to the node `(v[perm[0]], v[perm[1]], v[perm[2]])`.
    pub fn permute_axes_map(&self, perm: [usize; 3]) -> Vec<usize> {
        (0..self.len())
            .map(|idx| {
                let t = self.decompose_index(idx);
                let t = [t.0, t.1, t.2];
                self.index(t[perm[0]], t[perm[1]], t[perm[2]])
            })
            .collect()
    }

    /// Discrete `L^2(R^3)` inner product.
    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        crate::util::kahan_sum(
            f.iter().zip(g).zip(&self.weights).map(|((&a, &b), &w)| w * a * b),
        )
    }

    pub fn norm(&self, f: &[f64]) -> f64 {
        self.inner(f, f).sqrt()
    }

    /// Integral of `f` against the weights (no density factor).
    pub fn integrate(&self, f: &[f64]) -> f64 {
        crate::util::kahan_sum(f.iter().zip(&self.weights).map(|(&a, &w)| w * a))
    }

    /// First moment `int v_axis f dv` summed over `v -> -v` node pairs, so an
    /// even `f` yields exactly zero.
    pub fn first_moment(&self, f: &[f64], axis: usize) -> f64 {
        let n = self.nodes_per_axis;
        let mut acc = 0.0;
        let mut comp = 0.0;
        for idx in 0..self.len() {
            let (ix, iy, iz) = self.decompose_index(idx);
            // visit each +/- pair once, keyed by the lexicographically
            // smaller member
            let mirror = self.index(n - 1 - ix, n - 1 - iy, n - 1 - iz);
            if mirror <= idx {
                continue;
            }
            let va = self.nodes[idx][axis];
            let term = self.weights[idx] * va * (f[idx] - f[mirror]);
            let y = term - comp;
            let s = acc + y;
            comp = (s - acc) - y;
            acc = s;
        }
        acc
    }
}

/// Conventional cutoff for a grid meant to resolve a gas at temperature `T`:
/// seven thermal speeds, comfortably above the five the builder requires.
pub fn thermal_cutoff(temperature: f64) -> f64 {
    (7.0 * temperature.sqrt()).max(5.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_axis_count() {
        assert!(matches!(VelocityGrid::build(9, 6.0), Err(KineticsError::BadNodesPerAxis(9))));
        assert!(matches!(VelocityGrid::build(6, 6.0), Err(KineticsError::BadNodesPerAxis(6))));
    }

    #[test]
    fn coarse_grid_moment_error_below_1e3() {
        let g = VelocityGrid::build(8, 6.0).unwrap();
        assert_eq!(g.len(), 512);
        assert!(g.gaussian_moment_rel_error < 1e-3, "err {}", g.gaussian_moment_rel_error);
    }

    #[test]
    fn fine_grid_moment_error_below_1e6() {
        let g = VelocityGrid::build(16, 6.0).unwrap();
        assert!(g.gaussian_moment_rel_error < 1e-6, "err {}", g.gaussian_moment_rel_error);
    }

    #[test]
    fn odd_moment_vanishes_exactly_by_symmetry() {
        let g = VelocityGrid::build(8, 6.0).unwrap();
        let mu: Vec<f64> = g
            .nodes
            .iter()
            .map(|v| (-0.5 * (v[0] * v[0] + v[1] * v[1] + v[2] * v[2])).exp())
            .collect();
        for axis in 0..3 {
            assert_eq!(g.first_moment(&mu, axis), 0.0, "axis {axis} moment not exactly zero");
        }
    }

    #[test]
    fn flip_maps_are_involutions_matching_nodes() {
        let g = VelocityGrid::build(8, 6.0).unwrap();
        for axis in 0..3 {
            let m = g.flip_axis_map(axis);
            for i in 0..g.len() {
                assert_eq!(m[m[i]], i);
                let a = g.nodes[i];
                let b = g.nodes[m[i]];
                for c in 0..3 {
                    let expect = if c == axis { -a[c] } else { a[c] };
                    assert_eq!(b[c], expect);
                }
            }
        }
    }
}
