use alloc::vec;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use nalgebra::{DMatrix, Matrix3};

use super::{ContinuumError, SampleGrid};
use crate::cost::{CostGraph, Dim, Embedding};
use crate::math::Vec3;

/// Bivariate directions in lattice coordinates; each is used twice.
pub const DIRECTIONS_2D: [[i64; 3]; 3] = [[1, 0, 0], [0, 1, 0], [-1, 1, 0]];
/// Trivariate directions: the three lattice axes and their sum, each used
/// twice.
pub const DIRECTIONS_3D: [[i64; 3]; 4] = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]];

/// Affine lattice `origin + Σ c_i basis[i]`; in 2D the third vector is the
/// unit normal and is never stepped along.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    pub dim: Dim,
    pub origin: Vec3,
    pub basis: [Vec3; 3],
}

impl Lattice {
    /// Triangular lattice of spacing `spacing` in the plane `z = 0`.
    pub fn triangular(spacing: f64) -> Lattice {
        Lattice {
            dim: Dim::Two,
            origin: Vec3::zeros(),
            basis: [
                Vec3::new(spacing, 0.0, 0.0),
                Vec3::new(0.5 * spacing, 0.5 * 3f64.sqrt() * spacing, 0.0),
                Vec3::z(),
            ],
        }
    }

    /// Triangular lattice whose sites are the Kagome nodes (generated with
    /// cell edge `edge_length`) together with the empty hexagon centres.
    pub fn kagome_2d(edge_length: f64) -> Lattice {
        Lattice::triangular(0.5 * edge_length)
    }

    /// Face-centred cubic lattice containing the foliated Kagome nodes: the
    /// Kagome planes, the apex planes between them and the empty sites of
    /// both.
    pub fn kagome_3d(edge_length: f64) -> Lattice {
        let s = 0.5 * edge_length;
        let h = s * (2.0f64 / 3.0).sqrt();
        let r = s / 3f64.sqrt();
        let up = |angle: f64| Vec3::new(r * angle.cos(), r * angle.sin(), h);
        let a = core::f64::consts::PI / 6.0;
        let third = 2.0 * core::f64::consts::PI / 3.0;
        Lattice {
            dim: Dim::Three,
            origin: Vec3::zeros(),
            basis: [up(a), up(a + third), up(a + 2.0 * third)],
        }
    }

    pub fn point(&self, c: [f64; 3]) -> Vec3 {
        self.origin + self.basis[0] * c[0] + self.basis[1] * c[1] + self.basis[2] * c[2]
    }

    /// Lattice coordinates of `p` (the third is the height above the plane
    /// in 2D).
    pub fn coords(&self, p: &Vec3) -> Option<[f64; 3]> {
        let m = Matrix3::from_columns(&self.basis);
        let c = m.try_inverse()? * (p - self.origin);
        Some([c.x, c.y, c.z])
    }
}

/// Box-spline field given by coefficients on a periodic block of lattice
/// sites.
#[derive(Clone, Debug, PartialEq)]
pub struct BoxSplineField {
    pub lattice: Lattice,
    /// Sites per lattice axis; the axes beyond the dimension have size 1.
    pub shape: [usize; 3],
    /// Directions in lattice coordinates, each applied as a doubled
    /// (`[1, 2, 1] / 4`) averaging pass.
    pub directions: Vec<[i64; 3]>,
    /// Coefficients indexed `(k · shape[1] + j) · shape[0] + i`.
    pub coefficients: Vec<f64>,
    pub level: u32,
}

fn check_shape(dim: Dim, shape: [usize; 3]) -> Result<usize, ContinuumError> {
    let d = dim.get();
    if shape
        .iter()
        .enumerate()
        .any(|(a, &n)| if a < d { n == 0 } else { n != 1 })
    {
        return Err(ContinuumError::BadShape { dim, shape });
    }
    Ok(shape.iter().product())
}

/// Builds a box-spline field on `lattice` with the standard direction set of
/// its dimension.
pub fn boxspline_field(
    lattice: Lattice,
    shape: [usize; 3],
    coefficients: Vec<f64>,
    level: u32,
) -> Result<BoxSplineField, ContinuumError> {
    let n = check_shape(lattice.dim, shape)?;
    if coefficients.len() != n {
        return Err(ContinuumError::CoefficientCount {
            given: coefficients.len(),
            expected: n,
        });
    }
    if let Some(i) = coefficients.iter().position(|c| !c.is_finite()) {
        return Err(ContinuumError::NonFinite(i));
    }
    let directions = match lattice.dim {
        Dim::Two => DIRECTIONS_2D.to_vec(),
        Dim::Three => DIRECTIONS_3D.to_vec(),
    };
    Ok(BoxSplineField {
        lattice,
        shape,
        directions,
        coefficients,
        level,
    })
}

fn wrap(i: usize, delta: i64, n: usize) -> usize {
    (i as i64 + delta).rem_euclid(n as i64) as usize
}

impl BoxSplineField {
    /// Replaces the direction set; the directions must span the lattice
    /// dimension and stay inside it.
    pub fn with_directions(mut self, directions: Vec<[i64; 3]>) -> Result<Self, ContinuumError> {
        let d = self.lattice.dim.get();
        let inside = directions.iter().all(|v| v[d..].iter().all(|&x| x == 0));
        let m = DMatrix::from_fn(directions.len(), d, |r, c| directions[r][c] as f64);
        if !inside || directions.is_empty() || m.rank(1e-9) < d {
            return Err(ContinuumError::DegenerateDirections(d));
        }
        self.directions = directions;
        Ok(self)
    }

    /// Total polynomial degree of the pieces: doubled directions minus the
    /// dimension.
    pub fn degree(&self) -> usize {
        2 * self.directions.len() - self.lattice.dim.get()
    }

    /// Coefficients after `level` subdivision steps, as samples on the
    /// refined lattice (spacing `2^-level` of the original). Site `x` of the
    /// coarse lattice stays at fine index `2^level · x`.
    pub fn eval(&self) -> SampleGrid {
        self.eval_at(self.level)
    }

    /// Samples at an explicit subdivision level.
    pub fn eval_at(&self, level: u32) -> SampleGrid {
        let d = self.lattice.dim.get();
        let mut shape = self.shape;
        let mut c = self.coefficients.clone();
        for _ in 0..level {
            let (f, s) = refine_once(&c, shape, d, &self.directions);
            c = f;
            shape = s;
        }
        let scale = 1.0 / (1u64 << level) as f64;
        let mut axes = self.lattice.basis;
        for a in axes.iter_mut().take(d) {
            *a *= scale;
        }
        SampleGrid {
            dim: self.lattice.dim,
            shape,
            origin: self.lattice.origin,
            axes,
            values: c,
        }
    }

    /// Empirical convergence constants `C_L = 4^L · max |s_{L+1}(2x) − s_L(x)|`
    /// for `L = 0 .. levels`.
    pub fn convergence(&self, levels: u32) -> Vec<f64> {
        let mut out = Vec::new();
        let mut coarse = self.eval_at(0);
        for l in 0..levels {
            let fine = self.eval_at(l + 1);
            let mut worst = 0.0f64;
            for k in 0..coarse.shape[2] {
                for j in 0..coarse.shape[1] {
                    for i in 0..coarse.shape[0] {
                        let (fi, fj) = (2 * i, 2 * j);
                        let fk = if d3(&coarse) { 2 * k } else { 0 };
                        worst = worst.max((fine.get(fi, fj, fk) - coarse.get(i, j, k)).abs());
                    }
                }
            }
            out.push(worst * 4f64.powi(l as i32));
            coarse = fine;
        }
        out
    }
}

fn d3(g: &SampleGrid) -> bool {
    g.dim == Dim::Three
}

/// One subdivision step: upsample (scaled by `2^d` so constants survive),
/// then one centred `[1, 2, 1] / 4` pass per direction.
fn refine_once(c: &[f64], shape: [usize; 3], d: usize, dirs: &[[i64; 3]]) -> (Vec<f64>, [usize; 3]) {
    let fine: [usize; 3] = core::array::from_fn(|a| if a < d { 2 * shape[a] } else { 1 });
    let idx = |i: usize, j: usize, k: usize| (k * fine[1] + j) * fine[0] + i;
    let scale = (1u32 << d) as f64;
    let mut f = vec![0.0; fine.iter().product()];
    for k in 0..shape[2] {
        for j in 0..shape[1] {
            for i in 0..shape[0] {
                let fk = if d == 3 { 2 * k } else { 0 };
                f[idx(2 * i, 2 * j, fk)] = c[(k * shape[1] + j) * shape[0] + i] * scale;
            }
        }
    }
    for dir in dirs {
        let mut g = vec![0.0; f.len()];
        for k in 0..fine[2] {
            for j in 0..fine[1] {
                for i in 0..fine[0] {
                    let shifted = |s: i64| {
                        f[idx(
                            wrap(i, s * dir[0], fine[0]),
                            wrap(j, s * dir[1], fine[1]),
                            wrap(k, s * dir[2], fine[2]),
                        )]
                    };
                    g[idx(i, j, k)] = 0.25 * (shifted(-1) + 2.0 * shifted(0) + shifted(1));
                }
            }
        }
        f = g;
    }
    (f, fine)
}

/// Whether lattice site `(i, j, k)` carries a Kagome node (otherwise it is
/// an empty site).
pub fn is_kagome_node(dim: Dim, i: usize, j: usize, k: usize) -> bool {
    match dim {
        Dim::Two => i % 2 == 1 || j % 2 == 1,
        Dim::Three => i % 2 + j % 2 + k % 2 >= 2,
    }
}

/// Periodic Kagome sign pattern: `+1` on nodes, `−1` on empty sites. The
/// period of the pattern is 2, so every active axis must be even.
pub fn kagome_coefficients(dim: Dim, shape: [usize; 3]) -> Result<Vec<f64>, ContinuumError> {
    let n = check_shape(dim, shape)?;
    if shape[..dim.get()].iter().any(|&s| s % 2 == 1) {
        return Err(ContinuumError::OddShape(shape));
    }
    let mut c = Vec::with_capacity(n);
    for k in 0..shape[2] {
        for j in 0..shape[1] {
            for i in 0..shape[0] {
                c.push(if is_kagome_node(dim, i, j, k) { 1.0 } else { -1.0 });
            }
        }
    }
    Ok(c)
}

/// Sign pattern read off a realized structure: `+1` at lattice sites
/// occupied by a vertex (wrapped into the periodic block), `−1` elsewhere.
/// Every vertex must lie within `tol` of a lattice site.
pub fn node_coefficients(
    g: &CostGraph,
    e: &Embedding,
    lattice: &Lattice,
    shape: [usize; 3],
    tol: f64,
) -> Result<Vec<f64>, ContinuumError> {
    if !e.covers(g) {
        return Err(ContinuumError::MissingEmbedding);
    }
    let n = check_shape(lattice.dim, shape)?;
    let mut c = vec![-1.0; n];
    for (v, p) in e.positions.iter().enumerate().take(g.vertex_count) {
        let x = lattice.coords(p).ok_or(ContinuumError::DegenerateDirections(3))?;
        let r = x.map(f64::round);
        let distance = (lattice.point(r) - p).norm();
        if distance > tol {
            return Err(ContinuumError::OffLattice { vertex: v, distance });
        }
        let w: [usize; 3] = core::array::from_fn(|a| wrap(0, r[a] as i64, shape[a]));
        c[(w[2] * shape[1] + w[1]) * shape[0] + w[0]] = 1.0;
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{kagome_2d, kagome_3d, Topology};

    fn field(dim: Dim, shape: [usize; 3], c: Vec<f64>) -> BoxSplineField {
        let lattice = match dim {
            Dim::Two => Lattice::kagome_2d(1.0),
            Dim::Three => Lattice::kagome_3d(1.0),
        };
        boxspline_field(lattice, shape, c, 4).unwrap()
    }

    #[test]
    fn constants_are_reproduced() {
        for (dim, shape) in [(Dim::Two, [4, 6, 1]), (Dim::Three, [2, 2, 4])] {
            let n: usize = shape.iter().product();
            for c in [1.0, -1.0] {
                let s = field(dim, shape, vec![c; n]).eval();
                assert!(s.values.iter().all(|v| (v - c).abs() < 1e-12));
            }
        }
    }

    #[test]
    fn degrees_follow_the_direction_count() {
        assert_eq!(field(Dim::Two, [2, 2, 1], vec![0.0; 4]).degree(), 4);
        assert_eq!(field(Dim::Three, [2, 2, 2], vec![0.0; 8]).degree(), 5);
    }

    #[test]
    fn input_errors() {
        let l = Lattice::kagome_2d(1.0);
        assert_eq!(
            boxspline_field(l.clone(), [2, 2, 2], vec![0.0; 8], 1),
            Err(ContinuumError::BadShape {
                dim: Dim::Two,
                shape: [2, 2, 2]
            })
        );
        assert_eq!(
            boxspline_field(l.clone(), [2, 2, 1], vec![0.0; 3], 1),
            Err(ContinuumError::CoefficientCount {
                given: 3,
                expected: 4
            })
        );
        assert_eq!(
            boxspline_field(l.clone(), [2, 2, 1], vec![0.0, f64::INFINITY, 0.0, 0.0], 1),
            Err(ContinuumError::NonFinite(1))
        );
        let f = boxspline_field(l, [2, 2, 1], vec![0.0; 4], 1).unwrap();
        assert_eq!(
            f.clone().with_directions(vec![[1, 0, 0], [2, 0, 0]]),
            Err(ContinuumError::DegenerateDirections(2))
        );
        assert_eq!(
            f.with_directions(vec![[1, 0, 0], [0, 1, 1]]),
            Err(ContinuumError::DegenerateDirections(2))
        );
        assert_eq!(
            kagome_coefficients(Dim::Two, [3, 2, 1]),
            Err(ContinuumError::OddShape([3, 2, 1]))
        );
    }

    #[test]
    fn bivariate_pattern_matches_generated_nodes() {
        let (g, e) = kagome_2d(3, 3, 1.0, Topology::Open).unwrap();
        let shape = [8, 8, 1];
        let read = node_coefficients(&g, &e, &Lattice::kagome_2d(1.0), shape, 1e-9).unwrap();
        let pattern = kagome_coefficients(Dim::Two, shape).unwrap();
        // every vertex is a node of the pattern
        for (r, p) in read.iter().zip(&pattern) {
            if *r > 0.0 {
                assert_eq!(*p, 1.0);
            }
        }
    }

    #[test]
    fn trivariate_pattern_matches_generated_nodes() {
        let (g, e) = kagome_3d(2, 2, 3, 1.0, Topology::Open).unwrap();
        let shape = [8, 8, 8];
        let read = node_coefficients(&g, &e, &Lattice::kagome_3d(1.0), shape, 1e-9).unwrap();
        let pattern = kagome_coefficients(Dim::Three, shape).unwrap();
        let hits = read.iter().filter(|&&r| r > 0.0).count();
        assert_eq!(hits, g.vertex_count);
        for (r, p) in read.iter().zip(&pattern) {
            if *r > 0.0 {
                assert_eq!(*p, 1.0);
            }
        }
    }

    #[test]
    fn kagome_field_is_symmetric_under_rotation() {
        let shape = [6, 6, 1];
        let c = kagome_coefficients(Dim::Two, shape).unwrap();
        let s = field(Dim::Two, shape, c).eval();
        assert!(s.values.iter().any(|&v| v > 0.0) && s.values.iter().any(|&v| v < 0.0));
        let n = s.shape[0] as i64;
        // 120° about the origin maps site (i, j) to (−i − j, i)
        for j in 0..s.shape[1] {
            for i in 0..s.shape[0] {
                let ri = (-(i as i64) - j as i64).rem_euclid(n) as usize;
                assert!((s.get(ri, i, 0) - s.get(i, j, 0)).abs() < 1e-12);
            }
        }
        let shape = [4, 4, 4];
        let c = kagome_coefficients(Dim::Three, shape).unwrap();
        let f = boxspline_field(Lattice::kagome_3d(1.0), shape, c, 2).unwrap();
        let s = f.eval();
        // the stacking axis permutes the three up-vectors cyclically
        for k in 0..s.shape[2] {
            for j in 0..s.shape[1] {
                for i in 0..s.shape[0] {
                    assert!((s.get(k, i, j) - s.get(i, j, k)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn lattice_rotation_is_a_symmetry_of_the_geometry() {
        let l = Lattice::kagome_2d(1.0);
        let rot = |p: Vec3| {
            let (c, s) = (
                (2.0 * core::f64::consts::PI / 3.0).cos(),
                (2.0 * core::f64::consts::PI / 3.0).sin(),
            );
            Vec3::new(c * p.x - s * p.y, s * p.x + c * p.y, p.z)
        };
        for (i, j) in [(1.0, 0.0), (0.0, 1.0), (2.0, 3.0)] {
            let p = rot(l.point([i, j, 0.0]));
            assert!((p - l.point([-i - j, i, 0.0])).norm() < 1e-12);
        }
        let l = Lattice::kagome_3d(1.0);
        for b in &l.basis {
            assert!((b.norm() - 0.5).abs() < 1e-12);
        }
        assert!((l.basis[0] - l.basis[1]).norm() - 0.5 < 1e-12);
    }

    #[test]
    fn subdivision_converges() {
        let shape = [6, 6, 1];
        let c = kagome_coefficients(Dim::Two, shape).unwrap();
        let consts = field(Dim::Two, shape, c).convergence(5);
        for w in consts.windows(2).skip(1) {
            assert!(w[1] <= w[0] * (1.0 + 1e-9), "{consts:?}");
        }
    }

    proptest::proptest! {
        #[test]
        fn eval_is_linear(
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
            c1 in proptest::collection::vec(-1.0f64..1.0, 16),
            c2 in proptest::collection::vec(-1.0f64..1.0, 16),
        ) {
            let l = Lattice::kagome_2d(1.0);
            let shape = [4, 4, 1];
            let mix: Vec<f64> = c1.iter().zip(&c2).map(|(x, y)| a * x + b * y).collect();
            let f = |c: Vec<f64>| boxspline_field(l.clone(), shape, c, 3).unwrap().eval().values;
            let (s1, s2, s) = (f(c1), f(c2), f(mix));
            for k in 0..s.len() {
                proptest::prop_assert!((s[k] - (a * s1[k] + b * s2[k])).abs() < 1e-12);
            }
        }
    }
}
