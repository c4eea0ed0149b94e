use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::{ContinuumError, TriangleMesh};
use crate::math::{quantize3, Vec3};

/// Control net of a bi-quadratic patch, `net[i][j]` with `i` along the first
/// parameter `s` and `j` along the second parameter `t`.
pub type Net = [[Vec3; 3]; 3];

/// Boundary curves of two patches are identified when their control points
/// agree after rounding to this step.
pub const CURVE_TOL: f64 = 1e-9;

/// Three-point Gauss–Legendre rule on `[0, 1]`; exact up to degree 5.
fn gauss3() -> [(f64, f64); 3] {
    let h = 0.5 * (0.6f64).sqrt();
    [(0.5 - h, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + h, 5.0 / 18.0)]
}

fn bernstein(t: f64) -> [f64; 3] {
    let s = 1.0 - t;
    [s * s, 2.0 * s * t, t * t]
}

fn bernstein_d(t: f64) -> [f64; 3] {
    [-2.0 * (1.0 - t), 2.0 - 4.0 * t, 2.0 * t]
}

fn split_quadratic(a: Vec3, b: Vec3, c: Vec3) -> ([Vec3; 3], [Vec3; 3]) {
    let ab = (a + b) * 0.5;
    let bc = (b + c) * 0.5;
    let m = (ab + bc) * 0.5;
    ([a, ab, m], [m, bc, c])
}

/// A bi-quadratic tensor-product Bézier patch.
#[derive(Clone, Debug, PartialEq)]
pub struct Patch {
    pub net: Net,
}

impl Patch {
    pub fn new(net: Net) -> Self {
        Patch { net }
    }

    fn combine(&self, bs: [f64; 3], bt: [f64; 3]) -> Vec3 {
        let mut p = Vec3::zeros();
        for (i, row) in self.net.iter().enumerate() {
            for (j, q) in row.iter().enumerate() {
                p += q * (bs[i] * bt[j]);
            }
        }
        p
    }

    pub fn eval(&self, s: f64, t: f64) -> Vec3 {
        self.combine(bernstein(s), bernstein(t))
    }

    /// Partial derivatives `(∂/∂s, ∂/∂t)`.
    pub fn partials(&self, s: f64, t: f64) -> (Vec3, Vec3) {
        (
            self.combine(bernstein_d(s), bernstein(t)),
            self.combine(bernstein(s), bernstein_d(t)),
        )
    }

    /// Unnormalized normal `∂s × ∂t`; it points out of a closed, consistently
    /// oriented patch set.
    pub fn normal(&self, s: f64, t: f64) -> Vec3 {
        let (ds, dt) = self.partials(s, t);
        ds.cross(&dt)
    }

    /// The same surface with the opposite orientation (parameters swapped).
    pub fn reversed(&self) -> Patch {
        let n = &self.net;
        Patch::new(core::array::from_fn(|i| core::array::from_fn(|j| n[j][i])))
    }

    pub fn translated(&self, v: &Vec3) -> Patch {
        Patch::new(self.net.map(|row| row.map(|p| p + v)))
    }

    /// Boundary curves as control triples, counter-clockwise in the parameter
    /// square: `t = 0`, `s = 1`, `t = 1` (reversed), `s = 0` (reversed).
    pub fn boundary(&self) -> [[Vec3; 3]; 4] {
        let n = &self.net;
        [
            [n[0][0], n[1][0], n[2][0]],
            [n[2][0], n[2][1], n[2][2]],
            [n[2][2], n[1][2], n[0][2]],
            [n[0][2], n[0][1], n[0][0]],
        ]
    }

    /// Surface area by a 4×4 Gauss rule (approximate; used to flag
    /// degenerate patches).
    pub fn area(&self) -> f64 {
        let h1 = 0.5 * (3.0 / 7.0 - 2.0 / 7.0 * (1.2f64).sqrt()).sqrt();
        let h2 = 0.5 * (3.0 / 7.0 + 2.0 / 7.0 * (1.2f64).sqrt()).sqrt();
        let w1 = (18.0 + 30f64.sqrt()) / 72.0;
        let w2 = (18.0 - 30f64.sqrt()) / 72.0;
        let rule = [(0.5 - h2, w2), (0.5 - h1, w1), (0.5 + h1, w1), (0.5 + h2, w2)];
        let mut a = 0.0;
        for &(s, ws) in &rule {
            for &(t, wt) in &rule {
                a += ws * wt * self.normal(s, t).norm();
            }
        }
        a
    }

    /// `∬ x·(∂s × ∂t) ds dt`, exact: the integrand has degree 5 in each
    /// parameter.
    pub fn flux(&self) -> f64 {
        let rule = gauss3();
        let mut f = 0.0;
        for &(s, ws) in &rule {
            for &(t, wt) in &rule {
                f += ws * wt * self.eval(s, t).dot(&self.normal(s, t));
            }
        }
        f
    }

    /// Splits at `s = t = 1/2`; children ordered `(s low, t low)`,
    /// `(s high, t low)`, `(s low, t high)`, `(s high, t high)`.
    pub fn split(&self) -> [Patch; 4] {
        // split every column in s, then every row of both halves in t
        let mut lo = [[Vec3::zeros(); 3]; 3];
        let mut hi = [[Vec3::zeros(); 3]; 3];
        for j in 0..3 {
            let (a, b) = split_quadratic(self.net[0][j], self.net[1][j], self.net[2][j]);
            for i in 0..3 {
                lo[i][j] = a[i];
                hi[i][j] = b[i];
            }
        }
        let split_t = |n: &Net| {
            let mut l = [[Vec3::zeros(); 3]; 3];
            let mut h = [[Vec3::zeros(); 3]; 3];
            for i in 0..3 {
                let (a, b) = split_quadratic(n[i][0], n[i][1], n[i][2]);
                l[i] = a;
                h[i] = b;
            }
            (Patch::new(l), Patch::new(h))
        };
        let (a, c) = split_t(&lo);
        let (b, d) = split_t(&hi);
        [a, b, c, d]
    }

    /// Largest distance of a control point from the bilinear interpolant of
    /// the four corners; zero exactly for bilinear patches.
    pub fn flatness(&self) -> f64 {
        let n = &self.net;
        let mut worst = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                let (s, t) = (i as f64 / 2.0, j as f64 / 2.0);
                let bl = n[0][0] * ((1.0 - s) * (1.0 - t))
                    + n[2][0] * (s * (1.0 - t))
                    + n[0][2] * ((1.0 - s) * t)
                    + n[2][2] * (s * t);
                worst = worst.max((n[i][j] - bl).norm());
            }
        }
        worst
    }
}

/// Two patch sides carrying the same boundary curve in opposite directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SharedCurve {
    pub a: usize,
    pub side_a: usize,
    pub b: usize,
    pub side_b: usize,
}

/// A set of bi-quadratic patches with its curve adjacency.
#[derive(Clone, Debug, PartialEq)]
pub struct PatchSet {
    pub patches: Vec<Patch>,
    /// Source edge of every patch, `None` for fixtures.
    pub edge_of: Vec<Option<usize>>,
    /// Per-edge thickness used to build the set (empty for fixtures).
    pub thickness: Vec<f64>,
    /// Matched boundary curves.
    pub adjacency: Vec<SharedCurve>,
    /// Non-degenerate boundary curves without a partner, as `(patch, side)`.
    pub open_curves: Vec<(usize, usize)>,
}

type CurveKey = [[i64; 3]; 3];

fn curve_key(c: &[Vec3; 3]) -> CurveKey {
    c.map(|p| quantize3(&p, CURVE_TOL))
}

impl PatchSet {
    pub fn new(patches: Vec<Patch>, edge_of: Vec<Option<usize>>, thickness: Vec<f64>) -> Self {
        let mut waiting: BTreeMap<CurveKey, Vec<(usize, usize)>> = BTreeMap::new();
        let mut adjacency = Vec::new();
        for (pi, p) in patches.iter().enumerate() {
            for (side, c) in p.boundary().iter().enumerate() {
                let key = curve_key(c);
                if key[0] == key[1] && key[1] == key[2] {
                    continue;
                }
                let rev = [key[2], key[1], key[0]];
                match waiting.get_mut(&rev).and_then(|v| v.pop()) {
                    Some((b, side_b)) => adjacency.push(SharedCurve {
                        a: b,
                        side_a: side_b,
                        b: pi,
                        side_b: side,
                    }),
                    None => waiting.entry(key).or_default().push((pi, side)),
                }
            }
        }
        let mut open_curves: Vec<(usize, usize)> = waiting.into_values().flatten().collect();
        open_curves.sort_unstable();
        PatchSet {
            patches,
            edge_of,
            thickness,
            adjacency,
            open_curves,
        }
    }

    /// A fixture set with no source structure.
    pub fn from_patches(patches: Vec<Patch>) -> Self {
        let n = patches.len();
        PatchSet::new(patches, vec![None; n], Vec::new())
    }

    pub fn len(&self) -> usize {
        self.patches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patches.is_empty()
    }

    /// Every non-degenerate boundary curve is shared with another patch.
    pub fn is_closed(&self) -> bool {
        self.open_curves.is_empty()
    }

    /// Patches whose area is at most `tol`.
    pub fn degenerate(&self, tol: f64) -> Vec<usize> {
        (0..self.patches.len())
            .filter(|&i| self.patches[i].area() <= tol)
            .collect()
    }

    pub fn reversed(&self) -> PatchSet {
        PatchSet::new(
            self.patches.iter().map(Patch::reversed).collect(),
            self.edge_of.clone(),
            self.thickness.clone(),
        )
    }

    pub fn translated(&self, v: &Vec3) -> PatchSet {
        PatchSet::new(
            self.patches.iter().map(|p| p.translated(v)).collect(),
            self.edge_of.clone(),
            self.thickness.clone(),
        )
    }

    /// Samples every patch on an `(n + 1) × (n + 1)` parameter grid and
    /// splits each grid cell into two triangles, oriented like the patch.
    pub fn tessellate(&self, n: usize) -> TriangleMesh {
        let n = n.max(1);
        let mut mesh = TriangleMesh::default();
        for p in &self.patches {
            let base = mesh.vertices.len();
            for i in 0..=n {
                for j in 0..=n {
                    mesh.vertices
                        .push(p.eval(i as f64 / n as f64, j as f64 / n as f64));
                }
            }
            let id = |i: usize, j: usize| base + i * (n + 1) + j;
            for i in 0..n {
                for j in 0..n {
                    mesh.triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
                    mesh.triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
                }
            }
        }
        mesh
    }

    /// Plain-text Bézier export: a header line, then per patch a `patch k`
    /// line followed by its nine control points row-major, one `x y z` per
    /// line.
    pub fn to_bezier_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "bezier-patches {} degree 2 2", self.patches.len());
        for (k, p) in self.patches.iter().enumerate() {
            let _ = writeln!(out, "patch {k}");
            for row in &p.net {
                for q in row {
                    let _ = writeln!(out, "{} {} {}", q.x, q.y, q.z);
                }
            }
        }
        out
    }
}

/// Enclosed volume by the divergence theorem, `(1/3) Σ ∬ x·n`.
///
/// The set must be closed. Overlapping closed bodies contribute the sum of
/// their volumes.
pub fn beam_volume(p: &PatchSet) -> Result<f64, ContinuumError> {
    if !p.is_closed() {
        return Err(ContinuumError::Open(p.open_curves.len()));
    }
    Ok(p.patches.iter().map(Patch::flux).sum::<f64>() / 3.0)
}

/// Planar bilinear patch with corners `a (0,0)`, `b (1,0)`, `c (1,1)`,
/// `d (0,1)`; its normal is `(b − a) × (d − a)`.
pub fn bilinear_patch(a: Vec3, b: Vec3, c: Vec3, d: Vec3) -> Patch {
    let at = |s: f64, t: f64| {
        if s == 0.0 && t == 0.0 {
            return a;
        }
        a * ((1.0 - s) * (1.0 - t)) + b * (s * (1.0 - t)) + c * (s * t) + d * ((1.0 - s) * t)
    };
    Patch::new(core::array::from_fn(|i| {
        core::array::from_fn(|j| at(i as f64 / 2.0, j as f64 / 2.0))
    }))
}

/// The six outward faces of the box `[lo, hi]` as flat patches.
pub fn box_patches(lo: Vec3, hi: Vec3) -> PatchSet {
    let v = |x: usize, y: usize, z: usize| {
        Vec3::new(
            if x == 0 { lo.x } else { hi.x },
            if y == 0 { lo.y } else { hi.y },
            if z == 0 { lo.z } else { hi.z },
        )
    };
    let faces = [
        [v(0, 0, 0), v(0, 1, 0), v(1, 1, 0), v(1, 0, 0)],
        [v(0, 0, 1), v(1, 0, 1), v(1, 1, 1), v(0, 1, 1)],
        [v(0, 0, 0), v(0, 0, 1), v(0, 1, 1), v(0, 1, 0)],
        [v(1, 0, 0), v(1, 1, 0), v(1, 1, 1), v(1, 0, 1)],
        [v(0, 0, 0), v(1, 0, 0), v(1, 0, 1), v(0, 0, 1)],
        [v(0, 1, 0), v(0, 1, 1), v(1, 1, 1), v(1, 1, 0)],
    ];
    PatchSet::from_patches(
        faces
            .iter()
            .map(|f| bilinear_patch(f[0], f[1], f[2], f[3]))
            .collect(),
    )
}

/// Straight square prism of side `side` along the z axis from `z = 0` to
/// `z = length`, centred on the axis, with flat caps.
pub fn square_tube(side: f64, length: f64) -> PatchSet {
    let h = 0.5 * side;
    box_patches(Vec3::new(-h, -h, 0.0), Vec3::new(h, h, length))
}
