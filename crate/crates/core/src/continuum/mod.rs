//! Continuous representations of a realized structure: bi-quadratic beam
//! surfaces with exact enclosed volume, planar slices of those surfaces,
//! box-spline fields on the Kagome lattices, and level sets of sampled
//! fields.

mod beam;
mod boxspline;
mod levelset;
mod patch;
mod slice;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

pub use beam::{beam_surface, PATCHES_PER_EDGE};
pub use boxspline::{
    boxspline_field, is_kagome_node, kagome_coefficients, node_coefficients, BoxSplineField, Lattice,
    DIRECTIONS_2D, DIRECTIONS_3D,
};
pub use levelset::{level_set, LevelSet};
pub use patch::{
    beam_volume, bilinear_patch, box_patches, square_tube, Net, Patch, PatchSet, SharedCurve, CURVE_TOL,
};
pub use slice::{slice_plane, SLICE_TOL};

use crate::cost::Dim;
use crate::math::{quantize3, Vec3};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ContinuumError {
    #[error("operation needs an embedding covering every vertex")]
    MissingEmbedding,
    #[error("expected {expected} thickness values, got {given}")]
    ThicknessCount { given: usize, expected: usize },
    #[error("thickness of edge {edge} must be finite and non-negative (got {value})")]
    BadThickness { edge: usize, value: f64 },
    #[error("thickness {value} of edge {edge} is not below half the shortest incident edge ({limit})")]
    TooThick { edge: usize, value: f64, limit: f64 },
    #[error("edge {0} has coincident endpoints")]
    ZeroLengthEdge(usize),
    #[error("patch set is open: {0} boundary curves are unmatched")]
    Open(usize),
    #[error("plane normal must be non-zero and finite")]
    ZeroNormal,
    #[error("plane is tangent to patch {0}")]
    TangentPlane(usize),
    #[error("tolerance must be positive (got {0})")]
    BadTolerance(f64),
    #[error("directions do not span {0} dimensions")]
    DegenerateDirections(usize),
    #[error("grid shape {shape:?} does not fit a {dim}-dimensional lattice")]
    BadShape { dim: Dim, shape: [usize; 3] },
    #[error("expected {expected} values, got {given}")]
    CoefficientCount { given: usize, expected: usize },
    #[error("value {0} is not finite")]
    NonFinite(usize),
    #[error("the periodic Kagome pattern needs even grid sizes, got {0:?}")]
    OddShape([usize; 3]),
    #[error("vertex {vertex} is {distance} away from the nearest lattice site")]
    OffLattice { vertex: usize, distance: f64 },
    #[error("level sets need at least two samples along every axis")]
    TooFewSamples,
}

/// A polygonal curve; closed curves do not repeat their first point.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polyline {
    pub points: Vec<Vec3>,
    pub closed: bool,
}

impl Polyline {
    pub fn length(&self) -> f64 {
        let open: f64 = self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        match (self.closed, self.points.first(), self.points.last()) {
            (true, Some(a), Some(b)) => open + (a - b).norm(),
            _ => open,
        }
    }
}

/// Indexed triangle mesh.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriangleMesh {
    /// Sum of signed tetrahedra spanned with the origin; the enclosed volume
    /// for a closed, outward-oriented mesh.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|v| self.vertices[v]);
                a.dot(&b.cross(&c))
            })
            .sum::<f64>()
            / 6.0
    }

    /// Merges vertices that agree after rounding to `step`, keeping the
    /// first of each class, and drops triangles that collapse.
    pub fn welded(&self, step: f64) -> TriangleMesh {
        let mut ids: BTreeMap<[i64; 3], usize> = BTreeMap::new();
        let mut vertices = Vec::new();
        let map: Vec<usize> = self
            .vertices
            .iter()
            .map(|p| {
                *ids.entry(quantize3(p, step)).or_insert_with(|| {
                    vertices.push(*p);
                    vertices.len() - 1
                })
            })
            .collect();
        let triangles = self
            .triangles
            .iter()
            .map(|t| t.map(|v| map[v]))
            .filter(|t| t[0] != t[1] && t[1] != t[2] && t[0] != t[2])
            .collect();
        TriangleMesh { vertices, triangles }
    }

    /// Number of distinct undirected edges.
    pub fn edge_count(&self) -> usize {
        let mut set = alloc::collections::BTreeSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                set.insert((a.min(b), a.max(b)));
            }
        }
        set.len()
    }

    /// `V − E + F` over the vertices used by triangles.
    pub fn euler_characteristic(&self) -> i64 {
        let used: alloc::collections::BTreeSet<usize> = self.triangles.iter().flatten().copied().collect();
        used.len() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    /// Directed edges not cancelled by an opposite edge, as vertex pairs.
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        let mut count: BTreeMap<(usize, usize), i64> = BTreeMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if a < b {
                    *count.entry((a, b)).or_default() += 1;
                } else {
                    *count.entry((b, a)).or_default() -= 1;
                }
            }
        }
        count
            .into_iter()
            .filter(|&(_, c)| c != 0)
            .map(|(e, _)| e)
            .collect()
    }
}

/// Values on a block of grid points `origin + i·axes[0] + j·axes[1] +
/// k·axes[2]`; bivariate grids have a single layer (`shape[2] = 1`).
#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrid {
    pub dim: Dim,
    pub shape: [usize; 3],
    pub origin: Vec3,
    pub axes: [Vec3; 3],
    /// Indexed `(k · shape[1] + j) · shape[0] + i`.
    pub values: Vec<f64>,
}

impl SampleGrid {
    pub fn new(
        dim: Dim,
        shape: [usize; 3],
        origin: Vec3,
        axes: [Vec3; 3],
        values: Vec<f64>,
    ) -> Result<Self, ContinuumError> {
        if dim == Dim::Two && shape[2] != 1 || shape.contains(&0) {
            return Err(ContinuumError::BadShape { dim, shape });
        }
        let n: usize = shape.iter().product();
        if values.len() != n {
            return Err(ContinuumError::CoefficientCount {
                given: values.len(),
                expected: n,
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(ContinuumError::NonFinite(i));
        }
        Ok(SampleGrid {
            dim,
            shape,
            origin,
            axes,
            values,
        })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(
        dim: Dim,
        shape: [usize; 3],
        origin: Vec3,
        axes: [Vec3; 3],
        f: impl Fn(Vec3) -> f64,
    ) -> Result<Self, ContinuumError> {
        let mut values = Vec::with_capacity(shape.iter().product());
        for k in 0..shape[2] {
            for j in 0..shape[1] {
                for i in 0..shape[0] {
                    values.push(f(origin
                        + axes[0] * i as f64
                        + axes[1] * j as f64
                        + axes[2] * k as f64));
                }
            }
        }
        SampleGrid::new(dim, shape, origin, axes, values)
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.shape[1] + j) * self.shape[0] + i
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)]
    }

    pub fn position(&self, i: usize, j: usize, k: usize) -> Vec3 {
        self.origin + self.axes[0] * i as f64 + self.axes[1] * j as f64 + self.axes[2] * k as f64
    }

    /// Position of the sample with flat index `n`.
    pub fn position_of(&self, n: usize) -> Vec3 {
        let i = n % self.shape[0];
        let j = (n / self.shape[0]) % self.shape[1];
        let k = n / (self.shape[0] * self.shape[1]);
        self.position(i, j, k)
    }
}
