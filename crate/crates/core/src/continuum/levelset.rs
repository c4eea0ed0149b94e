use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::slice::{cell_segments, link};
use super::{ContinuumError, Polyline, SampleGrid, TriangleMesh};
use crate::cost::Dim;
use crate::math::Vec3;

/// Iso-contour of sampled data: polylines for bivariate grids, a triangle
/// mesh for trivariate ones.
#[derive(Clone, Debug, PartialEq)]
pub enum LevelSet {
    Curves(Vec<Polyline>),
    Surface(TriangleMesh),
}

impl LevelSet {
    pub fn is_empty(&self) -> bool {
        match self {
            LevelSet::Curves(c) => c.is_empty(),
            LevelSet::Surface(m) => m.triangles.is_empty(),
        }
    }
}

/// Extracts the `iso` level of a sample grid, treating the grid as a
/// non-periodic block of cells.
///
/// Bivariate grids use marching squares (saddles decided by the cell
/// average), trivariate grids use marching tetrahedra on the six-tetrahedron
/// split of every cube along its main diagonal. Contour vertices are linear
/// interpolants on grid edges and are shared by every cell using that edge,
/// so curves chain exactly and the surface is watertight away from the
/// domain boundary. Samples equal to `iso` count as above it. Triangles are
/// oriented with their normal pointing from the region above `iso` to the
/// region below.
pub fn level_set(samples: &SampleGrid, iso: f64) -> Result<LevelSet, ContinuumError> {
    if !iso.is_finite() {
        return Err(ContinuumError::NonFinite(0));
    }
    let d = samples.dim.get();
    if samples.shape[..d].iter().any(|&n| n < 2) {
        return Err(ContinuumError::TooFewSamples);
    }
    Ok(match samples.dim {
        Dim::Two => LevelSet::Curves(contour_2d(samples, iso)),
        Dim::Three => LevelSet::Surface(contour_3d(samples, iso)),
    })
}

/// Shared contour vertices keyed by the grid edge they lie on.
struct EdgeVertices<'a> {
    samples: &'a SampleGrid,
    iso: f64,
    ids: BTreeMap<(usize, usize), usize>,
    points: Vec<Vec3>,
}

impl<'a> EdgeVertices<'a> {
    fn new(samples: &'a SampleGrid, iso: f64) -> Self {
        EdgeVertices {
            samples,
            iso,
            ids: BTreeMap::new(),
            points: Vec::new(),
        }
    }

    /// Vertex on the grid edge between flat sample indices `a` and `b`.
    fn on_edge(&mut self, a: usize, b: usize) -> usize {
        let s = self.samples;
        let key = (a.min(b), a.max(b));
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let (a, b) = key;
        let (va, vb) = (s.values[a] - self.iso, s.values[b] - self.iso);
        let t = va / (va - vb);
        let (pa, pb) = (s.position_of(a), s.position_of(b));
        self.points.push(pa + (pb - pa) * t);
        let id = self.points.len() - 1;
        self.ids.insert(key, id);
        id
    }
}

fn contour_2d(s: &SampleGrid, iso: f64) -> Vec<Polyline> {
    let mut verts = EdgeVertices::new(s, iso);
    let mut edges = Vec::new();
    for j in 0..s.shape[1] - 1 {
        for i in 0..s.shape[0] - 1 {
            let c = [
                s.index(i, j, 0),
                s.index(i + 1, j, 0),
                s.index(i + 1, j + 1, 0),
                s.index(i, j + 1, 0),
            ];
            let d = c.map(|x| s.values[x] - iso);
            let centre = d.iter().sum::<f64>() * 0.25;
            for [a, b] in cell_segments(d, centre) {
                let va = verts.on_edge(c[a], c[(a + 1) % 4]);
                let vb = verts.on_edge(c[b], c[(b + 1) % 4]);
                edges.push([va, vb]);
            }
        }
    }
    link(&verts.points, &edges)
}

/// Corner offsets of the six tetrahedra sharing the cube diagonal
/// `000 → 111`, one per axis order.
const KUHN: [[[usize; 3]; 4]; 6] = {
    const O: [usize; 3] = [0, 0, 0];
    const I: [usize; 3] = [1, 1, 1];
    [
        [O, [1, 0, 0], [1, 1, 0], I],
        [O, [1, 0, 0], [1, 0, 1], I],
        [O, [0, 1, 0], [1, 1, 0], I],
        [O, [0, 1, 0], [0, 1, 1], I],
        [O, [0, 0, 1], [1, 0, 1], I],
        [O, [0, 0, 1], [0, 1, 1], I],
    ]
};

fn contour_3d(s: &SampleGrid, iso: f64) -> TriangleMesh {
    let mut verts = EdgeVertices::new(s, iso);
    let mut triangles = Vec::new();
    for k in 0..s.shape[2] - 1 {
        for j in 0..s.shape[1] - 1 {
            for i in 0..s.shape[0] - 1 {
                for tet in &KUHN {
                    let c = tet.map(|o| s.index(i + o[0], j + o[1], k + o[2]));
                    tetrahedron(s, &c, iso, &mut verts, &mut triangles);
                }
            }
        }
    }
    TriangleMesh {
        vertices: verts.points,
        triangles,
    }
}

fn tetrahedron(
    s: &SampleGrid,
    c: &[usize; 4],
    iso: f64,
    verts: &mut EdgeVertices,
    out: &mut Vec<[usize; 3]>,
) {
    let (above, below): (Vec<usize>, Vec<usize>) = c.iter().partition(|&&x| s.values[x] >= iso);
    // one polygon (triangle or quad) in cyclic order
    let poly: Vec<usize> = match (above.len(), below.len()) {
        (1, 3) | (3, 1) => {
            let (lone, rest) = if above.len() == 1 {
                (above[0], &below)
            } else {
                (below[0], &above)
            };
            rest.iter().map(|&r| verts.on_edge(lone, r)).collect()
        }
        (2, 2) => {
            let (a, b) = (&above, &below);
            [(a[0], b[0]), (a[0], b[1]), (a[1], b[1]), (a[1], b[0])]
                .iter()
                .map(|&(x, y)| verts.on_edge(x, y))
                .collect()
        }
        _ => return,
    };
    // Orientation is decided combinatorially so that degenerate pieces
    // (samples exactly at iso) stay consistent with their neighbours. For a
    // lone corner L the triangle normal points away from L iff
    // det(r0 − L, r1 − L, r2 − L) > 0; the quad faces down iff
    // det(a1 − a0, b0 − a0, b1 − a0) > 0.
    let at = |x: usize| s.position_of(x);
    let det = |o: usize, x: usize, y: usize, z: usize| {
        let o = at(o);
        (at(x) - o).dot(&(at(y) - o).cross(&(at(z) - o)))
    };
    let keep = match (above.len(), below.len()) {
        (1, 3) => det(above[0], below[0], below[1], below[2]) > 0.0,
        (3, 1) => det(below[0], above[0], above[1], above[2]) < 0.0,
        _ => det(above[0], above[1], below[0], below[1]) > 0.0,
    };
    for k in 1..poly.len() - 1 {
        let t = [poly[0], poly[k], poly[k + 1]];
        out.push(if keep { t } else { [t[0], t[2], t[1]] });
    }
}
