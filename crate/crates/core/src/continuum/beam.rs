use alloc::vec;
use alloc::vec::Vec;

use super::patch::{Net, Patch, PatchSet};
use super::ContinuumError;
use crate::cost::{CostGraph, Embedding};
use crate::math::Vec3;

/// Patches per edge: start cap, four tube patches per half-beam, end cap.
pub const PATCHES_PER_EDGE: usize = 10;

/// Cross-section sign pattern of the four corners, counter-clockwise about
/// the beam axis.
const CORNERS: [(f64, f64); 4] = [(1.0, 1.0), (-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)];

/// Orthonormal frame `(f1, f2)` with `f1 × f2 = d`.
fn frame(d: &Vec3) -> (Vec3, Vec3) {
    let seed = if d.z.abs() < 0.9 { Vec3::z() } else { Vec3::x() };
    let f1 = (seed - d * d.dot(&seed)).normalize();
    (f1, d.cross(&f1))
}

/// Cross-section control points at centre `c`: corners `C_k` and edge
/// midpoints `M_k` between `C_k` and `C_{k+1}`.
struct Ring {
    corner: [Vec3; 4],
    mid: [Vec3; 4],
}

impl Ring {
    fn new(c: Vec3, f1: &Vec3, f2: &Vec3, t: f64) -> Self {
        let corner = CORNERS.map(|(s, u)| c + (f1 * s + f2 * u) * t);
        let mid = core::array::from_fn(|k| (corner[k] + corner[(k + 1) % 4]) * 0.5);
        Ring { corner, mid }
    }

    /// Quadratic arc `M_k, C_{k+1}, M_{k+1}` of tube patch `k`.
    fn piece(&self, k: usize) -> [Vec3; 3] {
        [self.mid[k], self.corner[(k + 1) % 4], self.mid[(k + 1) % 4]]
    }
}

/// Closed tube of square cross-section around one edge, as ten patches.
fn edge_body(p: Vec3, q: Vec3, t: f64) -> [Patch; PATCHES_PER_EDGE] {
    let d = (q - p).normalize();
    let (f1, f2) = frame(&d);
    let rings: [Ring; 5] = core::array::from_fn(|k| Ring::new(p + (q - p) * (k as f64 / 4.0), &f1, &f2, t));
    let tube = |half: usize, k: usize| {
        let net: Net = core::array::from_fn(|i| core::array::from_fn(|j| rings[2 * half + j].piece(k)[i]));
        Patch::new(net)
    };
    let cap = |r: &Ring, centre: Vec3| {
        let (c, m) = (&r.corner, &r.mid);
        [[m[0], c[1], m[1]], [c[0], centre, c[2]], [m[3], c[3], m[2]]]
    };
    let start = Patch::new(cap(&rings[0], p - d * t));
    let end = Patch::new(cap(&rings[4], q + d * t)).reversed();
    [
        start,
        tube(0, 0),
        tube(0, 1),
        tube(0, 2),
        tube(0, 3),
        tube(1, 0),
        tube(1, 1),
        tube(1, 2),
        tube(1, 3),
        end,
    ]
}

/// Bi-quadratic beam surface around every edge of a realized structure.
///
/// Each edge becomes a closed body: two half-beams of four C¹-joined patches
/// with a square cross-section of half-width `thickness[k]`, closed by one
/// cap patch at each end that bulges `thickness[k]` past the node. Bodies of
/// different edges overlap near shared nodes. The construction depends only
/// on the two endpoint positions and is translation-equivariant.
///
/// Bivariate embeddings are used as-is (they lie in `z = 0`). Every
/// thickness must be finite, non-negative and strictly below half the
/// shortest edge incident to either endpoint; zero gives degenerate patches.
pub fn beam_surface(g: &CostGraph, e: &Embedding, thickness: &[f64]) -> Result<PatchSet, ContinuumError> {
    if !e.covers(g) {
        return Err(ContinuumError::MissingEmbedding);
    }
    if thickness.len() != g.edge_count() {
        return Err(ContinuumError::ThicknessCount {
            given: thickness.len(),
            expected: g.edge_count(),
        });
    }
    let lengths: Vec<f64> = g.edges.iter().map(|ed| e.distance(ed.u, ed.v)).collect();
    let mut shortest = vec![f64::INFINITY; g.vertex_count];
    for (k, ed) in g.edges.iter().enumerate() {
        if !(lengths[k] > 0.0) {
            return Err(ContinuumError::ZeroLengthEdge(k));
        }
        for v in [ed.u, ed.v] {
            shortest[v] = shortest[v].min(lengths[k]);
        }
    }
    let mut patches = Vec::with_capacity(PATCHES_PER_EDGE * g.edge_count());
    let mut edge_of = Vec::with_capacity(patches.capacity());
    for (k, ed) in g.edges.iter().enumerate() {
        let t = thickness[k];
        if !(t >= 0.0 && t.is_finite()) {
            return Err(ContinuumError::BadThickness { edge: k, value: t });
        }
        let limit = 0.5 * shortest[ed.u].min(shortest[ed.v]);
        if t >= limit {
            return Err(ContinuumError::TooThick {
                edge: k,
                value: t,
                limit,
            });
        }
        // periodic structures: draw the edge from u to the nearest image of v
        let p = e.positions[ed.u];
        let q = p + e.edge_vector(ed.u, ed.v);
        patches.extend(edge_body(p, q, t));
        edge_of.extend([Some(k); PATCHES_PER_EDGE]);
    }
    Ok(PatchSet::new(patches, edge_of, thickness.to_vec()))
}
