//! Rotation systems and face tracing for embedded bivariate graphs.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::graph::{CostGraph, Embedding};
use super::CostError;
use crate::math::{angle2, cross2, Vec3};

/// Neighbors of each vertex in counter-clockwise order of their edge
/// directions, starting from angle 0.
pub fn rotation_system(adj: &[Vec<usize>], e: &Embedding) -> Vec<Vec<usize>> {
    adj.iter()
        .enumerate()
        .map(|(v, nbrs)| {
            let mut keyed: Vec<(f64, usize)> =
                nbrs.iter().map(|&w| (angle2(&e.edge_vector(v, w)), w)).collect();
            keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            keyed.into_iter().map(|(_, w)| w).collect()
        })
        .collect()
}

/// A traced face: its vertex cycle and signed area (positive for
/// counter-clockwise faces; the outer face of an open patch is negative).
#[derive(Clone, Debug, PartialEq)]
pub struct TracedFace {
    pub vertices: Vec<usize>,
    pub area: f64,
}

/// Traces all faces of the embedded graph given by `adj`.
///
/// Each face lies to the left of its directed boundary walk. Faces are
/// returned in order of their first dart, darts ordered by `(u, v)`.
pub fn trace_faces(adj: &[Vec<usize>], e: &Embedding) -> Vec<TracedFace> {
    let rot = rotation_system(adj, e);
    let mut position: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (v, r) in rot.iter().enumerate() {
        for (k, &w) in r.iter().enumerate() {
            position.insert((v, w), k);
        }
    }
    let mut used: BTreeMap<(usize, usize), bool> = position.keys().map(|&k| (k, false)).collect();
    let darts: Vec<(usize, usize)> = position.keys().copied().collect();
    let mut faces = Vec::new();
    for start in darts {
        if used[&start] {
            continue;
        }
        let mut verts = Vec::new();
        let mut area = 0.0;
        let mut cursor = e.positions[start.0];
        let origin = cursor;
        let (mut u, mut v) = start;
        loop {
            used.insert((u, v), true);
            verts.push(u);
            let next = cursor + e.edge_vector(u, v);
            area += cross2(&(cursor - origin), &(next - origin));
            cursor = next;
            // next dart leaves v clockwise-adjacent to the reversed dart
            let r = &rot[v];
            let k = position[&(v, u)];
            let w = r[(k + r.len() - 1) % r.len()];
            u = v;
            v = w;
            if (u, v) == start {
                break;
            }
        }
        faces.push(TracedFace {
            vertices: verts,
            area: 0.5 * area,
        });
    }
    faces
}

/// Boundary joints of an open bivariate CoST in the order they are met along
/// the outer face walk.
///
/// Fails unless there is exactly one outer (negative-area) face and every
/// boundary joint appears on it exactly once.
pub fn boundary_sequence(g: &CostGraph, e: &Embedding) -> Result<Vec<usize>, CostError> {
    if !e.covers(g) {
        return Err(CostError::MissingEmbedding);
    }
    let faces = trace_faces(&g.witness_adjacency(), e);
    let outer: Vec<&TracedFace> = faces.iter().filter(|f| f.area < 0.0).collect();
    let [outer] = outer.as_slice() else {
        let v = g.boundary.iter().next().copied().unwrap_or(0);
        return Err(CostError::NonPlanar(v));
    };
    let mut seq = Vec::new();
    let mut seen = vec![false; g.vertex_count];
    for &v in &outer.vertices {
        if g.boundary.contains(&v) {
            if seen[v] {
                return Err(CostError::NonPlanar(v));
            }
            seen[v] = true;
            seq.push(v);
        }
    }
    if let Some(&missing) = g.boundary.iter().find(|&&v| !seen[v]) {
        return Err(CostError::NonPlanar(missing));
    }
    Ok(seq)
}

/// Shoelace area of a closed polygon given in order.
pub fn polygon_area(points: &[Vec3]) -> f64 {
    let n = points.len();
    (0..n)
        .map(|i| cross2(&points[i], &points[(i + 1) % n]))
        .sum::<f64>()
        * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::Dim;

    fn bowtie() -> (CostGraph, Embedding) {
        let g = CostGraph::from_witness(Dim::Two, 5, vec![vec![0, 1, 2], vec![0, 3, 4]]);
        let h = 3f64.sqrt() / 2.0;
        let e = Embedding::new(
            Dim::Two,
            vec![
                Vec3::new(0.0, 0.0, 0.0),
                Vec3::new(-1.0, 0.0, 0.0),
                Vec3::new(-0.5, h, 0.0),
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(0.5, -h, 0.0),
            ],
        );
        (g, e)
    }

    #[test]
    fn bowtie_has_two_triangles_and_one_outer_face() {
        let (g, e) = bowtie();
        let faces = trace_faces(&g.witness_adjacency(), &e);
        assert_eq!(faces.len(), 3);
        let inner: Vec<_> = faces.iter().filter(|f| f.area > 0.0).collect();
        assert_eq!(inner.len(), 2);
        let total: f64 = faces.iter().map(|f| f.area).sum();
        assert!(total.abs() < 1e-12);
    }

    #[test]
    fn bowtie_boundary_sequence() {
        let (g, e) = bowtie();
        let mut seq = boundary_sequence(&g, &e).unwrap();
        assert_eq!(seq.len(), 4);
        seq.sort_unstable();
        assert_eq!(seq, vec![1, 2, 3, 4]);
    }
}
