use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{check_dim, EditError};
use crate::cost::planar::trace_faces;
use crate::cost::{ensure_valid, two_color, CostGraph, Dim, Embedding};
use crate::math::Vec3;

/// Which facets are refined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RefineRule {
    /// Witness triangles: corner triangles of each witness triangle.
    R0,
    /// All other facets, the outer face included: corner triangles at every
    /// corner of every non-witness face.
    R1,
}

/// Splits every edge at a new vertex and replaces the witness set by corner
/// triangles.
///
/// The midpoint of edge `k` (in `g.edges` order) gets id `|V| + k`; old ids
/// are kept. New positions are edge midpoints. `R0` needs no embedding; `R1`
/// needs one to find the faces. A present coloring is recomputed.
pub fn refine(
    g: &CostGraph,
    e: Option<&Embedding>,
    rule: RefineRule,
) -> Result<(CostGraph, Option<Embedding>), EditError> {
    check_dim(g.dim, Dim::Two)?;
    if g.has_non_witness_edges() {
        return Err(EditError::HasStiffening);
    }
    ensure_valid(g)?;
    if let Some(e) = e {
        if !e.covers(g) {
            return Err(EditError::MissingEmbedding);
        }
    }
    let n = g.vertex_count;
    let mid: BTreeMap<(usize, usize), usize> = g
        .edges
        .iter()
        .enumerate()
        .map(|(k, ed)| (ed.key(), n + k))
        .collect();
    let m = |a: usize, b: usize| mid[&(a.min(b), a.max(b))];

    let witness: Vec<Vec<usize>> = match rule {
        RefineRule::R0 => g
            .witness
            .iter()
            .flat_map(|s| {
                let [x, y, z] = [s[0], s[1], s[2]];
                [
                    vec![x, m(x, y), m(x, z)],
                    vec![y, m(x, y), m(y, z)],
                    vec![z, m(x, z), m(y, z)],
                ]
            })
            .collect(),
        RefineRule::R1 => {
            let e = e.ok_or(EditError::MissingEmbedding)?;
            let mut remaining: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
            for s in &g.witness {
                *remaining.entry(s.clone()).or_insert(0) += 1;
            }
            let mut out = Vec::new();
            for face in trace_faces(&g.adjacency(), e) {
                let k = face.vertices.len();
                if k == 3 && face.area > 0.0 {
                    let mut key = face.vertices.clone();
                    key.sort_unstable();
                    if let Some(c) = remaining.get_mut(&key).filter(|c| **c > 0) {
                        *c -= 1;
                        continue;
                    }
                }
                for i in 0..k {
                    let v = face.vertices[i];
                    let prev = face.vertices[(i + k - 1) % k];
                    let next = face.vertices[(i + 1) % k];
                    out.push(vec![v, m(v, prev), m(v, next)]);
                }
            }
            out
        }
    };
    let mut refined = CostGraph::from_witness(Dim::Two, n + g.edge_count(), witness);
    if g.coloring.is_some() {
        refined.coloring = two_color(&refined).ok();
    }
    ensure_valid(&refined)?;
    let emb = e.map(|e| with_midpoints(g, e));
    Ok((refined, emb))
}

fn with_midpoints(g: &CostGraph, e: &Embedding) -> Embedding {
    let mut positions = e.positions[..g.vertex_count].to_vec();
    positions.extend(g.edges.iter().map(|ed| e.midpoint(ed.u, ed.v)));
    Embedding {
        dim: e.dim,
        positions,
        period: e.period,
    }
}

/// Trivariate refinement: every edge split at its midpoint and each witness
/// tetrahedron replaced by its four corner tetrahedra.
///
/// Ids follow [`refine`]. Layers are rebuilt combinatorially: old layer `k`
/// becomes layer `2k`, and a midpoint between layers `k` and `k'` goes to
/// layer `k + k'`, so a new layer appears between each pair of old ones.
/// With `rebalance_iters > 0` the new vertices are then moved towards the
/// centroids of their neighbors by [`rebalance`].
pub fn refine_3d(
    g: &CostGraph,
    e: &Embedding,
    rebalance_iters: usize,
) -> Result<(CostGraph, Embedding), EditError> {
    check_dim(g.dim, Dim::Three)?;
    if g.has_non_witness_edges() {
        return Err(EditError::HasStiffening);
    }
    ensure_valid(g)?;
    if !e.covers(g) {
        return Err(EditError::MissingEmbedding);
    }
    let n = g.vertex_count;
    let mid: BTreeMap<(usize, usize), usize> = g
        .edges
        .iter()
        .enumerate()
        .map(|(k, ed)| (ed.key(), n + k))
        .collect();
    let m = |a: usize, b: usize| mid[&(a.min(b), a.max(b))];
    let witness: Vec<Vec<usize>> = g
        .witness
        .iter()
        .flat_map(|s| {
            (0..4).map(move |i| {
                let c = s[i];
                let mut t = vec![c];
                t.extend(s.iter().filter(|&&o| o != c).map(|&o| m(c, o)));
                t
            })
        })
        .collect();
    let mut refined = CostGraph::from_witness(Dim::Three, n + g.edge_count(), witness);
    if let Some(layers) = &g.layers {
        let mut layer_of = vec![usize::MAX; n];
        for (k, block) in layers.iter().enumerate() {
            for &v in block {
                layer_of[v] = k;
            }
        }
        if layer_of.iter().all(|&k| k != usize::MAX) {
            let mut blocks = vec![Vec::new(); 2 * layers.len()];
            for v in 0..n {
                blocks[2 * layer_of[v]].push(v);
            }
            for ed in &g.edges {
                blocks[layer_of[ed.u] + layer_of[ed.v]].push(mid[&ed.key()]);
            }
            blocks.retain(|b| !b.is_empty());
            for b in &mut blocks {
                b.sort_unstable();
            }
            refined.layers = Some(blocks);
        }
    }
    if g.coloring.is_some() {
        refined.coloring = two_color(&refined).ok();
    }
    ensure_valid(&refined)?;
    let mut emb = with_midpoints(g, e);
    if rebalance_iters > 0 {
        let free: Vec<usize> = (n..refined.vertex_count).collect();
        emb = rebalance(&refined, &emb, &free, rebalance_iters, 0.0)?.embedding;
    }
    Ok((refined, emb))
}

/// Outcome of [`rebalance`].
#[derive(Clone, Debug, PartialEq)]
pub struct RebalanceReport {
    pub embedding: Embedding,
    /// Sweeps performed.
    pub iterations: usize,
    /// Largest move in the last sweep.
    pub max_displacement: f64,
    pub converged: bool,
}

/// Jacobi centroid iteration: each sweep moves every free vertex to the
/// centroid of its neighbors (all edges, positions from the previous sweep).
/// Stops once the largest move of a sweep is below `tol` or after
/// `max_iters` sweeps.
pub fn rebalance(
    g: &CostGraph,
    e: &Embedding,
    free: &[usize],
    max_iters: usize,
    tol: f64,
) -> Result<RebalanceReport, EditError> {
    if !e.covers(g) {
        return Err(EditError::MissingEmbedding);
    }
    let adj = g.adjacency();
    for &v in free {
        if v >= g.vertex_count {
            return Err(EditError::VertexOutOfRange(v));
        }
        if adj[v].len() < 2 {
            return Err(EditError::FewNeighbors(v));
        }
    }
    let mut cur = e.clone();
    let mut iterations = 0;
    let mut max_displacement = 0.0;
    let mut converged = free.is_empty();
    while !converged && iterations < max_iters {
        let updates: Vec<Vec3> = free
            .iter()
            .map(|&v| {
                let sum = adj[v]
                    .iter()
                    .fold(Vec3::zeros(), |acc, &w| acc + cur.edge_vector(v, w));
                cur.positions[v] + sum / adj[v].len() as f64
            })
            .collect();
        max_displacement = 0.0f64;
        for (&v, p) in free.iter().zip(updates) {
            max_displacement = max_displacement.max((p - cur.positions[v]).norm());
            cur.positions[v] = p;
        }
        iterations += 1;
        converged = max_displacement < tol;
    }
    Ok(RebalanceReport {
        embedding: cur,
        iterations,
        max_displacement,
        converged,
    })
}
