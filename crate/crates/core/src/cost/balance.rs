use alloc::vec::Vec;

use super::graph::{CostGraph, Dim, Edge, Embedding};
use super::CostError;
use crate::math::{angle2, Vec3};

/// Per-joint balance: a joint is balanced when the origin lies strictly inside
/// the convex hull of its unit bar directions, so every line (plane in 3D)
/// through the joint has bars on both sides.
///
/// In 2D the test is a maximum angular gap below `π − tol`. In 3D a joint is
/// unbalanced when some unit normal `n` has `n·u ≤ tol` for every bar
/// direction `u`; such a separating normal exists iff one exists among the
/// normals `±(u_i × u_j)` or the directions fail to span space.
pub fn balance_check(g: &CostGraph, e: &Embedding, tol: f64) -> Result<Vec<bool>, CostError> {
    if !e.covers(g) {
        return Err(CostError::MissingEmbedding);
    }
    let adj = g.adjacency();
    let mut out = Vec::with_capacity(g.vertex_count);
    for (v, nbrs) in adj.iter().enumerate() {
        let mut dirs = Vec::with_capacity(nbrs.len());
        for &w in nbrs {
            let d = e.edge_vector(v, w);
            let len = d.norm();
            if len <= f64::EPSILON {
                return Err(CostError::ZeroLengthEdge(v.min(w), v.max(w)));
            }
            dirs.push(d / len);
        }
        out.push(match g.dim {
            Dim::Two => balanced_2d(&dirs, tol),
            Dim::Three => balanced_3d(&dirs, tol),
        });
    }
    Ok(out)
}

fn balanced_2d(dirs: &[Vec3], tol: f64) -> bool {
    if dirs.len() < 3 {
        return false;
    }
    let mut angles: Vec<f64> = dirs.iter().map(angle2).collect();
    angles.sort_by(f64::total_cmp);
    let tau = 2.0 * core::f64::consts::PI;
    let mut max_gap = angles[0] + tau - angles[angles.len() - 1];
    for w in angles.windows(2) {
        max_gap = max_gap.max(w[1] - w[0]);
    }
    max_gap < core::f64::consts::PI - tol
}

fn balanced_3d(dirs: &[Vec3], tol: f64) -> bool {
    if dirs.len() < 4 {
        return false;
    }
    let mut any_pair = false;
    for i in 0..dirs.len() {
        for j in i + 1..dirs.len() {
            let c = dirs[i].cross(&dirs[j]);
            let len = c.norm();
            if len <= 1e-12 {
                continue;
            }
            let n = c / len;
            any_pair = true;
            for s in [1.0, -1.0] {
                let max = dirs
                    .iter()
                    .map(|u| s * n.dot(u))
                    .fold(f64::NEG_INFINITY, f64::max);
                if max <= tol {
                    return false;
                }
            }
        }
    }
    any_pair
}

/// Outcome of [`unit_distance_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitDistanceReport {
    pub ok: bool,
    /// Edge with the largest distance to the nearest allowed length.
    pub worst: Option<(Edge, f64)>,
}

/// True when every edge length is within `tol` of one of `lengths`.
pub fn unit_distance_check(g: &CostGraph, e: &Embedding, lengths: &[f64], tol: f64) -> UnitDistanceReport {
    let mut worst: Option<(Edge, f64)> = None;
    for edge in &g.edges {
        let l = e.distance(edge.u, edge.v);
        let dev = lengths
            .iter()
            .map(|t| (l - t).abs())
            .fold(f64::INFINITY, f64::min);
        if worst.is_none_or(|(_, w)| dev > w) {
            worst = Some((*edge, dev));
        }
    }
    UnitDistanceReport {
        ok: worst.is_none_or(|(_, w)| w <= tol),
        worst,
    }
}
