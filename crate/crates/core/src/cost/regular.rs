use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::graph::{CostGraph, Dim};
use super::{ensure_valid, CostError};

/// A k-regular multigraph-free graph with dangling stubs.
///
/// Each vertex has `degree` incidences in total, counting both edges and
/// stubs. Stubs stand for the boundary joints of an open CoST.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularGraph {
    pub vertex_count: usize,
    pub edges: Vec<(usize, usize)>,
    /// Number of dangling stubs at each vertex.
    pub stubs: Vec<usize>,
    pub degree: usize,
}

impl RegularGraph {
    /// A closed k-regular graph (no stubs).
    pub fn closed(vertex_count: usize, edges: Vec<(usize, usize)>, degree: usize) -> Self {
        RegularGraph {
            vertex_count,
            edges,
            stubs: vec![0; vertex_count],
            degree,
        }
    }

    pub fn stub_count(&self) -> usize {
        self.stubs.iter().sum()
    }

    /// Edge degree of each vertex (stubs excluded).
    pub fn edge_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }
}

/// Medial construction: one CoST joint per regular edge and per stub, and one
/// witness simplex per regular vertex spanning its incidences.
///
/// Joint ids follow the edge list, then the stubs in vertex order; stub joints
/// are the boundary. Degree 3 gives a bivariate CoST, degree 4 a trivariate one.
pub fn regular_to_cost(r: &RegularGraph) -> Result<CostGraph, CostError> {
    let dim = match r.degree {
        3 => Dim::Two,
        4 => Dim::Three,
        k => return Err(CostError::UnsupportedDegree(k)),
    };
    if r.stubs.len() != r.vertex_count {
        return Err(CostError::DegreeMismatch {
            vertex: r.stubs.len().min(r.vertex_count),
            degree: 0,
            expected: r.degree,
        });
    }
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); r.vertex_count];
    let mut seen = BTreeSet::new();
    for (i, &(u, v)) in r.edges.iter().enumerate() {
        if u == v {
            return Err(CostError::SelfLoop(u));
        }
        if u >= r.vertex_count || v >= r.vertex_count {
            return Err(CostError::DegreeMismatch {
                vertex: u.max(v),
                degree: 0,
                expected: r.degree,
            });
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(CostError::MultiEdge(u.min(v), u.max(v)));
        }
        incident[u].push(i);
        incident[v].push(i);
    }
    let mut next = r.edges.len();
    for (v, inc) in incident.iter_mut().enumerate() {
        for _ in 0..r.stubs[v] {
            inc.push(next);
            next += 1;
        }
        if inc.len() != r.degree {
            return Err(CostError::DegreeMismatch {
                vertex: v,
                degree: inc.len(),
                expected: r.degree,
            });
        }
    }
    Ok(CostGraph::from_witness(dim, next, incident))
}

/// Inverse of [`regular_to_cost`]: one vertex per witness simplex, one edge per
/// interior joint (in joint id order), one stub per boundary joint.
pub fn cost_to_regular(g: &CostGraph) -> Result<RegularGraph, CostError> {
    ensure_valid(g)?;
    let members = g.memberships();
    let mut edges = Vec::new();
    let mut stubs = vec![0; g.witness.len()];
    for m in &members {
        match m.as_slice() {
            [s] => stubs[*s] += 1,
            [a, b] => edges.push((*a, *b)),
            _ => unreachable!("validated"),
        }
    }
    Ok(RegularGraph {
        vertex_count: g.witness.len(),
        edges,
        stubs,
        degree: g.dim.simplex_size(),
    })
}
