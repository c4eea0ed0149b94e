use alloc::vec;
use alloc::vec::Vec;

use super::{check_dim, EditError, StiffenedStructure};
use crate::cost::{two_color, validate_cost, CostGraph, Dim, Embedding};

/// Boundary vertex `a` of the first structure merged with boundary vertex
/// `b` of the second.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JoinPair {
    pub a: usize,
    pub b: usize,
}

fn degree_two_boundary(g: &CostGraph) -> Vec<usize> {
    g.boundary.iter().copied().filter(|&v| g.degree(v) == 2).collect()
}

/// Joins two bivariate structures by merging paired boundary vertices.
///
/// Stiffening constraints are dropped first. Both structures must have the
/// same number of degree-2 boundary vertices; pairs may cover all of them or
/// only some. Vertices of `a` keep their ids, merged vertices take the id of
/// their `a` partner and sit at the midpoint of the pair, and the remaining
/// vertices of `b` follow in order.
pub fn join(
    a: &StiffenedStructure,
    ea: &Embedding,
    b: &StiffenedStructure,
    eb: &Embedding,
    pairs: &[JoinPair],
) -> Result<(CostGraph, Embedding), EditError> {
    let (ga, gb) = (&a.base, &b.base);
    check_dim(ga.dim, Dim::Two)?;
    check_dim(gb.dim, Dim::Two)?;
    if !ea.covers(ga) || !eb.covers(gb) {
        return Err(EditError::MissingEmbedding);
    }
    let (ba, bb) = (degree_two_boundary(ga), degree_two_boundary(gb));
    if ba.len() != bb.len() {
        return Err(EditError::JoinCountMismatch(ba.len(), bb.len()));
    }
    let na = ga.vertex_count;
    let mut remap = vec![usize::MAX; gb.vertex_count];
    let mut used_a = vec![false; na];
    for p in pairs {
        if !ba.contains(&p.a) {
            return Err(EditError::NotJoinable(p.a));
        }
        if !bb.contains(&p.b) {
            return Err(EditError::NotJoinable(p.b));
        }
        if used_a[p.a] {
            return Err(EditError::RepeatedPair(p.a));
        }
        if remap[p.b] != usize::MAX {
            return Err(EditError::RepeatedPair(p.b));
        }
        used_a[p.a] = true;
        remap[p.b] = p.a;
    }
    let mut positions = ea.positions[..na].to_vec();
    for p in pairs {
        positions[p.a] = (ea.positions[p.a] + eb.positions[p.b]) * 0.5;
    }
    for v in 0..gb.vertex_count {
        if remap[v] == usize::MAX {
            remap[v] = positions.len();
            positions.push(eb.positions[v]);
        }
    }
    let mut witness = ga.witness.clone();
    witness.extend(gb.witness.iter().map(|s| s.iter().map(|&v| remap[v]).collect()));
    let mut g = CostGraph::from_witness(Dim::Two, positions.len(), witness);
    let report = validate_cost(&g);
    if !report.is_valid() {
        return Err(EditError::Invalid(report));
    }
    if ga.coloring.is_some() && gb.coloring.is_some() {
        g.coloring = two_color(&g).ok();
    }
    let e = Embedding {
        dim: Dim::Two,
        positions,
        period: None,
    };
    Ok((g, e))
}
