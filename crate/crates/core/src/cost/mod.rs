//! CoST data model, validation, and the bijections with regular graphs and
//! planar triangulations.

mod balance;
mod coloring;
mod graph;
pub mod planar;
mod regular;
mod triangulation;
mod validate;

pub use balance::{balance_check, unit_distance_check, UnitDistanceReport};
pub use coloring::two_color;
pub use graph::{Color, CostGraph, Dim, Edge, EdgeTag, Embedding, Period};
pub use regular::{cost_to_regular, regular_to_cost, RegularGraph};
pub use triangulation::{
    cost_to_triangulation, strictly_convex, triangulation_to_cost, Face, Triangulation, TriangulationFlip,
};
pub use validate::{validate_cost, ValidationReport, Violation};

/// Errors raised by the structural operations of this module.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CostError {
    #[error("invalid CoST: {0}")]
    Invalid(ValidationReport),
    #[error("expected a {expected}-dimensional structure, got {found}")]
    WrongDimension { expected: Dim, found: Dim },
    #[error("operation needs an embedding covering every vertex")]
    MissingEmbedding,
    #[error("regularity degree {0} is not supported (use 3 or 4)")]
    UnsupportedDegree(usize),
    #[error("self loop at vertex {0}")]
    SelfLoop(usize),
    #[error("parallel edges between {0} and {1}")]
    MultiEdge(usize, usize),
    #[error("vertex {vertex} has degree {degree} including stubs, expected {expected}")]
    DegreeMismatch {
        vertex: usize,
        degree: usize,
        expected: usize,
    },
    #[error("face {face} has {len} vertices; only triangular faces are allowed")]
    NonTriangularFace { face: usize, len: usize },
    #[error("face {face} uses edge ({u}, {v}) which is not in the edge list")]
    MissingFaceEdge { face: usize, u: usize, v: usize },
    #[error("edge {edge} lies in {count} faces, expected 1 or 2")]
    EdgeFaceCount { edge: usize, count: usize },
    #[error("embedding is not planar around vertex {0}")]
    NonPlanar(usize),
    #[error("edge {0} is on the boundary and cannot be flipped")]
    BoundaryEdge(usize),
    #[error("no edge joins {0} and {1}")]
    NoSuchEdge(usize, usize),
    #[error("simplex adjacency has an odd cycle through simplex {0}; not 2-colorable")]
    NotTwoColorable(usize),
    #[error("edge ({0}, {1}) has zero length")]
    ZeroLengthEdge(usize, usize),
}

/// Returns `Err(CostError::Invalid)` when `g` violates any CoST invariant.
pub fn ensure_valid(g: &CostGraph) -> Result<(), CostError> {
    let report = validate_cost(g);
    if report.is_valid() {
        Ok(())
    } else {
        Err(CostError::Invalid(report))
    }
}
