//! Structure-modifying operations: boundary stiffening, refinement, diagonal
//! flips and flip processes, joining, rebalancing and local re-realization.

mod flip;
mod join;
mod realize;
mod refine;
mod stiffen;

use alloc::boxed::Box;

pub use flip::{
    carve_channel, diagonal_flip, diagonal_flip_3d, diagonal_flip_joint, diagonal_flip_local,
    geometric_flip_admissible, random_flips, replay_flips, ChannelDirection, FlipLog, FlipOutcome,
    FlipProcess, FlipRecord, ParseLogError, RandomProcess, FLIP_TOL,
};
pub use join::{join, JoinPair};
pub use realize::{rerealize_local, RealizationReport};
pub use refine::{rebalance, refine, refine_3d, RebalanceReport, RefineRule};
pub use stiffen::{stiffen, stiffen_3d, AnchorChoice, Slider, StiffenedStructure, StiffeningVariant};

use crate::cost::{CostError, Dim, ValidationReport};
use crate::rigidity::RigidityError;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum EditError {
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Rigidity(#[from] RigidityError),
    #[error("result is not a valid CoST: {0}")]
    Invalid(ValidationReport),
    #[error("expected a {expected}-dimensional structure, got {found}")]
    WrongDimension { expected: Dim, found: Dim },
    #[error("operation needs an embedding covering every vertex")]
    MissingEmbedding,
    #[error("structure carries stiffening edges; remove them first")]
    HasStiffening,
    #[error("structure has no boundary")]
    NoBoundary,
    #[error("boundary vertex {vertex} has degree {degree}, expected {expected}")]
    BoundaryDegree {
        vertex: usize,
        degree: usize,
        expected: usize,
    },
    #[error("boundary is not a simple cycle in the embedding")]
    BoundaryNotCycle,
    #[error("boundary edges reached only {reached} of {target} independent constraints")]
    StiffeningIncomplete { reached: usize, target: usize },
    #[error("grounding leaves {nullity} internal degrees of freedom")]
    NotGrounded { nullity: usize },
    #[error("vertex {0} is out of range")]
    VertexOutOfRange(usize),
    #[error("no triangulation edge joins {0} and {1}")]
    NoSuchEdge(usize, usize),
    #[error("several triangulation edges join {0} and {1}")]
    AmbiguousEdge(usize, usize),
    #[error("joint {0} is not on an interior triangulation edge")]
    BoundaryJoint(usize),
    #[error("the quadrilateral around joint {0} is not strictly convex")]
    NotConvex(usize),
    #[error("flipping joint {0} would create a parallel edge")]
    ParallelEdge(usize),
    #[error("flipping joint {0} would repeat a stiffening bar")]
    DoublesBar(usize),
    #[error("log entry {index} does not match the structure")]
    LogMismatch { index: usize },
    #[error("joint {joint} is not in layer {layer}")]
    NotInLayer { joint: usize, layer: usize },
    #[error("structure has no foliation layers")]
    NoLayers,
    #[error("flip breaks the 2-coloring of the tetrahedra")]
    BreaksColoring,
    #[error("channel segment leaves the patch")]
    SegmentExits,
    #[error("channel still crosses {0} edges that cannot be flipped")]
    ChannelBlocked(usize),
    #[error("channel direction {0} is not in 0..12")]
    BadDirection(u8),
    #[error("{what} must be positive (got {value})")]
    NonPositive { what: &'static str, value: f64 },
    #[error("vertex {0} has fewer than two neighbors")]
    FewNeighbors(usize),
    #[error("structures have {0} and {1} degree-2 boundary vertices")]
    JoinCountMismatch(usize, usize),
    #[error("vertex {0} is not a degree-2 boundary vertex")]
    NotJoinable(usize),
    #[error("vertex {0} appears in more than one pair")]
    RepeatedPair(usize),
    #[error("local re-realization diverged (best max length error {})", .0.max_error)]
    Diverged(Box<RealizationReport>),
}

fn check_dim(found: Dim, expected: Dim) -> Result<(), EditError> {
    if found == expected {
        Ok(())
    } else {
        Err(EditError::WrongDimension { expected, found })
    }
}

fn check_positive(what: &'static str, value: f64) -> Result<(), EditError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(EditError::NonPositive { what, value })
    }
}
