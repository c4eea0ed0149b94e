//! Combinatorial and numerical rigidity: (k,l) pebble games, rigidity and
//! stiffness matrices with their null spaces, weighted Laplacians, effective
//! resistance, bar sizing and mass measures.

mod laplacian;
mod mass;
mod matrix;
mod pebble;
mod rowspace;

pub use laplacian::{bar_sizing, effective_resistance, laplacian};
pub use mass::{mass_measure, MassMode};
pub use matrix::{
    bar_rows, constraint_matrix, matrix_rank, numeric_rank, rigidity_matrix, stiffness_matrix, Constraint,
    RigidityClass, RigidityReport, TrivialMotions, DEFAULT_RANK_TOL,
};
pub use pebble::{body_multigraph, cost_pebble_game, pebble_game, PebbleGame, SparsityReport};
pub use rowspace::RowSpace;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum RigidityError {
    #[error("pebble game parameters need 0 <= l < 2k (got k = {k}, l = {l})")]
    PebbleParams { k: usize, l: usize },
    #[error("self loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} is out of range for {count} vertices")]
    VertexOutOfRange { vertex: usize, count: usize },
    #[error("bar ({0}, {1}) joins coincident points")]
    CoincidentEndpoints(usize, usize),
    #[error("embedding does not cover every vertex")]
    MissingEmbedding,
    #[error("{what} {index} must be positive (got {value})")]
    NonPositive {
        what: &'static str,
        index: usize,
        value: f64,
    },
    #[error("{given} values given for {expected} edges")]
    WeightCount { given: usize, expected: usize },
    #[error("vertices {0} and {1} lie in different components")]
    DifferentComponents(usize, usize),
    #[error("target stress must be nonzero")]
    ZeroTargetStress,
    #[error("slider normal at vertex {0} is zero")]
    ZeroSliderNormal(usize),
}
