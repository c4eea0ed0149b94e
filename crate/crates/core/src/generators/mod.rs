//! Seed structures: Kagome CoSTs in the plane and in space, foliated stacking
//! of bivariate layers, and maps of a realization into a physical domain.

mod foliate;
mod kagome;
mod maps;

pub use foliate::{foliate, FoliationLayer, FoliationSpec};
pub use kagome::{kagome_2d, kagome_3d, triangular_grid, Topology};
pub use maps::{apply_map, DomainMap};

use crate::cost::CostError;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum GeneratorError {
    #[error("rows and cols must be at least 1 (got {rows}x{cols})")]
    EmptyGrid { rows: usize, cols: usize },
    #[error("toroidal patches need at least 2 rows and 2 cols (got {rows}x{cols})")]
    ToroidalTooSmall { rows: usize, cols: usize },
    #[error("{name} must be positive and finite (got {value})")]
    NonPositive { name: &'static str, value: f64 },
    #[error("foliation needs at least 2 layers (got {0})")]
    TooFewLayers(usize),
    #[error("layer {0} is not a bivariate CoST with a covering embedding")]
    BadLayer(usize),
    #[error("{0} shift vectors given for {1} layers")]
    ShiftCount(usize, usize),
    #[error("layer {layer} has {blue} blue and {green} green triangles; layer 0 has {blue0} and {green0}")]
    ColorCounts {
        layer: usize,
        blue: usize,
        green: usize,
        blue0: usize,
        green0: usize,
    },
    #[error("gap {gap}: triangle {triangle} of the lower layer has no partner within {tol}")]
    Unmatched { gap: usize, triangle: usize, tol: f64 },
    #[error("gap {gap}: triangle {triangle} of the upper layer matched twice")]
    DuplicateMatch { gap: usize, triangle: usize },
    #[error("layer {layer}: {source}")]
    Layer { layer: usize, source: CostError },
    #[error("vertex {vertex} lies outside the map domain")]
    OutsideDomain { vertex: usize },
    #[error("this map cannot be applied to a periodic embedding")]
    PeriodicMap,
    #[error("map moves vertex {vertex} of a bivariate embedding out of the plane z = 0")]
    LeavesPlane { vertex: usize },
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<(), GeneratorError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(GeneratorError::NonPositive { name, value })
    }
}
