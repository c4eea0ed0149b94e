use crate::cost::{CostGraph, Embedding};

use super::RigidityError;

/// What a unit of mass is attached to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MassMode {
    /// Unit mass per joint, shared among the witness simplices holding it.
    Vertex,
    /// Total length of witness-simplex edges.
    Edge,
    /// Total triangle area (bivariate) or tetrahedron surface area
    /// (trivariate) of the witness simplices.
    Face,
    /// Total tetrahedron volume; zero for bivariate structures.
    Volume,
}

/// Mass of the witness simplices of `g` under `mode`.
pub fn mass_measure(g: &CostGraph, e: &Embedding, mode: MassMode) -> Result<f64, RigidityError> {
    if !e.covers(g) {
        return Err(RigidityError::MissingEmbedding);
    }
    let counts = g.simplex_counts();
    let total = g
        .witness
        .iter()
        .map(|s| match mode {
            MassMode::Vertex => s.iter().map(|&v| 1.0 / counts[v] as f64).sum(),
            MassMode::Edge => pairs(s).map(|(a, b)| e.distance(a, b)).sum(),
            MassMode::Face => triples(s).map(|t| triangle_area(e, t)).sum(),
            MassMode::Volume if s.len() == 4 => {
                let a = e.edge_vector(s[0], s[1]);
                let b = e.edge_vector(s[0], s[2]);
                let c = e.edge_vector(s[0], s[3]);
                a.cross(&b).dot(&c).abs() / 6.0
            }
            MassMode::Volume => 0.0,
        })
        .sum();
    Ok(total)
}

fn pairs(s: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..s.len()).flat_map(move |i| (i + 1..s.len()).map(move |j| (s[i], s[j])))
}

fn triples(s: &[usize]) -> impl Iterator<Item = [usize; 3]> + '_ {
    (0..s.len()).flat_map(move |i| {
        (i + 1..s.len()).flat_map(move |j| (j + 1..s.len()).map(move |k| [s[i], s[j], s[k]]))
    })
}

fn triangle_area(e: &Embedding, [a, b, c]: [usize; 3]) -> f64 {
    0.5 * e.edge_vector(a, b).cross(&e.edge_vector(a, c)).norm()
}
