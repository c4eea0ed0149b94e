use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[cfg(not(feature = "std"))]
use num_traits::Float;

use super::foliate::{foliate, FoliationLayer, FoliationSpec};
use super::{check_positive, GeneratorError};
use crate::cost::{triangulation_to_cost, Color, CostGraph, Embedding, Face, Triangulation};
use crate::math::Vec3;

/// Boundary treatment of a generated patch. For trivariate structures
/// `Toroidal` wraps the two in-plane directions only.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Topology {
    Open,
    Toroidal,
}

fn basis(edge: f64) -> (Vec3, Vec3) {
    (
        Vec3::new(edge, 0.0, 0.0),
        Vec3::new(0.5 * edge, 0.5 * 3f64.sqrt() * edge, 0.0),
    )
}

/// The `rows × cols` parallelogram of the 3-direction triangular grid with
/// grid edge `edge`.
///
/// Each cell contributes its up face then its down face, row-major. Edge
/// slots are numbered in order of first appearance, which makes them (and so
/// the joints of the medial Kagome) row-major as well. In the toroidal case
/// both directions wrap and the positions carry the period.
pub fn triangular_grid(
    rows: usize,
    cols: usize,
    edge: f64,
    topology: Topology,
) -> Result<Triangulation, GeneratorError> {
    grid_with_midpoints(rows, cols, edge, topology).map(|(t, _)| t)
}

/// The grid together with the unwrapped midpoint of every edge slot. On small
/// tori an edge can be exactly half a period long, so its midpoint cannot be
/// recovered from the wrapped endpoint positions.
fn grid_with_midpoints(
    rows: usize,
    cols: usize,
    edge: f64,
    topology: Topology,
) -> Result<(Triangulation, Vec<Vec3>), GeneratorError> {
    if rows == 0 || cols == 0 {
        return Err(GeneratorError::EmptyGrid { rows, cols });
    }
    if topology == Topology::Toroidal && (rows < 2 || cols < 2) {
        return Err(GeneratorError::ToroidalTooSmall { rows, cols });
    }
    check_positive("edge length", edge)?;
    let (a1, a2) = basis(edge);
    let torus = topology == Topology::Toroidal;
    let (nx, ny) = if torus { (cols, rows) } else { (cols + 1, rows + 1) };
    let vid = |i: usize, j: usize| {
        if torus {
            (j % rows) * cols + (i % cols)
        } else {
            j * nx + i
        }
    };
    let mut slots: BTreeMap<(usize, usize, u8), usize> = BTreeMap::new();
    let mut edges = Vec::new();
    let mut midpoints = Vec::new();
    // direction 0: +a1, 1: +a2, 2: a2 - a1 (from (i, j) to (i - 1, j + 1))
    let mut slot = |i: usize, j: usize, dir: u8| -> usize {
        let key = if torus {
            (i % cols, j % rows, dir)
        } else {
            (i, j, dir)
        };
        *slots.entry(key).or_insert_with(|| {
            let (u, v, step) = match dir {
                0 => (vid(i, j), vid(i + 1, j), a1),
                1 => (vid(i, j), vid(i, j + 1), a2),
                _ => (vid(i, j), vid(i - 1, j + 1), a2 - a1),
            };
            edges.push([u.min(v), u.max(v)]);
            midpoints.push(a1 * i as f64 + a2 * j as f64 + step * 0.5);
            edges.len() - 1
        })
    };
    let mut faces = Vec::with_capacity(2 * rows * cols);
    for j in 0..rows {
        for i in 0..cols {
            let (p, q, r, s) = (vid(i, j), vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1));
            let up = Face {
                vertices: [p, q, r],
                edges: [slot(i, j, 0), slot(i + 1, j, 2), slot(i, j, 1)],
            };
            let down = Face {
                vertices: [q, s, r],
                edges: [slot(i + 1, j, 1), slot(i, j + 1, 0), slot(i + 1, j, 2)],
            };
            faces.push(up);
            faces.push(down);
        }
    }
    let positions = (0..ny)
        .flat_map(|j| (0..nx).map(move |i| (i, j)))
        .map(|(i, j)| a1 * i as f64 + a2 * j as f64)
        .collect();
    let t = Triangulation {
        vertex_count: nx * ny,
        edges,
        faces,
        positions: Some(positions),
        period: torus.then(|| [a1 * cols as f64, a2 * rows as f64]),
    };
    Ok((t, midpoints))
}

/// Bivariate Kagome CoST: the medial structure of [`triangular_grid`] with
/// grid edge `edge_length`, so every bar has length `edge_length / 2`.
///
/// Witness triangle `2k` is the medial of grid up-face `k` and `2k + 1` of the
/// matching down face; they are colored blue and green respectively.
pub fn kagome_2d(
    rows: usize,
    cols: usize,
    edge_length: f64,
    topology: Topology,
) -> Result<(CostGraph, Embedding), GeneratorError> {
    let (t, midpoints) = grid_with_midpoints(rows, cols, edge_length, topology)?;
    let (mut g, e) = triangulation_to_cost(&t).expect("grid faces are consistent");
    let mut e = e.expect("grid has positions");
    e.positions = midpoints;
    g.coloring = Some(
        (0..g.witness.len())
            .map(|k| if k % 2 == 0 { Color::Blue } else { Color::Green })
            .collect(),
    );
    Ok((g, e))
}

/// Trivariate Kagome CoST: `layers` shifted copies of a bivariate Kagome,
/// foliated so that every tetrahedron is regular with edge `edge_length / 2`.
///
/// Layer `j` is translated by `j·(a1 + a2)/3` (grid basis `a1`, `a2`), which
/// puts the down-pointing triangles of each layer directly above the
/// up-pointing ones below it (pyrochlore stacking). Kagome planes are
/// `2h` apart with `h = (edge_length/2)·√(2/3)`, the regular tetrahedron height.
pub fn kagome_3d(
    rows: usize,
    cols: usize,
    layers: usize,
    edge_length: f64,
    topology: Topology,
) -> Result<(CostGraph, Embedding), GeneratorError> {
    if layers < 2 {
        return Err(GeneratorError::TooFewLayers(layers));
    }
    let (g, e) = kagome_2d(rows, cols, edge_length, topology)?;
    let (a1, a2) = basis(edge_length);
    let step = (a1 + a2) / 3.0;
    let mut stack = Vec::with_capacity(layers);
    let mut shifts = Vec::with_capacity(layers);
    for j in 0..layers {
        // odd witness indices are the up-pointing (lower-role) triangles
        let lower_color = if j % 2 == 0 { Color::Blue } else { Color::Green };
        let coloring = (0..g.witness.len())
            .map(|k| {
                if k % 2 == 1 {
                    lower_color
                } else {
                    lower_color.flipped()
                }
            })
            .collect();
        let mut layer_graph = g.clone();
        layer_graph.coloring = Some(coloring);
        stack.push(FoliationLayer {
            graph: layer_graph,
            embedding: e.clone(),
        });
        let s = step * j as f64;
        shifts.push([s.x, s.y]);
    }
    let spec = FoliationSpec {
        half_spacing: 0.5 * edge_length * (2.0f64 / 3.0).sqrt(),
        shifts,
        allow_unmatched: false,
    };
    foliate(&stack, &spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{unit_distance_check, validate_cost, Dim};

    #[test]
    fn one_cell_is_a_bowtie() {
        let (g, e) = kagome_2d(1, 1, 1.0, Topology::Open).unwrap();
        assert_eq!((g.vertex_count, g.edge_count(), g.witness.len()), (5, 6, 2));
        assert!(validate_cost(&g).is_valid());
        assert!(unit_distance_check(&g, &e, &[0.5], 1e-12).ok);
    }

    #[test]
    fn small_torus_counts() {
        let (g, e) = kagome_2d(2, 2, 1.0, Topology::Toroidal).unwrap();
        assert_eq!((g.vertex_count, g.edge_count(), g.witness.len()), (12, 24, 8));
        assert!(g.boundary.is_empty());
        assert!((0..12).all(|v| g.degree(v) == 4));
        assert!(validate_cost(&g).is_valid());
        assert!(unit_distance_check(&g, &e, &[0.5], 1e-12).ok);
    }

    #[test]
    fn parameter_errors() {
        assert_eq!(
            kagome_2d(1, 3, 1.0, Topology::Toroidal).unwrap_err(),
            GeneratorError::ToroidalTooSmall { rows: 1, cols: 3 }
        );
        assert!(kagome_2d(0, 3, 1.0, Topology::Open).is_err());
        assert!(kagome_2d(2, 2, -1.0, Topology::Open).is_err());
        assert_eq!(
            kagome_3d(2, 2, 1, 1.0, Topology::Open).unwrap_err(),
            GeneratorError::TooFewLayers(1)
        );
    }

    #[test]
    fn trivariate_torus_is_regular() {
        let (g, e) = kagome_3d(2, 2, 2, 1.0, Topology::Toroidal).unwrap();
        assert_eq!(g.dim, Dim::Three);
        assert!(validate_cost(&g).is_valid(), "{}", validate_cost(&g));
        assert!(unit_distance_check(&g, &e, &[0.5], 1e-12).ok);
    }

    #[test]
    fn open_trivariate_patch_is_valid_and_layered() {
        let (g, e) = kagome_3d(3, 3, 3, 1.0, Topology::Open).unwrap();
        assert!(validate_cost(&g).is_valid(), "{}", validate_cost(&g));
        assert!(unit_distance_check(&g, &e, &[0.5], 1e-12).ok);
        let layers = g.layers.as_ref().unwrap();
        assert_eq!(layers.len(), 5);
        let members = g.memberships();
        for &v in &layers[2] {
            if members[v].len() == 2 {
                assert_eq!(g.degree(v), 6);
            }
        }
        assert!(layers[2].iter().any(|&v| members[v].len() == 2));
    }
}
